//! Exact linear algebra over the rationals.
//!
//! Small dense routines on `Vec<BigRational>` rows: reduced row echelon
//! form, rank, kernels, solving, inversion, determinants, and primitive
//! integer normalization of rational vectors.  Dimensions in this crate
//! stay in the single digits, so simplicity wins over sparsity.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

pub type Rat = BigRational;
pub type Vector = Vec<Rat>;
pub type Matrix = Vec<Vec<Rat>>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn vec_i64(entries: &[i64]) -> Vector {
    entries.iter().map(|&e| rat(e)).collect()
}

pub fn zeros(n: usize) -> Vector {
    vec![Rat::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = zeros(n);
    v[i] = Rat::one();
    v
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| unit(n, i)).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn add(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rat], c: &Rat) -> Vector {
    a.iter().map(|x| x * c).collect()
}

/// a + c*b
pub fn add_scaled(a: &[Rat], c: &Rat, b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub fn neg(a: &[Rat]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn lex_cmp(a: &[Rat], b: &[Rat]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

pub fn transpose(m: &Matrix) -> Matrix {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_vec(m: &Matrix, v: &[Rat]) -> Vector {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let bt = transpose(b);
    a.iter()
        .map(|row| bt.iter().map(|col| dot(row, col)).collect())
        .collect()
}

/// In-place reduced row echelon form. Returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x /= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                m[i] = sub(&m[i], &scale(&m[r], &factor));
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut copy = m.clone();
    rref(&mut copy).len()
}

/// Basis of the right kernel {x : Mx = 0}.
pub fn kernel_basis(m: &Matrix, cols: usize) -> Vec<Vector> {
    let mut copy = m.clone();
    let pivots = rref(&mut copy);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = zeros(cols);
        v[free] = Rat::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -copy[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// One particular solution of Mx = b, if any.
pub fn solve(m: &Matrix, b: &[Rat]) -> Option<Vector> {
    let rows = m.len();
    if rows == 0 {
        return if b.iter().all(|x| x.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let cols = m[0].len();
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None; // inconsistent
    }
    let mut x = zeros(cols);
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

pub fn invert(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit(n, i));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(m: &Matrix) -> Rat {
    let n = m.len();
    let mut a = m.clone();
    let mut result = Rat::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if pr != c {
            a.swap(c, pr);
            result = -result;
        }
        result *= a[c][c].clone();
        let pivot = a[c][c].clone();
        for i in (c + 1)..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &pivot;
                a[i] = sub(&a[i], &scale(&a[c], &f));
            }
        }
    }
    result
}

/// Scales a nonzero rational vector by a positive rational so the entries
/// become coprime integers.  The direction is preserved.
pub fn primitive(v: &[Rat]) -> Vector {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    if g.is_zero() {
        return zeros(v.len());
    }
    ints.into_iter()
        .map(|i| Rat::from_integer(i / &g))
        .collect()
}

/// Primitive normalization that also fixes the sign of the first nonzero
/// entry, for vectors that only matter up to sign (lineality directions).
pub fn primitive_signed(v: &[Rat]) -> Vector {
    let p = primitive(v);
    match p.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => neg(&p),
        _ => p,
    }
}

/// Canonical basis of the span of the given vectors: reduced row echelon
/// rows, each scaled primitive with positive leading entry.
pub fn canonical_span_basis(vectors: &[Vector]) -> Vec<Vector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let mut m: Matrix = vectors.to_vec();
    let pivots = rref(&mut m);
    m.truncate(pivots.len());
    m.iter().map(|row| primitive_signed(row)).collect()
}

/// Reduces `v` modulo the span of `basis` (assumed in RREF-like shape is
/// not required; full elimination is performed).
pub fn reduce_mod_span(v: &[Rat], basis: &[Vector]) -> Vector {
    let mut work: Matrix = basis.to_vec();
    let pivots = rref(&mut work);
    let mut out = v.to_vec();
    for (row, &pc) in pivots.iter().enumerate() {
        if !out[pc].is_zero() {
            let f = out[pc].clone();
            out = sub(&out, &scale(&work[row], &f));
        }
    }
    out
}

/// Index of the sublattice spanned by the integer rows of `m` inside the
/// saturation of their span: the gcd of all maximal minors.
pub fn sublattice_index(m: &Matrix) -> BigInt {
    let k = m.len();
    if k == 0 {
        return BigInt::one();
    }
    let n = m[0].len();
    assert!(k <= n);
    let mut g = BigInt::zero();
    for cols in combinations(n, k) {
        let minor: Matrix = m
            .iter()
            .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let d = det(&minor);
        debug_assert!(d.is_integer());
        g = g.gcd(d.numer());
    }
    g
}

/// All k-element subsets of {0,..,n-1} in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().ok()?;
        let den: BigInt = q.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Rat::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(num))
    }
}

pub fn vec_to_strings(v: &[Rat]) -> Vec<String> {
    v.iter().map(rat_to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_rank() {
        let mut m = vec![vec_i64(&[1, 2, 3]), vec_i64(&[2, 4, 6]), vec_i64(&[0, 1, 1])];
        let pivots = rref(&mut m);
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(rank(&vec![vec_i64(&[1, 2]), vec_i64(&[2, 4])]), 1);
    }

    #[test]
    fn solve_and_kernel() {
        let m = vec![vec_i64(&[1, 1, 0]), vec_i64(&[0, 1, 1])];
        let x = solve(&m, &vec_i64(&[3, 2])).unwrap();
        assert_eq!(mat_vec(&m, &x), vec_i64(&[3, 2]));
        let k = kernel_basis(&m, 3);
        assert_eq!(k.len(), 1);
        assert!(is_zero_vec(&mat_vec(&m, &k[0])));
        assert!(solve(&vec![vec_i64(&[1, 1]), vec_i64(&[1, 1])], &vec_i64(&[1, 2])).is_none());
    }

    #[test]
    fn invert_roundtrip() {
        let m = vec![vec_i64(&[2, 1]), vec_i64(&[1, 1])];
        let inv = invert(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert!(invert(&vec![vec_i64(&[1, 2]), vec_i64(&[2, 4])]).is_none());
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![ratio(1, 2), ratio(-3, 4)];
        assert_eq!(primitive(&v), vec_i64(&[2, -3]));
        assert_eq!(primitive_signed(&vec_i64(&[0, -2, 4])), vec_i64(&[0, 1, -2]));
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&vec![vec_i64(&[1, 2]), vec_i64(&[3, 4])]), rat(-2));
        let m = vec![vec_i64(&[1, 0, 0]), vec_i64(&[0, 1, 0]), vec_i64(&[-1, -1, -2])];
        assert_eq!(det(&m), rat(-2));
    }

    #[test]
    fn minors_gcd() {
        // rows 2e1, 2e2 span index-4 sublattice of Z^2
        let m = vec![vec_i64(&[2, 0]), vec_i64(&[0, 2])];
        assert_eq!(sublattice_index(&m), BigInt::from(4));
        let w = vec![vec_i64(&[1, 0, 0]), vec_i64(&[0, 1, 0])];
        assert_eq!(sublattice_index(&w), BigInt::from(1));
    }

    #[test]
    fn combinations_enumeration() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rat_to_string(&ratio(5, 3)), "5/3");
        assert_eq!(rat_to_string(&rat(-4)), "-4");
        assert_eq!(rat_from_str("7/2").unwrap(), ratio(7, 2));
        assert_eq!(rat_from_str("-3").unwrap(), rat(-3));
        assert!(rat_from_str("1/0").is_none());
    }
}
