//! Exact rational polyhedral cone kernel.
//!
//! A [`QCone`] is kept in double description: a minimal generator list
//! (extreme rays of the pointed part plus a lineality basis) together with
//! a minimal halfspace description (facet inequalities plus equations
//! cutting out the linear span).  Both sides are canonicalized — rays are
//! primitive integer vectors reduced modulo the lineality space and sorted
//! lexicographically — so cones compare by structural equality.
//!
//! Conversion between the two sides is the double description method:
//! halfspaces are inserted in lexicographic order, splitting the current
//! ray list and combining adjacent pairs across the new hyperplane.
//! Adjacency uses the standard combinatorial test on incidence sets.

use crate::linalg::{self, Rat, Vector};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use serde::Serialize;

const MAX_HALFSPACES: usize = 128;

#[derive(Clone)]
struct DdRay {
    v: Vector,
    zero: u128,
}

/// Generators of `{z : h·z >= 0 for all h}` as (pointed-part rays, lineality basis).
fn dual_description(dim: usize, halfspaces: &[Vector]) -> (Vec<Vector>, Vec<Vector>) {
    let mut hs: Vec<Vector> = halfspaces
        .iter()
        .map(|h| linalg::primitive(h))
        .filter(|h| !linalg::is_zero_vec(h))
        .collect();
    hs.sort_by(|a, b| linalg::lex_cmp(a, b));
    hs.dedup();
    assert!(
        hs.len() <= MAX_HALFSPACES,
        "double description limited to {MAX_HALFSPACES} halfspaces"
    );

    let mut lin: Vec<Vector> = linalg::identity(dim);
    let mut rays: Vec<DdRay> = Vec::new();

    for (k, h) in hs.iter().enumerate() {
        let bit = 1u128 << k;
        let lin_products: Vec<Rat> = lin.iter().map(|b| linalg::dot(h, b)).collect();
        if let Some(pidx) = lin_products.iter().position(|p| !p.is_zero()) {
            // The new halfspace cuts the lineality space: one pivot vector
            // leaves the lineality and becomes a ray.
            let mut b0 = lin.remove(pidx);
            let mut p0 = lin_products[pidx].clone();
            if p0.is_negative() {
                b0 = linalg::neg(&b0);
                p0 = -p0;
            }
            for (i, b) in lin.iter_mut().enumerate() {
                let orig = if i < pidx { i } else { i + 1 };
                let p = &lin_products[orig];
                if !p.is_zero() {
                    let f = -(p / &p0);
                    *b = linalg::add_scaled(b, &f, &b0);
                }
            }
            for r in rays.iter_mut() {
                let p = linalg::dot(h, &r.v);
                if !p.is_zero() {
                    let f = -(&p / &p0);
                    r.v = linalg::primitive(&linalg::add_scaled(&r.v, &f, &b0));
                }
                r.zero |= bit;
            }
            rays.push(DdRay {
                v: linalg::primitive(&b0),
                zero: bit - 1,
            });
            continue;
        }

        // Lineality is orthogonal to h: split the ray list.
        let products: Vec<Rat> = rays.iter().map(|r| linalg::dot(h, &r.v)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| products[i].is_positive()).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| products[i].is_negative()).collect();
        if minus.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                if products[i].is_zero() {
                    r.zero |= bit;
                }
            }
            continue;
        }
        let mut next: Vec<DdRay> = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            if !products[i].is_negative() {
                let mut nr = r.clone();
                if products[i].is_zero() {
                    nr.zero |= bit;
                }
                next.push(nr);
            }
        }
        for &i in &plus {
            for &j in &minus {
                let common = rays[i].zero & rays[j].zero;
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(t, rt)| t == i || t == j || (common & rt.zero) != common);
                if !adjacent {
                    continue;
                }
                // positive combination vanishing on h
                let w = linalg::add(
                    &linalg::scale(&rays[j].v, &products[i]),
                    &linalg::scale(&rays[i].v, &(-products[j].clone())),
                );
                next.push(DdRay {
                    v: linalg::primitive(&w),
                    zero: common | bit,
                });
            }
        }
        rays = next;
    }

    debug_assert!(rays.iter().all(|r| hs
        .iter()
        .all(|h| !linalg::dot(h, &r.v).is_negative())));
    (rays.into_iter().map(|r| r.v).collect(), lin)
}

fn canonical_rays(rays: &[Vector], lineality: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = rays
        .iter()
        .map(|r| linalg::primitive(&linalg::reduce_mod_span(r, lineality)))
        .filter(|r| !linalg::is_zero_vec(r))
        .collect();
    out.sort_by(|a, b| linalg::lex_cmp(a, b));
    out.dedup();
    out
}

/// Rational polyhedral cone with cached generator and facet descriptions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QCone {
    dim: usize,
    generators: Vec<Vector>,
    lineality: Vec<Vector>,
    ineqs: Vec<Vector>,
    eqs: Vec<Vector>,
}

/// Nonnegative-combination witness that a vector lies in a cone.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipCertificate {
    pub generator_coeffs: Vec<String>,
    pub lineality_coeffs: Vec<String>,
}

impl QCone {
    /// Builds the cone generated by the given vectors (nonnegative
    /// combinations).  Generators must be nonzero and share the ambient
    /// dimension.  The result is canonical: duplicate and redundant
    /// generators are dropped, and a lineality space (if present) is split
    /// off explicitly.
    pub fn from_generators(dim: usize, generators: &[Vector]) -> Result<Self> {
        for g in generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
            if linalg::is_zero_vec(g) {
                return Err(Error::ZeroVector);
            }
        }
        let mut gens: Vec<Vector> = generators.iter().map(|g| linalg::primitive(g)).collect();
        gens.sort_by(|a, b| linalg::lex_cmp(a, b));
        gens.dedup();

        // Facets of the cone = generator description of the dual.
        let (ineq_raw, eq_raw) = dual_description(dim, &gens);
        let eqs = linalg::canonical_span_basis(&eq_raw);
        let ineqs = canonical_rays(&ineq_raw, &eqs);

        // Minimal generators = generator description of {x : facets}.
        let mut second: Vec<Vector> = ineqs.clone();
        for e in &eqs {
            second.push(e.clone());
            second.push(linalg::neg(e));
        }
        let (ray_raw, lin_raw) = dual_description(dim, &second);
        let lineality = linalg::canonical_span_basis(&lin_raw);
        let gens = canonical_rays(&ray_raw, &lineality);

        let cone = QCone {
            dim,
            generators: gens,
            lineality,
            ineqs,
            eqs,
        };
        debug_assert!(cone.generators.iter().all(|g| cone.contains(g)));
        Ok(cone)
    }

    /// Builds `{x : f·x >= 0 for f in inequalities, e·x = 0 for e in equations}`.
    pub fn from_halfspaces(dim: usize, inequalities: &[Vector], equations: &[Vector]) -> Result<Self> {
        for h in inequalities.iter().chain(equations) {
            if h.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.len(),
                });
            }
        }
        let mut hs: Vec<Vector> = inequalities.to_vec();
        for e in equations {
            hs.push(e.clone());
            hs.push(linalg::neg(e));
        }
        let hs: Vec<Vector> = hs.into_iter().filter(|h| !linalg::is_zero_vec(h)).collect();
        let (rays, lin) = dual_description(dim, &hs);
        let mut gens = rays;
        for l in lin {
            gens.push(linalg::neg(&l));
            gens.push(l);
        }
        if gens.is_empty() {
            return Self::from_generators(dim, &[]);
        }
        Self::from_generators(dim, &gens)
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_generators(dim, &[]).expect("zero cone")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn lineality(&self) -> &[Vector] {
        &self.lineality
    }

    pub fn facet_inequalities(&self) -> &[Vector] {
        &self.ineqs
    }

    pub fn equations(&self) -> &[Vector] {
        &self.eqs
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty() && self.lineality.is_empty()
    }

    /// Dual cone `{z : x·z >= 0 for all x in C}`.  Both descriptions swap
    /// roles, so this is free given the cached double description.
    pub fn dual(&self) -> QCone {
        QCone {
            dim: self.dim,
            generators: self.ineqs.clone(),
            lineality: self.eqs.clone(),
            ineqs: self.generators.clone(),
            eqs: self.lineality.clone(),
        }
    }

    pub fn contains(&self, z: &[Rat]) -> bool {
        z.len() == self.dim
            && self.ineqs.iter().all(|f| !linalg::dot(f, z).is_negative())
            && self.eqs.iter().all(|e| linalg::dot(e, z).is_zero())
    }

    /// Strict interior relative to the ambient space.  Lower-dimensional
    /// cones have empty interior.
    pub fn contains_in_interior(&self, z: &[Rat]) -> bool {
        z.len() == self.dim
            && self.eqs.is_empty()
            && self.ineqs.iter().all(|f| linalg::dot(f, z).is_positive())
    }

    /// Expresses `z` as a nonnegative combination of the generators plus a
    /// lineality contribution.  Returns `None` when `z` is outside the cone.
    pub fn membership_certificate(&self, z: &[Rat]) -> Option<MembershipCertificate> {
        if z.len() != self.dim {
            return None;
        }
        let mut columns: Vec<Vector> = self.generators.clone();
        for l in &self.lineality {
            columns.push(l.clone());
            columns.push(linalg::neg(l));
        }
        let x = nonneg_combination(self.dim, &columns, z)?;
        let ngen = self.generators.len();
        let gen_coeffs = x[..ngen].to_vec();
        let lin_coeffs: Vec<Rat> = (0..self.lineality.len())
            .map(|i| &x[ngen + 2 * i] - &x[ngen + 2 * i + 1])
            .collect();
        Some(MembershipCertificate {
            generator_coeffs: linalg::vec_to_strings(&gen_coeffs),
            lineality_coeffs: linalg::vec_to_strings(&lin_coeffs),
        })
    }

    /// Certified equality: mutual containment of generator descriptions.
    pub fn equals(&self, other: &QCone) -> bool {
        self.dim == other.dim && self.contains_cone(other) && other.contains_cone(self)
    }

    pub fn contains_cone(&self, other: &QCone) -> bool {
        other.generators.iter().all(|g| self.contains(g))
            && other.lineality.iter().all(|l| {
                self.contains(l) && self.contains(&linalg::neg(l))
            })
    }

    /// A generator of `self` outside `other`, or vice versa; `None` when equal.
    pub fn difference_witness(&self, other: &QCone) -> Option<Vector> {
        for g in other
            .generators
            .iter()
            .chain(other.lineality.iter())
        {
            if !self.contains(g) {
                return Some(g.clone());
            }
        }
        for g in self.generators.iter().chain(self.lineality.iter()) {
            if !other.contains(g) {
                return Some(g.clone());
            }
        }
        None
    }

    /// Minkowski sum, itself closed since both summands are finitely generated.
    pub fn sum(&self, other: &QCone) -> Result<QCone> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut gens: Vec<Vector> = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        for l in self.lineality.iter().chain(other.lineality.iter()) {
            gens.push(l.clone());
            gens.push(linalg::neg(l));
        }
        QCone::from_generators(self.dim, &gens)
    }

    /// `C ∩ {z : d·z >= 0}`.
    pub fn restrict_halfspace(&self, d: &[Rat]) -> Result<QCone> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d.len(),
            });
        }
        let mut ineqs = self.ineqs.clone();
        ineqs.push(d.to_vec());
        QCone::from_halfspaces(self.dim, &ineqs, &self.eqs)
    }

    /// Minimal generating rays.  Errors on non-pointed cones, naming a
    /// lineality vector.
    pub fn extremal_rays(&self) -> Result<Vec<Vector>> {
        if let Some(l) = self.lineality.first() {
            return Err(Error::NonPointed(l.clone()));
        }
        Ok(self.generators.clone())
    }

    /// Rays exposed by a supporting functional from the dual cone.  For
    /// rational polyhedral cones this coincides with the extremal rays;
    /// the supporting functional is constructed and checked explicitly.
    pub fn exposed_rays(&self) -> Result<Vec<Vector>> {
        if let Some(l) = self.lineality.first() {
            return Err(Error::NonPointed(l.clone()));
        }
        for (i, r) in self.generators.iter().enumerate() {
            let d = self.exposing_functional(r);
            if !linalg::dot(&d, r).is_zero() {
                return Err(Error::InvariantViolation(format!(
                    "exposing functional does not vanish on ray {i}"
                )));
            }
            for (j, other) in self.generators.iter().enumerate() {
                if i != j && !linalg::dot(&d, other).is_positive() {
                    return Err(Error::InvariantViolation(format!(
                        "ray {i} of a polyhedral cone is not exposed"
                    )));
                }
            }
        }
        Ok(self.generators.clone())
    }

    /// Sum of the facet functionals vanishing on `r`; supports the minimal
    /// face of the cone containing `r`.
    fn exposing_functional(&self, r: &[Rat]) -> Vector {
        let mut d = linalg::zeros(self.dim);
        for f in &self.ineqs {
            if linalg::dot(f, r).is_zero() {
                d = linalg::add(&d, f);
            }
        }
        d
    }
}

/// Exact phase-1 simplex with Bland's rule: finds `x >= 0` with
/// `sum x_j columns_j = target`, if one exists.
pub fn nonneg_combination(dim: usize, columns: &[Vector], target: &[Rat]) -> Option<Vec<Rat>> {
    let n = columns.len();
    let m = dim;
    // tableau rows: [A | I | b], artificial basis
    let mut tab: Vec<Vector> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vector = Vec::with_capacity(n + m + 1);
        let flip = target[i].is_negative();
        for col in columns {
            row.push(if flip { -col[i].clone() } else { col[i].clone() });
        }
        for j in 0..m {
            row.push(if i == j { Rat::from_integer(1.into()) } else { Rat::zero() });
        }
        row.push(if flip { -target[i].clone() } else { target[i].clone() });
        tab.push(row);
    }
    let mut basic: Vec<usize> = (n..n + m).collect();
    loop {
        // reduced costs: sum of rows whose basic variable is artificial
        let mut obj = linalg::zeros(n + m + 1);
        for (i, row) in tab.iter().enumerate() {
            if basic[i] >= n {
                obj = linalg::add(&obj, row);
            }
        }
        // Bland: smallest non-artificial column with positive objective entry
        let Some(enter) = (0..n).find(|&j| obj[j].is_positive()) else {
            if obj[n + m].is_zero() {
                let mut x = linalg::zeros(n);
                for (i, &b) in basic.iter().enumerate() {
                    if b < n {
                        x[b] = tab[i][n + m].clone();
                    }
                }
                return Some(x);
            }
            return None;
        };
        // ratio test, Bland tie-break on basic index
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[n + m] / &row[enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basic[i] < basic[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let leave = leave?; // unbounded cannot happen in phase 1
        let pivot = tab[leave][enter].clone();
        for x in tab[leave].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..m {
            if i != leave && !tab[i][enter].is_zero() {
                let f = tab[i][enter].clone();
                tab[i] = linalg::sub(&tab[i], &linalg::scale(&tab[leave], &f));
            }
        }
        basic[leave] = enter;
    }
}
