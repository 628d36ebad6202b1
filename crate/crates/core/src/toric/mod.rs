//! Complete simplicial fans and toric pairs.
//!
//! A [`Fan`] stores primitive ray generators and maximal cones given as ray
//! index sets of size `dim`.  Validation checks simpliciality, primitivity,
//! wall pairing (every wall bounds exactly two maximal cones, on opposite
//! sides) and covering by deterministic point sampling.  A [`ToricPair`]
//! adds torus-invariant boundary coefficients in `[0, 1)`, which keeps the
//! pair klt by construction.

pub mod contract;
pub mod geometry;
pub mod random;
pub mod refine;

pub use contract::{classify_and_contract, flip, retriangulate_circuit, Circuit, ContractionResult};
pub use geometry::{Geometry, WallCurve};
pub use refine::{common_refinement, Refinement};

use crate::linalg::{self, Matrix, Rat, Vector};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vector>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    pub fn new(dim: usize, rays: Vec<Vector>, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFan("ambient dimension must be positive".into()));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidFan(format!("ray {i} has wrong dimension")));
            }
            if linalg::is_zero_vec(r) {
                return Err(Error::InvalidFan(format!("ray {i} is zero")));
            }
            if r.iter().any(|x| !x.is_integer()) || linalg::primitive(r) != *r {
                return Err(Error::InvalidFan(format!(
                    "ray {i} is not a primitive integer vector"
                )));
            }
        }
        for (i, r) in rays.iter().enumerate() {
            for (j, s) in rays.iter().enumerate().skip(i + 1) {
                if r == s {
                    return Err(Error::InvalidFan(format!("rays {i} and {j} coincide")));
                }
            }
        }
        let mut cones: Vec<Vec<usize>> = Vec::with_capacity(max_cones.len());
        for (ci, cone) in max_cones.iter().enumerate() {
            if cone.len() != dim {
                return Err(Error::NonSimplicialFan(format!(
                    "maximal cone {ci} has {} rays in dimension {dim}",
                    cone.len()
                )));
            }
            let mut sorted = cone.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != dim {
                return Err(Error::InvalidFan(format!("maximal cone {ci} repeats a ray")));
            }
            if sorted.iter().any(|&i| i >= rays.len()) {
                return Err(Error::InvalidFan(format!("maximal cone {ci} indexes a missing ray")));
            }
            let m: Matrix = sorted.iter().map(|&i| rays[i].clone()).collect();
            if linalg::det(&m).is_zero() {
                return Err(Error::NonSimplicialFan(format!(
                    "maximal cone {ci} has linearly dependent rays"
                )));
            }
            cones.push(sorted);
        }
        cones.sort_unstable();
        for pair in cones.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidFan(format!(
                    "maximal cone {:?} appears twice",
                    pair[0]
                )));
            }
        }
        let fan = Fan {
            dim,
            rays,
            max_cones: cones,
        };
        fan.check_wall_pairing()?;
        fan.check_covering()?;
        Ok(fan)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vector] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn ray_index(&self, v: &Vector) -> Option<usize> {
        self.rays.iter().position(|r| r == v)
    }

    /// Walls (codimension-one cones) with the two adjacent maximal cones.
    pub fn walls(&self) -> Vec<(Vec<usize>, usize, usize)> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            for drop in 0..cone.len() {
                let facet: Vec<usize> = cone
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &i)| i)
                    .collect();
                map.entry(facet).or_default().push(ci);
            }
        }
        map.into_iter()
            .map(|(facet, cones)| {
                debug_assert_eq!(cones.len(), 2);
                (facet, cones[0], cones[1])
            })
            .collect()
    }

    fn check_wall_pairing(&self) -> Result<()> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            for drop in 0..cone.len() {
                let facet: Vec<usize> = cone
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &i)| i)
                    .collect();
                map.entry(facet).or_default().push(ci);
            }
        }
        for (facet, cones) in &map {
            if cones.len() != 2 {
                return Err(Error::IncompleteFan(format!(
                    "wall {facet:?} bounds {} maximal cones instead of 2",
                    cones.len()
                )));
            }
            // orientation sweep: the two outer rays lie on opposite sides
            let (a, b) = (cones[0], cones[1]);
            let outer_a = self.outer_ray(a, facet);
            let outer_b = self.outer_ray(b, facet);
            let base: Matrix = facet.iter().map(|&i| self.rays[i].clone()).collect();
            let mut ma = base.clone();
            ma.push(self.rays[outer_a].clone());
            let mut mb = base;
            mb.push(self.rays[outer_b].clone());
            let da = linalg::det(&ma);
            let db = linalg::det(&mb);
            if da.is_zero() || db.is_zero() || da.is_positive() == db.is_positive() {
                return Err(Error::IncompleteFan(format!(
                    "maximal cones {a} and {b} lie on the same side of wall {facet:?}"
                )));
            }
        }
        Ok(())
    }

    fn outer_ray(&self, cone: usize, facet: &[usize]) -> usize {
        *self.max_cones[cone]
            .iter()
            .find(|i| !facet.contains(i))
            .expect("facet misses exactly one ray")
    }

    fn check_covering(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x636f766572);
        let mut tested = 0usize;
        while tested < 40 {
            let v: Vector = (0..self.dim)
                .map(|_| linalg::rat(rng.gen_range(-9i64..=9)))
                .collect();
            if linalg::is_zero_vec(&v) {
                continue;
            }
            let mut closed = 0usize;
            let mut interior = 0usize;
            for cone in 0..self.max_cones.len() {
                if let Some(coords) = self.cone_coordinates(cone, &v) {
                    if coords.iter().all(|c| !c.is_negative()) {
                        closed += 1;
                        if coords.iter().all(|c| c.is_positive()) {
                            interior += 1;
                        }
                    }
                }
            }
            if closed == 0 {
                return Err(Error::IncompleteFan(format!(
                    "sample point {v:?} lies in no maximal cone"
                )));
            }
            if interior > 1 {
                return Err(Error::InvalidFan(format!(
                    "sample point {v:?} lies in the interior of {interior} maximal cones"
                )));
            }
            if interior == 0 {
                // boundary point; resample without counting
                continue;
            }
            tested += 1;
        }
        Ok(())
    }

    /// Coordinates of `v` in the ray basis of the given maximal cone.
    pub fn cone_coordinates(&self, cone: usize, v: &Vector) -> Option<Vector> {
        let m: Matrix = self.max_cones[cone]
            .iter()
            .map(|&i| self.rays[i].clone())
            .collect();
        linalg::solve(&linalg::transpose(&m), v)
    }

    /// The maximal cone containing `v`, with nonnegative coordinates.
    pub fn containing_cone(&self, v: &Vector) -> Option<(usize, Vector)> {
        for cone in 0..self.max_cones.len() {
            if let Some(coords) = self.cone_coordinates(cone, v) {
                if coords.iter().all(|c| !c.is_negative()) {
                    return Some((cone, coords));
                }
            }
        }
        None
    }
}

/// Complete simplicial toric pair `(X, Δ)` with boundary coefficients in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricPair {
    pub fan: Fan,
    pub delta: Vec<Rat>,
    /// Optional named divisors (ray coefficient vectors) for input syntax.
    pub labels: BTreeMap<String, Vector>,
}

impl ToricPair {
    pub fn new(fan: Fan, delta: Vec<Rat>) -> Result<Self> {
        Self::with_labels(fan, delta, BTreeMap::new())
    }

    pub fn with_labels(fan: Fan, delta: Vec<Rat>, labels: BTreeMap<String, Vector>) -> Result<Self> {
        if delta.len() != fan.rays().len() {
            return Err(Error::InvalidPair(format!(
                "{} boundary coefficients for {} rays",
                delta.len(),
                fan.rays().len()
            )));
        }
        for (i, a) in delta.iter().enumerate() {
            if a.is_negative() || *a >= linalg::rat(1) {
                return Err(Error::InvalidPair(format!(
                    "boundary coefficient {} on ray {i} outside [0, 1)",
                    linalg::rat_to_string(a)
                )));
            }
        }
        let rho = fan.rays().len() as i64 - fan.dim() as i64;
        if rho <= 0 {
            return Err(Error::InvalidPair(format!("Picard number {rho} is not positive")));
        }
        for (name, vec) in &labels {
            if vec.len() != fan.rays().len() {
                return Err(Error::InvalidPair(format!(
                    "label {name:?} has wrong divisor vector length"
                )));
            }
        }
        Ok(ToricPair { fan, delta, labels })
    }

    pub fn rho(&self) -> usize {
        self.fan.rays().len() - self.fan.dim()
    }

    pub fn zero_boundary(fan: Fan) -> Result<Self> {
        let delta = vec![Rat::zero(); fan.rays().len()];
        Self::new(fan, delta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FanJson = serde_json::from_str(text)?;
        raw.into_pair()
    }

    pub fn to_json(&self) -> FanJson {
        FanJson::from_pair(self)
    }
}

/// On-disk fan format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FanJson {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub delta: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, Vec<String>>,
}

impl FanJson {
    pub fn into_pair(self) -> Result<ToricPair> {
        let rays: Vec<Vector> = self.rays.iter().map(|r| linalg::vec_i64(r)).collect();
        let fan = Fan::new(self.dim, rays, self.max_cones.clone())?;
        let mut delta = vec![Rat::zero(); fan.rays().len()];
        for (key, value) in &self.delta {
            let idx: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("bad ray index {key:?} in delta")))?;
            if idx >= delta.len() {
                return Err(Error::InvalidPair(format!("delta ray index {idx} out of range")));
            }
            delta[idx] = linalg::rat_from_str(value)
                .ok_or_else(|| Error::Parse(format!("bad rational {value:?} in delta")))?;
        }
        let mut labels = BTreeMap::new();
        for (name, coeffs) in &self.labels {
            let vec: Vector = coeffs
                .iter()
                .map(|s| {
                    linalg::rat_from_str(s)
                        .ok_or_else(|| Error::Parse(format!("bad rational {s:?} in label {name:?}")))
                })
                .collect::<Result<_>>()?;
            labels.insert(name.clone(), vec);
        }
        ToricPair::with_labels(fan, delta, labels)
    }

    pub fn from_pair(pair: &ToricPair) -> FanJson {
        let rays: Vec<Vec<i64>> = pair
            .fan
            .rays()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        let n = x.numer();
                        i64::try_from(n.clone()).expect("ray entry fits in i64")
                    })
                    .collect()
            })
            .collect();
        let mut delta = BTreeMap::new();
        for (i, a) in pair.delta.iter().enumerate() {
            if !a.is_zero() {
                delta.insert(i.to_string(), linalg::rat_to_string(a));
            }
        }
        let labels = pair
            .labels
            .iter()
            .map(|(k, v)| (k.clone(), linalg::vec_to_strings(v)))
            .collect();
        FanJson {
            dim: pair.fan.dim(),
            rays,
            max_cones: pair.fan.max_cones().to_vec(),
            delta,
            labels,
        }
    }
}

/// Piecewise-linear support value of a divisor (given by ray coefficients)
/// at a point: the function is linear on each maximal cone and takes the
/// coefficient value on each ray.
pub fn support_value(fan: &Fan, divisor: &[Rat], point: &Vector) -> Result<Rat> {
    if divisor.len() != fan.rays().len() {
        return Err(Error::DimensionMismatch {
            expected: fan.rays().len(),
            got: divisor.len(),
        });
    }
    let (cone, _) = fan
        .containing_cone(point)
        .ok_or_else(|| Error::InvalidFan("point outside fan support".into()))?;
    let m = cone_linear_data(fan, divisor, cone)?;
    Ok(linalg::dot(&m, point))
}

/// Linear functional agreeing with the divisor coefficients on the rays of
/// one maximal cone.
pub fn cone_linear_data(fan: &Fan, divisor: &[Rat], cone: usize) -> Result<Vector> {
    let rows: Matrix = fan.max_cones()[cone]
        .iter()
        .map(|&i| fan.rays()[i].clone())
        .collect();
    let rhs: Vector = fan.max_cones()[cone]
        .iter()
        .map(|&i| divisor[i].clone())
        .collect();
    linalg::solve(&rows, &rhs)
        .ok_or_else(|| Error::InvariantViolation("simplicial cone rays are dependent".into()))
}

/// Discrepancy `a(E_v, X, Δ)` of the divisorial valuation attached to a
/// primitive vector in the fan support.
pub fn discrepancy(pair: &ToricPair, v: &Vector) -> Result<Rat> {
    if linalg::is_zero_vec(v) {
        return Err(Error::Precondition("discrepancy of the zero vector".into()));
    }
    let log_divisor: Vec<Rat> = pair.delta.iter().map(|a| linalg::rat(1) - a).collect();
    Ok(support_value(&pair.fan, &log_divisor, v)? - linalg::rat(1))
}

/// A klt check: boundary coefficients in `[0,1)` are enforced by the type,
/// and the log discrepancy function is positive on every ray.
pub fn klt_check(pair: &ToricPair) -> bool {
    pair.delta
        .iter()
        .all(|a| !a.is_negative() && *a < linalg::rat(1))
        && pair
            .fan
            .rays()
            .iter()
            .enumerate()
            .all(|(i, u)| match discrepancy(pair, u) {
                Ok(d) => d == -pair.delta[i].clone(),
                Err(_) => false,
            })
}

/// Terminality: all discrepancies of exceptional divisors over `X` are
/// positive.  Checked exactly by enumerating the lattice points of the
/// region `{A <= 1}` inside each maximal cone; the pair is terminal when
/// the only such points are the origin and the ray generators.
pub fn is_terminal(pair: &ToricPair) -> Result<bool> {
    let fan = &pair.fan;
    let n = fan.dim();
    for cone in 0..fan.max_cones().len() {
        let idxs = &fan.max_cones()[cone];
        // region {A <= 1} in this cone is the simplex on 0 and u_i/(1-a_i)
        let verts: Vec<Vector> = idxs
            .iter()
            .map(|&i| {
                let s = (linalg::rat(1) - &pair.delta[i]).recip();
                linalg::scale(&fan.rays()[i], &s)
            })
            .collect();
        let mut lo = vec![Rat::zero(); n];
        let mut hi = vec![Rat::zero(); n];
        for v in &verts {
            for j in 0..n {
                if v[j] < lo[j] {
                    lo[j] = v[j].clone();
                }
                if v[j] > hi[j] {
                    hi[j] = v[j].clone();
                }
            }
        }
        let lo_i: Vec<i64> = lo.iter().map(|x| rat_floor(x)).collect();
        let hi_i: Vec<i64> = hi.iter().map(|x| rat_ceil(x)).collect();
        let mut point = lo_i.clone();
        'points: loop {
            let v: Vector = point.iter().map(|&c| linalg::rat(c)).collect();
            if !linalg::is_zero_vec(&v) {
                if let Some(coords) = fan.cone_coordinates(cone, &v) {
                    if coords.iter().all(|c| !c.is_negative()) {
                        let a_value: Rat = coords
                            .iter()
                            .zip(idxs)
                            .map(|(c, &i)| c * (linalg::rat(1) - &pair.delta[i]))
                            .sum();
                        let is_ray = idxs.iter().any(|&i| fan.rays()[i] == v);
                        if a_value <= linalg::rat(1) && !is_ray {
                            return Ok(false);
                        }
                    }
                }
            }
            // odometer
            for j in 0..n {
                if point[j] < hi_i[j] {
                    point[j] += 1;
                    continue 'points;
                }
                point[j] = lo_i[j];
            }
            break;
        }
    }
    Ok(true)
}

fn rat_floor(x: &Rat) -> i64 {
    i64::try_from(x.floor().numer().clone()).expect("lattice bound fits in i64")
}

fn rat_ceil(x: &Rat) -> i64 {
    i64::try_from(x.ceil().numer().clone()).expect("lattice bound fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio, vec_i64};

    pub(crate) fn p2_fan() -> Fan {
        Fan::new(
            2,
            vec![vec_i64(&[1, 0]), vec_i64(&[0, 1]), vec_i64(&[-1, -1])],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap()
    }

    pub(crate) fn f1_fan() -> Fan {
        Fan::new(
            2,
            vec![
                vec_i64(&[1, 0]),
                vec_i64(&[0, 1]),
                vec_i64(&[-1, 1]),
                vec_i64(&[0, -1]),
            ],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap()
    }

    #[test]
    fn valid_fans_pass_validation() {
        p2_fan();
        f1_fan();
    }

    #[test]
    fn incomplete_fan_rejected() {
        let err = Fan::new(
            2,
            vec![vec_i64(&[1, 0]), vec_i64(&[0, 1])],
            vec![vec![0, 1]],
        );
        assert!(matches!(err, Err(Error::IncompleteFan(_))));
    }

    #[test]
    fn non_simplicial_cone_rejected() {
        let err = Fan::new(
            2,
            vec![vec_i64(&[1, 0]), vec_i64(&[0, 1]), vec_i64(&[-1, -1])],
            vec![vec![0, 1, 2]],
        );
        assert!(matches!(err, Err(Error::NonSimplicialFan(_))));
    }

    #[test]
    fn non_primitive_ray_rejected() {
        let err = Fan::new(
            2,
            vec![vec_i64(&[2, 0]), vec_i64(&[0, 1]), vec_i64(&[-1, -1])],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        );
        assert!(matches!(err, Err(Error::InvalidFan(_))));
    }

    #[test]
    fn boundary_coefficients_validated() {
        let fan = p2_fan();
        assert!(ToricPair::new(fan.clone(), vec![rat(0), rat(0), rat(1)]).is_err());
        assert!(ToricPair::new(fan.clone(), vec![rat(0), ratio(9, 10), rat(0)]).is_ok());
        assert!(ToricPair::new(fan, vec![rat(0), ratio(-1, 2), rat(0)]).is_err());
    }

    #[test]
    fn discrepancy_of_plane_blowup_vector() {
        // A(1,1) = 2 on the smooth chart, so the discrepancy is 1.
        let pair = ToricPair::zero_boundary(p2_fan()).unwrap();
        assert_eq!(discrepancy(&pair, &vec_i64(&[1, 1])).unwrap(), rat(1));
        // on a fan ray the discrepancy is minus the boundary coefficient
        assert_eq!(discrepancy(&pair, &vec_i64(&[0, 1])).unwrap(), rat(0));
        let with_delta = ToricPair::new(p2_fan(), vec![ratio(1, 3), rat(0), rat(0)]).unwrap();
        assert_eq!(
            discrepancy(&with_delta, &vec_i64(&[1, 0])).unwrap(),
            ratio(-1, 3)
        );
        assert!(klt_check(&with_delta));
    }

    #[test]
    fn terminality_of_surfaces() {
        // smooth surfaces are terminal
        assert!(is_terminal(&ToricPair::zero_boundary(p2_fan()).unwrap()).unwrap());
        // the quadric cone P(1,1,2) chart has a canonical (not terminal) point
        let p112 = Fan::new(
            2,
            vec![vec_i64(&[1, 0]), vec_i64(&[0, 1]), vec_i64(&[-1, -2])],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        assert!(!is_terminal(&ToricPair::zero_boundary(p112).unwrap()).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let pair = ToricPair::new(f1_fan(), vec![rat(0), ratio(1, 2), rat(0), rat(0)]).unwrap();
        let json = serde_json::to_string(&pair.to_json()).unwrap();
        let back = ToricPair::from_json(&json).unwrap();
        assert_eq!(back, pair);
    }
}
