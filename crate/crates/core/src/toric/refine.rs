//! Common refinements of complete simplicial fans.
//!
//! The refinement collects all full-dimensional pairwise intersections of
//! maximal cones and triangulates them by pulling rays in a fixed global
//! order, so shared faces triangulate consistently.  Pullback comparisons
//! of divisors on either fan become piecewise-linear function comparisons
//! on the refinement's rays.

use super::{Fan, ToricPair};
use crate::linalg::{self, Matrix, Vector};
use crate::qcone::QCone;
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

/// A fan refining two others, with ray bookkeeping into both.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub fan: Fan,
    /// For each refinement ray, its index among the first fan's rays.
    pub ray_in_a: Vec<Option<usize>>,
    /// For each refinement ray, its index among the second fan's rays.
    pub ray_in_b: Vec<Option<usize>>,
}

/// Facet normals of a full-dimensional simplicial cone: the rows of the
/// inverse ray matrix.
fn simplicial_cone_normals(fan: &Fan, cone: usize) -> Result<Matrix> {
    let m: Matrix = fan.max_cones()[cone]
        .iter()
        .map(|&i| fan.rays()[i].clone())
        .collect();
    let inv = linalg::invert(&linalg::transpose(&m))
        .ok_or_else(|| Error::InvariantViolation("simplicial cone is degenerate".into()))?;
    Ok(inv)
}

pub fn common_refinement(a: &Fan, b: &Fan) -> Result<Refinement> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let n = a.dim();
    let normals_a: Vec<Matrix> = (0..a.max_cones().len())
        .map(|c| simplicial_cone_normals(a, c))
        .collect::<Result<_>>()?;
    let normals_b: Vec<Matrix> = (0..b.max_cones().len())
        .map(|c| simplicial_cone_normals(b, c))
        .collect::<Result<_>>()?;

    let mut pieces: Vec<QCone> = Vec::new();
    let mut rays: BTreeSet<Vector> = BTreeSet::new();
    for na in &normals_a {
        for nb in &normals_b {
            let mut halfspaces = na.clone();
            halfspaces.extend(nb.iter().cloned());
            let cone = QCone::from_halfspaces(n, &halfspaces, &[])?;
            if cone.equations().is_empty() && cone.is_pointed() {
                for g in cone.generators() {
                    rays.insert(g.clone());
                }
                pieces.push(cone);
            }
        }
    }
    let rays: Vec<Vector> = rays.into_iter().collect();

    let mut cones: BTreeSet<Vec<usize>> = BTreeSet::new();
    for piece in &pieces {
        for simplex in triangulate(piece)? {
            let idx: Vec<usize> = simplex
                .iter()
                .map(|g| {
                    rays.iter()
                        .position(|r| r == g)
                        .expect("triangulation rays are collected")
                })
                .collect();
            cones.insert({
                let mut c = idx;
                c.sort_unstable();
                c
            });
        }
    }

    let fan = Fan::new(n, rays, cones.into_iter().collect())?;
    let ray_in_a = fan.rays().iter().map(|r| a.ray_index(r)).collect();
    let ray_in_b = fan.rays().iter().map(|r| b.ray_index(r)).collect();
    Ok(Refinement {
        fan,
        ray_in_a,
        ray_in_b,
    })
}

/// Pulling triangulation of a pointed cone given by its canonical
/// generators: recursively join the lexicographically first generator with
/// the triangulated facets not containing it.
fn triangulate(cone: &QCone) -> Result<Vec<Vec<Vector>>> {
    let gens = cone.generators();
    let cone_dim = cone.dim() - cone.equations().len();
    if gens.len() == cone_dim {
        return Ok(vec![gens.to_vec()]);
    }
    let v = &gens[0];
    let mut out = Vec::new();
    for f in cone.facet_inequalities() {
        if !linalg::dot(f, v).is_positive() {
            continue;
        }
        let facet_gens: Vec<Vector> = gens
            .iter()
            .filter(|g| linalg::dot(f, g).is_zero())
            .cloned()
            .collect();
        let facet = QCone::from_generators(cone.dim(), &facet_gens)?;
        for piece in triangulate(&facet)? {
            let mut simplex = piece;
            simplex.push(v.clone());
            out.push(simplex);
        }
    }
    Ok(out)
}

/// Piecewise-linear pullback comparison used by nef-model certificates: for
/// a divisor on `source` (ray coefficients), evaluates the support function
/// on every ray of the refinement.
pub fn pullback_coefficients(
    source: &ToricPair,
    divisor: &[linalg::Rat],
    refinement: &Fan,
) -> Result<Vector> {
    refinement
        .rays()
        .iter()
        .map(|r| super::support_value(&source.fan, divisor, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_i64;
    use crate::toric::tests::{f1_fan, p2_fan};

    #[test]
    fn refinement_of_a_fan_with_itself() {
        let fan = f1_fan();
        let r = common_refinement(&fan, &fan).unwrap();
        assert_eq!(r.fan.rays().len(), fan.rays().len());
        assert_eq!(r.fan.max_cones().len(), fan.max_cones().len());
        assert!(r.ray_in_a.iter().all(|x| x.is_some()));
        assert!(r.ray_in_b.iter().all(|x| x.is_some()));
    }

    #[test]
    fn f1_refines_its_blowdown() {
        // the blow-down image of the F1 fan (a P^2 with rays u1, u3, u4)
        let plane = Fan::new(
            2,
            vec![vec_i64(&[1, 0]), vec_i64(&[-1, 1]), vec_i64(&[0, -1])],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        let f1 = f1_fan();
        let r = common_refinement(&f1, &plane).unwrap();
        assert_eq!(r.fan.rays().len(), 4);
        assert_eq!(r.fan.max_cones().len(), 4);
        // every F1 ray appears; the blown-down fan misses exactly one
        assert!(r.ray_in_a.iter().all(|x| x.is_some()));
        assert_eq!(r.ray_in_b.iter().filter(|x| x.is_none()).count(), 1);
    }

    #[test]
    fn circuit_triangulations_need_a_new_ray() {
        // two small resolutions of the quadric cone: the refinement
        // subdivides the circuit through the diagonal direction
        let rays = vec![
            vec_i64(&[0, 0, 1]),
            vec_i64(&[1, 0, 1]),
            vec_i64(&[1, 1, 1]),
            vec_i64(&[0, 1, 1]),
            vec_i64(&[-1, -1, -2]),
        ];
        let outer = vec![vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4], vec![0, 3, 4]];
        let mut cones1 = outer.clone();
        cones1.push(vec![0, 1, 2]);
        cones1.push(vec![0, 2, 3]);
        let mut cones2 = outer;
        cones2.push(vec![1, 2, 3]);
        cones2.push(vec![0, 1, 3]);
        let x1 = Fan::new(3, rays.clone(), cones1).unwrap();
        let x2 = Fan::new(3, rays, cones2).unwrap();
        let r = common_refinement(&x1, &x2).unwrap();
        assert_eq!(r.fan.rays().len(), 6);
        let new_ray = vec_i64(&[1, 1, 2]);
        assert!(r.fan.rays().contains(&new_ray));
    }

    #[test]
    fn pullback_coefficients_restrict_to_coefficients() {
        let pair = ToricPair::zero_boundary(p2_fan()).unwrap();
        let r = common_refinement(&pair.fan, &pair.fan).unwrap();
        let div = vec_i64(&[3, 1, 0]);
        let pulled = pullback_coefficients(&pair, &div, &r.fan).unwrap();
        for (w, value) in r.fan.rays().iter().zip(&pulled) {
            let idx = pair.fan.ray_index(w).unwrap();
            assert_eq!(*value, div[idx]);
        }
    }
}
