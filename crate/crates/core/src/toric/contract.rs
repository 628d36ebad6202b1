//! Extremal contractions and flips.
//!
//! The trichotomy is read off the circuit of any wall on the extremal ray:
//! an all-nonnegative relation means a fiber-type contraction, a single
//! negative coefficient a divisorial contraction (delete the ray, merge the
//! adjacent cones across the walls on the ray), and two or more negative
//! coefficients a small contraction whose flip re-triangulates the circuit.
//! Every constructed fan is re-validated and the contracts (Picard number
//! drop, positivity on the flipped walls) are checked a posteriori rather
//! than trusted.

use super::geometry::{drop_ray, Geometry};
use super::{Fan, ToricPair};
use crate::linalg::{self, Vector};
use crate::numlat::{ClassVector, PushforwardMap};
use crate::{Error, Result};
use num_traits::Signed;
use std::collections::BTreeSet;

/// The unique linear relation among the rays of two adjacent maximal cones,
/// split by sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    /// Rays with nonzero relation coefficient, sorted.
    pub support: Vec<usize>,
    /// Full-length primitive relation, positive on the outer rays.
    pub relation: Vector,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

impl Circuit {
    fn from_relation(relation: &Vector) -> Circuit {
        let positive: Vec<usize> = (0..relation.len())
            .filter(|&i| relation[i].is_positive())
            .collect();
        let negative: Vec<usize> = (0..relation.len())
            .filter(|&i| relation[i].is_negative())
            .collect();
        let mut support = positive.clone();
        support.extend(&negative);
        support.sort_unstable();
        Circuit {
            support,
            relation: relation.clone(),
            positive,
            negative,
        }
    }
}

#[derive(Debug)]
pub enum ContractionResult {
    /// Mori Fiber Space: the contraction drops dimension.
    Fiber {
        target_dim: usize,
        /// Index into `walls` of a curve in the contracted ray.
        fiber_wall: usize,
    },
    /// Divisorial contraction deleting one ray.
    Divisorial {
        result: ToricPair,
        contracted_ray: usize,
        pushforward: PushforwardMap,
    },
    /// Small contraction; the circuit drives the flip.
    Small { circuit: Circuit },
}

/// Classifies the contraction of a `(K+Δ)`-negative extremal ray of NE_1
/// and performs it when it is divisorial.
pub fn classify_and_contract(geom: &Geometry, ray: &Vector) -> Result<ContractionResult> {
    let rays_of_ne1 = geom.ne1.extremal_rays()?;
    let target = linalg::primitive(ray);
    if !rays_of_ne1.contains(&target) {
        return Err(Error::Precondition(format!(
            "{target:?} is not an extremal ray of the cone of curves"
        )));
    }
    let pairing = geom.pair_classes(&geom.k_delta_class, &ClassVector::curve(target.clone()));
    if !pairing.is_negative() {
        return Err(Error::Precondition(
            "extremal ray is not (K+Δ)-negative".to_string(),
        ));
    }
    let wall_idxs = geom.walls_on_ray(&target);
    if wall_idxs.is_empty() {
        return Err(Error::InvariantViolation(
            "extremal ray carries no wall curve".to_string(),
        ));
    }
    let circuits: Vec<Circuit> = wall_idxs
        .iter()
        .map(|&i| Circuit::from_relation(&geom.walls[i].relation))
        .collect();
    let first = &circuits[0];

    if first.negative.is_empty() {
        // positive relation: fiber type
        for c in &circuits {
            if !c.negative.is_empty() {
                return Err(Error::InvariantViolation(
                    "walls on a fiber-type ray disagree on the circuit sign".to_string(),
                ));
            }
        }
        let span_rows: Vec<Vector> = first
            .positive
            .iter()
            .map(|&i| geom.pair.fan.rays()[i].clone())
            .collect();
        let target_dim = geom.pair.fan.dim() - linalg::rank(&span_rows);
        return Ok(ContractionResult::Fiber {
            target_dim,
            fiber_wall: wall_idxs[0],
        });
    }

    if first.negative.len() == 1 {
        let contracted = first.negative[0];
        for c in &circuits {
            if c.negative != vec![contracted] {
                return Err(Error::InvariantViolation(
                    "walls on a divisorial ray disagree on the contracted ray".to_string(),
                ));
            }
        }
        let (result, pushforward) = divisorial_contraction(geom, &wall_idxs, contracted)?;
        return Ok(ContractionResult::Divisorial {
            result,
            contracted_ray: contracted,
            pushforward,
        });
    }

    for c in &circuits {
        if c.support != first.support || c.negative != first.negative {
            return Err(Error::InvariantViolation(
                "walls on a small ray disagree on the circuit".to_string(),
            ));
        }
    }
    Ok(ContractionResult::Small {
        circuit: first.clone(),
    })
}

fn divisorial_contraction(
    geom: &Geometry,
    wall_idxs: &[usize],
    contracted: usize,
) -> Result<(ToricPair, PushforwardMap)> {
    let fan = &geom.pair.fan;
    let mut new_cones: BTreeSet<Vec<usize>> = BTreeSet::new();
    for cone in fan.max_cones() {
        if !cone.contains(&contracted) {
            new_cones.insert(cone.clone());
        }
    }
    for &wi in wall_idxs {
        let w = &geom.walls[wi];
        let mut merged: Vec<usize> = w.wall.iter().copied().filter(|&i| i != contracted).collect();
        merged.push(w.outer.0);
        merged.push(w.outer.1);
        merged.sort_unstable();
        new_cones.insert(merged);
    }
    // reindex rays past the removed one
    let reindex = |i: usize| if i > contracted { i - 1 } else { i };
    let rays: Vec<Vector> = fan
        .rays()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != contracted)
        .map(|(_, r)| r.clone())
        .collect();
    let cones: Vec<Vec<usize>> = new_cones
        .into_iter()
        .map(|c| c.into_iter().map(reindex).collect())
        .collect();
    let new_fan = Fan::new(fan.dim(), rays, cones)?;
    let new_delta = drop_ray(&geom.pair.delta, contracted);
    let new_labels = geom
        .pair
        .labels
        .iter()
        .map(|(k, v)| (k.clone(), drop_ray(v, contracted)))
        .collect();
    let new_pair = ToricPair::with_labels(new_fan, new_delta, new_labels)?;
    let new_geom = Geometry::new(new_pair.clone())?;
    if new_geom.rho() + 1 != geom.rho() {
        return Err(Error::InvariantViolation(format!(
            "divisorial contraction changed the Picard number from {} to {}",
            geom.rho(),
            new_geom.rho()
        )));
    }
    let map = geom.contraction_map(&new_geom, contracted)?;
    Ok((new_pair, map))
}

/// The raw bistellar switch across a circuit: maximal cones over the
/// circuit change from the triangulation omitting positive members to the
/// one omitting negative members.  Applying the switch twice (with signs
/// swapped) restores the fan.
pub fn retriangulate_circuit(fan: &Fan, circuit: &Circuit) -> Result<Fan> {
    let support: BTreeSet<usize> = circuit.support.iter().copied().collect();
    let negative: BTreeSet<usize> = circuit.negative.iter().copied().collect();

    // region: maximal cones containing all of J_minus
    let mut links: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut region: Vec<usize> = Vec::new();
    for (ci, cone) in fan.max_cones().iter().enumerate() {
        let cone_set: BTreeSet<usize> = cone.iter().copied().collect();
        if !negative.is_subset(&cone_set) {
            continue;
        }
        region.push(ci);
        let omitted: Vec<usize> = circuit
            .positive
            .iter()
            .copied()
            .filter(|i| !cone_set.contains(i))
            .collect();
        if omitted.len() != 1 {
            return Err(Error::InvariantViolation(
                "flipped cone does not omit exactly one positive circuit member".to_string(),
            ));
        }
        let link: Vec<usize> = cone
            .iter()
            .copied()
            .filter(|i| !support.contains(i))
            .collect();
        links.insert(link);
    }
    if region.len() != circuit.positive.len() * links.len() {
        return Err(Error::InvariantViolation(
            "flip region is not a join of the circuit with a common link".to_string(),
        ));
    }

    let mut cones: Vec<Vec<usize>> = fan
        .max_cones()
        .iter()
        .enumerate()
        .filter(|(ci, _)| !region.contains(ci))
        .map(|(_, c)| c.clone())
        .collect();
    for j in &circuit.negative {
        for link in &links {
            let mut cone: Vec<usize> = circuit
                .support
                .iter()
                .copied()
                .filter(|i| i != j)
                .collect();
            cone.extend(link.iter().copied());
            cone.sort_unstable();
            cones.push(cone);
        }
    }
    Fan::new(fan.dim(), fan.rays().to_vec(), cones)
}

/// Performs the flip of a small `(K+Δ)`-negative contraction.  The Picard
/// number is unchanged and `K+Δ` becomes strictly positive on every flipped
/// wall; both contracts are verified on the result.
pub fn flip(geom: &Geometry, circuit: &Circuit) -> Result<(ToricPair, PushforwardMap)> {
    let new_fan = retriangulate_circuit(&geom.pair.fan, circuit)?;
    let new_pair = ToricPair::with_labels(
        new_fan,
        geom.pair.delta.clone(),
        geom.pair.labels.clone(),
    )?;
    let new_geom = Geometry::new(new_pair.clone())?;
    if new_geom.rho() != geom.rho() {
        return Err(Error::InvariantViolation(
            "flip changed the Picard number".to_string(),
        ));
    }

    // strict positivity of K+Δ on every flipped wall
    let old_walls: BTreeSet<Vec<usize>> =
        geom.walls.iter().map(|w| w.wall.clone()).collect();
    for w in &new_geom.walls {
        if old_walls.contains(&w.wall) {
            continue;
        }
        let value = new_geom.pair_classes(
            &new_geom.k_delta_class,
            &ClassVector::curve(w.class.clone()),
        );
        if !value.is_positive() {
            return Err(Error::InvariantViolation(format!(
                "flipped wall {:?} pairs with K+Δ to {}",
                w.wall,
                linalg::rat_to_string(&value)
            )));
        }
    }

    // same rays, same echelon basis: the identification of N^1 is the identity
    if new_geom.basis_rays != geom.basis_rays {
        return Err(Error::InvariantViolation(
            "flip changed the divisor class basis".to_string(),
        ));
    }
    let map = PushforwardMap::new(
        geom.lattice.clone(),
        new_geom.lattice.clone(),
        linalg::identity(geom.rho()),
        Some(linalg::identity(geom.rho())),
    )?;
    Ok((new_pair, map))
}
