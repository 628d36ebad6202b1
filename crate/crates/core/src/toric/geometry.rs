//! Intersection theory of a complete simplicial toric pair.
//!
//! The divisor class lattice is `Q^rays` modulo the relations coming from
//! the ambient lattice; a deterministic echelon choice of ray classes gives
//! the basis.  Curve classes live in the dual basis, so intersection is a
//! dot product.  Wall curves are computed from the unique linear relation
//! among the rays of two adjacent maximal cones, normalized positive on the
//! two outer rays, with the lattice multiplicity factor fixing the exact
//! intersection numbers.

use super::{Fan, ToricPair};
use crate::linalg::{self, Matrix, Rat, Vector};
use crate::numlat::{ClassVector, NumLattice, PushforwardMap};
use crate::qcone::QCone;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Invariant curve attached to a wall of the fan.
#[derive(Clone, Debug)]
pub struct WallCurve {
    /// Ray indices of the wall.
    pub wall: Vec<usize>,
    /// The two adjacent maximal cones.
    pub cones: (usize, usize),
    /// The outer rays of the two adjacent cones.
    pub outer: (usize, usize),
    /// Primitive integer relation among the rays of both cones, positive on
    /// the outer rays, zero elsewhere.
    pub relation: Vector,
    /// Exact intersection numbers `D_i · C` for every ray divisor.
    pub degrees: Vector,
    /// Curve class in the dual basis.
    pub class: Vector,
}

/// Cached intersection theory of a toric pair.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub pair: ToricPair,
    pub lattice: NumLattice,
    /// Ray indices whose divisor classes form the chosen basis.
    pub basis_rays: Vec<usize>,
    /// rho x rays matrix sending a divisor coefficient vector to its class.
    class_matrix: Matrix,
    pub walls: Vec<WallCurve>,
    /// Cone of curves NE_1.
    pub ne1: QCone,
    /// Pseudo-effective cone NE^1.
    pub eff: QCone,
    /// Nef cone NM^1 = dual(NE_1).
    pub nef: QCone,
    /// Cone of nef curves NM_1 = dual(NE^1).
    pub nm1: QCone,
    pub k_class: ClassVector,
    pub delta_class: ClassVector,
    pub k_delta_class: ClassVector,
}

impl Geometry {
    pub fn new(pair: ToricPair) -> Result<Self> {
        let fan = &pair.fan;
        let n = fan.dim();
        let m = fan.rays().len();
        let rho = m - n;

        // relations: rows are the coordinate functionals evaluated on rays
        let mut u: Matrix = (0..n)
            .map(|j| fan.rays().iter().map(|r| r[j].clone()).collect())
            .collect();
        let mut echelon = u.clone();
        let pivots = linalg::rref(&mut echelon);
        if pivots.len() != n {
            return Err(Error::InvalidFan("rays do not span the ambient lattice".into()));
        }
        let basis_rays: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
        debug_assert_eq!(basis_rays.len(), rho);

        // class(a) = (a - U^T v)|_free with v solving  U_P^T v = a_P
        let up: Matrix = (0..n)
            .map(|j| pivots.iter().map(|&c| u[j][c].clone()).collect())
            .collect();
        let up_t_inv = linalg::invert(&linalg::transpose(&up))
            .ok_or_else(|| Error::InvariantViolation("pivot block not invertible".into()))?;
        let mut class_matrix: Matrix = vec![Vec::with_capacity(m); rho];
        for i in 0..m {
            let a = linalg::unit(m, i);
            let a_p: Vector = pivots.iter().map(|&c| a[c].clone()).collect();
            let v = linalg::mat_vec(&up_t_inv, &a_p);
            for (row, &f) in basis_rays.iter().enumerate() {
                let ut_f: Vector = (0..n).map(|j| u[j][f].clone()).collect();
                class_matrix[row].push(&a[f] - linalg::dot(&ut_f, &v));
            }
        }
        u.clear();

        let labels: Vec<String> = basis_rays.iter().map(|i| format!("[D{i}]")).collect();
        let lattice = NumLattice::standard(rho, labels);

        let walls = compute_walls(fan, &class_matrix, &basis_rays)?;

        let wall_classes: Vec<Vector> = walls.iter().map(|w| w.class.clone()).collect();
        let ne1 = QCone::from_generators(rho, &wall_classes)?;
        let divisor_classes: Vec<Vector> = (0..m)
            .map(|i| column(&class_matrix, i))
            .collect();
        let eff = QCone::from_generators(rho, &divisor_classes)?;
        let nef = ne1.dual();
        let nm1 = eff.dual();
        if !ne1.contains_cone(&nm1) {
            return Err(Error::InvariantViolation(
                "cone of nef curves escapes the cone of curves".into(),
            ));
        }
        if !eff.contains_cone(&nef) {
            return Err(Error::InvariantViolation(
                "nef cone escapes the pseudo-effective cone".into(),
            ));
        }

        let k_divisor = vec![linalg::rat(-1); m];
        let k_class = ClassVector::divisor(linalg::mat_vec(&class_matrix, &k_divisor));
        let delta_class = ClassVector::divisor(linalg::mat_vec(&class_matrix, &pair.delta));
        let k_delta_class = k_class.add(&delta_class);

        Ok(Geometry {
            pair,
            lattice,
            basis_rays,
            class_matrix,
            walls,
            ne1,
            eff,
            nef,
            nm1,
            k_class,
            delta_class,
            k_delta_class,
        })
    }

    pub fn rho(&self) -> usize {
        self.lattice.rank()
    }

    /// Class of a divisor given by ray coefficients.
    pub fn divisor_class(&self, coefficients: &[Rat]) -> Result<ClassVector> {
        if coefficients.len() != self.pair.fan.rays().len() {
            return Err(Error::DimensionMismatch {
                expected: self.pair.fan.rays().len(),
                got: coefficients.len(),
            });
        }
        Ok(ClassVector::divisor(linalg::mat_vec(
            &self.class_matrix,
            coefficients,
        )))
    }

    pub fn ray_divisor_class(&self, ray: usize) -> ClassVector {
        ClassVector::divisor(column(&self.class_matrix, ray))
    }

    /// Intersection of a divisor class with a curve class (dot product in
    /// the dual bases).
    pub fn pair_classes(&self, d: &ClassVector, c: &ClassVector) -> Rat {
        self.lattice.pair(d, c).expect("classes live on this lattice")
    }

    /// K_X + Δ as a divisor coefficient vector.
    pub fn k_delta_divisor(&self) -> Vector {
        self.pair
            .delta
            .iter()
            .map(|a| a - linalg::rat(1))
            .collect()
    }

    /// Walls whose curve class lies on the given ray of NE_1.
    pub fn walls_on_ray(&self, ray: &Vector) -> Vec<usize> {
        let target = linalg::primitive(ray);
        self.walls
            .iter()
            .enumerate()
            .filter(|(_, w)| linalg::primitive(&w.class) == target)
            .map(|(i, _)| i)
            .collect()
    }

    /// An effective divisor (nonnegative ray coefficients) representing a
    /// pseudo-effective class, from the cone membership certificate.
    pub fn effective_representative(&self, class: &ClassVector) -> Option<Vector> {
        let m = self.pair.fan.rays().len();
        let columns: Vec<Vector> = (0..m).map(|i| column(&self.class_matrix, i)).collect();
        crate::qcone::nonneg_combination(self.rho(), &columns, &class.coords)
    }

    /// Pushforward map of divisor classes along the contraction removing
    /// one ray, together with its pullback section.
    pub fn contraction_map(&self, target: &Geometry, removed_ray: usize) -> Result<PushforwardMap> {
        let m = self.pair.fan.rays().len();
        // matrix: push each source basis divisor forward (strict transform)
        let mut matrix_cols: Vec<Vector> = Vec::with_capacity(self.rho());
        for &f in &self.basis_rays {
            let mut coeffs = vec![Rat::zero(); m];
            coeffs[f] = linalg::rat(1);
            let pushed = drop_ray(&coeffs, removed_ray);
            matrix_cols.push(target.divisor_class(&pushed)?.coords);
        }
        let matrix = linalg::transpose(&matrix_cols);
        // pullback section: evaluate the target support function on the
        // contracted ray
        let mut pullback_cols: Vec<Vector> = Vec::with_capacity(target.rho());
        for &f in &target.basis_rays {
            let mut coeffs = vec![Rat::zero(); m - 1];
            coeffs[f] = linalg::rat(1);
            let lifted = lift_ray(
                &coeffs,
                removed_ray,
                super::support_value(
                    &target.pair.fan,
                    &coeffs,
                    &self.pair.fan.rays()[removed_ray],
                )?,
            );
            pullback_cols.push(self.divisor_class(&lifted)?.coords);
        }
        let pullback = linalg::transpose(&pullback_cols);
        PushforwardMap::new(
            self.lattice.clone(),
            target.lattice.clone(),
            matrix,
            Some(pullback),
        )
    }
}

fn column(m: &Matrix, i: usize) -> Vector {
    m.iter().map(|row| row[i].clone()).collect()
}

/// Removes the entry at `ray` from a divisor coefficient vector.
pub fn drop_ray(coeffs: &[Rat], ray: usize) -> Vector {
    coeffs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != ray)
        .map(|(_, c)| c.clone())
        .collect()
}

/// Inserts `value` at position `ray` into a divisor coefficient vector.
pub fn lift_ray(coeffs: &[Rat], ray: usize, value: Rat) -> Vector {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.extend_from_slice(&coeffs[..ray]);
    out.push(value);
    out.extend_from_slice(&coeffs[ray..]);
    out
}

fn compute_walls(fan: &Fan, class_matrix: &Matrix, basis_rays: &[usize]) -> Result<Vec<WallCurve>> {
    let m = fan.rays().len();
    let mut walls = Vec::new();
    for (facet, ca, cb) in fan.walls() {
        let outer_a = outer_ray(fan, ca, &facet);
        let outer_b = outer_ray(fan, cb, &facet);
        // express u_{outer_b} in the ray basis of cone ca
        let base: Matrix = fan.max_cones()[ca]
            .iter()
            .map(|&i| fan.rays()[i].clone())
            .collect();
        let coords = linalg::solve(
            &linalg::transpose(&base),
            &fan.rays()[outer_b],
        )
        .ok_or_else(|| Error::InvariantViolation("adjacent cone rays are dependent".into()))?;
        let mut relation = vec![Rat::zero(); m];
        relation[outer_b] = linalg::rat(1);
        for (k, &i) in fan.max_cones()[ca].iter().enumerate() {
            relation[i] = -coords[k].clone();
        }
        let relation = linalg::primitive(&relation);
        if !relation[outer_a].is_positive() || !relation[outer_b].is_positive() {
            return Err(Error::InvariantViolation(
                "wall relation not positive on the outer rays".into(),
            ));
        }
        // normalization: D_q · C = mult(wall) / mult(cone through q)
        let wall_rows: Matrix = facet.iter().map(|&i| fan.rays()[i].clone()).collect();
        let mult_wall = linalg::sublattice_index(&wall_rows);
        let cone_b_rows: Matrix = fan.max_cones()[cb]
            .iter()
            .map(|&i| fan.rays()[i].clone())
            .collect();
        let mult_b = abs_int(&linalg::det(&cone_b_rows));
        let kappa = Rat::new(mult_wall.clone(), mult_b) / relation[outer_b].clone();
        // consistency through the other side
        let cone_a_rows: Matrix = fan.max_cones()[ca]
            .iter()
            .map(|&i| fan.rays()[i].clone())
            .collect();
        let mult_a = abs_int(&linalg::det(&cone_a_rows));
        debug_assert_eq!(
            kappa.clone() * relation[outer_a].clone(),
            Rat::new(mult_wall, mult_a)
        );
        let degrees: Vector = relation.iter().map(|r| r * &kappa).collect();
        debug_assert!({
            let n = fan.dim();
            (0..n).all(|j| {
                degrees
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d * &fan.rays()[i][j])
                    .sum::<Rat>()
                    .is_zero()
            })
        });
        let class: Vector = basis_rays.iter().map(|&f| degrees[f].clone()).collect();
        // every ray divisor class pairs with the curve to its raw degree
        debug_assert!((0..m).all(|i| {
            linalg::dot(&column(class_matrix, i), &class) == degrees[i]
        }));
        walls.push(WallCurve {
            wall: facet,
            cones: (ca, cb),
            outer: (outer_a, outer_b),
            relation,
            degrees,
            class,
        });
    }
    Ok(walls)
}

fn outer_ray(fan: &Fan, cone: usize, facet: &[usize]) -> usize {
    *fan.max_cones()[cone]
        .iter()
        .find(|i| !facet.contains(i))
        .expect("facet misses exactly one ray")
}

fn abs_int(r: &Rat) -> BigInt {
    let v = r.numer().clone();
    if v.is_negative() {
        -v
    } else {
        v
    }
}
