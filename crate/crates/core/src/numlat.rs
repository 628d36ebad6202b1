//! Numerical class lattices and maps between them.
//!
//! `N¹(X)` and `N₁(X)` share a rank and are paired by intersection.  Curve
//! classes are stored in the basis dual to the chosen divisor basis, so the
//! pairing matrix is the identity for every toric-derived lattice; a custom
//! pairing is still supported for data stated in a geometric basis.
//!
//! A [`PushforwardMap`] records the divisor pushforward `φ_*` of a birational
//! map whose inverse contracts no divisor.  Numerical pullback of curves is
//! its dual map, and the optional divisor pullback section is kept alongside
//! when the map comes from a toric step.

use crate::linalg::{self, Matrix, Rat, Vector};
use crate::qcone::QCone;
use crate::{Error, Result};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Divisor,
    Curve,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumLattice {
    rank: usize,
    basis_labels: Vec<String>,
    pairing: Matrix,
    pairing_inv: Matrix,
}

impl NumLattice {
    /// Lattice with the identity pairing: curve coordinates live in the
    /// basis dual to the divisor basis.
    pub fn standard(rank: usize, basis_labels: Vec<String>) -> Self {
        let id = linalg::identity(rank);
        NumLattice {
            rank,
            basis_labels,
            pairing: id.clone(),
            pairing_inv: id,
        }
    }

    /// Lattice with an explicit perfect pairing of divisor basis against
    /// curve basis.
    pub fn with_pairing(rank: usize, basis_labels: Vec<String>, pairing: Matrix) -> Result<Self> {
        if pairing.len() != rank || pairing.iter().any(|r| r.len() != rank) {
            return Err(Error::DimensionMismatch {
                expected: rank,
                got: pairing.len(),
            });
        }
        if basis_labels.len() != rank {
            return Err(Error::LatticeMismatch(format!(
                "{} basis labels for rank {rank}",
                basis_labels.len()
            )));
        }
        let pairing_inv = linalg::invert(&pairing).ok_or_else(|| {
            Error::LatticeMismatch("pairing matrix is degenerate".to_string())
        })?;
        Ok(NumLattice {
            rank,
            basis_labels,
            pairing,
            pairing_inv,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn pairing_matrix(&self) -> &Matrix {
        &self.pairing
    }

    pub fn divisor(&self, coords: Vector) -> Result<ClassVector> {
        self.class(Side::Divisor, coords)
    }

    pub fn curve(&self, coords: Vector) -> Result<ClassVector> {
        self.class(Side::Curve, coords)
    }

    fn class(&self, side: Side, coords: Vector) -> Result<ClassVector> {
        if coords.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: coords.len(),
            });
        }
        Ok(ClassVector { side, coords })
    }

    /// Intersection number of a divisor class against a curve class.
    pub fn pair(&self, d: &ClassVector, c: &ClassVector) -> Result<Rat> {
        if d.side != Side::Divisor || c.side != Side::Curve {
            return Err(Error::LatticeMismatch(
                "pairing takes a divisor class and a curve class".to_string(),
            ));
        }
        if d.coords.len() != self.rank || c.coords.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: d.coords.len().max(c.coords.len()),
            });
        }
        Ok(linalg::dot(&d.coords, &linalg::mat_vec(&self.pairing, &c.coords)))
    }
}

/// Element of N¹(X) or N₁(X) with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassVector {
    pub side: Side,
    pub coords: Vector,
}

impl ClassVector {
    pub fn divisor(coords: Vector) -> Self {
        ClassVector {
            side: Side::Divisor,
            coords,
        }
    }

    pub fn curve(coords: Vector) -> Self {
        ClassVector {
            side: Side::Curve,
            coords,
        }
    }

    pub fn is_zero(&self) -> bool {
        linalg::is_zero_vec(&self.coords)
    }

    pub fn add(&self, other: &ClassVector) -> ClassVector {
        assert_eq!(self.side, other.side);
        ClassVector {
            side: self.side,
            coords: linalg::add(&self.coords, &other.coords),
        }
    }

    pub fn scale(&self, c: &Rat) -> ClassVector {
        ClassVector {
            side: self.side,
            coords: linalg::scale(&self.coords, c),
        }
    }
}

/// Expresses `target` as a linear combination of the given classes, all on
/// the same side; used to translate fixtures stated in a geometric basis.
pub fn express_in(basis: &[ClassVector], target: &ClassVector) -> Option<Vector> {
    if basis.iter().any(|b| b.side != target.side) {
        return None;
    }
    let columns: Matrix = basis.iter().map(|b| b.coords.clone()).collect();
    let rows = linalg::transpose(&columns);
    linalg::solve(&rows, &target.coords)
}

/// Surjective divisor pushforward `φ_*: N¹(source) → N¹(target)` of a
/// birational map whose inverse contracts no divisor.
#[derive(Clone, Debug)]
pub struct PushforwardMap {
    pub source: NumLattice,
    pub target: NumLattice,
    matrix: Matrix,
    pullback: Option<Matrix>,
}

impl PushforwardMap {
    pub fn new(
        source: NumLattice,
        target: NumLattice,
        matrix: Matrix,
        pullback: Option<Matrix>,
    ) -> Result<Self> {
        if matrix.len() != target.rank || matrix.iter().any(|r| r.len() != source.rank) {
            return Err(Error::DimensionMismatch {
                expected: target.rank,
                got: matrix.len(),
            });
        }
        if linalg::rank(&matrix) != target.rank {
            return Err(Error::LatticeMismatch(
                "pushforward matrix is not surjective".to_string(),
            ));
        }
        if let Some(pb) = &pullback {
            let composed = linalg::mat_mul(&matrix, pb);
            if composed != linalg::identity(target.rank) {
                return Err(Error::InvariantViolation(
                    "divisor pullback is not a section of the pushforward".to_string(),
                ));
            }
        }
        Ok(PushforwardMap {
            source,
            target,
            matrix,
            pullback,
        })
    }

    pub fn identity(lattice: NumLattice) -> Self {
        let id = linalg::identity(lattice.rank);
        PushforwardMap {
            source: lattice.clone(),
            target: lattice,
            matrix: id.clone(),
            pullback: Some(id),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn pushforward_divisor(&self, d: &ClassVector) -> Result<ClassVector> {
        if d.side != Side::Divisor {
            return Err(Error::LatticeMismatch("expected a divisor class".to_string()));
        }
        if d.coords.len() != self.source.rank {
            return Err(Error::DimensionMismatch {
                expected: self.source.rank,
                got: d.coords.len(),
            });
        }
        Ok(ClassVector::divisor(linalg::mat_vec(&self.matrix, &d.coords)))
    }

    /// Divisor pullback section, available on toric-derived maps.
    pub fn pullback_divisor(&self, d: &ClassVector) -> Result<ClassVector> {
        let pb = self.pullback.as_ref().ok_or_else(|| {
            Error::LatticeMismatch("map carries no divisor pullback section".to_string())
        })?;
        if d.side != Side::Divisor {
            return Err(Error::LatticeMismatch("expected a divisor class".to_string()));
        }
        if d.coords.len() != self.target.rank {
            return Err(Error::DimensionMismatch {
                expected: self.target.rank,
                got: d.coords.len(),
            });
        }
        Ok(ClassVector::divisor(linalg::mat_vec(pb, &d.coords)))
    }

    /// Numerical pullback of curves: the dual of `φ_*`.  It is the unique
    /// injective linear map with `φ*(z)·φ*num(l) = z·l` for all divisor
    /// classes `z` downstairs and `β·φ*num(l) = 0` for all `β` in the
    /// kernel of `φ_*`.
    pub fn numerical_pullback(&self, l: &ClassVector) -> Result<ClassVector> {
        if l.side != Side::Curve {
            return Err(Error::LatticeMismatch("expected a curve class".to_string()));
        }
        if l.coords.len() != self.target.rank {
            return Err(Error::DimensionMismatch {
                expected: self.target.rank,
                got: l.coords.len(),
            });
        }
        // coords: P_s^{-1} · Mᵀ · P_t · l, so that pairing identities hold
        // for arbitrary pairings; identity pairings reduce this to Mᵀ l.
        let v = linalg::mat_vec(&self.target.pairing, &l.coords);
        let v = linalg::mat_vec(&linalg::transpose(&self.matrix), &v);
        let v = linalg::mat_vec(&self.source.pairing_inv, &v);
        Ok(ClassVector::curve(v))
    }

    /// Basis of `ker φ_* ⊂ N¹(source)`.
    pub fn pushforward_kernel(&self) -> Vec<Vector> {
        linalg::kernel_basis(&self.matrix, self.source.rank)
    }

    /// The composition "first self, then next".
    pub fn compose(&self, next: &PushforwardMap) -> Result<PushforwardMap> {
        if next.source != self.target {
            return Err(Error::LatticeMismatch(
                "composition lattices do not line up".to_string(),
            ));
        }
        let matrix = linalg::mat_mul(&next.matrix, &self.matrix);
        let pullback = match (&self.pullback, &next.pullback) {
            (Some(a), Some(b)) => Some(linalg::mat_mul(a, b)),
            _ => None,
        };
        PushforwardMap::new(self.source.clone(), next.target.clone(), matrix, pullback)
    }
}

/// Positivity of a divisor class against the nef and pseudo-effective cones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PositivityFlags {
    pub ample: bool,
    pub big: bool,
    pub pseudo_effective: bool,
    pub nef: bool,
    /// Set when the class is zero; such a class is flagged rather than
    /// reported ample or big.
    pub degenerate: bool,
}

/// Kleiman-style tests: ample means interior of the nef cone, big means
/// interior of the pseudo-effective cone.
pub fn ample_big_psef_tests(d: &ClassVector, nef: &QCone, eff: &QCone) -> Result<PositivityFlags> {
    if d.side != Side::Divisor {
        return Err(Error::LatticeMismatch("expected a divisor class".to_string()));
    }
    if nef.dim() != eff.dim() || nef.dim() != d.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: d.coords.len(),
            got: nef.dim(),
        });
    }
    let degenerate = d.coords.iter().all(|x| x.is_zero());
    Ok(PositivityFlags {
        ample: !degenerate && nef.contains_in_interior(&d.coords),
        big: !degenerate && eff.contains_in_interior(&d.coords),
        pseudo_effective: eff.contains(&d.coords),
        nef: nef.contains(&d.coords),
        degenerate,
    })
}

/// Intersection data supplied directly, with no fan behind it.  Minimal
/// Model Program operations refuse these; only cone geometry is available.
#[derive(Clone, Debug)]
pub struct NumericalModel {
    pub lattice: NumLattice,
    pub eff: QCone,
    pub nef: QCone,
    pub k_class: ClassVector,
    pub delta_class: ClassVector,
}

#[derive(Deserialize)]
struct NumericalModelJson {
    rank: usize,
    basis_labels: Vec<String>,
    eff_generators: Vec<Vec<String>>,
    nef_generators: Vec<Vec<String>>,
    #[serde(rename = "K_class")]
    k_class: Vec<String>,
    delta_class: Vec<String>,
}

fn parse_rat_vec(raw: &[String]) -> Result<Vector> {
    raw.iter()
        .map(|s| {
            linalg::rat_from_str(s)
                .ok_or_else(|| Error::Parse(format!("bad rational literal {s:?}")))
        })
        .collect()
}

impl NumericalModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: NumericalModelJson = serde_json::from_str(text)?;
        let rank = raw.rank;
        let lattice = NumLattice::standard(rank, raw.basis_labels);
        let parse_gens = |gens: &[Vec<String>]| -> Result<Vec<Vector>> {
            gens.iter().map(|g| parse_rat_vec(g)).collect()
        };
        let eff = QCone::from_generators(rank, &parse_gens(&raw.eff_generators)?)?;
        let nef = QCone::from_generators(rank, &parse_gens(&raw.nef_generators)?)?;
        let k_class = lattice.divisor(parse_rat_vec(&raw.k_class)?)?;
        let delta_class = lattice.divisor(parse_rat_vec(&raw.delta_class)?)?;
        Ok(NumericalModel {
            lattice,
            eff,
            nef,
            k_class,
            delta_class,
        })
    }

    pub fn k_delta(&self) -> ClassVector {
        self.k_class.add(&self.delta_class)
    }
}
