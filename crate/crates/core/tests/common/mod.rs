//! Brute-force oracles shared by the integration suites.
#![allow(dead_code)] // each test binary uses its own subset
//!
//! These deliberately avoid the double description method: dual cones are
//! enumerated by scanning subsets of the defining vectors, solving for
//! candidate directions with plain linear algebra and sign-checking against
//! every constraint.

use nefcurves::linalg::{self, Matrix, Rat, Vector};
use num_traits::Signed;

/// Generators of `{z : v·z >= 0 for all v}` by exhaustive subset search:
/// (pointed-part rays reduced modulo the lineality, canonical lineality
/// basis).  Output is canonicalized the same way `QCone` stores rays so the
/// two can be compared structurally.
pub fn brute_force_dual(dim: usize, vectors: &[Vector]) -> (Vec<Vector>, Vec<Vector>) {
    let nonzero: Vec<Vector> = vectors
        .iter()
        .map(|v| linalg::primitive(v))
        .filter(|v| !linalg::is_zero_vec(v))
        .collect();
    // lineality of the dual: common kernel of all vectors
    let lineality = linalg::canonical_span_basis(&linalg::kernel_basis(
        &nonzero.clone(),
        dim,
    ));
    if nonzero.is_empty() {
        return (Vec::new(), lineality);
    }
    let rank = linalg::rank(&nonzero);
    let lin_dim = dim - rank;
    let mut rays: Vec<Vector> = Vec::new();
    // an extreme ray is cut out by constraints of rank exactly rank-1
    let k = rank - 1;
    for subset in linalg::combinations(nonzero.len(), k) {
        let rows: Matrix = subset.iter().map(|&i| nonzero[i].clone()).collect();
        let kernel = linalg::kernel_basis(&rows, dim);
        if kernel.len() != lin_dim + 1 {
            continue;
        }
        // candidate direction modulo the lineality
        let mut candidate: Option<Vector> = None;
        for b in &kernel {
            let reduced = linalg::reduce_mod_span(b, &lineality);
            if !linalg::is_zero_vec(&reduced) {
                candidate = Some(linalg::primitive(&reduced));
                break;
            }
        }
        let Some(w) = candidate else { continue };
        for signed in [w.clone(), linalg::neg(&w)] {
            if nonzero.iter().all(|v| !linalg::dot(v, &signed).is_negative()) {
                let canon = linalg::primitive(&linalg::reduce_mod_span(&signed, &lineality));
                if !linalg::is_zero_vec(&canon) && !rays.contains(&canon) {
                    rays.push(canon);
                }
            }
        }
    }
    rays.sort_by(|a, b| linalg::lex_cmp(a, b));
    (rays, lineality)
}

/// Nef test through the support-function route: a divisor is nef exactly
/// when each maximal cone's linear data lies below the coefficients on all
/// rays.  Independent of the wall-pairing route through the cone of curves.
pub fn nef_by_support_function(pair: &nefcurves::toric::ToricPair, divisor: &[Rat]) -> bool {
    let fan = &pair.fan;
    for cone in 0..fan.max_cones().len() {
        let m = match nefcurves::toric::cone_linear_data(fan, divisor, cone) {
            Ok(m) => m,
            Err(_) => return false,
        };
        for (j, ray) in fan.rays().iter().enumerate() {
            if linalg::dot(&m, ray) > divisor[j] {
                return false;
            }
        }
    }
    true
}

/// Hand linear programs for the Hirzebruch-surface worked chain, written
/// directly against the classical intersection numbers C0^2 = -1,
/// C0·f = 1, f^2 = 0, K = -2C0 - 3f.  Input and output in the (C0, f)
/// coefficient basis.
pub fn f1_hand_thresholds(h_c0: &Rat, h_f: &Rat) -> (Rat, Rat) {
    let two = linalg::rat(2);
    let three = linalg::rat(3);
    // H + tK = (a - 2t) C0 + (b - 3t) f with a = h_c0, b = h_f
    // (H+tK)·C0 = (b - 3t) - (a - 2t) = b - a - t >= 0
    // (H+tK)·f  = a - 2t >= 0
    let tau = (h_f - h_c0).min(h_c0 / &two);
    // effective exactly when both coefficients stay nonnegative
    let sigma = (h_c0 / two).min(h_f / three);
    (tau, sigma)
}
