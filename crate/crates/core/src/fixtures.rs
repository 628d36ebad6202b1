//! Bundled example pairs used by the test suites and as CLI inputs.

use crate::numlat::NumericalModel;
use crate::toric::ToricPair;
use crate::{Error, Result};

macro_rules! fixture_source {
    ($name:literal) => {
        ($name, include_str!(concat!("../fixtures/", $name, ".json")))
    };
}

/// Toric fixtures that load as valid complete simplicial pairs.
pub const TORIC_FIXTURES: &[(&str, &str)] = &[
    fixture_source!("p2"),
    fixture_source!("p3"),
    fixture_source!("p1xp1"),
    fixture_source!("p1xp1xp1"),
    fixture_source!("f1"),
    fixture_source!("f2"),
    fixture_source!("p1112"),
    fixture_source!("p1112-blowup"),
    fixture_source!("quadric-res-1"),
    fixture_source!("quadric-res-2"),
    fixture_source!("flip-3d-1"),
];

/// The non-simplicial quadric cone; loading it must fail.
pub const QUADRIC_CONE_SOURCE: &str = include_str!("../fixtures/quadric-cone.json");

/// Abstract numerical mode data for the eight-point cubic-pencil surface.
pub const CUBIC_PENCIL_SOURCE: &str = include_str!("../fixtures/cubic-pencil.json");

pub fn toric_fixture(name: &str) -> Result<ToricPair> {
    for (n, src) in TORIC_FIXTURES {
        if *n == name {
            return ToricPair::from_json(src);
        }
    }
    Err(Error::Config(format!("unknown fixture {name:?}")))
}

pub fn toric_fixture_names() -> Vec<&'static str> {
    TORIC_FIXTURES.iter().map(|(n, _)| *n).collect()
}

pub fn cubic_pencil_model() -> Result<NumericalModel> {
    NumericalModel::from_json(CUBIC_PENCIL_SOURCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_toric_fixtures_load() {
        for name in toric_fixture_names() {
            let pair = toric_fixture(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(pair.rho() >= 1);
        }
    }

    #[test]
    fn quadric_cone_is_rejected_as_non_simplicial() {
        let err = ToricPair::from_json(QUADRIC_CONE_SOURCE);
        assert!(matches!(err, Err(Error::NonSimplicialFan(_))));
    }

    #[test]
    fn cubic_pencil_loads() {
        let model = cubic_pencil_model().unwrap();
        assert_eq!(model.lattice.rank(), 9);
    }
}
