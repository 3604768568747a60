//! Named example arrays.

use nalgebra::DMatrix;

use super::builders::{build_lc, build_mass_spring, OscillatorArray, PairParams};
use crate::error::{Error, Result};
use crate::model::{ArraySpec, TimeDomain};
use crate::synthesis::GainSet;

pub const BUILTIN_NAMES: &[&str] = &[
    "counterexample_asym",
    "chain5",
    "mass_spring_demo",
    "lc_demo",
    "rotation_ring",
    "complete3",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinExample {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: ArraySpec,
    /// A common Lyapunov certificate, when the example comes with one.
    pub p: Option<DMatrix<f64>>,
    /// Gains that define the example's coupling, when it is not a recipe's.
    pub gains: Option<GainSet>,
    pub oscillator: Option<OscillatorArray>,
}

fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, v)
}

/// Three agents with zero drift and six distinct nonsingular outputs
/// `H_ij ≠ H_ji`; coupled by `G_ij = H_ijᵀ` the array does not synchronize.
fn counterexample_asym() -> Result<BuiltinExample> {
    let mut spec = ArraySpec::new(3, DMatrix::zeros(2, 2), TimeDomain::Continuous)?;
    let outputs = [
        ((0, 1), [1.9006, 1.8406, 1.8406, 4.0758]),
        ((0, 2), [1.0382, 0.9603, 0.9603, 6.2512]),
        ((1, 0), [3.8896, 3.1418, 3.1418, 4.7041]),
        ((1, 2), [6.4288, -1.6342, -1.6342, 1.5263]),
        ((2, 0), [2.2944, -1.9328, -1.9328, 6.5011]),
        ((2, 1), [4.9157, -3.9794, -3.9794, 3.6283]),
    ];
    for ((i, j), h) in outputs {
        spec.set_output(i, j, m(2, 2, &h))?;
    }
    let gains = GainSet::direct(&spec);
    Ok(BuiltinExample {
        name: "counterexample_asym",
        description: "asymmetric matrix weights on a complete graph; no synchronization",
        spec,
        p: None,
        gains: Some(gains),
        oscillator: None,
    })
}

/// Five unstable third-order agents on a path graph, CL-detectable with the
/// stored `P`, yet no coupling gain `α` synchronizes them.
fn chain5() -> Result<BuiltinExample> {
    let a = m(3, 3, &[0.4429, 0.4871, 0.7504, 0.7265, -1.5839, -1.8779, 0.0154, 1.3969, 1.5767]);
    let mut spec = ArraySpec::new(5, a, TimeDomain::Continuous)?;
    let rows = [
        [1.0, 0.0, 0.0],
        [3.3036, 0.1565, 0.1265],
        [3.7854, 1.3147, 3.4819],
        [4.6054, 1.8354, 3.1269],
    ];
    for (k, c) in rows.iter().enumerate() {
        spec.set_symmetric_output(k, k + 1, m(1, 3, c))?;
    }
    let p = m(3, 3, &[0.6209, -0.1396, -0.2605, -0.1396, 0.0677, 0.0997, -0.2605, 0.0997, 0.1815]);
    Ok(BuiltinExample {
        name: "chain5",
        description: "CL-detectable path of five unstable agents; incomplete graph defeats alpha P^-1 C^T gains",
        spec,
        p: Some(p),
        gains: None,
        oscillator: None,
    })
}

/// Parameters are arbitrary demo values.
fn mass_spring_demo() -> Result<BuiltinExample> {
    let dampers = PairParams::from([((0, 1), vec![1.0, 0.5]), ((1, 2), vec![0.5, 1.0])]);
    let arr = build_mass_spring(&[1.0, 2.0], &[1.0, 0.5, 1.5], &dampers, 3)?;
    Ok(BuiltinExample {
        name: "mass_spring_demo",
        description: "three two-mass chains joined by dampers on a path graph",
        spec: arr.raw.clone(),
        p: None,
        gains: Some(arr.raw_gains.clone()),
        oscillator: Some(arr),
    })
}

/// Parameters are arbitrary demo values.
fn lc_demo() -> Result<BuiltinExample> {
    let conductances = PairParams::from([
        ((0, 1), vec![0.5, 0.5]),
        ((1, 2), vec![0.3, 0.3]),
        ((0, 2), vec![0.4, 0.4]),
    ]);
    let arr = build_lc(&[1.0, 0.5, 2.0], &[1.0, 1.5], &conductances, 3)?;
    Ok(BuiltinExample {
        name: "lc_demo",
        description: "three two-node LC ladders joined by resistors",
        spec: arr.raw.clone(),
        p: None,
        gains: Some(arr.raw_gains.clone()),
        oscillator: Some(arr),
    })
}

/// Rotation plus a contracting mode, four agents on a ring seeing only the
/// first coordinate.
fn rotation_ring() -> Result<BuiltinExample> {
    let (c, s) = (0.7f64.cos(), 0.7f64.sin());
    let a = m(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 0.5]);
    let mut spec = ArraySpec::new(4, a, TimeDomain::Discrete)?;
    for k in 0..4 {
        spec.set_symmetric_output(k, (k + 1) % 4, m(1, 3, &[1.0, 0.0, 0.0]))?;
    }
    Ok(BuiltinExample {
        name: "rotation_ring",
        description: "discrete-time rotating agents on a four-cycle",
        spec,
        p: None,
        gains: None,
        oscillator: None,
    })
}

/// Unstable second-order agents on a complete graph with full outputs;
/// `P = I` certifies CL-detectability.
fn complete3() -> Result<BuiltinExample> {
    let a = m(2, 2, &[0.5, 1.0, -1.0, 0.2]);
    let mut spec = ArraySpec::new(3, a, TimeDomain::Continuous)?;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        spec.set_symmetric_output(i, j, DMatrix::identity(2, 2) * 1.5)?;
    }
    Ok(BuiltinExample {
        name: "complete3",
        description: "unstable agents on a complete graph; alpha P^-1 C^T gains synchronize",
        spec,
        p: Some(DMatrix::identity(2, 2)),
        gains: None,
        oscillator: None,
    })
}

pub fn builtin_example(name: &str) -> Result<BuiltinExample> {
    match name {
        "counterexample_asym" => counterexample_asym(),
        "chain5" => chain5(),
        "mass_spring_demo" => mass_spring_demo(),
        "lc_demo" => lc_demo(),
        "rotation_ring" => rotation_ring(),
        "complete3" => complete3(),
        other => Err(Error::UnknownName(format!(
            "example `{other}` (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::Tolerances;

    #[test]
    fn every_name_builds() {
        for name in BUILTIN_NAMES {
            let ex = builtin_example(name).unwrap();
            assert_eq!(&ex.name, name);
            assert!(ex.spec.validate(&Tolerances::default()).is_valid());
        }
        assert!(matches!(builtin_example("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn counterexample_shape() {
        let ex = builtin_example("counterexample_asym").unwrap();
        assert_eq!(ex.spec.q(), 3);
        assert_eq!(ex.spec.outputs().count(), 6);
        assert_eq!(ex.spec.a(), &DMatrix::zeros(2, 2));
        assert!(!ex.spec.validate(&Tolerances::default()).symmetric);
    }

    #[test]
    fn chain5_shape() {
        let ex = builtin_example("chain5").unwrap();
        assert_eq!((ex.spec.q(), ex.spec.n()), (5, 3));
        assert_eq!(ex.spec.outputs().count(), 8);
        assert_eq!(ex.spec.output(2, 3).unwrap()[(0, 2)], 3.4819);
        assert_eq!(ex.p.unwrap()[(1, 1)], 0.0677);
    }
}
