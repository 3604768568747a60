//! Arrays of mass-spring chains and LC ladders coupled by dampers or
//! resistors between corresponding nodes.
//!
//! Both have state `x_i = (z_i, ż_i)` and dynamics
//! `ẋ_i = [[0, I], [-X⁻¹Y, 0]] x_i + Σ_j [[0, 0], [0, X⁻¹D_ij]] (x_j - x_i)`
//! with `X` the inertia-like matrix, `Y` the stiffness-like matrix and `D_ij`
//! the diagonal coupling. A block-diagonal change of coordinates `ξ = T x`
//! makes the drift skew-symmetric and the coupling weights symmetric PSD.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ArraySpec, Edge, TimeDomain};
use crate::spectral::{spd_inv_sqrt, spd_sqrt};
use crate::synthesis::{GainSet, RecipeKind};

/// Diagonal coupling per unordered agent pair `(i, j)`, 0-based. Each entry
/// holds one nonnegative value per node.
pub type PairParams = BTreeMap<Edge, Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorArray {
    /// Physical coordinates `x_i = (z_i, ż_i)`.
    pub raw: ArraySpec,
    /// Gains realizing the physical coupling on `raw`.
    pub raw_gains: GainSet,
    /// Coordinates `ξ_i = T x_i` with skew-symmetric drift.
    pub transformed: ArraySpec,
    /// `G_ij = H_ijᵀ`, so the coupling is the matrix-weighted Laplacian.
    pub transformed_gains: GainSet,
    /// `T`.
    pub transform: DMatrix<f64>,
}

impl OscillatorArray {
    /// `[I_q ⊗ T] x`.
    pub fn to_transformed(&self, x: &DVector<f64>) -> DVector<f64> {
        let q = self.raw.q();
        DMatrix::<f64>::identity(q, q).kronecker(&self.transform) * x
    }
}

fn positive(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        Some(k) => Err(Error::NonPositiveParameter(format!("{name}[{}] = {}", k + 1, values[k]))),
        None => Ok(()),
    }
}

/// Tridiagonal `[[c1+c2, -c2, ...], [-c2, c2+c3, -c3, ...], ...]` from `p+1` values.
fn chain_matrix(values: &[f64]) -> DMatrix<f64> {
    let p = values.len() - 1;
    let mut m = DMatrix::zeros(p, p);
    for k in 0..p {
        m[(k, k)] = values[k] + values[k + 1];
        if k + 1 < p {
            m[(k, k + 1)] = -values[k + 1];
            m[(k + 1, k)] = -values[k + 1];
        }
    }
    m
}

fn diag(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(values))
}

fn block_2x2(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let p = a.nrows();
    let mut m = DMatrix::zeros(2 * p, 2 * p);
    m.view_mut((0, 0), (p, p)).copy_from(a);
    m.view_mut((0, p), (p, p)).copy_from(b);
    m.view_mut((p, 0), (p, p)).copy_from(c);
    m.view_mut((p, p), (p, p)).copy_from(d);
    m
}

/// `[0, X]` as a `p × 2p` matrix.
fn right_half(x: &DMatrix<f64>) -> DMatrix<f64> {
    let p = x.nrows();
    let mut m = DMatrix::zeros(p, 2 * p);
    m.view_mut((0, p), (p, p)).copy_from(x);
    m
}

/// Assembles both coordinate systems from the blocks of the two drifts.
///
/// `inertia_inv` is `X⁻¹` and `inertia_inv_sqrt` is `X^{-1/2}`.
#[allow(clippy::too_many_arguments)]
fn assemble(
    q: usize,
    p: usize,
    a_raw: DMatrix<f64>,
    s: DMatrix<f64>,
    transform: DMatrix<f64>,
    inertia_inv: &DMatrix<f64>,
    inertia_inv_sqrt: &DMatrix<f64>,
    coupling: &PairParams,
    coupling_name: &str,
) -> Result<OscillatorArray> {
    let mut raw = ArraySpec::new(q, a_raw, TimeDomain::Continuous)?;
    let mut transformed = ArraySpec::new(q, s, TimeDomain::Continuous)?;
    let mut raw_gains = BTreeMap::new();
    for (&(i, j), values) in coupling {
        if i >= q || j >= q || i == j {
            return Err(Error::InvalidArgument(format!("{coupling_name} pair ({}, {}) invalid for q = {q}", i + 1, j + 1)));
        }
        if values.len() != p {
            return Err(Error::dims(&format!("{coupling_name}_{}{}", i + 1, j + 1), p, values.len()));
        }
        if let Some(k) = values.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveParameter(format!(
                "{coupling_name}_{}{}[{}] = {} must be nonnegative",
                i + 1,
                j + 1,
                k + 1,
                values[k]
            )));
        }
        if values.iter().all(|&v| v == 0.0) {
            continue;
        }
        let root = diag(&values.iter().map(|v| v.sqrt()).collect::<Vec<_>>());
        let c_raw = right_half(&root);
        let mut g_raw = DMatrix::zeros(2 * p, p);
        g_raw.view_mut((p, 0), (p, p)).copy_from(&(inertia_inv * &root));
        raw.set_symmetric_output(i, j, c_raw)?;
        raw_gains.insert((i, j), g_raw.clone());
        raw_gains.insert((j, i), g_raw);
        transformed.set_symmetric_output(i, j, right_half(&(&root * inertia_inv_sqrt)))?;
    }
    let transformed_gains = GainSet::direct(&transformed);
    Ok(OscillatorArray {
        raw,
        raw_gains: GainSet::new(RecipeKind::External, raw_gains),
        transformed,
        transformed_gains,
        transform,
    })
}

/// `p` masses `m`, `p + 1` springs `k` (wall, between masses, wall) and
/// per-pair dampers `b_ij` between corresponding masses.
pub fn build_mass_spring(masses: &[f64], springs: &[f64], dampers: &PairParams, q: usize) -> Result<OscillatorArray> {
    let p = masses.len();
    if p == 0 || springs.len() != p + 1 {
        return Err(Error::dims("springs", p + 1, springs.len()));
    }
    positive("m", masses)?;
    positive("k", springs)?;
    let m = diag(masses);
    let k = chain_matrix(springs);
    let m_inv = diag(&masses.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
    let k_half = spd_sqrt(&k)?;
    let m_half = spd_sqrt(&m)?;
    let m_inv_half = spd_inv_sqrt(&m)?;
    let zero = DMatrix::zeros(p, p);
    let eye = DMatrix::identity(p, p);
    let a_raw = block_2x2(&zero, &eye, &(-(&m_inv * &k)), &zero);
    let upper = &k_half * &m_inv_half;
    let s = block_2x2(&zero, &upper, &(-upper.transpose()), &zero);
    let t = crate::linalg::block_diag(&k_half, &m_half);
    assemble(q, p, a_raw, s, t, &m_inv, &m_inv_half, dampers, "b")
}

/// `p + 1` capacitors `C` (ground, between nodes, ground), `p` inductors
/// `L` and per-pair conductances `g_ij` between corresponding nodes.
pub fn build_lc(capacitors: &[f64], inductors: &[f64], conductances: &PairParams, q: usize) -> Result<OscillatorArray> {
    let p = inductors.len();
    if p == 0 || capacitors.len() != p + 1 {
        return Err(Error::dims("capacitors", p + 1, capacitors.len()));
    }
    positive("C", capacitors)?;
    positive("L", inductors)?;
    let c = chain_matrix(capacitors);
    let l_inv = diag(&inductors.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
    let c_inv = c.clone().cholesky().ok_or(Error::NotSpd)?.inverse();
    let c_half = spd_sqrt(&c)?;
    let c_inv_half = spd_inv_sqrt(&c)?;
    let l_inv_half = diag(&inductors.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    let zero = DMatrix::zeros(p, p);
    let eye = DMatrix::identity(p, p);
    let a_raw = block_2x2(&zero, &eye, &(-(&c_inv * &l_inv)), &zero);
    let upper = &l_inv_half * &c_inv_half;
    let s = block_2x2(&zero, &upper, &(-upper.transpose()), &zero);
    let t = crate::linalg::block_diag(&l_inv_half, &c_half);
    assemble(q, p, a_raw, s, t, &c_inv, &c_inv_half, conductances, "g")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mass_no_coupling() {
        let arr = build_mass_spring(&[1.0], &[1.0, 1.0], &PairParams::new(), 2).unwrap();
        let r2 = 2f64.sqrt();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, r2, -r2, 0.0]);
        assert!((arr.transformed.a() - expected).norm() < 1e-14);
        assert_eq!(arr.raw.a(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, 0.0]));
        assert_eq!(arr.raw.outputs().count(), 0);
    }

    #[test]
    fn single_node_lc() {
        let arr = build_lc(&[1.0, 1.0], &[1.0], &PairParams::new(), 2).unwrap();
        let h = 0.5f64.sqrt();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, h, -h, 0.0]);
        assert!((arr.transformed.a() - expected).norm() < 1e-14);
    }

    #[test]
    fn transform_conjugates_drift() {
        let dampers = PairParams::from([((0, 1), vec![0.3, 0.0])]);
        let arr = build_mass_spring(&[1.0, 2.0], &[1.0, 0.5, 1.5], &dampers, 2).unwrap();
        let t = &arr.transform;
        let t_inv = t.clone().try_inverse().unwrap();
        assert!((t * arr.raw.a() * &t_inv - arr.transformed.a()).norm() < 1e-12);
        let s = arr.transformed.a();
        assert!((s + s.transpose()).norm() <= 1e-10 * s.norm());
        // Coupling blocks agree through T.
        let g = arr.raw_gains.gain(0, 1).unwrap() * arr.raw.output(0, 1).unwrap();
        let h = arr.transformed.output(0, 1).unwrap();
        assert!((t * g * &t_inv - h.transpose() * h).norm() < 1e-12);
    }

    #[test]
    fn lc_transform_conjugates_drift() {
        let conductances = PairParams::from([((0, 1), vec![0.2, 0.7])]);
        let arr = build_lc(&[1.0, 2.0, 0.5], &[1.5, 0.8], &conductances, 2).unwrap();
        let t = &arr.transform;
        let t_inv = t.clone().try_inverse().unwrap();
        assert!((t * arr.raw.a() * &t_inv - arr.transformed.a()).norm() < 1e-12);
        let g = arr.raw_gains.gain(1, 0).unwrap() * arr.raw.output(1, 0).unwrap();
        let h = arr.transformed.output(1, 0).unwrap();
        assert!((t * g * &t_inv - h.transpose() * h).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            build_mass_spring(&[1.0, -1.0], &[1.0, 1.0, 1.0], &PairParams::new(), 2),
            Err(Error::NonPositiveParameter(_))
        ));
        assert!(matches!(
            build_lc(&[1.0, 0.0], &[1.0], &PairParams::new(), 2),
            Err(Error::NonPositiveParameter(_))
        ));
        let bad = PairParams::from([((0, 1), vec![-0.1])]);
        assert!(build_mass_spring(&[1.0], &[1.0, 1.0], &bad, 2).is_err());
        assert!(build_mass_spring(&[1.0], &[1.0], &PairParams::new(), 2).is_err());
    }
}
