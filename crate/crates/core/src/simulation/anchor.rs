//! The state `v` whose free motion `e^{At}v` a decaying-forced trajectory
//! approaches.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::TimeDomain;
use crate::spectral::neutral_split;
use crate::tol::Tolerances;

/// Samples `w(t_k)` of an exponentially decaying input on a uniform grid
/// `t_k = k · step` (`step` is ignored in discrete time).
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTrace {
    pub step: f64,
    pub samples: Vec<DVector<f64>>,
}

/// For `ẋ = Ax + w` (or `x⁺ = Ax + w`) with neutrally stable `A`, returns
/// `v = U (z₁(0) + a)` with `z₁ = U†x` and
/// `a = ∫₀^∞ e^{-Sτ} U†w(τ) dτ` (trapezoid rule over the samples), or
/// `a = Σ_l Q^{-1-l} U†w(l)` in discrete time.
pub fn asymptotic_anchor(
    a: &DMatrix<f64>,
    domain: TimeDomain,
    x0: &DVector<f64>,
    forcing: &ForcingTrace,
    tol: &Tolerances,
) -> Result<DVector<f64>> {
    let n = a.nrows();
    if x0.len() != n {
        return Err(Error::dims("x0", n, x0.len()));
    }
    if let Some(w) = forcing.samples.iter().find(|w| w.len() != n) {
        return Err(Error::dims("forcing sample", n, w.len()));
    }
    let split = neutral_split(a, domain, tol)?;
    if split.n1() == 0 {
        return Ok(DVector::zeros(n));
    }
    let k = split.n1();
    let mut acc = &split.u_dag * x0;
    match domain {
        TimeDomain::Continuous => {
            let h = forcing.step;
            if !(h > 0.0) {
                return Err(Error::NonPositiveParameter(format!("forcing step = {h}")));
            }
            let back = (&split.marginal * -h).exp();
            let mut power = DMatrix::<f64>::identity(k, k);
            let last = forcing.samples.len().saturating_sub(1);
            for (idx, w) in forcing.samples.iter().enumerate() {
                let weight = if idx == 0 || idx == last { 0.5 * h } else { h };
                acc += &power * (&split.u_dag * w) * weight;
                power = &power * &back;
            }
        }
        TimeDomain::Discrete => {
            // Q is orthogonal, so Q⁻¹ = Qᵀ.
            let back = split.marginal.transpose();
            let mut power = back.clone();
            for w in &forcing.samples {
                acc += &power * (&split.u_dag * w);
                power = &power * &back;
            }
        }
    }
    Ok(&split.u * acc)
}
