use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{graph_hypotheses, require_domain, Evidence, GainRecipe, GainSet, RecipeKind, RecipeParams};
use crate::error::{Error, Result};
use crate::laplacian::{laplacian_from_projected_outputs, MatrixWeightedLaplacian};
use crate::linalg;
use crate::model::{ArraySpec, TimeDomain};
use crate::spectral::{neutral_split, pbh_detectable, SpectralSplit};
use crate::tol::Tolerances;

/// Largest `ε̄` with `L ⪰ ε̄ L²`, i.e. `1/λ_max(L)`; `+∞` for `L = 0`.
pub fn eps_bar(lw: &MatrixWeightedLaplacian, tol: &Tolerances) -> Result<f64> {
    if !lw.is_symmetric(tol.symmetry_atol) {
        return Err(Error::NotSymmetric("Laplacian".into()));
    }
    let top = linalg::lambda_max(lw.matrix());
    if top.is_finite() && top > tol.psd_rel * linalg::scale_of(lw.matrix()) {
        Ok(1.0 / top)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Checks the hypotheses in order: symmetric outputs, connected graph,
/// neutral stability, per-edge detectability. With `force`, only neutral
/// stability is enforced and the rest become warnings.
fn checked_split(spec: &ArraySpec, force: bool, tol: &Tolerances) -> Result<(SpectralSplit, Vec<String>)> {
    let mut warnings = graph_hypotheses(spec, force, tol)?;
    let mut fail = |e: Error| -> Result<()> {
        if force {
            warnings.push(format!("forced: {e}"));
            Ok(())
        } else {
            Err(e)
        }
    };
    let split = neutral_split(spec.a(), spec.domain(), tol)?;
    for ((i, j), c) in spec.outputs() {
        if i != j && c.norm() > tol.edge_tol && !pbh_detectable(c, spec.a(), spec.domain(), tol) {
            fail(Error::NotDetectable(i, j))?;
        }
    }
    Ok((split, warnings))
}

fn assemble(spec: &ArraySpec, split: &SpectralSplit, left: &DMatrix<f64>) -> BTreeMap<(usize, usize), DMatrix<f64>> {
    spec.outputs()
        .filter(|&((i, j), _)| i != j)
        .map(|(e, c)| {
            let g = if split.n1() == 0 {
                DMatrix::zeros(spec.n(), c.nrows())
            } else {
                left * c.transpose()
            };
            (e, g)
        })
        .collect()
}

fn build(spec: &ArraySpec, force: bool, tol: &Tolerances) -> Result<GainSet> {
    let (split, warnings) = checked_split(spec, force, tol)?;
    let u = &split.u;
    let (recipe, left) = match spec.domain() {
        TimeDomain::Continuous => (RecipeKind::Alg1Ct, u * u.transpose()),
        TimeDomain::Discrete => (RecipeKind::Alg2Dt, u * &split.marginal * u.transpose()),
    };
    let gains = assemble(spec, &split, &left);
    let eps_bar = match spec.domain() {
        TimeDomain::Continuous => None,
        TimeDomain::Discrete if split.n1() == 0 => Some(f64::INFINITY),
        TimeDomain::Discrete => {
            let reduced = laplacian_from_projected_outputs(spec, u)?;
            match eps_bar(&reduced, tol) {
                Ok(e) => Some(e),
                // Asymmetric outputs under `force`: fall back to the
                // symmetric part's bound.
                Err(Error::NotSymmetric(_)) if force => {
                    let sym = linalg::symmetrize(reduced.matrix());
                    let top = linalg::lambda_max(&sym);
                    Some(if top > 0.0 { 1.0 / top } else { f64::INFINITY })
                }
                Err(e) => return Err(e),
            }
        }
    };
    Ok(GainSet {
        recipe,
        gains,
        alpha: None,
        eps_bar,
        evidence: Some(Evidence::Split(split)),
        warnings,
    })
}

/// `G_ij = U Uᵀ C_ijᵀ` for a neutrally stable continuous-time array.
pub fn gains_ct_neutral(spec: &ArraySpec, tol: &Tolerances) -> Result<GainSet> {
    require_domain(spec, TimeDomain::Continuous, "alg1")?;
    build(spec, false, tol)
}

/// `G_ij = U Q Uᵀ C_ijᵀ` and `ε̄` for a neutrally stable discrete-time array.
pub fn gains_dt_neutral(spec: &ArraySpec, tol: &Tolerances) -> Result<GainSet> {
    require_domain(spec, TimeDomain::Discrete, "alg2")?;
    build(spec, false, tol)
}

pub struct NeutralRecipe {
    domain: TimeDomain,
}

impl NeutralRecipe {
    pub fn continuous() -> Self {
        Self {
            domain: TimeDomain::Continuous,
        }
    }

    pub fn discrete() -> Self {
        Self {
            domain: TimeDomain::Discrete,
        }
    }
}

impl GainRecipe for NeutralRecipe {
    fn name(&self) -> &'static str {
        match self.domain {
            TimeDomain::Continuous => "alg1",
            TimeDomain::Discrete => "alg2",
        }
    }

    fn kind(&self) -> RecipeKind {
        match self.domain {
            TimeDomain::Continuous => RecipeKind::Alg1Ct,
            TimeDomain::Discrete => RecipeKind::Alg2Dt,
        }
    }

    fn summary(&self) -> &'static str {
        match self.domain {
            TimeDomain::Continuous => "G_ij = U U^T C_ij^T for neutrally stable continuous-time A",
            TimeDomain::Discrete => "G_ij = U Q U^T C_ij^T for neutrally stable discrete-time A",
        }
    }

    fn synthesize(&self, spec: &ArraySpec, params: &RecipeParams, tol: &Tolerances) -> Result<GainSet> {
        require_domain(spec, self.domain, self.name())?;
        build(spec, params.force, tol)
    }
}
