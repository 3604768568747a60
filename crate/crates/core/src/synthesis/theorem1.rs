use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{condition14, find_common_p, graph_hypotheses, require_domain, verify_cl_detectability, ClCertificate};
use super::{Evidence, GainRecipe, GainSet, RecipeKind, RecipeParams};
use crate::error::{Error, Result};
use crate::model::{build_graph, normalized_laplacian, ArraySpec, TimeDomain};
use crate::tol::Tolerances;

/// `max(1/(2q), 1)`.
pub fn default_alpha(q: usize) -> f64 {
    (0.5 / q as f64).max(1.0)
}

fn assemble(spec: &ArraySpec, cert: ClCertificate, alpha: f64, tol: &Tolerances) -> Result<GainSet> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveParameter(format!("alpha = {alpha}")));
    }
    let p_inv = cert.p.clone().cholesky().ok_or(Error::SingularP)?.inverse();
    let mut gains = BTreeMap::new();
    for ((i, j), c) in spec.outputs() {
        if i != j {
            gains.insert((i, j), &p_inv * c.transpose() * alpha);
        }
    }
    let mut warnings = Vec::new();
    let floor = 0.5 / spec.q() as f64;
    if alpha < floor {
        let msg = format!("alpha = {alpha} is below 1/(2q) = {floor}");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let graph = build_graph(spec, tol.edge_tol);
    let lambda2 = normalized_laplacian(&graph, tol).ok().map(|g| g.lambda2);
    let c14 = lambda2.map(|l2| condition14(&cert, l2));
    Ok(GainSet {
        recipe: RecipeKind::Theorem1,
        gains,
        alpha: Some(alpha),
        eps_bar: None,
        evidence: Some(Evidence::ClDetectability {
            certificate: cert,
            lambda2,
            condition14: c14,
        }),
        warnings,
    })
}

/// `G_ij = α P⁻¹ C_ijᵀ` for a `P` that certifies CL-detectability.
pub fn gains_theorem1(spec: &ArraySpec, p: &DMatrix<f64>, alpha: f64, tol: &Tolerances) -> Result<GainSet> {
    let cert = verify_cl_detectability(spec, p, tol)?;
    if !cert.feasible {
        return Err(Error::Infeasible { best: Box::new(cert) });
    }
    assemble(spec, cert, alpha, tol)
}

pub struct Theorem1Recipe;

impl GainRecipe for Theorem1Recipe {
    fn name(&self) -> &'static str {
        "theorem1"
    }

    fn kind(&self) -> RecipeKind {
        RecipeKind::Theorem1
    }

    fn summary(&self) -> &'static str {
        "G_ij = alpha P^-1 C_ij^T with a common Lyapunov certificate P"
    }

    fn synthesize(&self, spec: &ArraySpec, params: &RecipeParams, tol: &Tolerances) -> Result<GainSet> {
        require_domain(spec, TimeDomain::Continuous, self.name())?;
        let mut warnings = graph_hypotheses(spec, params.force, tol)?;
        let alpha = params.alpha.unwrap_or_else(|| default_alpha(spec.q()));
        let mut forced = None;
        let cert = match &params.p {
            Some(p) => verify_cl_detectability(spec, p, tol)?,
            None => match find_common_p(spec, &params.find, tol) {
                Ok(c) => c,
                Err(Error::Infeasible { best }) if params.force => *best,
                Err(e) => return Err(e),
            },
        };
        if !cert.feasible {
            if !params.force {
                return Err(Error::Infeasible { best: Box::new(cert) });
            }
            forced = Some(format!("forced: P is not a CL-detectability certificate (eps = {:.4e})", cert.eps));
        }
        let mut set = assemble(spec, cert, alpha, tol)?;
        warnings.extend(forced);
        if let Some(Evidence::ClDetectability { condition14: Some(c14), .. }) = &set.evidence {
            if !c14.holds {
                // The gains are still well defined; synchronization is just
                // no longer guaranteed.
                warnings.push(format!("condition14 fails (delta = {:.4e})", c14.delta));
            }
        }
        set.warnings.extend(warnings);
        Ok(set)
    }
}
