//! Common-Lyapunov detectability: one SPD `P` with `AᵀP + PA < C_ijᵀC_ij`
//! on every nonzero edge.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ArraySpec, Edge};
use crate::spectral::{classify_stability, StabilityKind};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct ClCertificate {
    pub p: DMatrix<f64>,
    /// `min_edges λ_min(C_ijᵀC_ij - AᵀP - PA)`; `+∞` with no edges.
    pub eps: f64,
    /// `λ_max(AᵀP + PA)`.
    pub sigma: f64,
    pub feasible: bool,
    /// `λ_max(AᵀP + PA - C_ijᵀC_ij)` per nonzero edge.
    pub edge_margins: Vec<(Edge, f64)>,
}

impl ClCertificate {
    /// Largest per-edge `λ_max(AᵀP + PA - C_ijᵀC_ij)`, i.e. `-eps`.
    pub fn worst_margin(&self) -> f64 {
        self.edge_margins.iter().map(|&(_, m)| m).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Threshold for a floating-point strict inequality.
pub fn strict_tol(a: &DMatrix<f64>, p: &DMatrix<f64>, tol: &Tolerances) -> f64 {
    tol.strict_rel * (1.0 + a.norm() * p.norm())
}

fn nonzero_edge_weights(spec: &ArraySpec, tol: &Tolerances) -> Vec<(Edge, DMatrix<f64>)> {
    spec.outputs()
        .filter(|&((i, j), c)| i != j && c.norm() > tol.edge_tol)
        .map(|(e, c)| (e, c.transpose() * c))
        .collect()
}

fn evaluate(a: &DMatrix<f64>, weights: &[(Edge, DMatrix<f64>)], p: &DMatrix<f64>, tol: &Tolerances) -> ClCertificate {
    let lyap = a.transpose() * p + p * a;
    let edge_margins: Vec<(Edge, f64)> =
        weights.iter().map(|(e, w)| (*e, linalg::lambda_max(&(&lyap - w)))).collect();
    let eps = edge_margins.iter().map(|&(_, m)| -m).fold(f64::INFINITY, f64::min);
    let sigma = linalg::lambda_max(&lyap);
    let feasible = linalg::lambda_min(p) > 0.0 && eps > strict_tol(a, p, tol);
    ClCertificate {
        p: p.clone(),
        eps,
        sigma,
        feasible,
        edge_margins,
    }
}

/// Evaluates a candidate `P` against every nonzero edge.
pub fn verify_cl_detectability(spec: &ArraySpec, p: &DMatrix<f64>, tol: &Tolerances) -> Result<ClCertificate> {
    let n = spec.n();
    if p.shape() != (n, n) {
        return Err(Error::dims("P", format!("{n}x{n}"), format!("{}x{}", p.nrows(), p.ncols())));
    }
    if !linalg::is_symmetric(p, tol.symmetry_atol * (1.0 + p.amax())) {
        return Err(Error::NotSymmetric("P".into()));
    }
    let weights = nonzero_edge_weights(spec, tol);
    Ok(evaluate(spec.a(), &weights, &linalg::symmetrize(p), tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindOptions {
    pub max_iters: usize,
    pub p_floor: f64,
    pub p_ceil: f64,
    /// Step length relative to `‖P‖_F`, decaying as `1/√(k+1)`.
    pub step0: f64,
    /// Keep iterating until `eps ≥ margin_fraction · min_edges λ_min(C_ijᵀC_ij)`.
    /// A bare feasible point often leaves the closed loop barely contracting.
    pub margin_fraction: f64,
    pub seed: u64,
    /// Random SPD restarts after the first run fails.
    pub restarts: usize,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            p_floor: 1e-6,
            p_ceil: 1e6,
            step0: 0.1,
            margin_fraction: 0.25,
            seed: 0,
            restarts: 3,
        }
    }
}

fn project(p: &DMatrix<f64>, opts: &FindOptions) -> DMatrix<f64> {
    let (values, vectors) = linalg::sym_eigen(p);
    let clamped = nalgebra::DVector::from_iterator(values.len(), values.iter().map(|v| v.clamp(opts.p_floor, opts.p_ceil)));
    linalg::symmetrize(&(&vectors * DMatrix::from_diagonal(&clamped) * vectors.transpose()))
}

/// Value `max_edges λ_max(AᵀP + PA - W)` and a subgradient `A v vᵀ + v vᵀ Aᵀ`.
fn objective(a: &DMatrix<f64>, weights: &[(Edge, DMatrix<f64>)], p: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let lyap = a.transpose() * p + p * a;
    let mut best = f64::NEG_INFINITY;
    let mut grad = DMatrix::zeros(p.nrows(), p.ncols());
    for (_, w) in weights {
        let (values, vectors) = linalg::sym_eigen(&(&lyap - w));
        let top = *values.last().expect("nonempty");
        if top > best {
            best = top;
            let v = vectors.column(vectors.ncols() - 1).into_owned();
            let vvt = &v * v.transpose();
            grad = a * &vvt + &vvt * a.transpose();
        }
    }
    (best, grad)
}

fn descend(
    a: &DMatrix<f64>,
    weights: &[(Edge, DMatrix<f64>)],
    start: DMatrix<f64>,
    target: f64,
    opts: &FindOptions,
    tol: &Tolerances,
) -> ClCertificate {
    let mut p = project(&start, opts);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for k in 0..opts.max_iters {
        let (f, g) = objective(a, weights, &p);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, p.clone()));
        }
        if -f >= target.max(strict_tol(a, &p, tol)) {
            log::debug!("common P found after {k} iterations");
            break;
        }
        let gnorm = g.norm();
        if gnorm == 0.0 {
            break;
        }
        let step = opts.step0 * p.norm() / ((k + 1) as f64).sqrt();
        p = project(&(&p - g * (step / gnorm)), opts);
    }
    let (_, p) = best.expect("at least one iteration");
    evaluate(a, weights, &p, tol)
}

/// Projected subgradient search for a common `P`.
///
/// Starts from the Lyapunov solution of `AᵀP + PA = -I`, scaled to unit
/// spectral norm, when `A` is Hurwitz
/// and from `I` otherwise, then from seeded random SPD matrices. A returned
/// certificate has been re-evaluated from scratch and is feasible.
pub fn find_common_p(spec: &ArraySpec, opts: &FindOptions, tol: &Tolerances) -> Result<ClCertificate> {
    let a = spec.a();
    let n = spec.n();
    let weights = nonzero_edge_weights(spec, tol);
    if weights.is_empty() {
        return Err(Error::InvalidArgument("CL-detectability needs at least one nonzero output".into()));
    }
    let target = opts.margin_fraction
        * weights
            .iter()
            .map(|(_, w)| linalg::lambda_min(w))
            .fold(f64::INFINITY, f64::min)
            .max(0.0);

    let hurwitz = classify_stability(a, crate::model::TimeDomain::Continuous, tol).kind == StabilityKind::Stable;
    // Every positive multiple of the Lyapunov solution is feasible; its
    // scale only sets the effective gain of αP⁻¹Cᵀ, so fix ‖P‖₂ = 1.
    let first = if hurwitz {
        linalg::lyapunov(a, &DMatrix::identity(n, n))
            .map(|p| &p / linalg::lambda_max(&p))
            .unwrap_or_else(|_| DMatrix::identity(n, n))
    } else {
        DMatrix::identity(n, n)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut overall: Option<ClCertificate> = None;
    for attempt in 0..=opts.restarts {
        let start = if attempt == 0 {
            first.clone()
        } else {
            let x = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
            &x * x.transpose() / n as f64 + DMatrix::<f64>::identity(n, n) * 0.1
        };
        let cert = descend(a, &weights, start, target, opts, tol);
        let verified = verify_cl_detectability(spec, &cert.p, tol)?;
        if verified.feasible {
            return Ok(verified);
        }
        if overall.as_ref().is_none_or(|o| verified.eps > o.eps) {
            overall = Some(verified);
        }
    }
    Err(Error::Infeasible {
        best: Box::new(overall.expect("at least one attempt")),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition14 {
    /// `eps - (1/λ₂ - 1) · sigma`.
    pub delta: f64,
    pub holds: bool,
}

pub fn condition14(cert: &ClCertificate, lambda2: f64) -> Condition14 {
    let delta = cert.eps - (1.0 / lambda2 - 1.0) * cert.sigma;
    Condition14 {
        delta,
        holds: delta > 0.0,
    }
}
