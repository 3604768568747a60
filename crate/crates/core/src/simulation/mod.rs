//! Closed-loop arrays, trajectories and synchronization metrics.

mod anchor;
mod builders;
mod examples;
mod sweep;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

pub use anchor::{asymptotic_anchor, ForcingTrace};
pub use builders::{build_lc, build_mass_spring, OscillatorArray, PairParams};
pub use examples::{builtin_example, BuiltinExample, BUILTIN_NAMES};
pub use sweep::{log_spaced, rho_sweep, sync_modes, SweepPoint, SyncModes};

use crate::error::{Error, Result};
use crate::laplacian::sync_error;
use crate::model::{build_graph, gamma_matrix, ArraySpec, Edge, TimeDomain};
use crate::synthesis::GainSet;

/// Traces longer than this are subsampled.
pub const MAX_SAMPLES: usize = 100_000;

/// `sync_error(end) / sync_error(0)` at or below this counts as converged.
pub const CONVERGED_RATIO: f64 = 1e-4;

/// At or above this counts as diverged.
pub const DIVERGED_RATIO: f64 = 10.0;

/// States may grow to `BOUND_FACTOR · ‖x0‖` before the run is abandoned.
pub const BOUND_FACTOR: f64 = 1e8;

/// `ẋ = Ψx` (continuous) or `x⁺ = Mx` (discrete) for the stacked state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    system_matrix: DMatrix<f64>,
    q: usize,
    n: usize,
    domain: TimeDomain,
    epsilon: Option<f64>,
    /// `Γ ⊗ I_n` for the disagreement metric.
    disagreement_form: DMatrix<f64>,
}

/// `Σ_j G_ij C_ij (x_i - x_j)` as a `qn × qn` matrix.
fn coupling_matrix(spec: &ArraySpec, gains: &BTreeMap<Edge, DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let (q, n) = (spec.q(), spec.n());
    let mut k = DMatrix::zeros(q * n, q * n);
    for (&(i, j), g) in gains {
        if i == j {
            continue;
        }
        let c = spec.output(i, j).ok_or_else(|| {
            Error::dims(&format!("gain G_{}{}", i + 1, j + 1), "a matching output", "no output")
        })?;
        if g.shape() != (n, c.nrows()) {
            return Err(Error::dims(
                &format!("gain G_{}{}", i + 1, j + 1),
                format!("{n}x{}", c.nrows()),
                format!("{}x{}", g.nrows(), g.ncols()),
            ));
        }
        if c.ncols() != n {
            return Err(Error::dims(&format!("C_{}{}", i + 1, j + 1), format!("{n} columns"), c.ncols()));
        }
        let gc = g * c;
        crate::linalg::add_block(&mut k, i, i, &gc, 1.0);
        crate::linalg::add_block(&mut k, i, j, &gc, -1.0);
    }
    Ok(k)
}

impl ClosedLoop {
    /// Continuous time: `Ψ = [I ⊗ A] - K`. Discrete time: `M = [I ⊗ A] - εK`
    /// with `ε` defaulting to the gain set's `ε̄`.
    pub fn new(spec: &ArraySpec, gains: &GainSet, epsilon: Option<f64>) -> Result<Self> {
        let epsilon = match spec.domain() {
            TimeDomain::Continuous => None,
            TimeDomain::Discrete => Some(epsilon.unwrap_or_else(|| gains.default_epsilon())),
        };
        Self::from_gains(spec, &gains.gains, epsilon)
    }

    pub fn from_gains(spec: &ArraySpec, gains: &BTreeMap<Edge, DMatrix<f64>>, epsilon: Option<f64>) -> Result<Self> {
        if let Some(e) = epsilon {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::NonPositiveParameter(format!("epsilon = {e}")));
            }
        }
        let (q, n) = (spec.q(), spec.n());
        let k = coupling_matrix(spec, gains)?;
        let scale = match spec.domain() {
            TimeDomain::Continuous => 1.0,
            TimeDomain::Discrete => epsilon.unwrap_or(1.0),
        };
        let system_matrix = DMatrix::<f64>::identity(q, q).kronecker(spec.a()) - k * scale;
        let graph = build_graph(spec, crate::tol::Tolerances::default().edge_tol);
        let disagreement_form = gamma_matrix(&graph).kronecker(&DMatrix::<f64>::identity(n, n));
        Ok(Self {
            system_matrix,
            q,
            n,
            domain: spec.domain(),
            epsilon: if spec.domain() == TimeDomain::Discrete { Some(scale) } else { None },
            disagreement_form,
        })
    }

    /// A closed loop given directly by its matrix, with the complete graph
    /// used for the disagreement metric.
    pub fn from_matrix(system_matrix: DMatrix<f64>, q: usize, n: usize, domain: TimeDomain) -> Result<Self> {
        if system_matrix.shape() != (q * n, q * n) {
            return Err(Error::dims(
                "system matrix",
                format!("{0}x{0}", q * n),
                format!("{}x{}", system_matrix.nrows(), system_matrix.ncols()),
            ));
        }
        let graph = crate::model::NetworkGraph::from_edges(q, (0..q).flat_map(|i| (0..q).map(move |j| (i, j))));
        Ok(Self {
            system_matrix,
            q,
            n,
            domain,
            epsilon: None,
            disagreement_form: gamma_matrix(&graph).kronecker(&DMatrix::<f64>::identity(n, n)),
        })
    }

    pub fn system_matrix(&self) -> &DMatrix<f64> {
        &self.system_matrix
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// `xᵀ [Γ ⊗ I] x`.
    pub fn disagreement(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.disagreement_form * x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub sync_error: Vec<f64>,
    pub disagreement: Vec<f64>,
    /// `max_t ‖x(t)‖ ≤ 1e8 · ‖x0‖` over the recorded run.
    pub bounded: bool,
}

impl SimTrace {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            sync_error: Vec::new(),
            disagreement: Vec::new(),
            bounded: true,
        }
    }

    fn record(&mut self, cl: &ClosedLoop, t: f64, x: &DVector<f64>) {
        self.times.push(t);
        self.sync_error.push(sync_error(x, cl.q, cl.n));
        self.disagreement.push(cl.disagreement(x));
        self.states.push(x.clone());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }

    /// `sync_error(end) / max(sync_error(0), 1e-12)`.
    pub fn sync_ratio(&self) -> f64 {
        match (self.sync_error.first(), self.sync_error.last()) {
            (Some(&first), Some(&last)) => last / first.max(1e-12),
            _ => f64::NAN,
        }
    }

    /// Finite-horizon reading of the asymptotic claim. A run that starts and
    /// stays on the synchronization subspace (relative to the state size)
    /// counts as converged.
    pub fn verdict(&self) -> Verdict {
        if !self.bounded {
            return Verdict::Diverged;
        }
        let ratio = self.sync_ratio();
        let (Some(x0), Some(xe)) = (self.states.first(), self.states.last()) else {
            return Verdict::Inconclusive;
        };
        let size = x0.norm().max(xe.norm());
        let last = *self.sync_error.last().expect("nonempty");
        if ratio <= CONVERGED_RATIO || last <= 1e-10 * size {
            Verdict::Converged
        } else if ratio >= DIVERGED_RATIO {
            Verdict::Diverged
        } else {
            Verdict::Inconclusive
        }
    }
}

fn check_x0(cl: &ClosedLoop, x0: &DVector<f64>) -> Result<()> {
    if x0.len() != cl.q * cl.n {
        return Err(Error::dims("x0", cl.q * cl.n, x0.len()));
    }
    Ok(())
}

fn run(cl: &ClosedLoop, x0: &DVector<f64>, steps: usize, dt: f64, step_map: &DMatrix<f64>) -> Result<SimTrace> {
    let cap = BOUND_FACTOR * x0.norm();
    let stride = (steps + 1).div_ceil(MAX_SAMPLES).max(1);
    let mut trace = SimTrace::new();
    let mut x = x0.clone();
    trace.record(cl, 0.0, &x);
    for k in 1..=steps {
        x = step_map * &x;
        let t = k as f64 * dt;
        let escaped = !x.iter().all(|v| v.is_finite()) || x.norm() > cap;
        if escaped || k % stride == 0 || k == steps {
            trace.record(cl, t, &x);
        }
        if escaped {
            trace.bounded = false;
            return Err(Error::Diverged {
                at: t,
                trace: Box::new(trace),
            });
        }
    }
    Ok(trace)
}

/// Classical fourth-order Runge-Kutta on `ẋ = Ψx`.
///
/// For a linear autonomous field one RK4 step is exactly multiplication by
/// `I + hΨ + (hΨ)²/2 + (hΨ)³/6 + (hΨ)⁴/24`, which is formed once. The step
/// is adjusted to `horizon / round(horizon / h)` so the run ends on `horizon`.
pub fn simulate_ct(cl: &ClosedLoop, x0: &DVector<f64>, horizon: f64, h: f64) -> Result<SimTrace> {
    check_x0(cl, x0)?;
    if !(h > 0.0) || !(horizon >= h) {
        return Err(Error::NonPositiveParameter(format!("need h > 0 and horizon >= h, got h = {h}, horizon = {horizon}")));
    }
    let steps = (horizon / h).round().max(1.0) as usize;
    let dt = horizon / steps as f64;
    run(cl, x0, steps, dt, &rk4_propagator(&cl.system_matrix, dt))
}

/// One RK4 step of `ẋ = Ψx` as a matrix.
pub fn rk4_propagator(psi: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let n = psi.nrows();
    let hp = psi * h;
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=4 {
        term = &term * &hp / k as f64;
        result += &term;
    }
    result
}

/// Exact iteration `x(k+1) = M x(k)` for `k < steps`.
pub fn simulate_dt(cl: &ClosedLoop, x0: &DVector<f64>, steps: usize) -> Result<SimTrace> {
    check_x0(cl, x0)?;
    if steps == 0 {
        return Err(Error::NonPositiveParameter("step count K".into()));
    }
    run(cl, x0, steps, 1.0, &cl.system_matrix)
}

/// Dispatches on the closed loop's time domain; `horizon` counts steps in
/// discrete time and `h` is then ignored.
pub fn simulate(cl: &ClosedLoop, x0: &DVector<f64>, horizon: f64, h: f64) -> Result<SimTrace> {
    match cl.domain {
        TimeDomain::Continuous => simulate_ct(cl, x0, horizon, h),
        TimeDomain::Discrete => simulate_dt(cl, x0, horizon.round().max(0.0) as usize),
    }
}
