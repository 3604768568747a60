//! Numerical thresholds.
//!
//! Exact-arithmetic conditions (a pair is detectable, an eigenvalue lies on
//! the imaginary axis, an inequality is strict) become threshold tests in
//! floating point. Every threshold used by the library lives here so a run
//! can be reproduced from a single value.
//!
//! The `MATSYNC_TOL` environment variable may override any field with a
//! comma separated list, e.g. `MATSYNC_TOL="axis_rel=1e-7,edge_tol=1e-10"`.
//! It is ignored unless [`Tolerances::from_env`] is called.

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "MATSYNC_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute Frobenius-norm threshold below which `C_ij` counts as zero.
    pub edge_tol: f64,
    /// Absolute entrywise threshold for `C_ij == C_ji`.
    pub symmetry_atol: f64,
    /// Eigenvalues of the normalized graph Laplacian below `null_rel * λ_max` are zero.
    pub null_rel: f64,
    /// PSD test: `λ_min(L) >= -psd_rel * λ_max(L)`.
    pub psd_rel: f64,
    /// Singular values below `rank_rel * σ_max` do not count toward rank.
    pub rank_rel: f64,
    /// Distance to the imaginary axis / unit circle, relative to `‖A‖`.
    pub axis_rel: f64,
    /// Eigenvalues closer than `cluster_rel * ‖A‖` are one cluster.
    pub cluster_rel: f64,
    /// Singular values of `A - μI` below `nullity_rel * ‖A‖` count toward nullity.
    pub nullity_rel: f64,
    /// PBH rank threshold relative to `‖A‖`.
    pub pbh_rel: f64,
    /// Largest accepted condition number of `[U W]`.
    pub split_cond_max: f64,
    /// Strict matrix inequality margin, scaled by `1 + ‖A‖‖P‖`.
    pub strict_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            edge_tol: 1e-12,
            symmetry_atol: 1e-12,
            null_rel: 1e-9,
            psd_rel: 1e-9,
            rank_rel: 1e-9,
            axis_rel: 1e-8,
            cluster_rel: 1e-6,
            nullity_rel: 1e-7,
            pbh_rel: 1e-7,
            split_cond_max: 1e8,
            strict_rel: 1e-9,
        }
    }
}

impl Tolerances {
    /// Defaults, overridden by `MATSYNC_TOL` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(s) => Self::default().with_overrides(&s),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("{ENV_VAR}: expected key=value, got `{item}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{ENV_VAR}: bad number in `{item}`")))?;
            let slot = match key.trim() {
                "edge_tol" => &mut self.edge_tol,
                "symmetry_atol" => &mut self.symmetry_atol,
                "null_rel" => &mut self.null_rel,
                "psd_rel" => &mut self.psd_rel,
                "rank_rel" => &mut self.rank_rel,
                "axis_rel" => &mut self.axis_rel,
                "cluster_rel" => &mut self.cluster_rel,
                "nullity_rel" => &mut self.nullity_rel,
                "pbh_rel" => &mut self.pbh_rel,
                "split_cond_max" => &mut self.split_cond_max,
                "strict_rel" => &mut self.strict_rel,
                other => return Err(Error::InvalidArgument(format!("{ENV_VAR}: unknown key `{other}`"))),
            };
            *slot = value;
        }
        Ok(self)
    }
}
