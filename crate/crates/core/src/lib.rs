//! Synchronization of arrays of identical linear systems coupled through
//! relative outputs, analyzed with matrix-weighted Laplacians.
//!
//! Agent `i` evolves as `ẋ_i = A x_i + Σ_j G_ij C_ij (x_j - x_i)` (or the
//! discrete-time analogue). The crate builds the Laplacian, checks the
//! spectral hypotheses, synthesizes gains `G_ij` with one of several
//! recipes, and simulates the closed loop.
//!
//! ```
//! use matsync::{laplacian_from_outputs, ArraySpec, TimeDomain};
//! use nalgebra::DMatrix;
//!
//! let spec = ArraySpec::new(2, DMatrix::zeros(2, 2), TimeDomain::Continuous)?
//!     .with_symmetric_output(0, 1, DMatrix::identity(2, 2))?;
//! let l = laplacian_from_outputs(&spec)?;
//! assert_eq!(l.consensus_residual(), 0.0);
//! # Ok::<(), matsync::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod laplacian;
pub mod linalg;
pub mod model;
pub mod simulation;
pub mod spectral;
pub mod synthesis;
pub mod tol;

pub use error::{Error, Result};
pub use laplacian::{
    build_laplacian, disagreement, disagreement_basis, laplacian_from_outputs, laplacian_from_projected_outputs,
    sync_error, sync_projector, MatrixWeightedLaplacian, WeightSource,
};
pub use model::{
    build_graph, centering_matrix, gamma_matrix, is_connected, normalized_laplacian, validate_spec, ArraySpec, Edge,
    NetworkGraph, NormalizedGraphLaplacian, TimeDomain, ValidationReport,
};
pub use simulation::{
    asymptotic_anchor, builtin_example, rho_sweep, simulate_ct, simulate_dt, BuiltinExample, ClosedLoop, SimTrace,
    Verdict,
};
pub use spectral::{
    classify_stability, neutral_split, pbh_detectable, pbh_observable, spd_sqrt, SpectralSplit, StabilityClass,
    StabilityKind,
};
pub use synthesis::{
    condition14, eps_bar, find_common_p, gains_ct_neutral, gains_dt_neutral, gains_theorem1, verify_cl_detectability,
    ClCertificate, Condition14, Evidence, FindOptions, GainRecipe, GainSet, RecipeKind, RecipeParams, RecipeRegistry,
};
pub use tol::Tolerances;
