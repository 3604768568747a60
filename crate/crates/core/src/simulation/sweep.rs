//! Growth rate of the disagreement dynamics as the coupling gain varies.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laplacian::{disagreement_basis, laplacian_from_outputs, sync_projector};
use crate::linalg;
use crate::model::{ArraySpec, TimeDomain};
use crate::spectral::eigen_clusters;
use crate::synthesis::verify_cl_detectability;
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    /// Largest real part among eigenvalues of `Ψ(α)` off the synchronization
    /// subspace.
    pub rho: f64,
}

/// `points` values from `lo` to `hi`, equally spaced in `log10`.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi >= lo) || points == 0 {
        return Err(Error::NonPositiveParameter(format!("log grid [{lo}, {hi}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points)
        .map(|k| {
            if k + 1 == points {
                hi
            } else {
                10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)
            }
        })
        .collect())
}

/// `ρ(α)` for `Ψ(α) = [I ⊗ A] - α [I ⊗ P⁻¹] L`.
///
/// The synchronization subspace is `Ψ`-invariant, so in an orthonormal basis
/// `[S E]` with `E` spanning its complement `Ψ` is block upper triangular and
/// the non-synchronous eigenvalues are exactly those of `EᵀΨE`.
pub fn rho_sweep(spec: &ArraySpec, p: &DMatrix<f64>, alphas: &[f64], tol: &Tolerances) -> Result<Vec<SweepPoint>> {
    let cert = verify_cl_detectability(spec, p, tol)?;
    if !cert.feasible {
        return Err(Error::Infeasible { best: Box::new(cert) });
    }
    let (q, n) = (spec.q(), spec.n());
    let p_inv = p.clone().cholesky().ok_or(Error::SingularP)?.inverse();
    let l = laplacian_from_outputs(spec)?;
    let e = disagreement_basis(q, n);
    let eye_q = DMatrix::<f64>::identity(q, q);
    let base = e.transpose() * eye_q.kronecker(spec.a()) * &e;
    let coupling = e.transpose() * eye_q.kronecker(&p_inv) * l.matrix() * &e;
    alphas
        .iter()
        .map(|&alpha| {
            if !(alpha >= 0.0) {
                return Err(Error::NonPositiveParameter(format!("alpha = {alpha}")));
            }
            let reduced = &base - &coupling * alpha;
            let rho = linalg::eigenvalues(&reduced).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            Ok(SweepPoint { alpha, rho })
        })
        .collect()
}

/// Eigenvalues of a closed-loop matrix split by whether their eigenvectors
/// lie in the synchronization subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncModes {
    pub synchronous: Vec<Complex64>,
    pub disagreement: Vec<Complex64>,
}

/// Matches eigenvectors against the synchronization subspace: for each
/// eigenvalue cluster the eigenspace basis `V` is projected by `J ⊗ I`, and
/// every singular value of the projection below `1e-6` marks one synchronous
/// copy. Exactly `n` synchronous eigenvalues must be found.
pub fn sync_modes(psi: &DMatrix<f64>, q: usize, n: usize, tol: &Tolerances) -> Result<SyncModes> {
    if psi.shape() != (q * n, q * n) {
        return Err(Error::dims("closed-loop matrix", format!("{0}x{0}", q * n), format!("{:?}", psi.shape())));
    }
    let projector = linalg::to_complex(&sync_projector(q, n));
    let mut modes = SyncModes {
        synchronous: Vec::new(),
        disagreement: Vec::new(),
    };
    for cluster in eigen_clusters(psi, TimeDomain::Continuous, tol) {
        let k = cluster.multiplicity;
        let (_, basis) = linalg::complex_null_basis(&linalg::shifted(psi, cluster.center), k);
        let residuals = linalg::complex_singular_values(&(&projector * &basis));
        let sync = residuals.iter().filter(|&&r| r < 1e-6).count();
        modes.synchronous.extend(std::iter::repeat_n(cluster.center, sync));
        modes.disagreement.extend(std::iter::repeat_n(cluster.center, k - sync));
    }
    if modes.synchronous.len() != n {
        return Err(Error::EigenvectorMatchFailed);
    }
    Ok(modes)
}

impl SyncModes {
    pub fn rho(&self) -> f64 {
        self.disagreement.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}
