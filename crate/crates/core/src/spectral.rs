//! Stability classification, PBH detectability/observability tests and the
//! neutral split `[U W]⁻¹ A [U W] = blkdiag(S or Q, F)`.
//!
//! Exact spectral statements are replaced by clustered eigenvalues and
//! singular-value thresholds from [`Tolerances`], all relative to `‖A‖_F`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::TimeDomain;
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    Stable,
    NeutrallyStable,
    Unstable,
}

impl StabilityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityKind::Stable => "stable",
            StabilityKind::NeutrallyStable => "neutrally_stable",
            StabilityKind::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Open left half-plane / open unit disk.
    Stable,
    /// Imaginary axis / unit circle.
    Marginal,
    Unstable,
}

/// Eigenvalues grouped within `cluster_rel · ‖A‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    /// `dim null(A - center·I)` at the nullity threshold.
    pub nullity: usize,
    pub location: Location,
}

impl EigenCluster {
    pub fn is_semisimple(&self) -> bool {
        self.nullity >= self.multiplicity
    }

    fn is_real(&self) -> bool {
        self.center.im == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityClass {
    pub kind: StabilityKind,
    /// `n₁`: eigenvalues on the imaginary axis / unit circle.
    pub marginal_count: usize,
    /// `n₂ = n - n₁`.
    pub stable_count: usize,
    pub marginal_eigenvalues: Vec<Complex64>,
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<EigenCluster>,
}

impl StabilityClass {
    /// Largest real part (continuous) or modulus (discrete) of the spectrum.
    pub fn abscissa(&self, domain: TimeDomain) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| match domain {
                TimeDomain::Continuous => z.re,
                TimeDomain::Discrete => z.norm(),
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn distance_past_boundary(z: Complex64, domain: TimeDomain) -> f64 {
    match domain {
        TimeDomain::Continuous => z.re,
        TimeDomain::Discrete => z.norm() - 1.0,
    }
}

fn locate(z: Complex64, domain: TimeDomain, axis_tol: f64) -> Location {
    let d = distance_past_boundary(z, domain);
    if d > axis_tol {
        Location::Unstable
    } else if d < -axis_tol {
        Location::Stable
    } else {
        Location::Marginal
    }
}

/// Groups eigenvalues whose pairwise distance chains within `tol`.
fn cluster_eigenvalues(values: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let mut parent: Vec<usize> = (0..values.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &z) in values.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(z),
            None => groups.push((root, vec![z])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Eigenvalue clusters of `a` with multiplicities and nullities.
pub fn eigen_clusters(a: &DMatrix<f64>, domain: TimeDomain, tol: &Tolerances) -> Vec<EigenCluster> {
    let scale = linalg::scale_of(a);
    let axis_tol = tol.axis_rel * scale;
    let cluster_tol = tol.cluster_rel * scale;
    let null_tol = tol.nullity_rel * scale;
    let values = linalg::eigenvalues(a);
    let mut clusters: Vec<EigenCluster> = cluster_eigenvalues(&values, cluster_tol)
        .into_iter()
        .map(|group| {
            let mut center = group.iter().sum::<Complex64>() / group.len() as f64;
            if center.im.abs() <= cluster_tol {
                center.im = 0.0;
            }
            let sv = linalg::complex_singular_values(&linalg::shifted(a, center));
            let nullity = sv.iter().filter(|&&s| s <= null_tol).count();
            EigenCluster {
                center,
                multiplicity: group.len(),
                nullity,
                location: locate(center, domain, axis_tol),
            }
        })
        .collect();
    clusters.sort_by(|x, y| x.center.re.total_cmp(&y.center.re).then(x.center.im.total_cmp(&y.center.im)));
    clusters
}

pub fn classify_stability(a: &DMatrix<f64>, domain: TimeDomain, tol: &Tolerances) -> StabilityClass {
    let n = a.nrows();
    let clusters = eigen_clusters(a, domain, tol);
    let eigenvalues = linalg::eigenvalues(a);
    let mut marginal_eigenvalues = Vec::new();
    let mut unstable = false;
    for c in &clusters {
        match c.location {
            Location::Unstable => unstable = true,
            Location::Marginal => {
                if !c.is_semisimple() {
                    unstable = true;
                }
                marginal_eigenvalues.extend(std::iter::repeat_n(c.center, c.multiplicity));
            }
            Location::Stable => {}
        }
    }
    let marginal_count = marginal_eigenvalues.len();
    let kind = if unstable {
        StabilityKind::Unstable
    } else if marginal_count == 0 {
        StabilityKind::Stable
    } else {
        StabilityKind::NeutrallyStable
    };
    StabilityClass {
        kind,
        marginal_count,
        stable_count: n - marginal_count,
        marginal_eigenvalues,
        eigenvalues,
        clusters,
    }
}

fn pbh_margin(c: &DMatrix<f64>, a: &DMatrix<f64>, at: Complex64) -> f64 {
    let n = a.nrows();
    let m = c.nrows();
    let mut stacked = DMatrix::<Complex64>::zeros(n + m, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&linalg::shifted(a, at));
    stacked.view_mut((n, 0), (m, n)).copy_from(&linalg::to_complex(c));
    linalg::complex_singular_values(&stacked).last().copied().unwrap_or(0.0)
}

fn check_pbh(c: &DMatrix<f64>, a: &DMatrix<f64>, tol: &Tolerances, relevant: impl Fn(&EigenCluster) -> bool, domain: TimeDomain) -> bool {
    if c.ncols() != a.nrows() {
        return false;
    }
    let threshold = tol.pbh_rel * linalg::scale_of(a);
    eigen_clusters(a, domain, tol)
        .iter()
        .filter(|cl| relevant(cl))
        .all(|cl| pbh_margin(c, a, cl.center) > threshold)
}

/// No eigenvector of `A` for a non-stable eigenvalue lies in `null(C)`.
pub fn pbh_detectable(c: &DMatrix<f64>, a: &DMatrix<f64>, domain: TimeDomain, tol: &Tolerances) -> bool {
    check_pbh(c, a, tol, |cl| cl.location != Location::Stable, domain)
}

/// No eigenvector of `S` lies in `null(H)`.
pub fn pbh_observable(h: &DMatrix<f64>, s: &DMatrix<f64>, tol: &Tolerances) -> bool {
    check_pbh(h, s, tol, |_| true, TimeDomain::Continuous)
}

/// Unit-norm eigenvector for a simple eigenvalue `lambda` of `m`.
pub fn eigenvector(m: &DMatrix<f64>, lambda: Complex64) -> nalgebra::DVector<Complex64> {
    let (_, basis) = linalg::complex_null_basis(&linalg::shifted(m, lambda), 1);
    basis.column(0).into_owned()
}

/// A real basis change `[U W]` isolating the marginal block of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub domain: TimeDomain,
    /// `n × n₁`, spans the marginal invariant subspace.
    pub u: DMatrix<f64>,
    /// `n × n₂`, spans the stable invariant subspace.
    pub w: DMatrix<f64>,
    pub u_dag: DMatrix<f64>,
    pub w_dag: DMatrix<f64>,
    /// Skew-symmetric `S` (continuous) or orthogonal `Q` (discrete).
    pub marginal: DMatrix<f64>,
    /// Hurwitz (continuous) or Schur-stable (discrete) `F`.
    pub stable: DMatrix<f64>,
}

impl SpectralSplit {
    pub fn n1(&self) -> usize {
        self.u.ncols()
    }

    pub fn n2(&self) -> usize {
        self.w.ncols()
    }

    /// `[U W]`.
    pub fn transform(&self) -> DMatrix<f64> {
        let n = self.u.nrows();
        let mut t = DMatrix::zeros(n, n);
        t.view_mut((0, 0), (n, self.n1())).copy_from(&self.u);
        t.view_mut((0, self.n1()), (n, self.n2())).copy_from(&self.w);
        t
    }

    /// `[U†; W†]`.
    pub fn inverse_transform(&self) -> DMatrix<f64> {
        let n = self.u.nrows();
        let mut t = DMatrix::zeros(n, n);
        t.view_mut((0, 0), (self.n1(), n)).copy_from(&self.u_dag);
        t.view_mut((self.n1(), 0), (self.n2(), n)).copy_from(&self.w_dag);
        t
    }

    /// `[U W] · blkdiag(marginal, F) · [U†; W†]`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.transform() * linalg::block_diag(&self.marginal, &self.stable) * self.inverse_transform()
    }

    /// Deviation of the marginal block from skew-symmetry (continuous) or
    /// orthogonality (discrete).
    pub fn marginal_defect(&self) -> f64 {
        match self.domain {
            TimeDomain::Continuous => (&self.marginal + self.marginal.transpose()).norm(),
            TimeDomain::Discrete => {
                let k = self.n1();
                (self.marginal.transpose() * &self.marginal - DMatrix::<f64>::identity(k, k)).norm()
            }
        }
    }
}

/// Real basis of an eigenspace. Real eigenvalues give real null vectors;
/// a complex eigenvalue gives `Re v, Im v` for each vector `v` of an
/// orthonormal complex basis, rescaled pairwise so the pair has unit RMS norm.
fn real_eigenspace_basis(m: &DMatrix<f64>, cluster: &EigenCluster) -> DMatrix<f64> {
    let n = m.nrows();
    let k = cluster.multiplicity;
    let (_, basis) = linalg::complex_null_basis(&linalg::shifted(m, cluster.center), k);
    if cluster.is_real() {
        // The null space of a real matrix has a real orthonormal basis.
        let svd = (m - DMatrix::<f64>::identity(n, n) * cluster.center.re).svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        return DMatrix::from_fn(n, k, |r, c| v_t[(order[c], r)]);
    }
    let mut out = DMatrix::zeros(n, 2 * k);
    for c in 0..k {
        let v = basis.column(c);
        let re = v.map(|z| z.re);
        let im = v.map(|z| z.im);
        let s = ((re.norm_squared() + im.norm_squared()) / 2.0).sqrt();
        out.set_column(2 * c, &(re / s));
        out.set_column(2 * c + 1, &(im / s));
    }
    out
}

fn hstack(parts: &[DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.view_mut((0, at), (rows, p.ncols())).copy_from(p);
        at += p.ncols();
    }
    out
}

/// Splits `A` into its marginal part (skew-symmetric / orthogonal block) and
/// its stable part.
///
/// `U` comes from real bases of the right eigenspaces of the marginal
/// eigenvalues. `W` is an orthonormal basis of the common null space of the
/// corresponding left eigenvectors, which is the stable invariant subspace
/// because the marginal eigenvalues are semisimple.
pub fn neutral_split(a: &DMatrix<f64>, domain: TimeDomain, tol: &Tolerances) -> Result<SpectralSplit> {
    let n = a.nrows();
    let class = classify_stability(a, domain, tol);
    if class.kind == StabilityKind::Unstable {
        return Err(Error::NotNeutrallyStable);
    }
    let at = a.transpose();
    let mut right = Vec::new();
    let mut left = Vec::new();
    for cluster in class.clusters.iter().filter(|c| c.location == Location::Marginal && c.center.im >= 0.0) {
        right.push(real_eigenspace_basis(a, cluster));
        left.push(real_eigenspace_basis(&at, cluster));
    }
    let u = hstack(&right, n);
    let y = hstack(&left, n);
    if u.ncols() != class.marginal_count {
        return Err(Error::SplitFailed(format!(
            "marginal basis has {} columns, expected {}",
            u.ncols(),
            class.marginal_count
        )));
    }
    let w = linalg::orthogonal_complement(&y);
    let n1 = u.ncols();
    let n2 = w.ncols();

    let mut t = DMatrix::zeros(n, n);
    t.view_mut((0, 0), (n, n1)).copy_from(&u);
    t.view_mut((0, n1), (n, n2)).copy_from(&w);
    let condition = linalg::cond(&t);
    if !(condition <= tol.split_cond_max) {
        return Err(Error::SplitIllConditioned(condition));
    }
    let t_inv = t.clone().try_inverse().ok_or(Error::SplitIllConditioned(f64::INFINITY))?;
    let blocks = &t_inv * a * &t;
    let scale = linalg::scale_of(a);
    let coupling = blocks.view((0, n1), (n1, n2)).norm() + blocks.view((n1, 0), (n2, n1)).norm();
    if coupling > 1e-8 * scale * condition {
        return Err(Error::SplitFailed(format!("off-diagonal residual {coupling:.3e}")));
    }
    let split = SpectralSplit {
        domain,
        u_dag: t_inv.rows(0, n1).into_owned(),
        w_dag: t_inv.rows(n1, n2).into_owned(),
        marginal: blocks.view((0, 0), (n1, n1)).into_owned(),
        stable: blocks.view((n1, n1), (n2, n2)).into_owned(),
        u,
        w,
    };
    if split.marginal_defect() > 1e-8 * (1.0 + split.marginal.norm()) {
        return Err(Error::SplitFailed(format!("marginal block defect {:.3e}", split.marginal_defect())));
    }
    if n2 > 0 {
        let stable_class = classify_stability(&split.stable, domain, tol);
        if stable_class.kind != StabilityKind::Stable {
            return Err(Error::SplitFailed("stable block is not stable".into()));
        }
    }
    Ok(split)
}

/// Square root of a symmetric positive definite matrix.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_power(m, 0.5)
}

/// `M^{-1/2}` for symmetric positive definite `M`.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_power(m, -0.5)
}

fn spd_power(m: &DMatrix<f64>, power: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() || !linalg::is_symmetric(m, 1e-12 * (1.0 + m.amax())) {
        return Err(Error::NotSpd);
    }
    let (values, vectors) = linalg::sym_eigen(m);
    if values.first().is_some_and(|&v| v <= 0.0) {
        return Err(Error::NotSpd);
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|v| v.powf(power)),
    ));
    Ok(linalg::symmetrize(&(&vectors * d * vectors.transpose())))
}
