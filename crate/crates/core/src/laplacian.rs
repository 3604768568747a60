//! Matrix-weighted Laplacian: the `qn × qn` block matrix whose off-diagonal
//! block `(i, j)` is `-Q_ij` and whose diagonal block `i` is `Σ_j Q_ij`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{centering_matrix, ArraySpec, Edge};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    /// Weights supplied directly.
    Weights,
    /// Weights `Q_ij = C_ijᵀ C_ij` (possibly projected) from an array's outputs.
    Outputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixWeightedLaplacian {
    matrix: DMatrix<f64>,
    q: usize,
    n: usize,
    source: WeightSource,
    blocks: BTreeMap<Edge, DMatrix<f64>>,
}

impl MatrixWeightedLaplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> WeightSource {
        self.source
    }

    pub fn blocks(&self) -> &BTreeMap<Edge, DMatrix<f64>> {
        &self.blocks
    }

    pub fn is_symmetric(&self, atol: f64) -> bool {
        linalg::is_symmetric(&self.matrix, atol * (1.0 + self.matrix.amax()))
    }

    /// `λ_min(L) >= -psd_rel · λ_max(L)`, only meaningful for symmetric `L`.
    pub fn is_psd(&self, tol: &Tolerances) -> bool {
        let eig = linalg::sym_eigenvalues(&self.matrix);
        match (eig.first(), eig.last()) {
            (Some(&lo), Some(&hi)) => lo >= -tol.psd_rel * hi.abs().max(f64::MIN_POSITIVE),
            _ => true,
        }
    }

    /// `‖L (𝟙 ⊗ I_n)‖_F`.
    pub fn consensus_residual(&self) -> f64 {
        let ones = DMatrix::from_element(self.q, 1, 1.0).kronecker(&DMatrix::<f64>::identity(self.n, self.n));
        (&self.matrix * ones).norm()
    }

    /// `qn - rank(L)` with the rank threshold `rank_rel · σ_max`.
    pub fn null_space_dim(&self, tol: &Tolerances) -> usize {
        self.q * self.n - linalg::rank(&self.matrix, tol.rank_rel)
    }
}

/// Assembles `L` from edge weights. Missing pairs have zero weight.
pub fn build_laplacian(
    q: usize,
    n: usize,
    weights: &BTreeMap<Edge, DMatrix<f64>>,
) -> Result<MatrixWeightedLaplacian> {
    assemble(q, n, weights.clone(), WeightSource::Weights)
}

fn assemble(
    q: usize,
    n: usize,
    blocks: BTreeMap<Edge, DMatrix<f64>>,
    source: WeightSource,
) -> Result<MatrixWeightedLaplacian> {
    let mut matrix = DMatrix::zeros(q * n, q * n);
    for (&(i, j), w) in &blocks {
        if i >= q || j >= q {
            return Err(Error::InvalidArgument(format!("weight index ({}, {}) exceeds q = {q}", i + 1, j + 1)));
        }
        if w.shape() != (n, n) {
            return Err(Error::dims(
                &format!("Q_{}{}", i + 1, j + 1),
                format!("{n}x{n}"),
                format!("{}x{}", w.nrows(), w.ncols()),
            ));
        }
        if i == j {
            if w.amax() > 0.0 {
                return Err(Error::InvalidArgument(format!("Q_{0}{0} must be zero", i + 1)));
            }
            continue;
        }
        linalg::add_block(&mut matrix, i, i, w, 1.0);
        linalg::add_block(&mut matrix, i, j, w, -1.0);
    }
    Ok(MatrixWeightedLaplacian {
        matrix,
        q,
        n,
        source,
        blocks,
    })
}

/// `L` with `Q_ij = C_ijᵀ C_ij`.
pub fn laplacian_from_outputs(spec: &ArraySpec) -> Result<MatrixWeightedLaplacian> {
    let n = spec.n();
    let mut blocks = BTreeMap::new();
    for ((i, j), c) in spec.outputs() {
        if c.ncols() != n {
            return Err(Error::dims("output", format!("{n} columns"), c.ncols()));
        }
        if i != j {
            blocks.insert((i, j), c.transpose() * c);
        }
    }
    assemble(spec.q(), n, blocks, WeightSource::Outputs)
}

/// `L` with `Q_ij = Uᵀ C_ijᵀ C_ij U` for a basis `U` (`n × n₁`).
pub fn laplacian_from_projected_outputs(spec: &ArraySpec, basis: &DMatrix<f64>) -> Result<MatrixWeightedLaplacian> {
    let n = spec.n();
    if basis.nrows() != n {
        return Err(Error::dims("basis", format!("{n} rows"), basis.nrows()));
    }
    let mut blocks = BTreeMap::new();
    for ((i, j), c) in spec.outputs() {
        if c.ncols() != n {
            return Err(Error::dims("output", format!("{n} columns"), c.ncols()));
        }
        if i != j {
            let h = c * basis;
            blocks.insert((i, j), h.transpose() * h);
        }
    }
    assemble(spec.q(), basis.ncols(), blocks, WeightSource::Outputs)
}

/// The quadratic form `xᵀ L x`.
pub fn disagreement(lw: &MatrixWeightedLaplacian, x: &DVector<f64>) -> f64 {
    x.dot(&(lw.matrix() * x))
}

/// `J ⊗ I_n`, the orthogonal projector onto the complement of the
/// synchronization subspace.
pub fn sync_projector(q: usize, n: usize) -> DMatrix<f64> {
    centering_matrix(q).kronecker(&DMatrix::<f64>::identity(n, n))
}

/// Orthonormal basis of the complement of the synchronization subspace:
/// `H ⊗ I_n` with `H` the Helmert contrasts (`q × (q-1)`).
pub fn disagreement_basis(q: usize, n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(q, q.saturating_sub(1));
    for k in 1..q {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for r in 0..k {
            h[(r, k - 1)] = 1.0 / norm;
        }
        h[(k, k - 1)] = -(k as f64) / norm;
    }
    h.kronecker(&DMatrix::<f64>::identity(n, n))
}

/// `max_{i,j} ‖x_i - x_j‖` for a stacked state.
pub fn sync_error(x: &DVector<f64>, q: usize, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..q {
        for j in (i + 1)..q {
            let d = x.rows(i * n, n) - x.rows(j * n, n);
            worst = worst.max(d.norm());
        }
    }
    worst
}
