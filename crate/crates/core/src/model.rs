//! The coupled array: `q` identical systems `ẋ_i = A x_i + u_i` that see
//! each other only through relative outputs `C_ij (x_j - x_i)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol::Tolerances;

/// Ordered agent pair `(i, j)`, 0-based. `C_ij` is the output agent `i`
/// uses to measure agent `j`.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

impl TimeDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeDomain::Continuous => "continuous",
            TimeDomain::Discrete => "discrete",
        }
    }
}

impl fmt::Display for TimeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TimeDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" | "ct" => Ok(TimeDomain::Continuous),
            "discrete" | "dt" => Ok(TimeDomain::Discrete),
            other => Err(Error::UnknownName(format!("time domain `{other}`"))),
        }
    }
}

/// Shared dynamics plus the per-pair output matrices.
///
/// Construction does not reject malformed outputs; [`ArraySpec::validate`]
/// reports them so a document can be diagnosed in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    q: usize,
    a: DMatrix<f64>,
    outputs: BTreeMap<Edge, DMatrix<f64>>,
    domain: TimeDomain,
}

impl ArraySpec {
    pub fn new(q: usize, a: DMatrix<f64>, domain: TimeDomain) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("agent count q must be at least 1".into()));
        }
        if !a.is_square() {
            return Err(Error::dims("A", "square", format!("{}x{}", a.nrows(), a.ncols())));
        }
        Ok(Self {
            q,
            a,
            outputs: BTreeMap::new(),
            domain,
        })
    }

    /// Stores `C_ij` (0-based indices). Replaces any previous value.
    pub fn set_output(&mut self, i: usize, j: usize, c: DMatrix<f64>) -> Result<()> {
        if i >= self.q || j >= self.q {
            return Err(Error::InvalidArgument(format!(
                "agent index ({}, {}) out of range 1..={}",
                i + 1,
                j + 1,
                self.q
            )));
        }
        self.outputs.insert((i, j), c);
        Ok(())
    }

    /// Stores `C_ij = C_ji = c`.
    pub fn set_symmetric_output(&mut self, i: usize, j: usize, c: DMatrix<f64>) -> Result<()> {
        self.set_output(j, i, c.clone())?;
        self.set_output(i, j, c)
    }

    pub fn with_symmetric_output(mut self, i: usize, j: usize, c: DMatrix<f64>) -> Result<Self> {
        self.set_symmetric_output(i, j, c)?;
        Ok(self)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn output(&self, i: usize, j: usize) -> Option<&DMatrix<f64>> {
        self.outputs.get(&(i, j))
    }

    pub fn outputs(&self) -> impl Iterator<Item = (Edge, &DMatrix<f64>)> {
        self.outputs.iter().map(|(&e, c)| (e, c))
    }

    /// Copy of the array with the dynamics matrix replaced.
    pub fn with_dynamics(&self, a: DMatrix<f64>) -> Result<Self> {
        if a.shape() != self.a.shape() {
            return Err(Error::dims("A", format!("{:?}", self.a.shape()), format!("{:?}", a.shape())));
        }
        Ok(Self { a, ..self.clone() })
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        validate_spec(self, tol)
    }

    /// Validation as a `Result`: dimension mismatches and nonzero `C_ii`
    /// are errors, asymmetry is not.
    pub fn checked(&self, tol: &Tolerances) -> Result<ValidationReport> {
        let report = self.validate(tol);
        if let Some(msg) = report.dimension_errors.first() {
            return Err(Error::dims("output matrix", format!("{} columns", self.n()), msg));
        }
        if let Some(&i) = report.nonzero_diagonal.first() {
            return Err(Error::InvalidArgument(format!("C_{0}{0} must be zero", i + 1)));
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub dimension_errors: Vec<String>,
    /// Agents with a nonzero self-output `C_ii`.
    pub nonzero_diagonal: Vec<usize>,
    /// `C_ij == C_ji` for every pair, a missing entry counting as zero.
    pub symmetric: bool,
    pub asymmetric_pairs: Vec<Edge>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.dimension_errors.is_empty() && self.nonzero_diagonal.is_empty()
    }
}

pub fn validate_spec(spec: &ArraySpec, tol: &Tolerances) -> ValidationReport {
    let n = spec.n();
    let mut report = ValidationReport {
        symmetric: true,
        ..Default::default()
    };
    for (&(i, j), c) in &spec.outputs {
        if c.ncols() != n {
            report
                .dimension_errors
                .push(format!("C_{}{} has {} columns, expected {n}", i + 1, j + 1, c.ncols()));
        }
        if i == j && c.norm() > tol.edge_tol {
            report.nonzero_diagonal.push(i);
        }
    }
    for (&(i, j), c) in &spec.outputs {
        if i >= j {
            // Each unordered pair is visited once from its (min, max) side,
            // or from (j, i) when only that side is stored.
            if i > j && !spec.outputs.contains_key(&(j, i)) && c.amax() > tol.symmetry_atol {
                report.symmetric = false;
                report.asymmetric_pairs.push((j, i));
            }
            continue;
        }
        let same = match spec.outputs.get(&(j, i)) {
            Some(other) => other.shape() == c.shape() && (other - c).amax() <= tol.symmetry_atol,
            None => c.amax() <= tol.symmetry_atol,
        };
        if !same {
            report.symmetric = false;
            report.asymmetric_pairs.push((i, j));
        }
    }
    report
}

/// Network topology induced by the nonzero outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    q: usize,
    edges: BTreeSet<Edge>,
    degrees: Vec<usize>,
}

impl NetworkGraph {
    pub fn from_edges(q: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let edges: BTreeSet<Edge> = edges.into_iter().filter(|&(i, j)| i != j && i < q && j < q).collect();
        let mut degrees = vec![0; q];
        for &(i, _) in &edges {
            degrees[i] += 1;
        }
        Self { q, edges, degrees }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn is_undirected(&self) -> bool {
        self.edges.iter().all(|&(i, j)| self.edges.contains(&(j, i)))
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.q * (self.q - 1)
    }

    /// Unordered edges `{i, j}` with `i < j`, present in either direction.
    pub fn undirected_edges(&self) -> BTreeSet<Edge> {
        self.edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect()
    }
}

/// `(i, j) ∈ E` iff `‖C_ij‖_F > edge_tol`.
pub fn build_graph(spec: &ArraySpec, edge_tol: f64) -> NetworkGraph {
    let edges = spec
        .outputs
        .iter()
        .filter(|(&(i, j), c)| i != j && c.norm() > edge_tol)
        .map(|(&e, _)| e);
    NetworkGraph::from_edges(spec.q, edges)
}

/// Breadth-first reachability from the first vertex. Edges are traversed in
/// both directions, so for directed graphs this is weak connectivity.
pub fn is_connected(g: &NetworkGraph) -> bool {
    if g.q <= 1 {
        return true;
    }
    let mut adjacency = vec![Vec::new(); g.q];
    for &(i, j) in &g.edges {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let mut seen = vec![false; g.q];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == g.q
}

/// `Γ` with `-1/q` on edges and `d_i/q` on the diagonal, and its smallest
/// nonzero eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGraphLaplacian {
    pub gamma: DMatrix<f64>,
    pub lambda2: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// The matrix `Γ` for any graph, without spectral checks.
pub fn gamma_matrix(g: &NetworkGraph) -> DMatrix<f64> {
    let q = g.q;
    let qf = q as f64;
    let mut gamma = DMatrix::zeros(q, q);
    for &(i, j) in &g.edges {
        gamma[(i, j)] = -1.0 / qf;
    }
    for i in 0..q {
        gamma[(i, i)] = g.degrees[i] as f64 / qf;
    }
    gamma
}

pub fn normalized_laplacian(g: &NetworkGraph, tol: &Tolerances) -> Result<NormalizedGraphLaplacian> {
    if !g.is_undirected() {
        return Err(Error::NotSymmetric("graph is directed".into()));
    }
    if g.q < 2 {
        return Err(Error::InvalidArgument("λ₂ needs at least two agents".into()));
    }
    let gamma = gamma_matrix(g);
    let eigenvalues = linalg::sym_eigenvalues(&gamma);
    let top = eigenvalues.last().copied().unwrap_or(0.0);
    let null_tol = tol.null_rel * top.max(0.0);
    // The first eigenvalue is always the zero of 𝟙; a second one means
    // more than one component.
    let lambda2 = eigenvalues[1];
    if lambda2 <= null_tol {
        return Err(Error::NotConnected);
    }
    Ok(NormalizedGraphLaplacian {
        gamma,
        lambda2,
        eigenvalues,
    })
}

/// `J = I_q - 𝟙𝟙ᵀ/q`.
pub fn centering_matrix(q: usize) -> DMatrix<f64> {
    DMatrix::identity(q, q) - DMatrix::from_element(q, q, 1.0 / q as f64)
}
