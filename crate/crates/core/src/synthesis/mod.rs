//! Coupling gains `G_ij` and the hypotheses that license them.
//!
//! Each recipe implements [`GainRecipe`] and is looked up by name in a
//! [`RecipeRegistry`], so callers can pick one at runtime.

mod certificate;
mod neutral;
mod theorem1;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

pub use certificate::{
    condition14, find_common_p, strict_tol, verify_cl_detectability, ClCertificate, Condition14, FindOptions,
};
pub use neutral::{eps_bar, gains_ct_neutral, gains_dt_neutral, NeutralRecipe};
pub use theorem1::{default_alpha, gains_theorem1, Theorem1Recipe};

use crate::error::{Error, Result};
use crate::model::{build_graph, is_connected, ArraySpec, Edge, TimeDomain};
use crate::spectral::SpectralSplit;
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecipeKind {
    /// `G_ij = α P⁻¹ C_ijᵀ`.
    Theorem1,
    /// `G_ij = U Uᵀ C_ijᵀ`.
    Alg1Ct,
    /// `G_ij = U Q Uᵀ C_ijᵀ`.
    Alg2Dt,
    /// `G_ij = C_ijᵀ`, so the coupling is the plain Laplacian.
    Direct,
    /// Gains supplied from outside.
    External,
}

impl RecipeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecipeKind::Theorem1 => "theorem1",
            RecipeKind::Alg1Ct => "alg1_ct",
            RecipeKind::Alg2Dt => "alg2_dt",
            RecipeKind::Direct => "direct",
            RecipeKind::External => "external",
        }
    }
}

impl fmt::Display for RecipeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RecipeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            RecipeKind::Theorem1,
            RecipeKind::Alg1Ct,
            RecipeKind::Alg2Dt,
            RecipeKind::Direct,
            RecipeKind::External,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::UnknownName(format!("recipe kind `{s}`")))
    }
}

/// What a recipe checked on the way to its gains.
#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    ClDetectability {
        certificate: ClCertificate,
        /// `None` when `Γ` has no `λ₂` (directed or disconnected graph).
        lambda2: Option<f64>,
        condition14: Option<Condition14>,
    },
    Split(SpectralSplit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub recipe: RecipeKind,
    pub gains: BTreeMap<Edge, DMatrix<f64>>,
    pub alpha: Option<f64>,
    /// `1/λ_max(L)` of the projected Laplacian; `+∞` when it vanishes.
    pub eps_bar: Option<f64>,
    pub evidence: Option<Evidence>,
    /// Hypotheses bypassed with `force` or soft preconditions that failed.
    pub warnings: Vec<String>,
}

impl GainSet {
    pub fn new(recipe: RecipeKind, gains: BTreeMap<Edge, DMatrix<f64>>) -> Self {
        Self {
            recipe,
            gains,
            alpha: None,
            eps_bar: None,
            evidence: None,
            warnings: Vec::new(),
        }
    }

    /// `G_ij = C_ijᵀ` on every stored output.
    pub fn direct(spec: &ArraySpec) -> Self {
        let gains = spec
            .outputs()
            .filter(|&((i, j), _)| i != j)
            .map(|(e, c)| (e, c.transpose()))
            .collect();
        Self::new(RecipeKind::Direct, gains)
    }

    pub fn gain(&self, i: usize, j: usize) -> Option<&DMatrix<f64>> {
        self.gains.get(&(i, j))
    }

    /// `ε̄` when finite, otherwise 1 (the coupling then vanishes anyway).
    pub fn default_epsilon(&self) -> f64 {
        match self.eps_bar {
            Some(e) if e.is_finite() => e,
            _ => 1.0,
        }
    }

    pub fn certificate(&self) -> Option<&ClCertificate> {
        match &self.evidence {
            Some(Evidence::ClDetectability { certificate, .. }) => Some(certificate),
            _ => None,
        }
    }

    pub fn split(&self) -> Option<&SpectralSplit> {
        match &self.evidence {
            Some(Evidence::Split(s)) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecipeParams {
    pub alpha: Option<f64>,
    pub p: Option<DMatrix<f64>>,
    pub find: FindOptions,
    /// Downgrade failed hypotheses to warnings where the construction still
    /// makes sense.
    pub force: bool,
}

pub trait GainRecipe: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> RecipeKind;

    fn summary(&self) -> &'static str;

    fn synthesize(&self, spec: &ArraySpec, params: &RecipeParams, tol: &Tolerances) -> Result<GainSet>;
}

struct DirectRecipe;

impl GainRecipe for DirectRecipe {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn kind(&self) -> RecipeKind {
        RecipeKind::Direct
    }

    fn summary(&self) -> &'static str {
        "G_ij = C_ij^T, no hypotheses checked"
    }

    fn synthesize(&self, spec: &ArraySpec, _params: &RecipeParams, tol: &Tolerances) -> Result<GainSet> {
        spec.checked(tol)?;
        Ok(GainSet::direct(spec))
    }
}

pub struct RecipeRegistry {
    recipes: Vec<Box<dyn GainRecipe>>,
}

impl RecipeRegistry {
    pub fn empty() -> Self {
        Self { recipes: Vec::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Theorem1Recipe));
        r.register(Box::new(NeutralRecipe::continuous()));
        r.register(Box::new(NeutralRecipe::discrete()));
        r.register(Box::new(DirectRecipe));
        r
    }

    /// Adds a recipe, replacing any with the same name.
    pub fn register(&mut self, recipe: Box<dyn GainRecipe>) {
        self.recipes.retain(|r| r.name() != recipe.name());
        self.recipes.push(recipe);
    }

    /// Looks up by registered name or by [`RecipeKind::as_str`].
    pub fn get(&self, name: &str) -> Result<&dyn GainRecipe> {
        self.recipes
            .iter()
            .find(|r| r.name() == name)
            .or_else(|| self.recipes.iter().find(|r| r.kind().as_str() == name))
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::UnknownName(format!("recipe `{name}` (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.recipes.iter().map(|r| r.name()).collect()
    }

    pub fn synthesize(&self, name: &str, spec: &ArraySpec, params: &RecipeParams, tol: &Tolerances) -> Result<GainSet> {
        self.get(name)?.synthesize(spec, params, tol)
    }
}

impl Default for RecipeRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

/// Symmetric outputs and a connected graph, shared by every certified
/// recipe. With `force` the failures come back as warnings.
fn graph_hypotheses(spec: &ArraySpec, force: bool, tol: &Tolerances) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let report = spec.checked(tol)?;
    let mut failures = Vec::new();
    if !report.symmetric {
        let (i, j) = report.asymmetric_pairs[0];
        failures.push(Error::NotSymmetric(format!("C_{0}{1} != C_{1}{0}", i + 1, j + 1)));
    }
    if !is_connected(&build_graph(spec, tol.edge_tol)) {
        failures.push(Error::NotConnected);
    }
    for e in failures {
        if !force {
            return Err(e);
        }
        warnings.push(format!("forced: {e}"));
    }
    Ok(warnings)
}

fn require_domain(spec: &ArraySpec, domain: TimeDomain, recipe: &str) -> Result<()> {
    if spec.domain() != domain {
        return Err(Error::InvalidArgument(format!(
            "recipe `{recipe}` needs a {domain} array, got {}",
            spec.domain()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_registered() {
        let r = RecipeRegistry::with_builtins();
        assert_eq!(r.names(), vec!["theorem1", "alg1", "alg2", "direct"]);
        assert_eq!(r.get("alg1_ct").unwrap().name(), "alg1");
        assert!(matches!(r.get("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn register_replaces_by_name() {
        let mut r = RecipeRegistry::with_builtins();
        r.register(Box::new(DirectRecipe));
        assert_eq!(r.names().len(), 4);
    }

    #[test]
    fn recipe_kind_round_trips() {
        for k in [RecipeKind::Theorem1, RecipeKind::Alg1Ct, RecipeKind::Alg2Dt, RecipeKind::Direct] {
            assert_eq!(k.as_str().parse::<RecipeKind>().unwrap(), k);
        }
    }

    #[test]
    fn direct_gains_transpose_outputs() {
        let spec = ArraySpec::new(2, DMatrix::zeros(2, 2), TimeDomain::Continuous)
            .unwrap()
            .with_symmetric_output(0, 1, DMatrix::from_row_slice(1, 2, &[1.0, 2.0]))
            .unwrap();
        let g = RecipeRegistry::with_builtins()
            .synthesize("direct", &spec, &RecipeParams::default(), &Tolerances::default())
            .unwrap();
        assert_eq!(g.gain(1, 0).unwrap(), &DMatrix::from_row_slice(2, 1, &[1.0, 2.0]));
    }
}
