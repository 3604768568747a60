//! TOML documents for array specs and gain sets. Agent indices are 1-based.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use matsync::simulation::{build_lc, build_mass_spring, OscillatorArray, PairParams};
use matsync::{ArraySpec, ClCertificate, Edge, Evidence, GainSet, RecipeKind, TimeDomain};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Row-major number grid.
pub type Grid = Vec<Vec<f64>>;

pub fn to_grid(m: &DMatrix<f64>) -> Grid {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_grid(what: &str, grid: &Grid) -> Result<DMatrix<f64>> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if let Some(k) = grid.iter().position(|r| r.len() != cols) {
        bail!("{what}: row {} has {} entries, expected {cols}", k + 1, grid[k].len());
    }
    Ok(DMatrix::from_fn(rows, cols, |r, c| grid[r][c]))
}

fn index(what: &str, one_based: usize, q: usize) -> Result<usize> {
    if one_based == 0 || one_based > q {
        bail!("{what} = {one_based} is outside 1..={q}");
    }
    Ok(one_based - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "C")]
    pub c: Grid,
    /// Also sets `C_ji = C_ij`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mirror: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    #[default]
    Raw,
    Transformed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builder {
    MassSpring {
        masses: Vec<f64>,
        springs: Vec<f64>,
        #[serde(default)]
        coordinates: Coordinates,
        #[serde(default)]
        couplings: Vec<Coupling>,
    },
    Lc {
        capacitors: Vec<f64>,
        inductors: Vec<f64>,
        #[serde(default)]
        coordinates: Coordinates,
        #[serde(default)]
        couplings: Vec<Coupling>,
    },
}

impl Builder {
    fn coordinates(&self) -> Coordinates {
        match self {
            Builder::MassSpring { coordinates, .. } | Builder::Lc { coordinates, .. } => *coordinates,
        }
    }

    fn build(&self, q: usize) -> Result<OscillatorArray> {
        let pairs = |couplings: &[Coupling]| -> Result<PairParams> {
            let mut out = PairParams::new();
            for (k, c) in couplings.iter().enumerate() {
                let i = index(&format!("builder.couplings[{}].i", k + 1), c.i, q)?;
                let j = index(&format!("builder.couplings[{}].j", k + 1), c.j, q)?;
                if out.insert((i.min(j), i.max(j)), c.values.clone()).is_some() {
                    bail!("builder.couplings[{}]: pair ({}, {}) given twice", k + 1, c.i, c.j);
                }
            }
            Ok(out)
        };
        let arr = match self {
            Builder::MassSpring { masses, springs, couplings, .. } => build_mass_spring(masses, springs, &pairs(couplings)?, q)?,
            Builder::Lc { capacitors, inductors, couplings, .. } => build_lc(capacitors, inductors, &pairs(couplings)?, q)?,
        };
        Ok(arr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub time_domain: TimeDomainName,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Grid>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<Builder>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
}

/// `"ct"` or `"dt"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeDomainName {
    #[serde(rename = "ct")]
    Continuous,
    #[serde(rename = "dt")]
    Discrete,
}

impl From<TimeDomainName> for TimeDomain {
    fn from(d: TimeDomainName) -> Self {
        match d {
            TimeDomainName::Continuous => TimeDomain::Continuous,
            TimeDomainName::Discrete => TimeDomain::Discrete,
        }
    }
}

impl From<TimeDomain> for TimeDomainName {
    fn from(d: TimeDomain) -> Self {
        match d {
            TimeDomain::Continuous => TimeDomainName::Continuous,
            TimeDomain::Discrete => TimeDomainName::Discrete,
        }
    }
}

/// A parsed document: the spec plus the optional extras it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSpec {
    pub spec: ArraySpec,
    pub p: Option<DMatrix<f64>>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    /// Gains realizing a builder's physical coupling.
    pub physical_gains: Option<GainSet>,
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(&self) -> Result<LoadedSpec> {
        let domain: TimeDomain = self.time_domain.into();
        let (mut spec, physical_gains) = match (&self.builder, &self.a) {
            (Some(_), Some(_)) => bail!("give either `A` or a `builder` block, not both"),
            (None, None) => bail!("missing field `A` (or a `builder` block)"),
            (Some(b), None) => {
                if domain != TimeDomain::Continuous {
                    bail!("builder arrays are continuous-time; set time_domain = \"ct\"");
                }
                let arr = b.build(self.q).context("builder")?;
                match b.coordinates() {
                    Coordinates::Raw => (arr.raw, Some(arr.raw_gains)),
                    Coordinates::Transformed => (arr.transformed, Some(arr.transformed_gains)),
                }
            }
            (None, Some(a)) => (ArraySpec::new(self.q, from_grid("A", a)?, domain)?, None),
        };
        let n = spec.n();
        if let Some(declared) = self.n {
            if declared != n {
                bail!("n = {declared} but the dynamics are {n}x{n}");
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            let what = format!("edges[{}]", k + 1);
            let i = index(&format!("{what}.i"), e.i, self.q)?;
            let j = index(&format!("{what}.j"), e.j, self.q)?;
            let c = from_grid(&format!("{what}.C"), &e.c)?;
            if c.ncols() != n {
                bail!("{what}.C has {} columns, expected n = {n}", c.ncols());
            }
            if e.mirror {
                spec.set_symmetric_output(i, j, c).with_context(|| what.clone())?;
            } else {
                spec.set_output(i, j, c).with_context(|| what.clone())?;
            }
        }
        let p = self.p.as_ref().map(|g| from_grid("P", g)).transpose()?;
        if let Some(p) = &p {
            if p.shape() != (n, n) {
                bail!("P is {}x{}, expected {n}x{n}", p.nrows(), p.ncols());
            }
        }
        Ok(LoadedSpec {
            spec,
            p,
            alpha: self.alpha,
            epsilon: self.epsilon,
            physical_gains,
        })
    }

    /// An explicit document for `spec`, one entry per stored output.
    pub fn from_spec(spec: &ArraySpec, p: Option<&DMatrix<f64>>) -> Self {
        Self {
            q: spec.q(),
            n: Some(spec.n()),
            time_domain: spec.domain().into(),
            a: Some(to_grid(spec.a())),
            p: p.map(to_grid),
            alpha: None,
            epsilon: None,
            builder: None,
            edges: spec
                .outputs()
                .map(|((i, j), c)| EdgeEntry {
                    i: i + 1,
                    j: j + 1,
                    c: to_grid(c),
                    mirror: false,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainEntry {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "G")]
    pub g: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateEntry {
    #[serde(rename = "P")]
    pub p: Grid,
    pub eps: f64,
    pub sigma: f64,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition14_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsDocument {
    pub recipe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// May be `inf` when the projected Laplacian vanishes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateEntry>,
    #[serde(default)]
    pub gains: Vec<GainEntry>,
}

fn certificate_entry(cert: &ClCertificate, lambda2: Option<f64>, delta: Option<f64>, holds: Option<bool>) -> CertificateEntry {
    CertificateEntry {
        p: to_grid(&cert.p),
        eps: cert.eps,
        sigma: cert.sigma,
        feasible: cert.feasible,
        lambda2,
        delta,
        condition14_holds: holds,
    }
}

impl GainsDocument {
    pub fn from_gain_set(gains: &GainSet) -> Self {
        let certificate = match &gains.evidence {
            Some(Evidence::ClDetectability {
                certificate,
                lambda2,
                condition14,
            }) => Some(certificate_entry(
                certificate,
                *lambda2,
                condition14.map(|c| c.delta),
                condition14.map(|c| c.holds),
            )),
            _ => None,
        };
        Self {
            recipe: gains.recipe.as_str().to_string(),
            alpha: gains.alpha,
            eps_bar: gains.eps_bar,
            warnings: gains.warnings.clone(),
            certificate,
            gains: gains
                .gains
                .iter()
                .map(|(&(i, j), g)| GainEntry {
                    i: i + 1,
                    j: j + 1,
                    g: to_grid(g),
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// The gain set for an array with `q` agents. Evidence is not restored;
    /// the metadata needed downstream (`alpha`, `eps_bar`) is.
    pub fn to_gain_set(&self, q: usize) -> Result<GainSet> {
        let recipe: RecipeKind = self.recipe.parse().map_err(|e| anyhow!("recipe: {e}"))?;
        let mut map: BTreeMap<Edge, DMatrix<f64>> = BTreeMap::new();
        for (k, e) in self.gains.iter().enumerate() {
            let what = format!("gains[{}]", k + 1);
            let i = index(&format!("{what}.i"), e.i, q)?;
            let j = index(&format!("{what}.j"), e.j, q)?;
            if map.insert((i, j), from_grid(&format!("{what}.G"), &e.g)?).is_some() {
                bail!("{what}: gain ({}, {}) given twice", e.i, e.j);
            }
        }
        let mut set = GainSet::new(recipe, map);
        set.alpha = self.alpha;
        set.eps_bar = self.eps_bar;
        set.warnings = self.warnings.clone();
        Ok(set)
    }
}
