//! The `check` report.

use matsync::{
    build_graph, classify_stability, condition14, find_common_p, is_connected, normalized_laplacian, pbh_detectable,
    verify_cl_detectability, ArraySpec, FindOptions, StabilityKind, TimeDomain, Tolerances,
};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::document::{to_grid, Grid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeCheck {
    pub i: usize,
    pub j: usize,
    pub detectable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub kind: String,
    pub marginal_count: usize,
    pub stable_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClReport {
    /// `document` when P came with the spec, `search` otherwise.
    pub source: String,
    pub feasible: bool,
    pub eps: f64,
    pub sigma: f64,
    #[serde(rename = "P")]
    pub p: Grid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition14_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub time_domain: String,
    pub q: usize,
    pub n: usize,
    pub symmetric: bool,
    pub connected: bool,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    /// Hypotheses of the `theorem1` recipe (continuous time only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem1_hypotheses: Option<bool>,
    /// Hypotheses of the `alg1` / `alg2` recipes.
    pub neutral_hypotheses: bool,
    pub stability: StabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cl_detectability: Option<ClReport>,
    pub edges: Vec<EdgeCheck>,
}

impl CheckReport {
    pub fn build(spec: &ArraySpec, p: Option<&DMatrix<f64>>, seed: u64, tol: &Tolerances) -> Self {
        let domain = spec.domain();
        let validation = spec.validate(tol);
        let graph = build_graph(spec, tol.edge_tol);
        let connected = spec.q() == 1 || is_connected(&graph);
        let lambda2 = normalized_laplacian(&graph, tol).ok().map(|g| g.lambda2);
        let class = classify_stability(spec.a(), domain, tol);
        let edges: Vec<EdgeCheck> = spec
            .outputs()
            .filter(|&((i, j), _)| i != j)
            .map(|((i, j), c)| EdgeCheck {
                i: i + 1,
                j: j + 1,
                detectable: pbh_detectable(c, spec.a(), domain, tol),
            })
            .collect();
        let all_detectable = edges.iter().all(|e| e.detectable);

        let cl_detectability = (domain == TimeDomain::Continuous && !edges.is_empty()).then(|| {
            let (source, cert) = match p {
                Some(p) => ("document", verify_cl_detectability(spec, p, tol).ok()),
                None => (
                    "search",
                    match find_common_p(spec, &FindOptions { seed, ..Default::default() }, tol) {
                        Ok(c) => Some(c),
                        Err(matsync::Error::Infeasible { best }) => Some(*best),
                        Err(_) => None,
                    },
                ),
            };
            cert.map(|cert| {
                let c14 = lambda2.map(|l2| condition14(&cert, l2));
                ClReport {
                    source: source.to_string(),
                    feasible: cert.feasible,
                    eps: cert.eps,
                    sigma: cert.sigma,
                    p: to_grid(&cert.p),
                    delta: c14.map(|c| c.delta),
                    condition14_holds: c14.map(|c| c.holds),
                }
            })
        });
        let cl_detectability = cl_detectability.flatten();
        let base = validation.is_valid() && validation.symmetric && connected;
        let theorem1_hypotheses = (domain == TimeDomain::Continuous).then(|| {
            base && cl_detectability
                .as_ref()
                .is_some_and(|c| c.feasible && c.condition14_holds == Some(true))
        });
        let neutral = matches!(class.kind, StabilityKind::NeutrallyStable | StabilityKind::Stable);
        Self {
            time_domain: match domain {
                TimeDomain::Continuous => "ct",
                TimeDomain::Discrete => "dt",
            }
            .to_string(),
            q: spec.q(),
            n: spec.n(),
            symmetric: validation.symmetric,
            connected,
            complete: graph.is_complete(),
            lambda2,
            theorem1_hypotheses,
            neutral_hypotheses: base && neutral && all_detectable,
            stability: StabilityReport {
                kind: class.kind.as_str().to_string(),
                marginal_count: class.marginal_count,
                stable_count: class.stable_count,
            },
            cl_detectability,
            edges,
        }
    }

    /// Whether the hypotheses of `recipe` (or of any recipe) hold.
    pub fn holds_for(&self, recipe: Option<&str>) -> bool {
        let t1 = self.theorem1_hypotheses == Some(true);
        match recipe {
            Some("theorem1") => t1,
            Some("alg1") => self.time_domain == "ct" && self.neutral_hypotheses,
            Some("alg2") => self.time_domain == "dt" && self.neutral_hypotheses,
            Some(_) => false,
            None => t1 || self.neutral_hypotheses,
        }
    }
}
