//! Solver entry point and the JSON report it produces.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::run_augmenting_search;
use crate::certificate::{verify_blocking, BlockingCertificate, BlockingViolation, Ratio};
use crate::config::{Config, ConfigError, Profile};
use crate::graph::Digraph;
use crate::local::run_local_search;
use crate::oracle::{exact_min_degree, OracleError, DEFAULT_EXACT_LIMIT};
use crate::tree::{check_parents, AdjustError, Violation};

pub const SCHEMA_VERSION: u32 = 1;

/// Why a solver loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// Maximum degree fell to the configured threshold.
    Threshold,
    /// No admissible adjustment exists at degree class `k`.
    Stalled { k: usize },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("certificate failed verification: {violation}")]
    CertificateRejected {
        violation: BlockingViolation,
        certificate: Box<BlockingCertificate>,
    },
    #[error("tree adjustment failed: {0}")]
    Adjust(#[from] AdjustError),
    #[error("augmenting path failed validation: {0}")]
    PathValidation(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl SolveError {
    /// Errors caused by the input rather than by a solver defect.
    pub fn is_input_error(&self) -> bool {
        matches!(self, SolveError::Config(_) | SolveError::Oracle(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Local,
    Augment,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Local, Algorithm::Augment, Algorithm::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Local => "local",
            Algorithm::Augment => "augment",
            Algorithm::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Guarantee {
    Proved,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub k: usize,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPoint {
    pub iteration: usize,
    pub k: usize,
    pub layer: usize,
    pub starts: usize,
    pub found: usize,
    pub union: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: u32,
    pub algorithm: Algorithm,
    pub profile: Profile,
    pub n: usize,
    pub m: usize,
    pub delta_initial: usize,
    pub delta_final: usize,
    pub lower_bound: Option<Ratio>,
    pub certificate: Option<BlockingCertificate>,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_trace: Option<Vec<TracePoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers_trace: Option<Vec<LayerPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub parent: Vec<i64>,
    pub wall_time_ms: u64,
    pub config: Config,
    pub guarantee: Guarantee,
}

impl SolveReport {
    /// `delta_final / max(lower bound, oracle optimum, 1)`.
    pub fn gap(&self, oracle: Option<usize>) -> f64 {
        let lb = self.lower_bound.map_or(0.0, Ratio::to_f64);
        let best = lb.max(oracle.unwrap_or(0) as f64).max(1.0);
        self.delta_final as f64 / best
    }
}

/// Runs `algorithm` on `g`. With `trace`, potential and layer traces are
/// included in the report.
pub fn solve(g: &Digraph, algorithm: Algorithm, cfg: &Config, trace: bool) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut report = SolveReport {
        schema: SCHEMA_VERSION,
        algorithm,
        profile: cfg.profile,
        n: g.n(),
        m: g.m(),
        delta_initial: 0,
        delta_final: 0,
        lower_bound: None,
        certificate: None,
        iterations: 0,
        potential_trace: None,
        layers_trace: None,
        epsilon: None,
        c: None,
        parent: Vec::new(),
        wall_time_ms: 0,
        config: cfg.clone(),
        guarantee: Guarantee::Heuristic,
    };
    let threshold_exit;
    match algorithm {
        Algorithm::Local => {
            let run = run_local_search(g, cfg)?;
            report.delta_initial = run.delta_initial;
            report.delta_final = run.tree.max_degree();
            report.iterations = run.iterations();
            report.parent = run.tree.parent_array();
            if trace {
                let mut points = vec![TracePoint {
                    iteration: 0,
                    k: 0,
                    phi: run.potential_initial.to_f64().unwrap_or(f64::INFINITY),
                }];
                points.extend(run.trace.iter().map(|e| TracePoint {
                    iteration: e.iteration,
                    k: e.k,
                    phi: e.potential_after.to_f64().unwrap_or(f64::INFINITY),
                }));
                report.potential_trace = Some(points);
            }
            threshold_exit = run.exit == Exit::Threshold;
            report.certificate = run.certificate;
        }
        Algorithm::Augment => {
            let run = run_augmenting_search(g, cfg)?;
            report.delta_initial = run.delta_initial;
            report.delta_final = run.tree.max_degree();
            report.iterations = run.iterations();
            report.parent = run.tree.parent_array();
            report.epsilon = Some(cfg.epsilon);
            report.c = Some(cfg.base_c);
            if trace {
                let mut points = vec![TracePoint {
                    iteration: 0,
                    k: 0,
                    phi: run.potential_initial,
                }];
                points.extend(run.trace.iter().map(|e| TracePoint {
                    iteration: e.iteration,
                    k: e.k,
                    phi: e.potential_after,
                }));
                report.potential_trace = Some(points);
                report.layers_trace = Some(
                    run.layers_trace
                        .iter()
                        .map(|e| LayerPoint {
                            iteration: e.iteration,
                            k: e.k,
                            layer: e.record.layer,
                            starts: e.record.starts,
                            found: e.record.found,
                            union: e.record.union,
                        })
                        .collect(),
                );
            }
            threshold_exit = run.exit == Exit::Threshold;
            report.certificate = run.certificate;
        }
        Algorithm::Exact => {
            let (opt, tree) = exact_min_degree(g, DEFAULT_EXACT_LIMIT)?;
            report.delta_initial = crate::tree::InTree::bfs(g).max_degree();
            report.delta_final = opt;
            report.parent = tree.parent_array();
            report.lower_bound = Some(Ratio::new(opt as u64, 1));
            threshold_exit = false;
        }
    }
    if let Some(cert) = &report.certificate {
        report.lower_bound = Some(cert.bound());
    }
    let certified = report.certificate.as_ref().is_some_and(|c| c.verified);
    report.guarantee = match (algorithm, cfg.profile) {
        (Algorithm::Exact, _) => Guarantee::Proved,
        (_, Profile::Paper) if threshold_exit || certified => Guarantee::Proved,
        _ => Guarantee::Heuristic,
    };
    report.wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

/// First problem found when checking a report against its graph.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportViolation {
    #[error("SizeMismatch: report describes {report_n} vertices and {report_m} edges, graph has {n} and {m}")]
    SizeMismatch {
        report_n: usize,
        report_m: usize,
        n: usize,
        m: usize,
    },
    #[error("BadParentEntry: parent[{v}] = {value}")]
    BadParentEntry { v: usize, value: i64 },
    #[error("{0}")]
    Tree(Violation),
    #[error("DeltaMismatch: report claims {reported}, tree has {actual}")]
    DeltaMismatch { reported: usize, actual: usize },
    #[error("{0}")]
    Certificate(BlockingViolation),
    #[error("UnverifiedCertificate: certificate is not marked verified")]
    UnverifiedCertificate,
    #[error("BoundMismatch: certificate claims {claimed}, sets give {actual}")]
    BoundMismatch { claimed: Ratio, actual: Ratio },
    #[error("LowerBoundMismatch: lower bound {0} disagrees with the certificate or tree")]
    LowerBoundMismatch(String),
}

impl ReportViolation {
    /// Stable violation name, the first word of the message.
    pub fn name(&self) -> String {
        self.to_string()
            .split(':')
            .next()
            .unwrap_or_default()
            .to_string()
    }
}

/// Re-checks the tree and the embedded certificate of `report` against `g`
/// without trusting any solver state.
pub fn verify_report(g: &Digraph, report: &SolveReport) -> Result<(), ReportViolation> {
    if report.n != g.n() || report.m != g.m() {
        return Err(ReportViolation::SizeMismatch {
            report_n: report.n,
            report_m: report.m,
            n: g.n(),
            m: g.m(),
        });
    }
    let mut parents = Vec::with_capacity(report.parent.len());
    for (v, &p) in report.parent.iter().enumerate() {
        parents.push(match p {
            -1 => None,
            p if p >= 0 => Some(p as usize),
            value => return Err(ReportViolation::BadParentEntry { v, value }),
        });
    }
    if let Some(v) = check_parents(g, &parents).into_iter().next() {
        return Err(ReportViolation::Tree(v));
    }
    let mut deg = vec![0usize; g.n()];
    for p in parents.iter().flatten() {
        deg[*p] += 1;
    }
    let actual = deg.iter().copied().max().unwrap_or(0);
    if actual != report.delta_final {
        return Err(ReportViolation::DeltaMismatch {
            reported: report.delta_final,
            actual,
        });
    }
    if let Some(cert) = &report.certificate {
        if !cert.verified {
            return Err(ReportViolation::UnverifiedCertificate);
        }
        verify_blocking(g, cert).map_err(ReportViolation::Certificate)?;
        let actual = Ratio::new(cert.u.len() as u64, cert.b.len() as u64);
        if cert.bound() != actual {
            return Err(ReportViolation::BoundMismatch {
                claimed: cert.bound(),
                actual,
            });
        }
        if report.lower_bound != Some(actual) {
            return Err(ReportViolation::LowerBoundMismatch(format!("{:?}", report.lower_bound)));
        }
    } else if let Some(lb) = report.lower_bound {
        if report.algorithm != Algorithm::Exact || !lb.at_most(actual) {
            return Err(ReportViolation::LowerBoundMismatch(lb.to_string()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_instar, gen_path};

    #[test]
    fn exact_on_path() {
        let g = gen_path(6);
        let r = solve(&g, Algorithm::Exact, &Config::practical(6), false).unwrap();
        assert_eq!(r.delta_final, 1);
        assert_eq!(r.lower_bound, Some(Ratio::new(1, 1)));
        assert_eq!(r.guarantee, Guarantee::Proved);
        assert_eq!(verify_report(&g, &r), Ok(()));
    }

    #[test]
    fn instar_report_is_certified() {
        let g = gen_instar(5);
        let r = solve(&g, Algorithm::Local, &Config::practical(5), true).unwrap();
        assert_eq!(r.delta_final, 4);
        assert_eq!(r.lower_bound, Some(Ratio::new(4, 1)));
        assert_eq!(r.guarantee, Guarantee::Heuristic);
        assert_eq!(r.potential_trace.as_ref().unwrap().len(), 1);
        assert_eq!(verify_report(&g, &r), Ok(()));
    }

    #[test]
    fn corrupted_reports_fail() {
        let g = gen_instar(5);
        let r = solve(&g, Algorithm::Augment, &Config::practical(5), false).unwrap();
        let mut bad = r.clone();
        bad.parent[1] = 1;
        assert_eq!(verify_report(&g, &bad).unwrap_err().name(), "NotAnEdge");
        let mut bad = r.clone();
        bad.parent[0] = 3;
        assert!(verify_report(&g, &bad).is_err());
        let mut bad = r;
        bad.certificate.as_mut().unwrap().b.clear();
        assert_eq!(verify_report(&g, &bad).unwrap_err().name(), "EmptyB");
    }

    #[test]
    fn json_round_trip() {
        let g = gen_instar(4);
        let r = solve(&g, Algorithm::Augment, &Config::practical(4), true).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: SolveReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(text.contains("\"U\":[1,2,3]"));
    }
}
