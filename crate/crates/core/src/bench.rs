//! Instance families and single benchmark cases shared by the CLI and the
//! criterion benches.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certificate::Ratio;
use crate::config::Config;
use crate::generate::{gen_blocker, gen_complete, gen_instar, gen_path, gen_random, GenError};
use crate::graph::Digraph;
use crate::oracle::{exact_min_degree, DEFAULT_EXACT_LIMIT};
use crate::report::{solve, Algorithm, SolveError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Random,
    Path,
    Instar,
    Complete,
    Blocker,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Random,
        Family::Path,
        Family::Instar,
        Family::Complete,
        Family::Blocker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Path => "path",
            Family::Instar => "instar",
            Family::Complete => "complete",
            Family::Blocker => "blocker",
        }
    }

    /// Benchmark instance of roughly `n` vertices.
    ///
    /// Random instances carry `4n` extra edges (capped by what fits);
    /// blockers use the largest `k` with `3k - 1 <= n` (at least 3) and
    /// fanout 2.
    pub fn instance(self, n: usize, seed: u64) -> Result<Digraph, GenError> {
        Ok(match self {
            Family::Random => {
                let cap = n.saturating_sub(1).pow(2);
                gen_random(n, (4 * n).min(cap), seed)?
            }
            Family::Path => gen_path(n),
            Family::Instar => gen_instar(n),
            Family::Complete => gen_complete(n),
            Family::Blocker => gen_blocker(((n + 1) / 3).max(3), 2, seed)?,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub delta_initial: usize,
    pub delta_final: usize,
    pub lower_bound: Option<Ratio>,
    pub oracle: Option<usize>,
    pub gap: f64,
    pub iterations: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Whether a row for `algorithm` is run at size `n`.
pub fn runs_at(algorithm: Algorithm, n: usize) -> bool {
    algorithm != Algorithm::Exact || n <= DEFAULT_EXACT_LIMIT
}

/// Generates one instance and solves it with `cfg` (resolved for the
/// instance's own vertex count). The oracle optimum feeds the gap when
/// the instance is small enough.
pub fn run_case(
    family: Family,
    n: usize,
    seed: u64,
    algorithm: Algorithm,
    cfg: impl Fn(usize) -> Config,
) -> Result<BenchRow, BenchError> {
    let g = family.instance(n, seed)?;
    let report = solve(&g, algorithm, &cfg(g.n()).with_seed(seed), false)?;
    let oracle = if g.n() <= DEFAULT_EXACT_LIMIT {
        match algorithm {
            Algorithm::Exact => Some(report.delta_final),
            _ => Some(exact_min_degree(&g, DEFAULT_EXACT_LIMIT).map_err(SolveError::from)?.0),
        }
    } else {
        None
    };
    Ok(BenchRow {
        family,
        n: g.n(),
        m: g.m(),
        seed,
        algorithm,
        delta_initial: report.delta_initial,
        delta_final: report.delta_final,
        lower_bound: report.lower_bound,
        oracle,
        gap: report.gap(oracle),
        iterations: report.iterations,
        wall_time_ms: report.wall_time_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_rows_have_unit_gap() {
        for algo in [Algorithm::Local, Algorithm::Augment] {
            let row = run_case(Family::Path, 10, 0, algo, Config::practical).unwrap();
            assert_eq!(row.delta_final, 1);
            assert_eq!(row.oracle, Some(1));
            assert_eq!(row.gap, 1.0);
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>(), Ok(f));
        }
        assert!(runs_at(Algorithm::Exact, 12));
        assert!(!runs_at(Algorithm::Exact, 13));
    }
}
