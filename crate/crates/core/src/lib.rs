//! Approximation algorithms for the directed minimum-degree spanning tree
//! problem: find a spanning in-tree toward a sink whose largest number of
//! children is as small as possible.
//!
//! Two solvers are provided, [`run_local_search`] (improvement paths under
//! a base-2 potential) and [`run_augmenting_search`] (layered augmenting
//! paths under a base-`c` potential). Both stop either at a degree
//! threshold or with a [`BlockingCertificate`] proving a lower bound on the
//! optimum. [`exact_min_degree`] solves small instances exactly.

pub mod augment;
pub mod bench;
pub mod certificate;
pub mod config;
pub mod generate;
pub mod graph;
pub mod local;
pub mod oracle;
pub mod report;
pub mod tree;

pub use augment::{run_augmenting_search, AugmentRun, AugmentingPath, AugmentingSearch, LayeredState};
pub use bench::{run_case, BenchRow, Family};
pub use certificate::{verify_blocking, BlockingCertificate, BlockingViolation, Ratio};
pub use config::{Config, ConfigError, Profile};
pub use generate::{gen_blocker, gen_complete, gen_instar, gen_path, gen_random, GenError};
pub use graph::{parse_graph, read_graph, serialize_graph, Digraph, GraphError};
pub use local::{run_local_search, ImprovementPath, LocalRun, LocalSearch};
pub use oracle::{enumerate_spanning_intrees, exact_min_degree, OracleError};
pub use report::{solve, verify_report, Algorithm, Exit, Guarantee, ReportViolation, SolveError, SolveReport};
pub use tree::{AdjustDelta, AdjustError, InTree, TreeError, Violation};
