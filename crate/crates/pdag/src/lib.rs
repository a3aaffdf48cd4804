//! Probabilistic response-time analysis for parallel DAG tasks with
//! conditional branching (p-DAGs).
//!
//! A p-DAG is a DAG task whose graph contains *probabilistic structures*:
//! regions delimited by an entry and an exit node in which exactly one of
//! several mutually exclusive branches executes per release, each branch with
//! a known execution probability. Every release therefore instantiates one of
//! finitely many non-conditional graphs, and the response time on `m` cores
//! is a discrete probability distribution rather than a single bound.
//!
//! The crate computes that distribution without enumerating execution
//! scenarios:
//!
//! 1. [`lowerbound::delta`] computes a lower bound on the longest path over
//!    all scenarios by selecting the shortest branch of every structure.
//! 2. [`lambdastar::compute_lambda_star`] extracts the exact set of paths
//!    that are the longest in at least one scenario, using the lower bound
//!    for candidate pruning and pairwise dominance elimination.
//! 3. [`probability::assign_probabilities`] bounds, for each such path, the
//!    probability that it executes and is the longest.
//! 4. [`response`] attaches the worst-case interfering workload to each path
//!    and assembles the response-time distribution for a given core count.
//!
//! [`oracle`] provides the enumeration-based baseline (per-scenario Graham
//! bounds) used as ground truth in tests, and [`workbench`] provides the
//! random instance generator, distribution comparison metrics, and core-count
//! search used by the experiment commands of the CLI.

mod graph;

pub mod fixtures;
pub mod lambdastar;
pub mod lowerbound;
pub mod model;
pub mod oracle;
pub mod paths;
pub mod probability;
pub mod response;
pub mod workbench;

pub use lambdastar::{compute_lambda_star, LambdaStarSet, PairClass};
pub use lowerbound::{build_substructure, delta, SubStructure};
pub use model::{parse_pdag, serialize_pdag, validate, Branch, Node, PDag, ProbStructure};
pub use paths::{candidate_paths, PathContext, Scenario, ScenarioGraph};
pub use probability::{assign_probabilities, ProbabilityAssignment};
pub use response::{build_distribution, RtDistribution};
