//! Brute-force references and the complexity calculator.

pub mod complexity;
pub mod flat;
pub mod tiny;
pub mod tree;

pub use complexity::{complexity_estimate, ComplexityEstimate, VariableDims};
pub use flat::flat_dp_solve;
pub use tiny::{random_arbitrary, random_monotone, unit_cost_problem, TinyProblem, TinyShape};
pub use tree::{enumerate_tree, tree_nodes, MAX_TREE_NODES};
