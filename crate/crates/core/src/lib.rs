//! Maximum coverage on random bipartite graphs: generators, greedy and its
//! phase reformulation, exact solvers, matching-based bounds, closed-form
//! predictions and a deterministic Monte Carlo harness.

pub mod algorithms;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod matching;
pub mod seed;
pub mod theory;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, CoverState, NodeSet};
pub use seed::Seed;
