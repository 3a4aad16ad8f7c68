//! Exact Bayesian network structure learning: the subset dynamic program,
//! bucket-order covers with a dynamic program over partial orders, and a
//! statevector simulation of the quantum maximum-finding step.

pub mod bucket_cover;
pub mod dp_exact;
pub mod error;
pub mod grover_sim;
pub mod harness;
pub mod instance;
pub mod nodeset;
pub mod po_dp;
pub mod random;
pub mod scalar;
pub mod scores_io;

pub use bucket_cover::{
    cover_size, downsets_per_member, BlockPartition, CoverMember, DownsetIndex, Split,
};
pub use dp_exact::{brute_force_dags, brute_force_orders, solve_dp, BruteForce, Solution};
pub use error::{Error, Result};
pub use grover_sim::{max_find, CostReport, MaxFindMode, MaxOracle, QueryLedger};
pub use instance::{Dag, Entry, LinearOrder, LocalScoreTable};
pub use nodeset::{NodeSet, MAX_NODES};
pub use po_dp::{g_of_p, hat_scores, solve_cover, CoverSolution, CoverStrategy, DownsetLattice};
pub use random::SeedTree;
pub use scalar::Score;
pub use scores_io::{
    bic_scores, parse_scores, prune_dominated, read_scores, write_scores, BicOptions,
    DiscreteDataset,
};

pub type ScoreTable = LocalScoreTable<f64>;
pub type ScoreTableF32 = LocalScoreTable<f32>;
pub type Solution64 = Solution<f64>;
pub type Solution32 = Solution<f32>;
pub type CoverSolution64 = CoverSolution<f64>;
pub type StateVector = grover_sim::Statevector<f64>;
pub type StateVectorF32 = grover_sim::Statevector<f32>;
