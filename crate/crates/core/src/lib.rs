//! Stochastic clustering: randomized roundings that turn fractional
//! facility openings into lotteries over `k`-sets with per-client
//! guarantees, plus determinization, verification and bound certification.
//!
//! The main entry points are grouped by demand model:
//!
//! * [`chance`] for chance k-coverage, `Pr[d(j,S) <= r_j] >= p_j`;
//! * [`lottery`] for the deterministic-demand k-supplier lotteries;
//! * [`expected`] for expected-distance demands `E[d(j,S)] <= t_j`;
//! * [`determinize`] for single sets meeting expected-distance targets.

pub mod certify;
pub mod chance;
pub mod cli;
pub mod determinize;
pub mod error;
pub mod expected;
pub mod io;
pub mod linalg;
pub mod lottery;
pub mod lp;
pub mod model;
pub mod rounding;
pub mod verify;

pub use error::{Error, Infeasibility, Result};
pub use model::{DemandChance, DemandExpected, Id, Instance, Metric, SolutionSet};
pub use rounding::{dep_round, dep_round_restricted, greedy_cluster, RandomSource};
