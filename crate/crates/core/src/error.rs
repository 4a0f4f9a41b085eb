use std::fmt;

use serde::Serialize;

/// Evidence that a demand vector cannot be met.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Infeasibility {
    /// Phase-1 of the simplex ended with a positive sum of artificials.
    LpPhaseOne { residual: f64 },
    /// A client whose ball is empty at its radius.
    EmptyBall { client: usize },
    /// A client with a zero target that cannot be served at distance zero.
    ZeroTarget { client: usize },
    /// The greedy (1, k+2) procedure selected `k + 1` clients; by the
    /// pigeonhole argument no k-lottery meets these targets.
    Pigeonhole { clients: Vec<usize> },
    /// Multiplicative-weights potential grew faster than any feasible
    /// demand allows.
    PotentialBound { round: usize, log_ratio: f64, allowed: f64 },
    /// Exact lottery oracle found the best achievable ratio below 1.
    OracleRatio { ratio: f64 },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::LpPhaseOne { residual } => {
                write!(f, "LP infeasible (phase-1 residual {residual:.3e})")
            }
            Infeasibility::EmptyBall { client } => {
                write!(f, "client {client} has no facility within its radius")
            }
            Infeasibility::ZeroTarget { client } => {
                write!(f, "client {client} has target 0 but no facility at distance 0")
            }
            Infeasibility::Pigeonhole { clients } => {
                write!(f, "greedy selected k+1 clients {clients:?}; demand is not lottery-feasible")
            }
            Infeasibility::PotentialBound { round, log_ratio, allowed } => write!(
                f,
                "potential grew by log-ratio {log_ratio:.6} > {allowed:.6} in round {round}"
            ),
            Infeasibility::OracleRatio { ratio } => {
                write!(f, "best lottery achieves ratio {ratio:.6} < 1")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("infeasible demand: {0}")]
    Infeasible(Infeasibility),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
