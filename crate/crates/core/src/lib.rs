//! Exact constructions and exhaustive checks for the Erdős–Rademacher
//! problem: minimising the number of `r`-cliques over graphs with `n`
//! vertices and `e` edges.
//!
//! * [`graph`]: bit-matrix graphs, clique counting and the structured
//!   counting identities for joins with triangle-free blocks.
//! * [`canon`] and [`graph6`]: canonical forms and the graph6 text format.
//! * [`formulas`]: Turán numbers, `k(n, e)`, `a*`, `m*` and `h*_r`.
//! * [`constructions`]: `H*`, the families `H₁*`, `H₂*`, `H₀`, `K` and the
//!   normalization of `H₀` witnesses.
//! * [`oracle`]: isomorph-free enumeration, exact minima and the result cache.
//! * [`verify`]: executable checks with machine-readable reports.

pub mod canon;
pub mod constructions;
pub mod enumerate;
pub mod error;
pub mod formulas;
pub mod graph;
pub mod graph6;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};

/// Search limits shared by the enumerating operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Caps {
    /// Largest `n` the oracle will enumerate.
    pub max_n_oracle: usize,
    /// Largest block handed to the triangle-free enumerator.
    pub max_block: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_n_oracle: 10,
            max_block: 12,
        }
    }
}
