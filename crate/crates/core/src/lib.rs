//! Constructive balanced supersaturation for theta graphs.
//!
//! Given a host graph whose edge count clears the Turán-type threshold for
//! the theta graph with `a` paths of length `b`, the routines here build a
//! large family of theta copies whose codegrees stay below explicit
//! thresholds, certify the expansion properties the construction relies on,
//! translate the family into an edge-indexed hypergraph suitable for the
//! container method, and run the container iteration itself. Brute-force
//! oracles and an experiment harness cross-check every stage at small scale.
//!
//! All threshold arithmetic is exact; see [`exact`].

pub mod containers;
pub mod error;
pub mod exact;
pub mod expansion;
pub mod experiment;
pub mod graph;
pub mod hypergraph;
pub mod oracle;
pub mod pruning;
pub mod supersat;
pub mod theta;

pub use error::{Error, Result};
