//! Epoch-based robust learners for stochastic combinatorial semi-bandits.
//!
//! The crate is split the same way an experiment is put together:
//!
//! - [`combinatorial`]: super-arms, action families and weighted oracles
//!   (exact, brute force and `alpha`-approximate).
//! - [`environment`]: Bernoulli rewards, the corruption budget ledger and
//!   the BEGIN / SUPPRESS corruption heuristics.
//! - [`algorithms`]: CBARBAR, CBAR-APX and the Tsallis-INF and CombUCB1
//!   baselines behind one [`algorithms::Policy`] trait.
//! - [`harness`]: seeded runs, regret accounting, aggregation, CSV output
//!   and the table presets.
//!
//! With the default `parallel` feature, independent runs of an experiment
//! are spread over a rayon pool; without it they run sequentially. Results
//! are identical either way.

pub mod algorithms;
pub mod combinatorial;
pub mod environment;
pub mod harness;

pub use combinatorial::{ActionFamily, SuperArm};
