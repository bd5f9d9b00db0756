//! Seeded, reproducible simulations around retrocausal readings of quantum
//! and classical experiments.
//!
//! - [`quantum`]: two-qubit statevectors, Gaussian-pointer weak measurement,
//!   weak values and ABL probabilities.
//! - [`epr`]: the weak-then-strong EPR experiment, outcome slicing, the
//!   prediction test and the count of balanced slicings.
//! - [`loops`]: two-machine causal loops and fluctuation-weighted agent
//!   histories.
//! - [`fisher`]: Fisher information of scale families under pointer spread.
//! - [`prophecy`]: BB84, one-time pads and the sealed-prophecy protocol.
//! - [`cli`]: the `retroloop` command line and its run manifests.
//!
//! Every random quantity comes from a [`rng::RandomStream`], so a seed fixes
//! all output bit for bit, including parallel runs.
//!
//! Runnable examples live in `examples/`: `weak_measurement`, `epr_slicing`,
//! `prediction`, `slicing_count`, `two_machines`, `fluctuation_histories`,
//! `fisher_scaling`, `bb84` and `sealed_prophecy`.

pub mod cli;
pub mod epr;
pub mod fisher;
pub mod loops;
pub mod prophecy;
pub mod quantum;
pub mod rng;
pub mod stats;
