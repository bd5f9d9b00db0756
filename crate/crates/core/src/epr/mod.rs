//! The EPR weak-measurement experiment.
//!
//! Each pair starts in the singlet. Both particles are weakly measured along
//! the three configured orientations (A first, then B, orientation order
//! 0, 1, 2) on the evolving joint state, and each side is then projected
//! along its chosen orientation. Everything is recorded, so the weak data can
//! later be sliced by the strong outcomes.
//!
//! Every pair draws from its own streams split off the master seed, which
//! keeps records identical no matter how the pairs are scheduled.

mod analysis;
mod records;

pub use analysis::{
    count_slicings, deviation_statistic, fluctuation_likelihood, prediction_attempt, slice, sliced_sum, sum_statistics,
    PredictionReport, SearchMode, SliceSpec, SliceSummary, Slicing, SlicingCount, SumStatistics, EXHAUSTIVE_LIMIT,
};
pub use records::{read_records, write_records, RecordHeader, RECORD_FORMAT};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{
    strong_measure, weak_measure, Outcome, PointerModel, QuantumError, Side, SpinObservable, TwoQubitState,
};
use crate::rng::RandomStream;

const CHOICE_STREAM: u64 = 0xC401CE;
const MEASURE_STREAM: u64 = 0x3EA5;

#[derive(Debug, Error)]
pub enum EprError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("slicing count needs an even N >= 2 (got {0})")]
    OddOrSmallCount(usize),
    #[error("balanced slicings need an even, nonzero number of pairs (got {0})")]
    UnbalancedPairs(usize),
    #[error("exhaustive search is limited to {limit} pairs (got {pairs})")]
    ExhaustiveTooLarge { pairs: usize, limit: usize },
    #[error("slicing has {labels} labels but there are {records} records")]
    SlicingLength { labels: usize, records: usize },
    #[error("need at least one reading")]
    EmptySample,
    #[error("record file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// One of the three measurement directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub index: usize,
    pub axis: [f64; 3],
}

/// Default Bell set: x, z and (x+z)/√2.
pub fn default_orientations() -> [Orientation; 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        Orientation {
            index: 0,
            axis: [1.0, 0.0, 0.0],
        },
        Orientation {
            index: 1,
            axis: [0.0, 0.0, 1.0],
        },
        Orientation {
            index: 2,
            axis: [h, 0.0, h],
        },
    ]
}

/// How the strong-measurement orientations are chosen, as `(choice_a, choice_b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChoicePolicy {
    UniformRandom,
    /// Pattern repeated cyclically over the pairs.
    FixedSequence {
        pattern: Vec<(usize, usize)>,
    },
    /// One entry per pair.
    ExternalList {
        choices: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pairs: usize,
    pub pointer: PointerModel,
    pub orientations: [Orientation; 3],
    pub choice_policy: ChoicePolicy,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Default orientations and uniformly random choices.
    pub fn new(pairs: usize, pointer: PointerModel, seed: u64) -> Self {
        Self {
            pairs,
            pointer,
            orientations: default_orientations(),
            choice_policy: ChoicePolicy::UniformRandom,
            seed,
        }
    }

    pub fn with_policy(mut self, policy: ChoicePolicy) -> Self {
        self.choice_policy = policy;
        self
    }

    pub fn with_orientations(mut self, orientations: [Orientation; 3]) -> Self {
        self.orientations = orientations;
        self
    }

    pub fn validate(&self) -> Result<(), EprError> {
        let bad = |m: String| Err(EprError::InvalidConfig(m));
        if self.pairs == 0 {
            return bad("pairs must be >= 1".into());
        }
        PointerModel::new(self.pointer.coupling(), self.pointer.noise())?;
        for (i, o) in self.orientations.iter().enumerate() {
            if o.index != i {
                return bad(format!("orientation at position {i} has index {}", o.index));
            }
            let n = o.axis.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
                return bad(format!("orientation {i} axis is not a unit vector"));
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (self.orientations[i].axis, self.orientations[j].axis);
                if a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12) {
                    return bad(format!("orientations {i} and {j} coincide"));
                }
            }
        }
        let check = |list: &[(usize, usize)]| list.iter().all(|&(a, b)| a < 3 && b < 3);
        match &self.choice_policy {
            ChoicePolicy::UniformRandom => {}
            ChoicePolicy::FixedSequence { pattern } => {
                if pattern.is_empty() || !check(pattern) {
                    return bad("fixed sequence must be nonempty with indices in 0..3".into());
                }
            }
            ChoicePolicy::ExternalList { choices } => {
                if choices.len() != self.pairs || !check(choices) {
                    return bad(format!(
                        "external list needs {} entries with indices in 0..3 (got {})",
                        self.pairs,
                        choices.len()
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Classical log of one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    #[serde(rename = "pair")]
    pub pair_id: u64,
    /// Side A readings, indexed by orientation.
    #[serde(rename = "wa")]
    pub weak_a: [f64; 3],
    #[serde(rename = "wb")]
    pub weak_b: [f64; 3],
    #[serde(rename = "ca")]
    pub choice_a: usize,
    #[serde(rename = "oa")]
    pub outcome_a: Outcome,
    #[serde(rename = "cb")]
    pub choice_b: usize,
    #[serde(rename = "ob")]
    pub outcome_b: Outcome,
}

impl PairRecord {
    pub fn weak(&self, side: Side) -> &[f64; 3] {
        match side {
            Side::A => &self.weak_a,
            Side::B => &self.weak_b,
        }
    }

    pub fn choice(&self, side: Side) -> usize {
        match side {
            Side::A => self.choice_a,
            Side::B => self.choice_b,
        }
    }

    pub fn outcome(&self, side: Side) -> Outcome {
        match side {
            Side::A => self.outcome_a,
            Side::B => self.outcome_b,
        }
    }
}

fn choices_for(cfg: &ExperimentConfig, pair: usize, root: &RandomStream) -> (usize, usize) {
    match &cfg.choice_policy {
        ChoicePolicy::UniformRandom => {
            let mut r = root.split(CHOICE_STREAM).split(pair as u64);
            (r.index(3), r.index(3))
        }
        ChoicePolicy::FixedSequence { pattern } => pattern[pair % pattern.len()],
        ChoicePolicy::ExternalList { choices } => choices[pair],
    }
}

fn run_pair(cfg: &ExperimentConfig, pair: usize, root: &RandomStream) -> Result<PairRecord, EprError> {
    let (choice_a, choice_b) = choices_for(cfg, pair, root);
    let mut rng = root.split(MEASURE_STREAM).split(pair as u64);
    let mut state = TwoQubitState::singlet();
    let mut readings = [[0.0; 3]; 2];
    for (s, side) in [Side::A, Side::B].into_iter().enumerate() {
        for (j, o) in cfg.orientations.iter().enumerate() {
            let obs = SpinObservable::new(o.axis, side)?;
            let (r, next) = weak_measure(&state, &obs, &cfg.pointer, &mut rng)?;
            readings[s][j] = r;
            state = next;
        }
    }
    let obs_a = SpinObservable::new(cfg.orientations[choice_a].axis, Side::A)?;
    let (outcome_a, state) = strong_measure(&state, &obs_a, &mut rng)?;
    let obs_b = SpinObservable::new(cfg.orientations[choice_b].axis, Side::B)?;
    let (outcome_b, _) = strong_measure(&state, &obs_b, &mut rng)?;
    Ok(PairRecord {
        pair_id: pair as u64,
        weak_a: readings[0],
        weak_b: readings[1],
        choice_a,
        outcome_a,
        choice_b,
        outcome_b,
    })
}

/// Simulates `cfg.pairs` pairs. Identical configs (seed included) give identical records.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PairRecord>, EprError> {
    cfg.validate()?;
    let root = RandomStream::new(cfg.seed);
    (0..cfg.pairs)
        .into_par_iter()
        .map(|i| run_pair(cfg, i, &root))
        .collect()
}
