//! Retrospective analyses of recorded pairs: slicing, slicing counts,
//! prediction attempts, fluctuation likelihoods and sliced sums.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{run_experiment, EprError, ExperimentConfig, PairRecord};
use crate::quantum::{Outcome, PointerModel, Side};
use crate::rng::RandomStream;
use crate::stats::mean_sd;

/// Largest N for which [`SearchMode::Exhaustive`] is accepted.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Which records to aggregate and which readings to average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    /// Orientation the conditioning side must have chosen.
    pub orientation: usize,
    /// The conditioning side; readings come from the other side.
    pub side: Side,
    pub outcome: Outcome,
    /// Orientation of the averaged readings; defaults to `orientation`.
    pub reading_orientation: Option<usize>,
    /// Also require the reading side's own strong choice and outcome.
    pub co_condition: Option<(usize, Outcome)>,
}

impl SliceSpec {
    pub fn new(orientation: usize, side: Side, outcome: Outcome) -> Self {
        Self {
            orientation,
            side,
            outcome,
            reading_orientation: None,
            co_condition: None,
        }
    }

    pub fn reading(mut self, orientation: usize) -> Self {
        self.reading_orientation = Some(orientation);
        self
    }

    pub fn co_conditioned(mut self, choice: usize, outcome: Outcome) -> Self {
        self.co_condition = Some((choice, outcome));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSummary {
    pub orientation: usize,
    pub reading_orientation: usize,
    pub conditioned_on: (Side, Outcome),
    pub co_condition: Option<(usize, Outcome)>,
    pub count: usize,
    /// `None` when the slice is empty.
    pub mean_reading: Option<f64>,
    /// `δ/√M` from the configured pointer noise.
    pub sem: Option<f64>,
}

/// Averages the other side's weak readings over the records selected by `spec`.
pub fn slice(records: &[PairRecord], spec: &SliceSpec, pointer: &PointerModel) -> SliceSummary {
    let reading_orientation = spec.reading_orientation.unwrap_or(spec.orientation);
    let other = spec.side.other();
    let (count, total) = records
        .iter()
        .filter(|r| r.choice(spec.side) == spec.orientation && r.outcome(spec.side) == spec.outcome)
        .filter(|r| match spec.co_condition {
            Some((c, o)) => r.choice(other) == c && r.outcome(other) == o,
            None => true,
        })
        .fold((0usize, 0.0), |(n, s), r| {
            (n + 1, s + r.weak(other)[reading_orientation])
        });
    let (mean_reading, sem) = if count == 0 {
        (None, None)
    } else {
        (
            Some(total / count as f64),
            Some(pointer.noise() / (count as f64).sqrt()),
        )
    };
    SliceSummary {
        orientation: spec.orientation,
        reading_orientation,
        conditioned_on: (spec.side, spec.outcome),
        co_condition: spec.co_condition,
        count,
        mean_reading,
        sem,
    }
}

/// Number of balanced splits of N pairs, exactly and by Stirling's approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicingCount {
    pub n: usize,
    pub exact: BigUint,
    /// `2^N·√(2/(πN))`; infinite beyond the f64 range.
    pub stirling: f64,
    /// `log₂` of the Stirling estimate; finite for every N.
    pub log2_stirling: f64,
    /// `exact / stirling`, computed with both sides rescaled so it stays finite.
    pub ratio: f64,
}

pub fn count_slicings(n: usize) -> Result<SlicingCount, EprError> {
    if n < 2 || n % 2 == 1 {
        return Err(EprError::OddOrSmallCount(n));
    }
    let k = n / 2;
    let mut exact = BigUint::one();
    for i in 1..=k {
        exact = exact * BigUint::from(n - k + i) / BigUint::from(i);
    }
    let shape = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
    let stirling = 2f64.powi(n.min(i32::MAX as usize) as i32) * shape;
    let shift = n.saturating_sub(64);
    let scaled_exact = (&exact >> shift).to_f64().unwrap_or(f64::INFINITY);
    let ratio = scaled_exact / (2f64.powi((n - shift) as i32) * shape);
    Ok(SlicingCount {
        n,
        exact,
        stirling,
        log2_stirling: n as f64 + shape.log2(),
        ratio,
    })
}

/// A ±1 label per pair, taken from one side's point of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slicing {
    pub side: Side,
    pub labels: Vec<Outcome>,
}

impl Slicing {
    pub fn new(side: Side, labels: Vec<Outcome>) -> Self {
        Self { side, labels }
    }

    /// Labels each pair by `side`'s strong outcome: the slicing that actually happened.
    pub fn from_outcomes(records: &[PairRecord], side: Side) -> Self {
        Self::new(side, records.iter().map(|r| r.outcome(side)).collect())
    }

    pub fn plus_count(&self) -> usize {
        self.labels.iter().filter(|&&o| o == Outcome::Plus).count()
    }

    pub fn is_balanced(&self) -> bool {
        self.plus_count() * 2 == self.labels.len()
    }
}

/// Per-orientation readings of the non-slicing side, laid out by orientation.
struct Rows {
    rows: [Vec<f64>; 3],
    totals: [f64; 3],
    delta: f64,
}

impl Rows {
    fn new(records: &[PairRecord], side: Side, delta: f64) -> Self {
        let rows: [Vec<f64>; 3] = std::array::from_fn(|j| records.iter().map(|r| r.weak(side)[j]).collect());
        let totals = std::array::from_fn(|j| rows[j].iter().sum());
        Self { rows, totals, delta }
    }

    fn n(&self) -> usize {
        self.rows[0].len()
    }

    /// Sum of |z| over orientations, where z is the standardized difference
    /// between the plus-labelled and minus-labelled reading means.
    fn statistic_from_plus_sums(&self, plus_sums: &[f64; 3], n_plus: usize) -> f64 {
        let n_minus = self.n() - n_plus;
        if n_plus == 0 || n_minus == 0 {
            return 0.0;
        }
        let (np, nm) = (n_plus as f64, n_minus as f64);
        let scale = self.delta * (1.0 / np + 1.0 / nm).sqrt();
        (0..3)
            .map(|j| ((plus_sums[j] / np - (self.totals[j] - plus_sums[j]) / nm) / scale).abs())
            .sum()
    }

    fn statistic_for_mask(&self, mask: u64) -> f64 {
        let mut sums = [0.0; 3];
        let mut n_plus = 0;
        for i in 0..self.n() {
            if mask >> i & 1 == 1 {
                n_plus += 1;
                for (j, s) in sums.iter_mut().enumerate() {
                    *s += self.rows[j][i];
                }
            }
        }
        self.statistic_from_plus_sums(&sums, n_plus)
    }

    fn statistic_for_indices(&self, plus: &[usize]) -> f64 {
        let mut sums = [0.0; 3];
        for &i in plus {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.rows[j][i];
            }
        }
        self.statistic_from_plus_sums(&sums, plus.len())
    }
}

fn check_len(records: &[PairRecord], slicing: &Slicing) -> Result<(), EprError> {
    if slicing.labels.len() != records.len() {
        return Err(EprError::SlicingLength {
            labels: slicing.labels.len(),
            records: records.len(),
        });
    }
    Ok(())
}

/// Deviation statistic of a slicing: the absolute z-score of the sliced mean
/// difference, summed over the three orientations of the other side's readings.
pub fn deviation_statistic(records: &[PairRecord], slicing: &Slicing, pointer: &PointerModel) -> Result<f64, EprError> {
    check_len(records, slicing)?;
    let rows = Rows::new(records, slicing.side.other(), pointer.noise());
    let plus: Vec<usize> = (0..records.len())
        .filter(|&i| slicing.labels[i] == Outcome::Plus)
        .collect();
    Ok(rows.statistic_for_indices(&plus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SearchMode {
    /// Every balanced slicing, for N up to [`EXHAUSTIVE_LIMIT`].
    Exhaustive,
    /// `samples` uniformly drawn balanced slicings.
    Sampled { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub pairs: usize,
    pub search: SearchMode,
    /// Number of balanced slicings the true one was compared against.
    pub compared: u64,
    pub true_is_balanced: bool,
    pub true_statistic: f64,
    /// Randomized (tie-splitting) quantile of the true statistic.
    pub quantile: f64,
    /// Compared slicings (other than the true one) whose statistic lies within
    /// one standard error unit of the true statistic.
    pub within_one_sem: u64,
    pub fraction_within_one_sem: f64,
}

/// Ranks the true slicing's deviation statistic among balanced alternatives.
///
/// A quantile near 1 means the true slicing stands out from the crowd of
/// equally balanced candidates; a uniform quantile means it cannot be told apart.
pub fn prediction_attempt(
    records: &[PairRecord],
    true_slicing: &Slicing,
    search: SearchMode,
    pointer: &PointerModel,
    rng: &mut RandomStream,
) -> Result<PredictionReport, EprError> {
    check_len(records, true_slicing)?;
    let n = records.len();
    if n == 0 || n % 2 == 1 {
        return Err(EprError::UnbalancedPairs(n));
    }
    let rows = Rows::new(records, true_slicing.side.other(), pointer.noise());
    let true_plus: Vec<usize> = (0..n).filter(|&i| true_slicing.labels[i] == Outcome::Plus).collect();
    let t_true = rows.statistic_for_indices(&true_plus);
    let tol = 1e-9 * (1.0 + t_true.abs());

    let mut less = 0u64;
    let mut equal = 0u64;
    let mut near = 0u64;
    let mut compared = 0u64;
    let mut self_hits = 0u64;
    let mut tally = |t: f64, is_true: bool| {
        compared += 1;
        if is_true {
            self_hits += 1;
        } else if (t - t_true).abs() <= 1.0 {
            near += 1;
        }
        if (t - t_true).abs() <= tol {
            equal += 1;
        } else if t < t_true {
            less += 1;
        }
    };

    let half = n / 2;
    let true_in_set;
    match search {
        SearchMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(EprError::ExhaustiveTooLarge {
                    pairs: n,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let true_mask: u64 = true_plus.iter().map(|&i| 1u64 << i).sum();
            true_in_set = true_slicing.is_balanced();
            // Gosper's hack over all n-bit masks with `half` bits set
            let mut mask: u64 = (1 << half) - 1;
            while mask < 1 << n {
                tally(rows.statistic_for_mask(mask), mask == true_mask);
                let low = mask & mask.wrapping_neg();
                let ripple = mask + low;
                mask = (((ripple ^ mask) >> 2) / low) | ripple;
            }
        }
        SearchMode::Sampled { samples } => {
            true_in_set = false;
            let mut idx: Vec<usize> = (0..n).collect();
            for _ in 0..samples {
                for i in 0..half {
                    let j = i + rng.index(n - i);
                    idx.swap(i, j);
                }
                let mut plus = idx[..half].to_vec();
                plus.sort_unstable();
                tally(rows.statistic_for_indices(&plus), false);
            }
        }
    }

    let u = rng.uniform();
    let quantile = if true_in_set {
        (less as f64 + u * equal as f64) / compared as f64
    } else {
        (less as f64 + u * (equal + 1) as f64) / (compared + 1) as f64
    };
    let others = compared - self_hits;
    Ok(PredictionReport {
        pairs: n,
        search,
        compared,
        true_is_balanced: true_slicing.is_balanced(),
        true_statistic: t_true,
        quantile,
        within_one_sem: near,
        fraction_within_one_sem: if others == 0 { 0.0 } else { near as f64 / others as f64 },
    })
}

/// Likelihood ratio of "pure pointer noise" against "genuine ±λ signal" for a
/// slice mean of `m` readings. Values above 1 favour a measurement error.
pub fn fluctuation_likelihood(observed_mean: f64, m: usize, pointer: &PointerModel) -> Result<f64, EprError> {
    if m == 0 {
        return Err(EprError::EmptySample);
    }
    let s2 = pointer.noise().powi(2) / m as f64;
    let lambda = pointer.coupling();
    let signal = if observed_mean >= 0.0 { lambda } else { -lambda };
    let log_ratio = ((observed_mean - signal).powi(2) - observed_mean.powi(2)) / (2.0 * s2);
    Ok(log_ratio.exp())
}

/// `Σ label_i · reading_i` over the other side's readings at `orientation`.
pub fn sliced_sum(records: &[PairRecord], slicing: &Slicing, orientation: usize) -> Result<f64, EprError> {
    check_len(records, slicing)?;
    let other = slicing.side.other();
    Ok(records
        .iter()
        .zip(slicing.labels.iter())
        .map(|(r, l)| f64::from(l.value()) * r.weak(other)[orientation])
        .sum())
}

/// Empirical distribution of the true-slicing sum over repeated seeds, next to
/// the closed-form Gaussian `(λ√N/2, δ√N/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumStatistics {
    pub pairs: usize,
    pub orientation: usize,
    pub slicing_side: Side,
    pub sums: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub closed_form_mean: f64,
    pub closed_form_sd: f64,
}

pub fn sum_statistics(
    cfg: &ExperimentConfig,
    seeds: &[u64],
    orientation: usize,
    slicing_side: Side,
) -> Result<SumStatistics, EprError> {
    if seeds.len() < 2 {
        return Err(EprError::EmptySample);
    }
    let mut sums = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let run = ExperimentConfig { seed, ..cfg.clone() };
        let records = run_experiment(&run)?;
        let slicing = Slicing::from_outcomes(&records, slicing_side);
        sums.push(sliced_sum(&records, &slicing, orientation)?);
    }
    let (mean, sd) = mean_sd(&sums).ok_or(EprError::EmptySample)?;
    let root_n = (cfg.pairs as f64).sqrt();
    Ok(SumStatistics {
        pairs: cfg.pairs,
        orientation,
        slicing_side,
        sums,
        mean,
        sd,
        closed_form_mean: cfg.pointer.coupling() * root_n / 2.0,
        closed_form_sd: cfg.pointer.noise() * root_n / 2.0,
    })
}
