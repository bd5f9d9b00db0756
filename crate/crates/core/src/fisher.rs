//! Fisher information of a scale family observed through a rescaled variable.
//!
//! For data `q` whose density is `f(Δq; θ)`, the information about θ is
//! `I_Δ(θ) = ∫ [∂θ ln f(Δq; θ)]² f(Δq; θ) dq`. Substituting `u = Δq` gives
//! `I_Δ = I(θ)/Δ`: small Δ means strong information, large Δ weak.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;
use crate::stats::mean_sd;

/// Relative tolerance of the adaptive quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-8;
const MAX_INTERVALS: usize = 4000;
const INITIAL_PIECES: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum FisherError {
    #[error("θ = {0} is outside the family's parameter range")]
    InvalidTheta(f64),
    #[error("scale parameter must be finite and positive, got {0}")]
    InvalidDelta(f64),
    #[error("no scale parameters given")]
    EmptyDeltas,
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("integrand is not finite at q = {0}")]
    NonFinite(f64),
    #[error("quadrature did not converge (estimate {estimate}, error {error})")]
    Divergent { estimate: f64, error: f64 },
    #[error("Monte Carlo needs at least 2 samples")]
    TooFewSamples,
}

/// A one-parameter family of densities `f(q; θ)` with θ acting as a scale.
pub trait ScaleFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn log_density(&self, q: f64, theta: f64) -> f64;
    fn dlog_dtheta(&self, q: f64, theta: f64) -> f64;
    fn sample(&self, theta: f64, rng: &mut RandomStream) -> f64;
    /// Support of the density, possibly infinite.
    fn support(&self) -> (f64, f64);
    /// Finite window holding all but a negligible tail of the mass at θ.
    fn window(&self, theta: f64) -> (f64, f64);

    fn valid_theta(&self, theta: f64) -> bool {
        theta.is_finite() && theta > 0.0
    }
}

/// `N(0, θ²)`: θ is the standard deviation.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianFamily;

pub fn gaussian_family() -> GaussianFamily {
    GaussianFamily
}

impl ScaleFamily for GaussianFamily {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn log_density(&self, q: f64, theta: f64) -> f64 {
        -0.5 * (q / theta).powi(2) - theta.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    fn dlog_dtheta(&self, q: f64, theta: f64) -> f64 {
        (q * q - theta * theta) / theta.powi(3)
    }

    fn sample(&self, theta: f64, rng: &mut RandomStream) -> f64 {
        theta * rng.sample::<f64, _>(StandardNormal)
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn window(&self, theta: f64) -> (f64, f64) {
        (-12.0 * theta, 12.0 * theta)
    }
}

/// `θ⁻¹ exp(−q/θ)` on `q ≥ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialFamily;

impl ScaleFamily for ExponentialFamily {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn log_density(&self, q: f64, theta: f64) -> f64 {
        if q < 0.0 {
            f64::NEG_INFINITY
        } else {
            -q / theta - theta.ln()
        }
    }

    fn dlog_dtheta(&self, q: f64, theta: f64) -> f64 {
        (q - theta) / (theta * theta)
    }

    fn sample(&self, theta: f64, rng: &mut RandomStream) -> f64 {
        theta * rng.sample::<f64, _>(Exp1)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn window(&self, theta: f64) -> (f64, f64) {
        (0.0, 60.0 * theta)
    }
}

/// Every built-in family.
pub fn registered_families() -> Vec<Box<dyn ScaleFamily>> {
    vec![Box::new(GaussianFamily), Box::new(ExponentialFamily)]
}

pub fn family_by_name(name: &str) -> Result<Box<dyn ScaleFamily>, FisherError> {
    registered_families()
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| FisherError::UnknownFamily(name.to_string()))
}

/// The scale Δ applied to the observed variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ScaleParam(f64);

impl ScaleParam {
    pub fn new(delta: f64) -> Result<Self, FisherError> {
        if delta.is_finite() && delta > 0.0 {
            Ok(Self(delta))
        } else {
            Err(FisherError::InvalidDelta(delta))
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ScaleParam {
    type Error = FisherError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ScaleParam> for f64 {
    fn from(p: ScaleParam) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Method {
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherEstimate {
    pub value: f64,
    /// Standard error; `None` for quadrature.
    pub stderr: Option<f64>,
}

/// Fisher information about θ carried by `q` with density `f(Δq; θ)`.
pub fn fisher_numeric(
    fam: &dyn ScaleFamily,
    theta: f64,
    delta: ScaleParam,
    method: Method,
) -> Result<FisherEstimate, FisherError> {
    if !fam.valid_theta(theta) {
        return Err(FisherError::InvalidTheta(theta));
    }
    let d = delta.get();
    match method {
        Method::Quadrature => {
            let (lo, hi) = fam.window(theta);
            let integrand = |q: f64| {
                let u = d * q;
                let lf = fam.log_density(u, theta);
                if lf == f64::NEG_INFINITY {
                    return 0.0;
                }
                fam.dlog_dtheta(u, theta).powi(2) * lf.exp()
            };
            let value = integrate(integrand, lo / d, hi / d, QUADRATURE_RTOL)?;
            Ok(FisherEstimate { value, stderr: None })
        }
        Method::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(FisherError::TooFewSamples);
            }
            let mut rng = RandomStream::new(seed);
            // q is drawn from the normalized rescaled density; the 1/Δ Jacobian
            // of f(Δq; θ) is applied to the average.
            let scores: Vec<f64> = (0..samples)
                .map(|_| {
                    let q = fam.sample(theta, &mut rng) / d;
                    fam.dlog_dtheta(d * q, theta).powi(2)
                })
                .collect();
            let (m, sd) = mean_sd(&scores).ok_or(FisherError::TooFewSamples)?;
            Ok(FisherEstimate {
                value: m / d,
                stderr: Some(sd / (samples as f64).sqrt() / d),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub delta: f64,
    pub fisher: f64,
    pub fisher_times_delta: f64,
}

/// Quadrature estimates of `I_Δ` over a list of scales.
pub fn fisher_scaling(fam: &dyn ScaleFamily, theta: f64, deltas: &[f64]) -> Result<Vec<ScalingRow>, FisherError> {
    if deltas.is_empty() {
        return Err(FisherError::EmptyDeltas);
    }
    deltas
        .iter()
        .map(|&d| {
            let fisher = fisher_numeric(fam, theta, ScaleParam::new(d)?, Method::Quadrature)?.value;
            Ok(ScalingRow {
                delta: d,
                fisher,
                fisher_times_delta: fisher * d,
            })
        })
        .collect()
}

/// Closed forms for the Gaussian family at a given θ and Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianConstants {
    /// `2/(Δθ²)`, from `E[((q²−θ²)/θ³)²] = 2/θ²`.
    pub derived: f64,
    /// `1/(Δθ²)`, the form often quoted for this example. It has the same
    /// Δ-scaling but half the constant.
    pub quoted: f64,
}

pub fn gaussian_constants(theta: f64, delta: f64) -> GaussianConstants {
    GaussianConstants {
        derived: 2.0 / (delta * theta * theta),
        quoted: 1.0 / (delta * theta * theta),
    }
}

// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Piece, FisherError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(FisherError::NonFinite(c));
    }
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let (x1, x2) = (c - h * XGK[i], c + h * XGK[i]);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(FisherError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(FisherError::NonFinite(x2));
        }
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    Ok(Piece {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    })
}

/// Globally adaptive Gauss–Kronrod integration on a finite interval.
fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> Result<f64, FisherError> {
    let step = (b - a) / INITIAL_PIECES as f64;
    let mut heap = BinaryHeap::new();
    for i in 0..INITIAL_PIECES {
        let lo = a + step * i as f64;
        let hi = if i + 1 == INITIAL_PIECES { b } else { lo + step };
        heap.push(kronrod(&f, lo, hi)?);
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= rtol * value.abs() || error < f64::MIN_POSITIVE {
            return Ok(value);
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(FisherError::Divergent { estimate: value, error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&f, worst.a, mid)?);
        heap.push(kronrod(&f, mid, worst.b)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_integrates_known_functions() {
        let v = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (128.0 / 7.0 - 6.0)).abs() < 1e-12);
        let v = integrate(f64::exp, -1.0, 3.0, 1e-12).unwrap();
        assert!((v - (3f64.exp() - (-1f64).exp())).abs() < 1e-11);
        let v = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn densities_normalize() {
        for fam in registered_families() {
            for theta in [0.5, 1.0, 3.0] {
                let (lo, hi) = fam.window(theta);
                let mass = integrate(|q| fam.log_density(q, theta).exp(), lo, hi, 1e-12).unwrap();
                assert!((mass - 1.0).abs() < 1e-8, "{} θ={theta}: {mass}", fam.name());
            }
        }
    }

    #[test]
    fn scores_match_finite_differences() {
        let h = 1e-5;
        for fam in registered_families() {
            let (lo, _) = fam.support();
            for theta in [0.3, 0.7, 1.0, 2.5] {
                for k in 0..=20 {
                    let q = if lo == 0.0 {
                        0.2 * k as f64
                    } else {
                        -2.0 + 0.2 * k as f64
                    };
                    let fd = (fam.log_density(q, theta + h) - fam.log_density(q, theta - h)) / (2.0 * h);
                    assert!(
                        (fd - fam.dlog_dtheta(q, theta)).abs() < 1e-6,
                        "{} q={q} θ={theta}",
                        fam.name()
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_unit_information() {
        let d = fisher_numeric(&GaussianFamily, 1.0, ScaleParam::new(1.0).unwrap(), Method::Quadrature).unwrap();
        assert!((d.value - 2.0).abs() < 2e-6);
        let c = gaussian_constants(1.0, 1.0);
        assert_eq!((c.derived, c.quoted), (2.0, 1.0));
    }

    #[test]
    fn exponential_information() {
        for theta in [0.5, 2.0] {
            let v = fisher_numeric(
                &ExponentialFamily,
                theta,
                ScaleParam::new(1.0).unwrap(),
                Method::Quadrature,
            )
            .unwrap()
            .value;
            assert!((v * theta * theta - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn doubling_delta_halves_information() {
        for fam in registered_families() {
            for d in [0.01, 0.3, 1.0, 7.0, 100.0] {
                let a = fisher_numeric(fam.as_ref(), 1.3, ScaleParam::new(d).unwrap(), Method::Quadrature).unwrap();
                let b =
                    fisher_numeric(fam.as_ref(), 1.3, ScaleParam::new(2.0 * d).unwrap(), Method::Quadrature).unwrap();
                assert!((a.value / b.value - 2.0).abs() < 1e-6 * 2.0, "{} Δ={d}", fam.name());
            }
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(ScaleParam::new(0.0).is_err());
        assert!(ScaleParam::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<ScaleParam>("-1.0").is_err());
        let one = ScaleParam::new(1.0).unwrap();
        assert_eq!(
            fisher_numeric(&GaussianFamily, -1.0, one, Method::Quadrature),
            Err(FisherError::InvalidTheta(-1.0))
        );
        assert_eq!(fisher_scaling(&GaussianFamily, 1.0, &[]), Err(FisherError::EmptyDeltas));
        assert!(family_by_name("cauchy").is_err());
        assert_eq!(family_by_name("exponential").unwrap().name(), "exponential");
    }

    /// A family whose squared score has a non-integrable singularity at q = 0.
    struct Singular;
    impl ScaleFamily for Singular {
        fn name(&self) -> &'static str {
            "singular"
        }
        fn log_density(&self, q: f64, _theta: f64) -> f64 {
            -0.5 * q.ln() - 2f64.ln()
        }
        fn dlog_dtheta(&self, q: f64, _theta: f64) -> f64 {
            q.powf(-0.5)
        }
        fn sample(&self, _theta: f64, rng: &mut RandomStream) -> f64 {
            rng.uniform().powi(2)
        }
        fn support(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn window(&self, _theta: f64) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    #[test]
    fn divergent_integrand_is_an_error() {
        let r = fisher_numeric(&Singular, 1.0, ScaleParam::new(1.0).unwrap(), Method::Quadrature);
        assert!(
            matches!(r, Err(FisherError::Divergent { .. }) | Err(FisherError::NonFinite(_))),
            "{r:?}"
        );
    }
}
