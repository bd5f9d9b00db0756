//! Exact two-qubit statevector engine.
//!
//! Amplitudes are stored in the lab z-basis in the order
//! `(↑↑, ↑↓, ↓↑, ↓↓)`, first spin on side A. Weak measurements use the
//! von Neumann Gaussian-pointer model: a pointer of reading variance `δ²` is
//! displaced by `±λ` per eigenvalue, and the post-measurement state is the
//! analytically reweighted projection pair (no pointer Hilbert space is kept).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Single-qubit operator in the z-basis, `m[row][col]`.
pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used to decide whether an incoming state is normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Below this `|⟨post|pre⟩|` a weak value is reported as undefined.
pub const OVERLAP_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("axis must be a finite nonzero 3-vector")]
    InvalidAxis,
    #[error("pointer requires coupling >= 0 and noise > 0 (got coupling {coupling}, noise {noise})")]
    InvalidPointer { coupling: f64, noise: f64 },
    #[error("post-selected state is orthogonal to the pre-selected state (|overlap| = {overlap:e})")]
    OrthogonalPostSelection { overlap: f64 },
    #[error("pre- and post-selection admit neither outcome")]
    InconsistentSelection,
}

/// Which particle of the pair an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// A ±1 measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Option<Outcome> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    fn sign(self) -> f64 {
        f64::from(self.value())
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i8::deserialize(d)?;
        Outcome::from_value(v).ok_or_else(|| serde::de::Error::custom(format!("outcome must be ±1, got {v}")))
    }
}

fn normalize_axis(axis: [f64; 3]) -> Result<[f64; 3], QuantumError> {
    let n = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !n.is_finite() || n == 0.0 {
        return Err(QuantumError::InvalidAxis);
    }
    Ok([axis[0] / n, axis[1] / n, axis[2] / n])
}

/// `σ·n̂` for a unit Bloch vector.
pub fn pauli_along(axis: [f64; 3]) -> Matrix2 {
    let [x, y, z] = axis;
    [
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ]
}

/// Eigenvector of `σ·n̂` with the given eigenvalue.
pub fn spin_state(axis: [f64; 3], outcome: Outcome) -> Result<[Complex64; 2], QuantumError> {
    let [x, y, z] = normalize_axis(axis)?;
    let theta = z.clamp(-1.0, 1.0).acos();
    let phase = Complex64::from_polar(1.0, y.atan2(x));
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Ok(match outcome {
        Outcome::Plus => [Complex64::new(c, 0.0), phase * s],
        Outcome::Minus => [Complex64::new(s, 0.0), -phase * c],
    })
}

/// A single-side operator on the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOperator {
    pub matrix: Matrix2,
    pub side: Side,
}

impl LocalOperator {
    pub fn new(matrix: Matrix2, side: Side) -> Self {
        Self { matrix, side }
    }

    pub fn identity(side: Side) -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]], side)
    }

    /// `alpha·self + beta·other`; both must act on the same side.
    pub fn combine(&self, alpha: Complex64, other: &LocalOperator, beta: Complex64) -> LocalOperator {
        assert_eq!(self.side, other.side, "operators must act on the same side");
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = alpha * self.matrix[i][j] + beta * other.matrix[i][j];
            }
        }
        LocalOperator::new(m, self.side)
    }

    fn apply(&self, amps: &[Complex64; 4]) -> [Complex64; 4] {
        let m = &self.matrix;
        let mut out = [ZERO; 4];
        for i in 0..2 {
            for other in 0..2 {
                let idx = |k: usize| match self.side {
                    Side::A => 2 * k + other,
                    Side::B => 2 * other + k,
                };
                out[idx(i)] = m[i][0] * amps[idx(0)] + m[i][1] * amps[idx(1)];
            }
        }
        out
    }
}

/// `σ·n̂` acting on one side, with eigenvalues exactly ±1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinObservable {
    axis: [f64; 3],
    side: Side,
}

impl SpinObservable {
    /// Normalizes `axis`; fails for zero or non-finite vectors.
    pub fn new(axis: [f64; 3], side: Side) -> Result<Self, QuantumError> {
        Ok(Self {
            axis: normalize_axis(axis)?,
            side,
        })
    }

    pub fn x(side: Side) -> Self {
        Self {
            axis: [1.0, 0.0, 0.0],
            side,
        }
    }

    pub fn y(side: Side) -> Self {
        Self {
            axis: [0.0, 1.0, 0.0],
            side,
        }
    }

    pub fn z(side: Side) -> Self {
        Self {
            axis: [0.0, 0.0, 1.0],
            side,
        }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn operator(&self) -> LocalOperator {
        LocalOperator::new(pauli_along(self.axis), self.side)
    }

    /// `(I ± σ·n̂)/2`.
    pub fn projector(&self, outcome: Outcome) -> LocalOperator {
        let s = Complex64::new(outcome.sign() * 0.5, 0.0);
        let half = Complex64::new(0.5, 0.0);
        LocalOperator::identity(self.side).combine(half, &self.operator(), s)
    }
}

/// Gaussian pointer: displacement `coupling` (λ) per eigenvalue unit,
/// reading standard deviation `noise` (δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointerParams", into = "PointerParams")]
pub struct PointerModel {
    coupling: f64,
    noise: f64,
}

#[derive(Serialize, Deserialize)]
struct PointerParams {
    coupling: f64,
    noise: f64,
}

impl TryFrom<PointerParams> for PointerModel {
    type Error = QuantumError;

    fn try_from(p: PointerParams) -> Result<Self, Self::Error> {
        PointerModel::new(p.coupling, p.noise)
    }
}

impl From<PointerModel> for PointerParams {
    fn from(p: PointerModel) -> Self {
        PointerParams {
            coupling: p.coupling,
            noise: p.noise,
        }
    }
}

impl PointerModel {
    /// Zero coupling is accepted and models "no measurement".
    pub fn new(coupling: f64, noise: f64) -> Result<Self, QuantumError> {
        if !(coupling.is_finite() && coupling >= 0.0 && noise.is_finite() && noise > 0.0) {
            return Err(QuantumError::InvalidPointer { coupling, noise });
        }
        Ok(Self { coupling, noise })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn strength(&self) -> f64 {
        self.coupling / self.noise
    }

    pub fn is_weak(&self) -> bool {
        self.strength() < 0.2
    }

    /// Coherence retained between the two eigenspaces after averaging over
    /// readings: `exp(-λ²/(2δ²))`.
    pub fn coherence_factor(&self) -> f64 {
        (-self.strength().powi(2) / 2.0).exp()
    }
}

/// Normalized pure state of the spin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: [Complex64; 4]) -> Result<Self, QuantumError> {
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if n2 == 0.0 {
            return Err(QuantumError::ZeroVector);
        }
        let inv = 1.0 / n2.sqrt();
        Ok(Self {
            amps: amps.map(|a| a * inv),
        })
    }

    /// Wraps amplitudes without normalizing; only for exercising contract checks.
    #[doc(hidden)]
    pub fn from_amplitudes_unchecked(amps: [Complex64; 4]) -> Self {
        Self { amps }
    }

    /// `(|↑↓⟩ − |↓↑⟩)/√2`.
    pub fn singlet() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amps: [ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), ZERO],
        }
    }

    /// Product of z-basis spins; `Plus` is ↑.
    pub fn basis(a: Outcome, b: Outcome) -> Self {
        let ia = usize::from(a == Outcome::Minus);
        let ib = usize::from(b == Outcome::Minus);
        let mut amps = [ZERO; 4];
        amps[2 * ia + ib] = ONE;
        Self { amps }
    }

    pub fn product(a: [Complex64; 2], b: [Complex64; 2]) -> Result<Self, QuantumError> {
        Self::from_amplitudes([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &TwoQubitState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `⟨ψ|Op|ψ⟩`.
    pub fn expectation(&self, op: &LocalOperator) -> Complex64 {
        let applied = op.apply(&self.amps);
        self.amps.iter().zip(applied.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ψ|σ_n(A) ⊗ σ_m(B)|ψ⟩`.
    pub fn correlation(&self, axis_a: [f64; 3], axis_b: [f64; 3]) -> Result<f64, QuantumError> {
        let a = SpinObservable::new(axis_a, Side::A)?.operator();
        let b = SpinObservable::new(axis_b, Side::B)?.operator();
        let applied = a.apply(&b.apply(&self.amps));
        let v: Complex64 = self.amps.iter().zip(applied.iter()).map(|(x, y)| x.conj() * y).sum();
        Ok(v.re)
    }

    fn require_normalized(&self) -> Result<(), QuantumError> {
        let n2 = self.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized { norm_sqr: n2 });
        }
        Ok(())
    }
}

fn norm_sqr(v: &[Complex64; 4]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Gaussian-pointer measurement of `obs`.
///
/// The reading is drawn from `w₊·N(+λ, δ²) + w₋·N(−λ, δ²)` with Born weights
/// `w± = ‖P±ψ‖²`; the state is updated to
/// `normalize(e^{−(r−λ)²/4δ²} P₊ψ + e^{−(r+λ)²/4δ²} P₋ψ)`.
pub fn weak_measure(
    state: &TwoQubitState,
    obs: &SpinObservable,
    pointer: &PointerModel,
    rng: &mut RandomStream,
) -> Result<(f64, TwoQubitState), QuantumError> {
    state.require_normalized()?;
    let plus = obs.projector(Outcome::Plus).apply(&state.amps);
    let minus = obs.projector(Outcome::Minus).apply(&state.amps);
    let w_plus = norm_sqr(&plus);

    let lambda = pointer.coupling;
    let delta = pointer.noise;
    let branch = if rng.uniform() < w_plus { 1.0 } else { -1.0 };
    let reading = branch * lambda + delta * rng.standard_normal();

    // log-weights shifted by their max so the larger factor is exactly 1
    let lp = -(reading - lambda).powi(2) / (4.0 * delta * delta);
    let lm = -(reading + lambda).powi(2) / (4.0 * delta * delta);
    let top = lp.max(lm);
    let (gp, gm) = ((lp - top).exp(), (lm - top).exp());

    let mut out = [ZERO; 4];
    for i in 0..4 {
        out[i] = plus[i] * gp + minus[i] * gm;
    }
    Ok((reading, TwoQubitState::from_amplitudes(out)?))
}

/// Projective measurement of `obs` with Born-rule sampling.
pub fn strong_measure(
    state: &TwoQubitState,
    obs: &SpinObservable,
    rng: &mut RandomStream,
) -> Result<(Outcome, TwoQubitState), QuantumError> {
    state.require_normalized()?;
    let plus = obs.projector(Outcome::Plus).apply(&state.amps);
    let w_plus = norm_sqr(&plus);
    let outcome = if rng.uniform() < w_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let projected = match outcome {
        Outcome::Plus => plus,
        Outcome::Minus => obs.projector(Outcome::Minus).apply(&state.amps),
    };
    Ok((outcome, TwoQubitState::from_amplitudes(projected)?))
}

/// Pre-selected ket and post-selected bra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateVector {
    pub pre: TwoQubitState,
    pub post: TwoQubitState,
}

impl TwoStateVector {
    pub fn new(pre: TwoQubitState, post: TwoQubitState) -> Self {
        Self { pre, post }
    }

    /// `⟨post|pre⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.post.inner(&self.pre)
    }

    fn transition(&self, op: &LocalOperator) -> Complex64 {
        let applied = op.apply(&self.pre.amps);
        self.post
            .amps
            .iter()
            .zip(applied.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// `⟨post|Op|pre⟩ / ⟨post|pre⟩` for an arbitrary single-side operator.
pub fn weak_value_of(tsv: &TwoStateVector, op: &LocalOperator) -> Result<Complex64, QuantumError> {
    let overlap = tsv.overlap();
    if overlap.norm() <= OVERLAP_THRESHOLD {
        return Err(QuantumError::OrthogonalPostSelection {
            overlap: overlap.norm(),
        });
    }
    Ok(tsv.transition(op) / overlap)
}

/// Weak value of a spin observable. The pointer shift corresponds to the real part.
pub fn weak_value(tsv: &TwoStateVector, obs: &SpinObservable) -> Result<Complex64, QuantumError> {
    weak_value_of(tsv, &obs.operator())
}

/// ABL probabilities `p± ∝ |⟨post|P±|pre⟩|²` for an intermediate projective measurement.
pub fn abl_probability(tsv: &TwoStateVector, obs: &SpinObservable) -> Result<(f64, f64), QuantumError> {
    let np = tsv.transition(&obs.projector(Outcome::Plus)).norm_sqr();
    let nm = tsv.transition(&obs.projector(Outcome::Minus)).norm_sqr();
    let total = np + nm;
    if total.is_nan() || total <= f64::MIN_POSITIVE {
        return Err(QuantumError::InconsistentSelection);
    }
    Ok((np / total, nm / total))
}
