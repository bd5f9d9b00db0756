//! Density-matrix oracle for the pair experiment, written independently of the
//! statevector simulator. Averaged over pointer readings, a Gaussian pointer
//! measurement of a spin projector pair acts as the channel
//! `ρ → P₊ρP₊ + P₋ρP₋ + κ(P₊ρP₋ + P₋ρP₊)` with `κ = exp(−λ²/2δ²)`, and the
//! reading-weighted operator is `λ(P₊ρP₊ − P₋ρP₋)`.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M4 = [[C; 4]; 4];

const Z: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

fn zero() -> M4 {
    [[Z; 4]; 4]
}

fn mul(a: &M4, b: &M4) -> M4 {
    let mut r = zero();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                r[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    r
}

fn add(a: &M4, b: &M4, s: f64) -> M4 {
    let mut r = *a;
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] += b[i][j] * s;
        }
    }
    r
}

fn trace(a: &M4) -> C {
    (0..4).map(|i| a[i][i]).sum()
}

/// `(I ± n·σ)/2` on one qubit.
fn spin_projector(n: [f64; 3], sign: f64) -> [[C; 2]; 2] {
    let [x, y, z] = n;
    [
        [
            C::new(0.5 * (1.0 + sign * z), 0.0),
            C::new(0.5 * sign * x, -0.5 * sign * y),
        ],
        [
            C::new(0.5 * sign * x, 0.5 * sign * y),
            C::new(0.5 * (1.0 - sign * z), 0.0),
        ],
    ]
}

/// Kronecker product with side A as the left (most significant) factor.
fn embed(p: [[C; 2]; 2], side_a: bool) -> M4 {
    let id = [[ONE, Z], [Z, ONE]];
    let (l, r) = if side_a { (p, id) } else { (id, p) };
    let mut m = zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = l[i / 2][j / 2] * r[i % 2][j % 2];
        }
    }
    m
}

pub fn projector(n: [f64; 3], sign: f64, side_a: bool) -> M4 {
    embed(spin_projector(n, sign), side_a)
}

pub fn singlet() -> M4 {
    // (|↑↓⟩ − |↓↑⟩)/√2 in the order ↑↑, ↑↓, ↓↑, ↓↓
    let v = [0.0, 1.0, -1.0, 0.0];
    let mut m = zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = C::new(v[i] * v[j] / 2.0, 0.0);
        }
    }
    m
}

fn sandwich(p: &M4, rho: &M4, q: &M4) -> M4 {
    mul(&mul(p, rho), q)
}

/// Reading-averaged weak measurement channel.
pub fn weak_channel(rho: &M4, n: [f64; 3], side_a: bool, kappa: f64) -> M4 {
    let pp = projector(n, 1.0, side_a);
    let pm = projector(n, -1.0, side_a);
    let diag = add(&sandwich(&pp, rho, &pp), &sandwich(&pm, rho, &pm), 1.0);
    let off = add(&sandwich(&pp, rho, &pm), &sandwich(&pm, rho, &pp), 1.0);
    add(&diag, &off, kappa)
}

/// `∫ r · M_r ρ M_r† dr` for the same measurement.
pub fn weak_reading_weighted(rho: &M4, n: [f64; 3], side_a: bool, lambda: f64) -> M4 {
    let pp = projector(n, 1.0, side_a);
    let pm = projector(n, -1.0, side_a);
    add(&sandwich(&pp, rho, &pp), &sandwich(&pm, rho, &pm), -1.0).map(|row| row.map(|x| x * lambda))
}

pub fn default_axes() -> [[f64; 3]; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [s, 0.0, s]]
}

/// Runs the six weak measurements (A along 0,1,2 then B along 0,1,2). If
/// `weighted` is `Some((side_a, k))`, that measurement contributes its reading.
fn propagate(lambda: f64, delta: f64, weighted: Option<(bool, usize)>) -> M4 {
    let kappa = (-lambda * lambda / (2.0 * delta * delta)).exp();
    let axes = default_axes();
    let mut rho = singlet();
    for side_a in [true, false] {
        for (k, n) in axes.iter().enumerate() {
            rho = if weighted == Some((side_a, k)) {
                weak_reading_weighted(&rho, *n, side_a, lambda)
            } else {
                weak_channel(&rho, *n, side_a, kappa)
            };
        }
    }
    rho
}

/// Exact `E[reading on the other side along k | conditioning side chose j and got v]`,
/// one-sided (the reading side's own strong measurement is marginalized out,
/// which it can be since it commutes with everything on the other side).
pub fn slice_mean(lambda: f64, delta: f64, cond_side_a: bool, j: usize, v: f64, k: usize) -> f64 {
    let axes = default_axes();
    let effect = projector(axes[j], v, cond_side_a);
    let num = trace(&mul(&effect, &propagate(lambda, delta, Some((!cond_side_a, k))))).re;
    let den = trace(&mul(&effect, &propagate(lambda, delta, None))).re;
    num / den
}

/// Exact `E[o_A o_B]` of the strong outcomes along `(ca, cb)` after all six weak measurements.
pub fn strong_correlation(lambda: f64, delta: f64, ca: usize, cb: usize) -> f64 {
    let axes = default_axes();
    let rho = propagate(lambda, delta, None);
    let mut e = 0.0;
    for sa in [1.0, -1.0] {
        for sb in [1.0, -1.0] {
            let p = mul(&projector(axes[ca], sa, true), &projector(axes[cb], sb, false));
            e += sa * sb * trace(&mul(&p, &rho)).re;
        }
    }
    e
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Exact `E[o · r]` where `o` is the conditioning side's strong outcome along
/// `j` and `r` the other side's reading along `k`.
pub fn outcome_reading_moment(lambda: f64, delta: f64, cond_side_a: bool, j: usize, k: usize) -> f64 {
    let axes = default_axes();
    let rho = propagate(lambda, delta, Some((!cond_side_a, k)));
    let plus = trace(&mul(&projector(axes[j], 1.0, cond_side_a), &rho)).re;
    let minus = trace(&mul(&projector(axes[j], -1.0, cond_side_a), &rho)).re;
    plus - minus
}
