//! The state family `|ψ⟩ = N^{-1/2} (t a + r a†)|α⟩` and its number-basis image.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Normalizations at or below this are rejected as degenerate.
pub const MIN_NORM: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-12;

/// Validated parameters `(α, t, r)` with the cached normalization
/// `N = r² + |α|² + r t (α² + α*²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateParams {
    alpha: Complex64,
    t: f64,
    r: f64,
    norm: f64,
}

impl StateParams {
    /// Builds the state with `t = +√(1 − r²)`.
    pub fn new(alpha: Complex64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain(format!("r = {r} is outside [0, 1]")));
        }
        let t = (1.0 - r * r).max(0.0).sqrt();
        Self::build(alpha, t, r)
    }

    /// Builds the state with explicitly signed `t` and `r` (the heralded
    /// scheme produces negative `t`). Requires `t² + r² = 1`.
    pub fn with_signed_t(alpha: Complex64, t: f64, r: f64) -> Result<Self> {
        if !t.is_finite() || !r.is_finite() || (t * t + r * r - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!(
                "t = {t}, r = {r} do not satisfy t² + r² = 1"
            )));
        }
        Self::build(alpha, t, r)
    }

    fn build(alpha: Complex64, t: f64, r: f64) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::domain("alpha must be finite"));
        }
        let norm = r * r + alpha.norm_sqr() + 2.0 * r * t * (alpha * alpha).re;
        if norm.is_nan() || norm <= MIN_NORM {
            return Err(Error::DegenerateState(norm));
        }
        Ok(StateParams { alpha, t, r, norm })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The normalization `N`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Same `(t, r)` with `α` replaced by `|α| e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> Result<Self> {
        let alpha = Complex64::from_polar(self.alpha.norm(), phi);
        Self::build(alpha, self.t, self.r)
    }
}

/// Free-function form of [`StateParams::new`].
pub fn make_state(alpha: Complex64, r: f64) -> Result<StateParams> {
    StateParams::new(alpha, r)
}

/// Truncated number-basis amplitudes `c_0..c_{n_max}` with an upper bound on
/// the omitted probability mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
    tail_bound: f64,
    raw_norm_sqr: f64,
}

impl FockVector {
    /// Wraps raw amplitudes, normalizing them to unit norm.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>, tail_bound: f64) -> Result<Self> {
        let raw_norm_sqr: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !(raw_norm_sqr > 0.0) {
            return Err(Error::DegenerateState(raw_norm_sqr));
        }
        let scale = raw_norm_sqr.sqrt().recip();
        Ok(FockVector {
            amplitudes: amplitudes.into_iter().map(|c| c * scale).collect(),
            tail_bound,
            raw_norm_sqr,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Squared norm of the amplitudes before normalization.
    pub fn raw_norm_sqr(&self) -> f64 {
        self.raw_norm_sqr
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩` over the common support.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Coherent-state amplitudes `e^{-|α|²/2} αⁿ/√(n!)` for `n = 0..=n_max`.
pub fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Unnormalized amplitudes of `(t a + r a†)|α⟩`, applying the ladder
/// operators to the coherent amplitudes (complex `t`, `r` allowed).
pub fn superposed_amplitudes(
    alpha: Complex64,
    t: Complex64,
    r: Complex64,
    n_max: usize,
) -> Vec<Complex64> {
    let coh = coherent_amplitudes(alpha, n_max);
    (0..=n_max)
        .map(|n| {
            let sub = t * alpha * coh[n];
            if n == 0 {
                sub
            } else {
                sub + r * (n as f64).sqrt() * coh[n - 1]
            }
        })
        .collect()
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Upper bound on `Σ_{n>k} e^{-λ} λⁿ / n!`; `k < 0` means the full mass.
pub(crate) fn poisson_tail_bound(lambda: f64, k: i64) -> f64 {
    if k < 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 0.0;
    }
    let k = k as usize;
    let next = (k + 1) as f64;
    if next + 1.0 <= lambda {
        return 1.0;
    }
    let ln_p = -lambda + next * lambda.ln() - ln_factorial(k + 1);
    (ln_p.exp() / (1.0 - lambda / (next + 1.0))).min(1.0)
}

/// Smallest `n_max` whose Poisson tail bound for mean `|α|² + 2` is below
/// `tail_tol`.
pub fn choose_truncation(alpha: Complex64, tail_tol: f64) -> usize {
    let lambda = alpha.norm_sqr() + 2.0;
    let mut best = f64::INFINITY;
    let mut k = 0usize;
    loop {
        // running minimum keeps the bound monotone in k
        best = best.min(poisson_tail_bound(lambda, k as i64));
        if best < tail_tol {
            return k;
        }
        k += 1;
    }
}

/// Rigorous bound on the probability mass of the normalized state above `k`.
fn state_tail_bound(params: &StateParams, k: usize) -> f64 {
    let mu = params.alpha.norm_sqr();
    let k = k as i64;
    let coherent = poisson_tail_bound(mu, k);
    // ‖P_{>k} a†|α⟩‖² = μ T_{k-2} + T_{k-1}
    let added = mu * poisson_tail_bound(mu, k - 2) + poisson_tail_bound(mu, k - 1);
    let amp = params.t.abs() * mu.sqrt() * coherent.sqrt() + params.r.abs() * added.sqrt();
    amp * amp / params.norm
}

/// Number-basis expansion of the normalized state with omitted mass below
/// `tail_tol`.
pub fn fock_coefficients(params: &StateParams, tail_tol: f64) -> Result<FockVector> {
    if !(tail_tol > 0.0 && tail_tol <= 1e-3) {
        return Err(Error::domain(format!(
            "tail_tol = {tail_tol:e} is outside (0, 1e-3]"
        )));
    }
    let mut n_max = choose_truncation(params.alpha, tail_tol).max(1);
    while state_tail_bound(params, n_max) >= tail_tol {
        n_max += 1;
    }
    fock_coefficients_at(params, n_max)
}

/// Expansion at a fixed truncation, with its rigorous tail bound.
pub fn fock_coefficients_at(params: &StateParams, n_max: usize) -> Result<FockVector> {
    let amps = superposed_amplitudes(
        params.alpha,
        Complex64::new(params.t, 0.0),
        Complex64::new(params.r, 0.0),
        n_max.max(1),
    );
    FockVector::from_unnormalized(amps, state_tail_bound(params, n_max.max(1)))
}
