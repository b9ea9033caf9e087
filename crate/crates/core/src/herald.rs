//! Three-mode simulation of the heralded `t a + r a†` scheme: a PDC couples
//! the signal `a` to idler `c`, BS₁ taps `a` into `b`, BS₂ mixes `b` and `c`,
//! and photodetectors on the two outputs herald the signal.
//!
//! Mode labels: PD₁ watches `b'`, PD₂ watches `c'`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::binomial;
use crate::error::{Error, Result};
use crate::state::{choose_truncation, coherent_amplitudes, ln_factorial, superposed_amplitudes, FockVector};

/// Population allowed at (or past) a mode cap before the run is rejected.
pub const CAP_LEAK_TOL: f64 = 1e-10;
pub const ZERO_PROBABILITY: f64 = 1e-30;
/// Three photons per ancilla leaves about 1.2e-10 of the mass past the caps
/// at `|α| = 0.8`, `|r₁|² = 0.01`; four keeps the loss near 1e-13.
pub const DEFAULT_ANCILLA_CAP: usize = 4;
const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
    C,
}

impl Mode {
    fn index(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 1,
            Mode::C => 2,
        }
    }

    fn label(self) -> char {
        match self {
            Mode::A => 'a',
            Mode::B => 'b',
            Mode::C => 'c',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdcOrder {
    /// `1 − η a†c†`
    First,
    /// `exp(η(ac − a†c†))`
    #[default]
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeraldPattern {
    Pd1ClickPd2Silent,
    Pd2ClickPd1Silent,
}

/// Amplitudes over `|i⟩_a|j⟩_b|k⟩_c` with `i ≤ caps[0]` and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeState {
    caps: [usize; 3],
    amplitudes: Vec<Complex64>,
}

impl MultimodeState {
    pub fn zeros(caps: [usize; 3]) -> Self {
        let len = (caps[0] + 1) * (caps[1] + 1) * (caps[2] + 1);
        MultimodeState {
            caps,
            amplitudes: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// `|ψ⟩_a|0⟩_b|0⟩_c`; the `a` cap is `signal.len() − 1`.
    pub fn with_vacuum_ancillas(signal: &[Complex64], cap_b: usize, cap_c: usize) -> Result<Self> {
        if signal.is_empty() {
            return Err(Error::domain("signal vector is empty"));
        }
        let mut s = Self::zeros([signal.len() - 1, cap_b, cap_c]);
        for (i, &c) in signal.iter().enumerate() {
            *s.get_mut(i, 0, 0) = c;
        }
        Ok(s)
    }

    pub fn caps(&self) -> [usize; 3] {
        self.caps
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.caps[1] + 1) + j) * (self.caps[2] + 1) + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.amplitudes[self.index(i, j, k)]
    }

    pub fn get_mut(&mut self, i: usize, j: usize, k: usize) -> &mut Complex64 {
        let idx = self.index(i, j, k);
        &mut self.amplitudes[idx]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population with `mode` at its cap.
    pub fn population_at_cap(&self, mode: Mode) -> f64 {
        let cap = self.caps[mode.index()];
        self.cells()
            .filter(|&(n, _)| n[mode.index()] == cap)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    fn cells(&self) -> impl Iterator<Item = ([usize; 3], Complex64)> + '_ {
        let [_, cb, cc] = self.caps;
        self.amplitudes.iter().enumerate().map(move |(idx, &c)| {
            let k = idx % (cc + 1);
            let j = (idx / (cc + 1)) % (cb + 1);
            let i = idx / ((cc + 1) * (cb + 1));
            ([i, j, k], c)
        })
    }

    fn axpy(&mut self, scale: Complex64, other: &MultimodeState) {
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += scale * b;
        }
    }

    fn max_abs(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn check_cap(state: &MultimodeState, mode: Mode) -> Result<()> {
    let population = state.population_at_cap(mode);
    if population > CAP_LEAK_TOL {
        return Err(Error::CapExceeded { mode: mode.label(), population });
    }
    Ok(())
}

/// `G = ac − a†c†` on the truncated space.
fn pdc_generator(state: &MultimodeState) -> MultimodeState {
    let [ca, cb, cc] = state.caps;
    let mut out = MultimodeState::zeros(state.caps);
    for i in 0..=ca {
        for j in 0..=cb {
            for k in 0..=cc {
                let amp = state.get(i, j, k);
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if i > 0 && k > 0 {
                    *out.get_mut(i - 1, j, k - 1) += amp * ((i * k) as f64).sqrt();
                }
                if i < ca && k < cc {
                    *out.get_mut(i + 1, j, k + 1) -= amp * (((i + 1) * (k + 1)) as f64).sqrt();
                }
            }
        }
    }
    out
}

/// The PDC on modes `(a, c)`. The output is not renormalized.
pub fn apply_pdc(state: &MultimodeState, eta: f64, order: PdcOrder) -> Result<MultimodeState> {
    if !(eta >= 0.0) {
        return Err(Error::domain(format!("eta must be non-negative, got {eta}")));
    }
    let out = match order {
        PdcOrder::First => {
            // −η a†c† is the raising half of G
            let [ca, cb, cc] = state.caps;
            let mut out = state.clone();
            for i in 0..ca {
                for j in 0..=cb {
                    for k in 0..cc {
                        let amp = state.get(i, j, k);
                        *out.get_mut(i + 1, j, k + 1) -= eta * amp * (((i + 1) * (k + 1)) as f64).sqrt();
                    }
                }
            }
            out
        }
        PdcOrder::Exact => {
            // Taylor series of exp(ηG); G is anti-Hermitian on the truncated
            // space so the partial sums converge to a unitary image
            let mut out = state.clone();
            let mut term = state.clone();
            let floor = f64::EPSILON * state.max_abs().max(f64::MIN_POSITIVE);
            for n in 1..200 {
                term = pdc_generator(&term);
                let scale = eta / n as f64;
                term.amplitudes.iter_mut().for_each(|c| *c *= scale);
                out.axpy(Complex64::new(1.0, 0.0), &term);
                if term.max_abs() < floor {
                    break;
                }
            }
            out
        }
    };
    check_cap(&out, Mode::C)?;
    check_cap(&out, Mode::A)?;
    Ok(out)
}

/// Two-mode splitter with Heisenberg action `x' = t x + r y`,
/// `y' = t* y − r* x`. On states this maps `x† → t x† − r* y†` and
/// `y† → t* y† + r x†`.
pub fn apply_beam_splitter(
    state: &MultimodeState,
    modes: (Mode, Mode),
    t: Complex64,
    r: Complex64,
) -> Result<MultimodeState> {
    let (mx, my) = modes;
    if mx == my {
        return Err(Error::domain("beam splitter needs two distinct modes"));
    }
    let unitarity = t.norm_sqr() + r.norm_sqr() - 1.0;
    if unitarity.abs() > UNITARITY_TOL {
        return Err(Error::domain(format!(
            "|t|^2 + |r|^2 - 1 = {unitarity:e} violates unitarity"
        )));
    }
    let (xa, xb) = (t, -r.conj());
    let (yx, yy) = (r, t.conj());
    let (ix, iy) = (mx.index(), my.index());
    let (cap_x, cap_y) = (state.caps[ix], state.caps[iy]);
    let mut out = MultimodeState::zeros(state.caps);
    let mut leaked = [0.0f64; 3];
    let mut image = Vec::new();
    for (n, amp) in state.cells() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (nx, ny) = (n[ix], n[iy]);
        let total = nx + ny;
        image.clear();
        image.resize(total + 1, Complex64::new(0.0, 0.0));
        for i in 0..=nx {
            let left = binomial(nx as u32, i as u32) as f64 * xa.powu(i as u32) * xb.powu((nx - i) as u32);
            for j in 0..=ny {
                let right = binomial(ny as u32, j as u32) as f64 * yx.powu(j as u32) * yy.powu((ny - j) as u32);
                image[i + j] += left * right;
            }
        }
        let ln_in = ln_factorial(nx) + ln_factorial(ny);
        for (p, &c) in image.iter().enumerate() {
            let q = total - p;
            let value = amp * c * (0.5 * (ln_factorial(p) + ln_factorial(q) - ln_in)).exp();
            if p > cap_x || q > cap_y {
                let which = if p > cap_x { ix } else { iy };
                leaked[which] += value.norm_sqr();
                continue;
            }
            let mut m = n;
            m[ix] = p;
            m[iy] = q;
            *out.get_mut(m[0], m[1], m[2]) += value;
        }
    }
    for mode in [Mode::A, Mode::B, Mode::C] {
        if leaked[mode.index()] > CAP_LEAK_TOL {
            return Err(Error::CapExceeded {
                mode: mode.label(),
                population: leaked[mode.index()],
            });
        }
    }
    Ok(out)
}

/// Beam-splitter coefficients, PDC strength and truncation caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub t1: Complex64,
    pub r1: Complex64,
    pub t2: Complex64,
    pub r2: Complex64,
    pub eta: f64,
    pub pdc_order: PdcOrder,
    pub cap_b: usize,
    pub cap_c: usize,
}

impl SchemeConfig {
    /// Real transmissivities with `r₁ = +√(1−t₁²)` and the mirror phase
    /// folded into `r₂ = −√(1−t₂²)`.
    pub fn new(t1: f64, t2: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t1) || !(0.0..=1.0).contains(&t2) {
            return Err(Error::domain("transmissivities must lie in [0, 1]"));
        }
        let cfg = SchemeConfig {
            t1: Complex64::new(t1, 0.0),
            r1: Complex64::new((1.0 - t1 * t1).sqrt(), 0.0),
            t2: Complex64::new(t2, 0.0),
            r2: Complex64::new(-(1.0 - t2 * t2).sqrt(), 0.0),
            eta,
            pdc_order: PdcOrder::Exact,
            cap_b: DEFAULT_ANCILLA_CAP,
            cap_c: DEFAULT_ANCILLA_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_order(mut self, order: PdcOrder) -> Result<Self> {
        self.pdc_order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t, r) in [("BS1", self.t1, self.r1), ("BS2", self.t2, self.r2)] {
            let u = t.norm_sqr() + r.norm_sqr() - 1.0;
            if u.abs() > UNITARITY_TOL {
                return Err(Error::domain(format!("{name} coefficients violate unitarity by {u:e}")));
            }
        }
        if self.t1.norm() == 0.0 {
            return Err(Error::domain("t1 must be nonzero"));
        }
        let limit = match self.pdc_order {
            PdcOrder::Exact => 0.3,
            PdcOrder::First => 0.05,
        };
        if !(self.eta >= 0.0 && self.eta <= limit) {
            return Err(Error::domain(format!(
                "eta = {} outside [0, {limit}] for this PDC order",
                self.eta
            )));
        }
        if self.cap_b < 2 || self.cap_c < 2 {
            return Err(Error::domain("ancilla caps must be at least 2"));
        }
        Ok(())
    }

    /// The approximate `(t, r)` heralded by `pattern`.
    pub fn implied_coefficients(&self, pattern: HeraldPattern) -> (Complex64, Complex64) {
        let lead = -self.r1.conj() / self.t1;
        match pattern {
            HeraldPattern::Pd1ClickPd2Silent => (lead * self.t2.conj(), -self.eta * self.t2),
            HeraldPattern::Pd2ClickPd1Silent => (lead * self.r2.conj(), self.eta * self.r2),
        }
    }
}

/// PDC, then BS₁ on `(a, b)`, then BS₂ on the ancillas, starting from
/// `|α⟩_a|0⟩_b|0⟩_c` with the `a` mode cut at `choose_truncation(α) + 2`.
pub fn prepare(alpha: Complex64, config: &SchemeConfig) -> Result<MultimodeState> {
    config.validate()?;
    let n_a = choose_truncation(alpha, 1e-12) + 2;
    let mut signal = coherent_amplitudes(alpha, n_a);
    let norm = signal.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    signal.iter_mut().for_each(|c| *c /= norm);
    let s = MultimodeState::with_vacuum_ancillas(&signal, config.cap_b, config.cap_c)?;
    let s = apply_pdc(&s, config.eta, config.pdc_order)?;
    let s = apply_beam_splitter(&s, (Mode::A, Mode::B), config.t1, config.r1)?;
    // b† → t₂* b† + r₂* c†, c† → t₂ c† − r₂ b†
    apply_beam_splitter(&s, (Mode::C, Mode::B), config.t2, config.r2.conj())
}

/// Projects the ancillas on one click pattern. Returns the normalized signal
/// and the projected mass relative to the unit-norm input.
pub fn herald(state: &MultimodeState, pattern: HeraldPattern) -> Result<(FockVector, f64)> {
    let (j, k) = match pattern {
        HeraldPattern::Pd1ClickPd2Silent => (1, 0),
        HeraldPattern::Pd2ClickPd1Silent => (0, 1),
    };
    let amps: Vec<Complex64> = (0..=state.caps[0]).map(|i| state.get(i, j, k)).collect();
    let probability: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if probability < ZERO_PROBABILITY {
        return Err(Error::ZeroProbability(probability));
    }
    let fock = FockVector::from_unnormalized(amps, 0.0)?;
    Ok((fock, probability))
}

/// Mass of every ancilla count `[n_b][n_c]`, no-click and multi-click
/// outcomes included. With exact PDC the entries sum to one.
pub fn branch_probabilities(state: &MultimodeState) -> Vec<Vec<f64>> {
    let [_, cb, cc] = state.caps;
    let mut out = vec![vec![0.0; cc + 1]; cb + 1];
    for (n, c) in state.cells() {
        out[n[1]][n[2]] += c.norm_sqr();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeOutcome {
    pub config: SchemeConfig,
    pub pattern: HeraldPattern,
    pub success_probability: f64,
    pub implied_t: Complex64,
    pub implied_r: Complex64,
    pub fidelity: f64,
}

/// Runs the pipeline, heralds on PD₁ and compares with
/// `(t a + r a†)|α⟩` at the implied coefficients.
pub fn scheme_fidelity(alpha: Complex64, config: &SchemeConfig) -> Result<SchemeOutcome> {
    scheme_fidelity_branch(alpha, config, HeraldPattern::Pd1ClickPd2Silent)
}

pub fn scheme_fidelity_branch(
    alpha: Complex64,
    config: &SchemeConfig,
    pattern: HeraldPattern,
) -> Result<SchemeOutcome> {
    let state = prepare(alpha, config)?;
    let (heralded, success_probability) = herald(&state, pattern)?;
    let (implied_t, implied_r) = config.implied_coefficients(pattern);
    let target = FockVector::from_unnormalized(
        superposed_amplitudes(alpha, implied_t, implied_r, heralded.n_max()),
        0.0,
    )?;
    let fidelity = target.inner(&heralded).norm_sqr().min(1.0);
    Ok(SchemeOutcome {
        config: *config,
        pattern,
        success_probability,
        implied_t,
        implied_r,
        fidelity,
    })
}
