//! Scalar nonclassicality witnesses. Every witness has classical threshold 0
//! and flags nonclassicality by a strictly negative value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{binomial, pochhammer_half, stirling2};
use crate::error::{Error, Result};
use crate::moments::{
    central_number_moment, general_moment, number_moments, quadrature_central_moment, to_real,
};
use crate::state::{ln_factorial, StateParams};

/// Values within this distance of the threshold are reported as
/// [`Verdict::ClassicalBoundary`].
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Below this `|det μ⁽³⁾ − det m⁽³⁾|` the Agarwal-Tara ratio is 0/0.
pub const AGARWAL_TARA_DEGENERACY: f64 = 1e-12;

pub const MAX_KLYSHKO_M: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Mandel,
    Hoa,
    Hosps,
    Hos,
    AgarwalTara,
    Klyshko,
    /// Phase-space matrix determinant with `β₁` at the Husimi zero.
    Psmatrix,
    /// Existence of a Husimi zero.
    QfuncZero,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 8] = [
        WitnessKind::Mandel,
        WitnessKind::Hoa,
        WitnessKind::Hosps,
        WitnessKind::Hos,
        WitnessKind::AgarwalTara,
        WitnessKind::Klyshko,
        WitnessKind::Psmatrix,
        WitnessKind::QfuncZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::Mandel => "mandel",
            WitnessKind::Hoa => "hoa",
            WitnessKind::Hosps => "hosps",
            WitnessKind::Hos => "hos",
            WitnessKind::AgarwalTara => "agarwal-tara",
            WitnessKind::Klyshko => "klyshko",
            WitnessKind::Psmatrix => "psmatrix",
            WitnessKind::QfuncZero => "qfunc-zero",
        }
    }

    /// Whether the witness takes an order `l` (or `m` for Klyshko).
    pub fn takes_order(self) -> bool {
        !matches!(
            self,
            WitnessKind::AgarwalTara | WitnessKind::Psmatrix | WitnessKind::QfuncZero
        )
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WitnessKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown witness '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Nonclassical,
    Classical,
    ClassicalBoundary,
    /// No finite value exists at this point (0/0 or a degenerate state).
    Degenerate,
}

/// One evaluated witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub witness: WitnessKind,
    pub order: u32,
    pub params: StateParams,
    /// NaN exactly when the verdict is [`Verdict::Degenerate`].
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// A second evaluator of the same quantity from a printed closed form,
    /// where one exists.
    pub secondary: Option<f64>,
}

impl WitnessRecord {
    pub fn new(witness: WitnessKind, order: u32, params: StateParams, value: f64) -> Self {
        let verdict = if !value.is_finite() {
            Verdict::Degenerate
        } else if value.abs() <= BOUNDARY_TOL {
            Verdict::ClassicalBoundary
        } else if value < 0.0 {
            Verdict::Nonclassical
        } else {
            Verdict::Classical
        };
        WitnessRecord {
            witness,
            order,
            params,
            value: if verdict == Verdict::Degenerate { f64::NAN } else { value },
            threshold: 0.0,
            verdict,
            secondary: None,
        }
    }

    pub fn degenerate(witness: WitnessKind, order: u32, params: StateParams) -> Self {
        Self::new(witness, order, params, f64::NAN)
    }

    fn with_secondary(mut self, secondary: f64) -> Self {
        self.secondary = Some(secondary);
        self
    }

    pub fn nonclassical(&self) -> bool {
        self.verdict == Verdict::Nonclassical
    }

    pub fn is_degenerate(&self) -> bool {
        self.verdict == Verdict::Degenerate
    }
}

fn check_order(name: &str, l: u32, lo: u32, hi: u32) -> Result<()> {
    if l < lo || l > hi {
        return Err(Error::out_of_range(format!("{name} order {l} must be in {lo}..={hi}")));
    }
    Ok(())
}

/// Higher-order Mandel parameter `Q_M^{(l)} = ⟨(ΔN)ˡ⟩/⟨N⟩ − 1`.
pub fn mandel_q(params: &StateParams, l: u32) -> Result<WitnessRecord> {
    check_order("mandel", l, 2, 10)?;
    let mean = crate::moments::number_moment(params, 1)?;
    if mean <= 1e-12 {
        return Err(Error::DegenerateState(mean));
    }
    let value = central_number_moment(params, l)? / mean - 1.0;
    Ok(WitnessRecord::new(WitnessKind::Mandel, l, *params, value))
}

/// Higher-order antibunching `d(l−1) = ⟨a†ˡaˡ⟩ − ⟨a†a⟩ˡ`.
pub fn hoa(params: &StateParams, l: u32) -> Result<WitnessRecord> {
    check_order("hoa", l, 2, 10)?;
    let value = to_real(general_moment(params, l, l)?)? - to_real(general_moment(params, 1, 1)?)?.powi(l as i32);
    Ok(WitnessRecord::new(WitnessKind::Hoa, l, *params, value))
}

/// Central moment of a Poisson distribution, from its raw moments
/// `Σₖ S(l,k) μᵏ` centralized binomially.
pub fn poisson_central_moment(mu: f64, l: u32) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("Poisson mean {mu} must be positive")));
    }
    check_order("poisson central moment", l, 1, 10)?;
    let raw = (0..=l)
        .map(|j| {
            (0..=j).try_fold(0.0, |acc, k| Ok::<_, Error>(acc + stirling2(j, k)? as f64 * mu.powi(k as i32)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::moments::centralize(&raw, l))
}

/// Higher-order sub-Poissonian statistics: `⟨(ΔN)ˡ⟩ − ⟨(ΔN)ˡ⟩_Poisson` at
/// equal mean. The secondary value is the printed double sum
/// `Σ_e Σ_{f≥1} S(e,f) C(l,e) (−1)ᵉ d(f−1) ⟨N⟩^{l−e}`, which equals
/// `(−1)ˡ` times the primary value.
pub fn hosps(params: &StateParams, l: u32) -> Result<WitnessRecord> {
    check_order("hosps", l, 2, 8)?;
    let mean = crate::moments::number_moment(params, 1)?;
    let value = central_number_moment(params, l)? - poisson_central_moment(mean, l)?;
    Ok(WitnessRecord::new(WitnessKind::Hosps, l, *params, value)
        .with_secondary(hosps_printed_sum(params, l, mean)?))
}

fn hosps_printed_sum(params: &StateParams, l: u32, mean: f64) -> Result<f64> {
    let mut d = vec![0.0; l as usize + 1];
    for f in 1..=l {
        d[f as usize] = to_real(general_moment(params, f, f)?)? - mean.powi(f as i32);
    }
    let mut acc = 0.0;
    for e in 0..=l {
        let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
        for f in 1..=e {
            acc += stirling2(e, f)? as f64
                * binomial(l, e) as f64
                * sign
                * d[f as usize]
                * mean.powi((l - e) as i32);
        }
    }
    Ok(acc)
}

/// Hong-Mandel squeezing `S(l) = (⟨(ΔX)ˡ⟩ − (1/2)_{l/2}) / (1/2)_{l/2}`.
pub fn hos(params: &StateParams, l: u32) -> Result<WitnessRecord> {
    if l % 2 != 0 {
        return Err(Error::domain(format!("hos needs an even order, got {l}")));
    }
    check_order("hos", l, 2, 10)?;
    let bound = pochhammer_half(l)?;
    let bound = *bound.numer() as f64 / *bound.denom() as f64;
    let value = (quadrature_central_moment(params, l)? - bound) / bound;
    Ok(WitnessRecord::new(WitnessKind::Hos, l, *params, value))
}

/// [`hos`] with `α` rotated to `|α| e^{iφ}`.
pub fn hos_at_phase(params: &StateParams, l: u32, phi: f64) -> Result<WitnessRecord> {
    hos(&params.with_phase(phi)?, l)
}

/// `det` of a symmetric 3×3 Hankel matrix `[[h0,h1,h2],[h1,h2,h3],[h2,h3,h4]]`,
/// with the sum of absolute values of its expansion terms.
pub(crate) fn hankel_det3(h: &[f64; 5]) -> (f64, f64) {
    let terms = [
        h[0] * h[2] * h[4],
        2.0 * h[1] * h[2] * h[3],
        -h[2] * h[2] * h[2],
        -h[0] * h[3] * h[3],
        -h[1] * h[1] * h[4],
    ];
    (terms.iter().sum(), terms.iter().map(|x| x.abs()).sum())
}

/// Agarwal-Tara `A₃ = det m⁽³⁾ / (det μ⁽³⁾ − det m⁽³⁾)` from the normally
/// ordered moments `m_j = ⟨a†ʲaʲ⟩` and number moments `μ_j = ⟨(a†a)ʲ⟩`.
pub fn agarwal_tara(params: &StateParams) -> Result<WitnessRecord> {
    let (det_m, det_mu) = agarwal_tara_determinants(params)?;
    let denom = det_mu - det_m;
    if denom.abs() < AGARWAL_TARA_DEGENERACY {
        return Ok(WitnessRecord::degenerate(WitnessKind::AgarwalTara, 0, *params));
    }
    Ok(WitnessRecord::new(WitnessKind::AgarwalTara, 0, *params, det_m / denom))
}

/// `(det m⁽³⁾, det μ⁽³⁾)`.
pub fn agarwal_tara_determinants(params: &StateParams) -> Result<(f64, f64)> {
    let mut m = [1.0; 5];
    for j in 1..=4u32 {
        m[j as usize] = to_real(general_moment(params, j, j)?)?;
    }
    let mu = number_moments(params, 4)?;
    let mu = [mu[0], mu[1], mu[2], mu[3], mu[4]];
    Ok((hankel_det3(&m).0, hankel_det3(&mu).0))
}

/// Photon-number probability
/// `p_m = N⁻¹ e^{−|α|²}/m! · |α|^{2(m−1)} |tα² + rm|²`, evaluated in logs.
pub fn photon_prob(params: &StateParams, m: u32) -> Result<f64> {
    if m > 10_000 {
        return Err(Error::out_of_range(format!("photon number {m} too large")));
    }
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let mu = alpha.norm_sqr();
    // |α|^{2(m−1)}|tα² + rm|² = |α^{m−1}(tα² + rm)|², with α^{−1}·tα² = tα at m = 0
    let ln_amp_sq = if m == 0 {
        let v = (t * alpha).norm_sqr();
        if v == 0.0 {
            return Ok(0.0);
        }
        v.ln()
    } else {
        let inner = (t * alpha * alpha + r * m as f64).norm_sqr();
        if inner == 0.0 {
            return Ok(0.0);
        }
        if m > 1 && mu == 0.0 {
            return Ok(0.0);
        }
        let pow = if m == 1 { 0.0 } else { (m - 1) as f64 * mu.ln() };
        pow + inner.ln()
    };
    Ok((-mu - params.norm().ln() - ln_factorial(m as usize) + ln_amp_sq).exp())
}

/// Klyshko `B(m) = (m+2) p_m p_{m+2} − (m+1) p_{m+1}²`; the secondary value
/// is the factored closed form.
pub fn klyshko(params: &StateParams, m: u32) -> Result<WitnessRecord> {
    if m > MAX_KLYSHKO_M {
        return Err(Error::out_of_range(format!("klyshko m = {m} exceeds {MAX_KLYSHKO_M}")));
    }
    let p0 = photon_prob(params, m)?;
    let p1 = photon_prob(params, m + 1)?;
    let p2 = photon_prob(params, m + 2)?;
    let value = (m + 2) as f64 * p0 * p2 - (m + 1) as f64 * p1 * p1;
    Ok(WitnessRecord::new(WitnessKind::Klyshko, m, *params, value)
        .with_secondary(klyshko_closed_form(params, m)))
}

/// `B(m) = −e^{−2|α|²}|α|^{4m} r² [r²(2m²+4m+1) + 2rt(m+1)(α²+α*²) + t²(α⁴+α*⁴)] / (N² m! (m+1)!)`
pub fn klyshko_closed_form(params: &StateParams, m: u32) -> f64 {
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let mu = alpha.norm_sqr();
    let mf = m as f64;
    let a2 = alpha * alpha;
    let bracket = r * r * (2.0 * mf * mf + 4.0 * mf + 1.0)
        + 2.0 * r * t * (mf + 1.0) * 2.0 * a2.re
        + t * t * 2.0 * (a2 * a2).re;
    let ln_pref = -2.0 * mu - 2.0 * params.norm().ln() - ln_factorial(m as usize) - ln_factorial(m as usize + 1);
    -(ln_pref.exp() * mu.powi(2 * m as i32)) * r * r * bracket
}
