//! Independent truncated-Fock-space numerics.
//!
//! Every closed-form quantity is recomputed here from the explicit amplitude
//! vector with dense ladder matrices. Matrix-vector products cost O(n²) in the
//! dimension, which stays below a few hundred for `|α| ≤ 3`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments;
use crate::phase_space;
use crate::state::{coherent_amplitudes, fock_coefficients, fock_coefficients_at, FockVector, StateParams};
use crate::witnesses::{self, hankel_det3, AGARWAL_TARA_DEGENERACY};

pub use crate::witnesses::poisson_central_moment;

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

/// Dense `a`, `a†`, `N = a†a` and `X = (a + a†)/√2` on `n_max + 1` levels.
#[derive(Debug, Clone)]
pub struct LadderMatrices {
    pub annihilate: CMatrix,
    pub create: CMatrix,
    pub number: CMatrix,
    pub quadrature: CMatrix,
}

impl LadderMatrices {
    pub fn new(n_max: usize) -> Self {
        let dim = n_max + 1;
        let mut annihilate = CMatrix::zeros(dim, dim);
        for n in 1..dim {
            annihilate[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        let create = annihilate.adjoint();
        let number = &create * &annihilate;
        let quadrature = (&annihilate + &create) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        LadderMatrices {
            annihilate,
            create,
            number,
            quadrature,
        }
    }

    pub fn dim(&self) -> usize {
        self.annihilate.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Number,
    Quadrature,
}

/// A truncated state together with its ladder matrices.
#[derive(Debug, Clone)]
pub struct Oracle {
    fock: FockVector,
    psi: CVector,
    ladders: LadderMatrices,
}

impl Oracle {
    pub fn new(fock: FockVector) -> Self {
        let psi = CVector::from_column_slice(fock.amplitudes());
        let ladders = LadderMatrices::new(fock.n_max());
        Oracle { fock, psi, ladders }
    }

    /// Oracle for `params` whose truncation keeps the omitted mass below
    /// `tail_tol` and leaves headroom for moments up to order 12.
    pub fn for_params(params: &StateParams, tail_tol: f64) -> Result<Self> {
        let base = fock_coefficients(params, tail_tol)?;
        let n_max = 2 * base.n_max() + 24;
        Ok(Self::new(fock_coefficients_at(params, n_max)?))
    }

    pub fn fock(&self) -> &FockVector {
        &self.fock
    }

    pub fn n_max(&self) -> usize {
        self.fock.n_max()
    }

    fn require(&self, order: usize) -> Result<()> {
        if 2 * order > self.n_max() {
            return Err(Error::TruncationTooSmall {
                needed: 2 * order,
                have: self.n_max(),
            });
        }
        Ok(())
    }

    fn apply_power(&self, op: &CMatrix, shift: Complex64, power: u32) -> CVector {
        let mut v = self.psi.clone();
        for _ in 0..power {
            let shifted = &v * shift;
            v = op * &v - shifted;
        }
        v
    }

    /// `⟨ψ|a†ᵐaⁿ|ψ⟩`.
    pub fn moment(&self, m: u32, n: u32) -> Result<Complex64> {
        self.require((m + n) as usize)?;
        let zero = Complex64::new(0.0, 0.0);
        let v = self.apply_power(&self.ladders.annihilate, zero, n);
        let w = self.apply_power(&self.ladders.annihilate, zero, m);
        Ok(w.dotc(&v))
    }

    fn mean(&self, op: &CMatrix) -> f64 {
        self.psi.dotc(&(op * &self.psi)).re
    }

    fn matrix(&self, which: Observable) -> &CMatrix {
        match which {
            Observable::Number => &self.ladders.number,
            Observable::Quadrature => &self.ladders.quadrature,
        }
    }

    /// `⟨Aᵏ⟩` for `k = 0..=l`.
    pub fn raw_moments(&self, which: Observable, l: u32) -> Result<Vec<f64>> {
        if which == Observable::Quadrature {
            self.require(l as usize)?;
        }
        let op = self.matrix(which);
        let zero = Complex64::new(0.0, 0.0);
        Ok((0..=l)
            .map(|k| {
                let half = self.apply_power(op, zero, k / 2);
                let rest = self.apply_power(op, zero, k - k / 2);
                half.dotc(&rest).re
            })
            .collect())
    }

    /// `⟨(A − ⟨A⟩)ˡ⟩` by repeated products with the shifted operator.
    pub fn central_moment(&self, which: Observable, l: u32) -> Result<f64> {
        if l > 10 {
            return Err(Error::out_of_range(format!("oracle central moment order {l} exceeds 10")));
        }
        if which == Observable::Quadrature {
            self.require(l as usize)?;
        }
        let op = self.matrix(which);
        let shift = Complex64::new(self.mean(op), 0.0);
        let half = self.apply_power(op, shift, l / 2);
        let rest = self.apply_power(op, shift, l - l / 2);
        Ok(half.dotc(&rest).re)
    }

    /// `|c_m|²`.
    pub fn pm(&self, m: usize) -> Result<f64> {
        self.fock
            .amplitudes()
            .get(m)
            .map(|c| c.norm_sqr())
            .ok_or(Error::TruncationTooSmall { needed: m, have: self.n_max() })
    }

    /// `|⟨β|ψ⟩|²/π` and the same with absolute values inside the sum.
    fn husimi_with_scale(&self, beta: Complex64) -> (f64, f64) {
        let coh = coherent_amplitudes(beta, self.n_max());
        let mut overlap = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (b, c) in coh.iter().zip(self.fock.amplitudes()) {
            overlap += b.conj() * c;
            scale += b.norm() * c.norm();
        }
        (overlap.norm_sqr() / PI, scale * scale / PI)
    }

    pub fn husimi(&self, beta: Complex64) -> f64 {
        self.husimi_with_scale(beta).0
    }

    pub fn mandel_q(&self, l: u32) -> Result<f64> {
        let mean = self.mean(&self.ladders.number);
        Ok(self.central_moment(Observable::Number, l)? / mean - 1.0)
    }

    pub fn hoa(&self, l: u32) -> Result<f64> {
        Ok(self.moment(l, l)?.re - self.moment(1, 1)?.re.powi(l as i32))
    }

    pub fn hosps(&self, l: u32) -> Result<f64> {
        let mean = self.mean(&self.ladders.number);
        Ok(self.central_moment(Observable::Number, l)? - poisson_central_moment(mean, l)?)
    }

    pub fn hos(&self, l: u32) -> Result<f64> {
        let bound = double_factorial_ratio(l);
        Ok((self.central_moment(Observable::Quadrature, l)? - bound) / bound)
    }

    /// `A₃`, or `None` when the ratio is 0/0.
    pub fn agarwal_tara(&self) -> Result<Option<f64>> {
        let (det_m, det_mu, _) = self.agarwal_tara_parts()?;
        let denom = det_mu - det_m;
        Ok((denom.abs() >= AGARWAL_TARA_DEGENERACY).then(|| det_m / denom))
    }

    /// `(det m, det μ, first-order rounding scale of A₃)`.
    fn agarwal_tara_parts(&self) -> Result<(f64, f64, f64)> {
        let mut m = [1.0; 5];
        for j in 1..=4u32 {
            m[j as usize] = self.moment(j, j)?.re;
        }
        let mu = self.raw_moments(Observable::Number, 4)?;
        let (det_m, sm) = hankel_det3(&m);
        let (det_mu, smu) = hankel_det3(&[mu[0], mu[1], mu[2], mu[3], mu[4]]);
        let denom = (det_mu - det_m).abs();
        let value = (det_m / denom).abs();
        Ok((det_m, det_mu, (sm + value * (sm + smu)) / denom))
    }

    pub fn klyshko(&self, m: usize) -> Result<f64> {
        let (p0, p1, p2) = (self.pm(m)?, self.pm(m + 1)?, self.pm(m + 2)?);
        Ok((m + 2) as f64 * p0 * p2 - (m + 1) as f64 * p1 * p1)
    }

    pub fn psmatrix_det(&self, beta1: Complex64, beta2: Complex64) -> f64 {
        let mid = self.husimi((beta1 + beta2) * 0.5);
        self.husimi(beta1) * self.husimi(beta2) - (-(beta2 - beta1).norm_sqr() / 2.0).exp() * mid * mid
    }
}

fn double_factorial_ratio(l: u32) -> f64 {
    let df: f64 = (1..l).step_by(2).map(|k| k as f64).product();
    df / 2f64.powi(l as i32 / 2)
}

pub fn oracle_moment(fock: &FockVector, m: u32, n: u32) -> Result<Complex64> {
    Oracle::new(fock.clone()).moment(m, n)
}

pub fn oracle_central_moment(fock: &FockVector, which: Observable, l: u32) -> Result<f64> {
    Oracle::new(fock.clone()).central_moment(which, l)
}

pub fn oracle_pm(fock: &FockVector, m: usize) -> Result<f64> {
    fock.amplitudes()
        .get(m)
        .map(|c| c.norm_sqr())
        .ok_or(Error::TruncationTooSmall { needed: m, have: fock.n_max() })
}

pub fn oracle_husimi(fock: &FockVector, beta: Complex64) -> f64 {
    let coh = coherent_amplitudes(beta, fock.n_max());
    let overlap: Complex64 = coh.iter().zip(fock.amplitudes()).map(|(b, c)| b.conj() * c).sum();
    overlap.norm_sqr() / PI
}

/// One closed-form versus oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub quantity: String,
    /// `None` when the quantity is degenerate on this side.
    pub closed_form: Option<f64>,
    pub oracle: Option<f64>,
    pub abs_err: f64,
    /// `abs_err / max(|oracle|, scale)`, where `scale` is the magnitude of the
    /// terms that cancel in forming the quantity.
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub r: f64,
    pub tol: f64,
    pub n_max: usize,
    pub tail_bound: f64,
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn get(&self, quantity: &str) -> Option<&VerifyEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }
}

struct Collector {
    tol: f64,
    entries: Vec<VerifyEntry>,
}

impl Collector {
    fn push(&mut self, quantity: String, closed: Option<f64>, oracle: Option<f64>, scale: f64) {
        let entry = match (closed, oracle) {
            (Some(c), Some(o)) => {
                let abs_err = (c - o).abs();
                let denom = o.abs().max(scale.abs());
                let rel_err = if abs_err == 0.0 {
                    0.0
                } else if denom > 0.0 {
                    abs_err / denom
                } else {
                    f64::INFINITY
                };
                VerifyEntry {
                    quantity,
                    closed_form: Some(c),
                    oracle: Some(o),
                    abs_err,
                    rel_err,
                    pass: rel_err <= self.tol,
                }
            }
            (None, None) => VerifyEntry {
                quantity,
                closed_form: None,
                oracle: None,
                abs_err: 0.0,
                rel_err: 0.0,
                pass: true,
            },
            _ => VerifyEntry {
                quantity,
                closed_form: closed,
                oracle,
                abs_err: f64::INFINITY,
                rel_err: f64::INFINITY,
                pass: false,
            },
        };
        self.entries.push(entry);
    }

    fn push_result(&mut self, quantity: String, closed: Result<f64>, oracle: Result<f64>, scale: f64) -> Result<()> {
        self.push(quantity, Some(closed?), Some(oracle?), scale);
        Ok(())
    }
}

fn centered_scale(raw: &[f64], l: u32) -> f64 {
    let mean = raw[1].abs();
    (0..=l)
        .map(|k| crate::algebra::binomial(l, k) as f64 * mean.powi(k as i32) * raw[(l - k) as usize].abs())
        .sum()
}

/// Phase-space sample points: a 5×5 unit-spaced grid centred on `α`.
pub fn husimi_probe_points(params: &StateParams) -> Vec<Complex64> {
    let a = params.alpha();
    let mut out = Vec::with_capacity(25);
    for j in -2..=2 {
        for i in -2..=2 {
            out.push(a + Complex64::new(i as f64, j as f64 * 0.75));
        }
    }
    out
}

/// Ten `(β₁, β₂)` pairs, including the Husimi zero when it exists.
pub fn psmatrix_probe_pairs(params: &StateParams) -> Vec<(Complex64, Complex64)> {
    let a = params.alpha();
    let anchor = phase_space::q_zero(params).unwrap_or(a);
    let shifts = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(-0.7, 0.7),
        Complex64::new(0.25, -1.2),
        Complex64::new(2.0, 1.0),
    ];
    let mut out = Vec::with_capacity(10);
    for s in shifts {
        out.push((anchor, anchor + s));
        out.push((a - s * 0.5, a + s));
    }
    out
}

/// Recomputes every witness and phase-space quantity both ways.
pub fn verify_all(params: &StateParams, tol: f64) -> Result<VerifyReport> {
    verify_all_with_tail(params, tol, 1e-12)
}

/// [`verify_all`] with the oracle truncated at tail mass `tail_tol`.
pub fn verify_all_with_tail(params: &StateParams, tol: f64, tail_tol: f64) -> Result<VerifyReport> {
    if !(tol >= 1e-12) {
        return Err(Error::domain(format!("verify tolerance {tol:e} must be >= 1e-12")));
    }
    let oracle = Oracle::for_params(params, tail_tol)?;
    let mut out = Collector { tol, entries: Vec::new() };

    for m in 0..=6 {
        for n in 0..=6 {
            let closed = moments::general_moment(params, m, n)?;
            let orc = oracle.moment(m, n)?;
            let scale = orc.norm();
            out.push(format!("moment({m},{n}).re"), Some(closed.re), Some(orc.re), scale);
            out.push(format!("moment({m},{n}).im"), Some(closed.im), Some(orc.im), scale);
        }
    }

    let number_raw = oracle.raw_moments(Observable::Number, 5)?;
    let mean = number_raw[1];
    let mean_ok = moments::number_moment(params, 1)? > 1e-12;
    for l in 2..=5 {
        let central_scale = centered_scale(&number_raw, l);
        if mean_ok {
            out.push_result(
                format!("mandel({l})"),
                witnesses::mandel_q(params, l).map(|w| w.value),
                oracle.mandel_q(l),
                central_scale / mean + 1.0,
            )?;
        } else {
            out.push(format!("mandel({l})"), None, None, 0.0);
        }
        let m_l = oracle.moment(l, l)?.re;
        out.push_result(
            format!("hoa({l})"),
            witnesses::hoa(params, l).map(|w| w.value),
            oracle.hoa(l),
            m_l.abs() + mean.powi(l as i32),
        )?;
        out.push_result(
            format!("hosps({l})"),
            witnesses::hosps(params, l).map(|w| w.value),
            oracle.hosps(l),
            2.0 * central_scale,
        )?;
    }

    for l in [2u32, 4, 6] {
        let raw = oracle.raw_moments(Observable::Quadrature, l)?;
        let bound = double_factorial_ratio(l);
        out.push_result(
            format!("hos({l})"),
            witnesses::hos(params, l).map(|w| w.value),
            oracle.hos(l),
            (centered_scale(&raw, l) + bound) / bound,
        )?;
    }

    let a3 = witnesses::agarwal_tara(params)?;
    let (_, _, a3_scale) = oracle.agarwal_tara_parts()?;
    out.push(
        "agarwal-tara".to_string(),
        (!a3.is_degenerate()).then_some(a3.value),
        oracle.agarwal_tara()?,
        a3_scale,
    );

    for m in 0..=12u32 {
        let orc = oracle.pm(m as usize)?;
        out.push(format!("p({m})"), Some(witnesses::photon_prob(params, m)?), Some(orc), orc);
    }
    for m in 0..=10u32 {
        let (p0, p1, p2) = (oracle.pm(m as usize)?, oracle.pm(m as usize + 1)?, oracle.pm(m as usize + 2)?);
        let scale = (m + 2) as f64 * p0 * p2 + (m + 1) as f64 * p1 * p1;
        out.push_result(
            format!("klyshko({m})"),
            witnesses::klyshko(params, m).map(|w| w.value),
            oracle.klyshko(m as usize),
            scale,
        )?;
    }

    for (k, beta) in husimi_probe_points(params).into_iter().enumerate() {
        let (orc, scale) = oracle.husimi_with_scale(beta);
        out.push(format!("husimi[{k}]"), Some(phase_space::husimi_q(params, beta)), Some(orc), scale);
    }

    for (k, (b1, b2)) in psmatrix_probe_pairs(params).into_iter().enumerate() {
        let (_, s1) = oracle.husimi_with_scale(b1);
        let (_, s2) = oracle.husimi_with_scale(b2);
        let (_, sm) = oracle.husimi_with_scale((b1 + b2) * 0.5);
        let scale = s1 * s2 + (-(b2 - b1).norm_sqr() / 2.0).exp() * sm * sm;
        out.push(
            format!("psmatrix[{k}]"),
            Some(phase_space::psmatrix_det(params, b1, b2)),
            Some(oracle.psmatrix_det(b1, b2)),
            scale,
        );
    }

    Ok(VerifyReport {
        alpha_re: params.alpha().re,
        alpha_im: params.alpha().im,
        r: params.r(),
        tol,
        n_max: oracle.n_max(),
        tail_bound: oracle.fock().tail_bound(),
        entries: out.entries,
    })
}
