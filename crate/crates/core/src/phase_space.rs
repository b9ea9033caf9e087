//! Husimi Q function and the two-point phase-space matrix criterion.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::StateParams;
use crate::witnesses::{Verdict, WitnessKind, WitnessRecord};

/// Largest raster [`husimi_grid`] will evaluate.
pub const MAX_GRID_POINTS: usize = 4_000_000;

/// `Q(β) = (1/π) N⁻¹ |tα + rβ*|² e^{−|α−β|²}`.
pub fn husimi_q(params: &StateParams, beta: Complex64) -> f64 {
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let amp = (t * alpha + r * beta.conj()).norm_sqr();
    amp * (-(alpha - beta).norm_sqr()).exp() / (PI * params.norm())
}

/// The zero of `Q`, `β = −α* t / r`; `None` for the coherent state.
pub fn q_zero(params: &StateParams) -> Option<Complex64> {
    if params.r().abs() <= 1e-12 {
        return None;
    }
    Some(-params.alpha().conj() * (params.t() / params.r()))
}

/// Raster specification: inclusive ranges with uniform spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, center: Complex64, n: usize) -> Self {
        GridSpec {
            re_range: (center.re - half_width, center.re + half_width),
            im_range: (center.im - half_width, center.im + half_width),
            n_re: n,
            n_im: n,
        }
    }

    fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n == 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    pub fn re_at(&self, i: usize) -> f64 {
        Self::axis(self.re_range, self.n_re, i)
    }

    pub fn im_at(&self, j: usize) -> f64 {
        Self::axis(self.im_range, self.n_im, j)
    }

    pub fn cell_area(&self) -> f64 {
        let d = |r: (f64, f64), n: usize| if n > 1 { (r.1 - r.0) / (n - 1) as f64 } else { 0.0 };
        d(self.re_range, self.n_re) * d(self.im_range, self.n_im)
    }
}

/// Rasterized `Q`; `values[j][i]` sits at `(re_at(i), im_at(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub spec: GridSpec,
    pub values: Vec<Vec<f64>>,
}

impl PhaseGrid {
    /// Riemann sum times the cell area.
    pub fn integral(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.spec.cell_area()
    }

    /// `(β, Q)` at the smallest grid value.
    pub fn minimum(&self) -> (Complex64, f64) {
        let mut best = (Complex64::new(0.0, 0.0), f64::INFINITY);
        for (j, row) in self.values.iter().enumerate() {
            for (i, &q) in row.iter().enumerate() {
                if q < best.1 {
                    best = (Complex64::new(self.spec.re_at(i), self.spec.im_at(j)), q);
                }
            }
        }
        best
    }

    /// CSV with header `re,im,q`, rows ordered by imaginary part then real
    /// part, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re,im,q")?;
        for (j, row) in self.values.iter().enumerate() {
            let im = self.spec.im_at(j);
            for (i, q) in row.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{}",
                    crate::sweep::fmt_f64(self.spec.re_at(i)),
                    crate::sweep::fmt_f64(im),
                    crate::sweep::fmt_f64(*q)
                )?;
            }
        }
        Ok(())
    }
}

pub fn husimi_grid(params: &StateParams, spec: GridSpec) -> Result<PhaseGrid> {
    let total = spec.n_re.saturating_mul(spec.n_im);
    if total == 0 {
        return Err(Error::domain("grid needs at least one point per axis"));
    }
    if total > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge(total));
    }
    let values = (0..spec.n_im)
        .into_par_iter()
        .map(|j| {
            let im = spec.im_at(j);
            (0..spec.n_re)
                .map(|i| husimi_q(params, Complex64::new(spec.re_at(i), im)))
                .collect()
        })
        .collect();
    Ok(PhaseGrid { spec, values })
}

/// `det M = Q(β₁)Q(β₂) − e^{−|β₂−β₁|²/2} Q((β₁+β₂)/2)²`.
pub fn psmatrix_det(params: &StateParams, beta1: Complex64, beta2: Complex64) -> f64 {
    let mid = husimi_q(params, (beta1 + beta2) * 0.5);
    husimi_q(params, beta1) * husimi_q(params, beta2)
        - (-(beta2 - beta1).norm_sqr() / 2.0).exp() * mid * mid
}

/// `det M` with `β₁ = −α* t/r` in closed form:
/// `−e^{−|β₂−β₁|²/2} |tα + rβ₂*|⁴ e^{−2|α − (β₁+β₂)/2|²} / (16 π² N²)`.
pub fn psmatrix_special(params: &StateParams, beta2: Complex64) -> Result<f64> {
    Ok(-psmatrix_special_ln(params, beta2)?.exp())
}

/// `ln|det M|` for [`psmatrix_special`], finite where the value itself
/// underflows; `−∞` only at `β₂ = β₁`.
pub fn psmatrix_special_ln(params: &StateParams, beta2: Complex64) -> Result<f64> {
    let beta1 = q_zero(params)
        .ok_or_else(|| Error::domain("psmatrix_special needs r > 0 (no Husimi zero)"))?;
    let (t, r, alpha) = (params.t(), params.r(), params.alpha());
    let amp = (t * alpha + r * beta2.conj()).norm_sqr();
    let gap = (beta2 - beta1).norm_sqr();
    let shift = (alpha - (beta1 + beta2) * 0.5).norm_sqr();
    let n = params.norm();
    Ok(-gap / 2.0 - 2.0 * shift + 2.0 * amp.ln() - (16.0 * PI * PI * n * n).ln())
}

/// [`psmatrix_special`] as a witness record at `β₂`; degenerate at `r = 0`.
pub fn psmatrix_witness(params: &StateParams, beta2: Complex64) -> WitnessRecord {
    match psmatrix_special(params, beta2) {
        Ok(v) => {
            let mut rec = WitnessRecord::new(WitnessKind::Psmatrix, 0, *params, v);
            // a product of exponentials: the sign is exact even when tiny
            if v < 0.0 {
                rec.verdict = Verdict::Nonclassical;
            }
            rec
        }
        Err(_) => WitnessRecord::degenerate(WitnessKind::Psmatrix, 0, *params),
    }
}

/// `n_radii × n_angles` points on a polar lattice inside the disk
/// `|β − center| ≤ radius`, excluding the center itself; radius outer.
pub fn disk_points(center: Complex64, radius: f64, n_radii: usize, n_angles: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_radii * n_angles);
    for i in 1..=n_radii {
        let rho = radius * i as f64 / n_radii as f64;
        for j in 0..n_angles {
            let phi = 2.0 * PI * j as f64 / n_angles as f64;
            out.push(center + Complex64::from_polar(rho, phi));
        }
    }
    out
}

/// [`psmatrix_special`] at every point of [`disk_points`] around the Husimi
/// zero.
pub fn psmatrix_disk_scan(
    params: &StateParams,
    radius: f64,
    n_radii: usize,
    n_angles: usize,
) -> Result<Vec<(Complex64, f64)>> {
    let beta1 = q_zero(params)
        .ok_or_else(|| Error::domain("psmatrix scan needs r > 0 (no Husimi zero)"))?;
    disk_points(beta1, radius, n_radii, n_angles)
        .into_iter()
        .map(|b| Ok((b, psmatrix_special(params, b)?)))
        .collect()
}

/// `−1` when `Q` has a zero, `0` otherwise, so that the usual negative
/// verdict means "a zero exists".
pub fn qfunc_zero_witness(params: &StateParams) -> WitnessRecord {
    let value = if q_zero(params).is_some() { -1.0 } else { 0.0 };
    WitnessRecord::new(WitnessKind::QfuncZero, 0, *params, value)
}
