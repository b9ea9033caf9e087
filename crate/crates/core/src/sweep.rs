//! Parameter sweeps over `(r, α)` grids, the `r`–`α` domain masks, and their
//! CSV/JSON serialization.
//!
//! Output is byte-deterministic: rows come out in spec order (witness, order,
//! `r`, then `α` in grid order) regardless of how evaluation is scheduled.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{psmatrix_witness, qfunc_zero_witness};
use crate::state::{make_state, StateParams};
use crate::witnesses::{self, WitnessKind, WitnessRecord};

/// Largest number of rows (or mask cells times layers) a spec may request.
pub const MAX_SWEEP_POINTS: usize = 10_000_000;

pub const CSV_HEADER: &str = "witness,order,alpha_re,alpha_im,r,value,nonclassical,degenerate";

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn default_beta() -> Complex64 {
    Complex64::new(0.1, 0.0)
}

fn default_orders() -> Vec<u32> {
    vec![2]
}

/// Values of `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaGrid {
    /// Evenly spaced real `α` in `[start, stop]`; with `exclude_start` the
    /// points are `start + (stop − start)·k/count`, `k = 1..=count`.
    Real {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        exclude_start: bool,
    },
    /// Rectangle in the complex plane, real part outer.
    Complex {
        re: (f64, f64),
        im: (f64, f64),
        n_re: usize,
        n_im: usize,
    },
    /// `α = modulus · e^{iφ}` for evenly spaced `φ ∈ [start, stop]`.
    Phase {
        modulus: f64,
        start: f64,
        stop: f64,
        count: usize,
    },
    /// Explicit `[re, im]` pairs.
    Points(Vec<(f64, f64)>),
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
        .collect()
}

fn check_count(name: &str, count: usize) -> Result<()> {
    if count < 2 {
        return Err(Error::Spec(format!("{name} count must be at least 2, got {count}")));
    }
    Ok(())
}

impl AlphaGrid {
    pub fn len(&self) -> usize {
        match self {
            AlphaGrid::Real { count, .. } | AlphaGrid::Phase { count, .. } => *count,
            AlphaGrid::Complex { n_re, n_im, .. } => n_re.saturating_mul(*n_im),
            AlphaGrid::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        match self {
            AlphaGrid::Real { count, .. } | AlphaGrid::Phase { count, .. } => check_count("alpha", *count),
            AlphaGrid::Complex { n_re, n_im, .. } => {
                check_count("alpha n_re", *n_re)?;
                check_count("alpha n_im", *n_im)
            }
            AlphaGrid::Points(p) if p.is_empty() => Err(Error::Spec("alpha point list is empty".into())),
            AlphaGrid::Points(_) => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        match self {
            AlphaGrid::Real { start, stop, count, exclude_start } => {
                if *exclude_start {
                    (1..=*count)
                        .map(|k| Complex64::new(start + (stop - start) * k as f64 / *count as f64, 0.0))
                        .collect()
                } else {
                    linspace(*start, *stop, *count).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
                }
            }
            AlphaGrid::Complex { re, im, n_re, n_im } => {
                let ims = linspace(im.0, im.1, *n_im);
                linspace(re.0, re.1, *n_re)
                    .into_iter()
                    .flat_map(|x| ims.iter().map(move |&y| Complex64::new(x, y)))
                    .collect()
            }
            AlphaGrid::Phase { modulus, start, stop, count } => linspace(*start, *stop, *count)
                .into_iter()
                .map(|phi| Complex64::from_polar(*modulus, phi))
                .collect(),
            AlphaGrid::Points(p) => p.iter().map(|&(x, y)| Complex64::new(x, y)).collect(),
        }
    }
}

/// A sweep request, deserialized from the `--spec` JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub witnesses: Vec<WitnessKind>,
    /// `l` for the moment witnesses, `m` for Klyshko; ignored by witnesses
    /// without an order.
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    pub r_values: Vec<f64>,
    pub alpha: AlphaGrid,
    /// `β₂` for `psmatrix`.
    #[serde(default = "default_beta")]
    pub beta: Complex64,
}

/// Accepted order range of each witness.
pub fn check_witness_order(kind: WitnessKind, order: u32) -> Result<()> {
    let ok = match kind {
        WitnessKind::Mandel | WitnessKind::Hoa => (2..=10).contains(&order),
        WitnessKind::Hosps => (2..=8).contains(&order),
        WitnessKind::Hos => (2..=10).contains(&order) && order % 2 == 0,
        WitnessKind::Klyshko => order <= witnesses::MAX_KLYSHKO_M,
        WitnessKind::AgarwalTara | WitnessKind::Psmatrix | WitnessKind::QfuncZero => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::out_of_range(format!("order {order} is not valid for {kind}")))
    }
}

fn check_r_values(r_values: &[f64]) -> Result<()> {
    if r_values.is_empty() {
        return Err(Error::Spec("r_values is empty".into()));
    }
    if let Some(r) = r_values.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Spec(format!("r = {r} is outside [0, 1]")));
    }
    Ok(())
}

impl SweepSpec {
    /// `(witness, order)` pairs in output order.
    fn series(&self) -> Vec<(WitnessKind, u32)> {
        self.witnesses
            .iter()
            .flat_map(|&w| {
                if w.takes_order() {
                    self.orders.iter().map(|&o| (w, o)).collect::<Vec<_>>()
                } else {
                    vec![(w, 0)]
                }
            })
            .collect()
    }

    pub fn row_count(&self) -> usize {
        self.series()
            .len()
            .saturating_mul(self.r_values.len())
            .saturating_mul(self.alpha.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.witnesses.is_empty() {
            return Err(Error::Spec("no witnesses selected".into()));
        }
        if self.witnesses.iter().any(|w| w.takes_order()) && self.orders.is_empty() {
            return Err(Error::Spec("orders is empty".into()));
        }
        check_r_values(&self.r_values)?;
        self.alpha.validate()?;
        for (w, o) in self.series() {
            check_witness_order(w, o).map_err(|e| Error::Spec(e.to_string()))?;
        }
        let rows = self.row_count();
        if rows > MAX_SWEEP_POINTS {
            return Err(Error::SpecTooLarge(rows));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Evaluates one witness; a vanishing mean photon number is reported as a
/// degenerate record.
pub fn evaluate(kind: WitnessKind, order: u32, params: &StateParams, beta: Complex64) -> Result<WitnessRecord> {
    let result = match kind {
        WitnessKind::Mandel => witnesses::mandel_q(params, order),
        WitnessKind::Hoa => witnesses::hoa(params, order),
        WitnessKind::Hosps => witnesses::hosps(params, order),
        WitnessKind::Hos => witnesses::hos(params, order),
        WitnessKind::AgarwalTara => witnesses::agarwal_tara(params),
        WitnessKind::Klyshko => witnesses::klyshko(params, order),
        WitnessKind::Psmatrix => Ok(psmatrix_witness(params, beta)),
        WitnessKind::QfuncZero => Ok(qfunc_zero_witness(params)),
    };
    match result {
        Err(Error::DegenerateState(_)) => Ok(WitnessRecord::degenerate(kind, order, *params)),
        other => other,
    }
}

/// One line of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub witness: WitnessKind,
    pub order: u32,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub r: f64,
    /// `None` when degenerate.
    pub value: Option<f64>,
    pub nonclassical: bool,
    pub degenerate: bool,
}

impl From<&WitnessRecord> for SweepRow {
    fn from(rec: &WitnessRecord) -> Self {
        let alpha = rec.params.alpha();
        SweepRow {
            witness: rec.witness,
            order: rec.order,
            alpha_re: alpha.re,
            alpha_im: alpha.im,
            r: rec.params.r(),
            value: (!rec.is_degenerate()).then_some(rec.value),
            nonclassical: rec.nonclassical(),
            degenerate: rec.is_degenerate(),
        }
    }
}

/// Witness row at one grid point; the `α = 0`, `r = 0` state has no
/// normalization and gives a degenerate row.
pub fn evaluate_point(kind: WitnessKind, order: u32, alpha: Complex64, r: f64, beta: Complex64) -> Result<SweepRow> {
    match make_state(alpha, r) {
        Ok(params) => Ok(SweepRow::from(&evaluate(kind, order, &params, beta)?)),
        Err(Error::DegenerateState(_)) => Ok(SweepRow {
            witness: kind,
            order,
            alpha_re: alpha.re,
            alpha_im: alpha.im,
            r,
            value: None,
            nonclassical: false,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let alphas = spec.alpha.values();
    let mut jobs = Vec::with_capacity(spec.row_count());
    for (w, o) in spec.series() {
        for &r in &spec.r_values {
            for &a in &alphas {
                jobs.push((w, o, r, a));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(w, o, r, a)| evaluate_point(w, o, a, r, spec.beta))
        .collect()
}

fn csv_line(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        row.witness,
        row.order,
        fmt_f64(row.alpha_re),
        fmt_f64(row.alpha_im),
        fmt_f64(row.r),
        fmt_f64(row.value.unwrap_or(f64::NAN)),
        row.nonclassical,
        row.degenerate
    )
}

pub fn emit_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", csv_line(row))?;
    }
    Ok(())
}

pub fn emit_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Spec(format!("line {line}: cannot parse '{field}'")))
}

/// Reads CSV written by [`emit_csv`].
pub fn parse_csv<R: BufRead>(input: R) -> Result<Vec<SweepRow>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref() != Some(CSV_HEADER) {
        return Err(Error::Spec("missing sweep CSV header".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::Spec(format!("line {n}: expected 8 fields, found {}", f.len())));
        }
        let value: f64 = parse_field(f[5], n)?;
        rows.push(SweepRow {
            witness: f[0].parse()?,
            order: parse_field(f[1], n)?,
            alpha_re: parse_field(f[2], n)?,
            alpha_im: parse_field(f[3], n)?,
            r: parse_field(f[4], n)?,
            value: (!value.is_nan()).then_some(value),
            nonclassical: parse_field(f[6], n)?,
            degenerate: parse_field(f[7], n)?,
        });
    }
    Ok(rows)
}

/// Inclusive evenly spaced axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

fn default_klyshko_m() -> u32 {
    3
}

/// The layers drawn in the `r`–`α` domain plot; the Husimi-zero layer is
/// left out by default and can be requested explicitly.
pub fn default_mask_criteria() -> Vec<WitnessKind> {
    vec![
        WitnessKind::Mandel,
        WitnessKind::Hoa,
        WitnessKind::Hosps,
        WitnessKind::Hos,
        WitnessKind::AgarwalTara,
        WitnessKind::Klyshko,
        WitnessKind::Psmatrix,
    ]
}

/// Domain-mask request over real `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSpec {
    pub r: Axis,
    pub alpha: Axis,
    /// `l` for Mandel, HOA, HOSPS and HOS.
    pub order: u32,
    #[serde(default = "default_beta")]
    pub beta: Complex64,
    #[serde(default = "default_klyshko_m")]
    pub klyshko_m: u32,
    #[serde(default = "default_mask_criteria")]
    pub criteria: Vec<WitnessKind>,
}

impl MaskSpec {
    pub fn new(r: Axis, alpha: Axis, order: u32) -> Self {
        MaskSpec {
            r,
            alpha,
            order,
            beta: default_beta(),
            klyshko_m: default_klyshko_m(),
            criteria: default_mask_criteria(),
        }
    }

    pub fn order_for(&self, kind: WitnessKind) -> u32 {
        match kind {
            WitnessKind::Klyshko => self.klyshko_m,
            k if k.takes_order() => self.order,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_count("r", self.r.count)?;
        check_count("alpha", self.alpha.count)?;
        check_r_values(&[self.r.start, self.r.stop])?;
        if self.criteria.is_empty() {
            return Err(Error::Spec("no criteria selected".into()));
        }
        for &k in &self.criteria {
            check_witness_order(k, self.order_for(k)).map_err(|e| Error::Spec(e.to_string()))?;
        }
        let cells = self
            .r
            .count
            .saturating_mul(self.alpha.count)
            .saturating_mul(self.criteria.len());
        if cells > MAX_SWEEP_POINTS {
            return Err(Error::SpecTooLarge(cells));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MaskSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskCell {
    pub r: f64,
    pub alpha: f64,
    /// One flag per criterion, in [`DomainMask::criteria`] order.
    pub flags: Vec<bool>,
}

/// Nonclassicality flags over the `r`–`α` plane, `r` outer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainMask {
    pub criteria: Vec<WitnessKind>,
    pub cells: Vec<MaskCell>,
}

impl DomainMask {
    pub fn layer(&self, kind: WitnessKind) -> Option<Vec<bool>> {
        let idx = self.criteria.iter().position(|&k| k == kind)?;
        Some(self.cells.iter().map(|c| c.flags[idx]).collect())
    }

    /// Header `r,alpha,<criterion>...`, flags as `true`/`false`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let names: Vec<&str> = self.criteria.iter().map(|k| k.name()).collect();
        writeln!(out, "r,alpha,{}", names.join(","))?;
        for cell in &self.cells {
            let flags: Vec<String> = cell.flags.iter().map(|f| f.to_string()).collect();
            writeln!(out, "{},{},{}", fmt_f64(cell.r), fmt_f64(cell.alpha), flags.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Degenerate points count as not nonclassical.
pub fn domain_mask(spec: &MaskSpec) -> Result<DomainMask> {
    spec.validate()?;
    let alphas = spec.alpha.values();
    let points: Vec<(f64, f64)> = spec
        .r
        .values()
        .into_iter()
        .flat_map(|r| alphas.iter().map(move |&a| (r, a)))
        .collect();
    let cells = points
        .into_par_iter()
        .map(|(r, a)| {
            let flags = spec
                .criteria
                .iter()
                .map(|&k| {
                    evaluate_point(k, spec.order_for(k), Complex64::new(a, 0.0), r, spec.beta)
                        .map(|row| row.nonclassical)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MaskCell { r, alpha: a, flags })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DomainMask { criteria: spec.criteria.clone(), cells })
}
