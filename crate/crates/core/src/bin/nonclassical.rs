use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nonclassical::herald::{scheme_fidelity_branch, HeraldPattern, PdcOrder, SchemeConfig, DEFAULT_ANCILLA_CAP};
use nonclassical::moments::general_moment;
use nonclassical::oracle::verify_all_with_tail;
use nonclassical::phase_space::{
    husimi_grid, husimi_q, psmatrix_det, psmatrix_disk_scan, psmatrix_special, q_zero, GridSpec,
};
use nonclassical::sweep::{
    domain_mask, emit_csv, emit_json, evaluate, fmt_f64, run_sweep, MaskSpec, SweepRow, SweepSpec,
};
use nonclassical::witnesses::WitnessKind;
use nonclassical::{make_state, Complex64, Error, StateParams};

#[derive(Parser)]
#[command(
    name = "nonclassical",
    version,
    about = "Nonclassicality witnesses of (t a + r a†)|α⟩"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Point {
    #[arg(long = "alpha-re", default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_re: f64,
    #[arg(long = "alpha-im", default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_im: f64,
    /// Addition weight r in [0, 1]; t = √(1 − r²)
    #[arg(long = "r", default_value_t = 0.0)]
    r: f64,
    /// Tail mass left out of truncated Fock expansions
    #[arg(long = "tail-tol", default_value_t = 1e-12)]
    tail_tol: f64,
}

impl Point {
    fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }

    fn state(&self) -> Result<StateParams, Error> {
        make_state(self.alpha(), self.r)
    }
}

#[derive(Args)]
struct Output {
    /// Output format (default csv; json for verify and herald-sim)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Destination file (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Normally ordered moments ⟨a†ᵐaⁿ⟩
    Moments {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        /// Largest m and n when tabulating
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Higher-order Mandel Q
    Mandel(Single<2>),
    /// Higher-order antibunching d(l−1)
    Hoa(Single<2>),
    /// Higher-order sub-Poissonian statistics
    Hosps(Single<2>),
    /// Hong-Mandel squeezing S(l)
    Hos {
        #[command(flatten)]
        single: Single<2>,
        /// Quadrature phase φ of X_φ
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phase: f64,
    },
    /// Husimi Q at one point or on a square grid
    Qfunc {
        #[command(flatten)]
        point: Point,
        #[arg(long = "beta-re", allow_negative_numbers = true, requires = "beta_im")]
        beta_re: Option<f64>,
        #[arg(long = "beta-im", allow_negative_numbers = true)]
        beta_im: Option<f64>,
        #[arg(long = "half-width", default_value_t = 3.0)]
        half_width: f64,
        /// Grid points per axis
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Phase-space matrix determinant; scans β₂ over a disk around the Husimi
    /// zero unless β₂ is given
    Psmatrix {
        #[command(flatten)]
        point: Point,
        #[arg(long = "beta-re", allow_negative_numbers = true, requires = "beta_im")]
        beta_re: Option<f64>,
        #[arg(long = "beta-im", allow_negative_numbers = true)]
        beta_im: Option<f64>,
        /// β₁ (default: the Husimi zero)
        #[arg(long = "beta1-re", allow_negative_numbers = true, requires = "beta1_im")]
        beta1_re: Option<f64>,
        #[arg(long = "beta1-im", allow_negative_numbers = true)]
        beta1_im: Option<f64>,
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        radii: usize,
        #[arg(long, default_value_t = 10)]
        angles: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Agarwal-Tara A₃
    AgarwalTara {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        output: Output,
    },
    /// Klyshko B(m); --order is m
    Klyshko(Single<3>),
    /// Witness sweep from a JSON spec
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Nonclassicality layers over the r–α plane from a JSON spec
    DomainMask {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate the heralded generation scheme
    HeraldSim {
        #[arg(long = "alpha-re", default_value_t = 0.8, allow_negative_numbers = true)]
        alpha_re: f64,
        #[arg(long = "alpha-im", default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_im: f64,
        #[arg(long, default_value_t = 0.995)]
        t1: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        t2: f64,
        #[arg(long, default_value_t = 0.01)]
        eta: f64,
        #[arg(long = "pdc-order", value_enum, default_value_t = PdcArg::Exact)]
        pdc_order: PdcArg,
        /// Which detector clicks
        #[arg(long, value_enum, default_value_t = PatternArg::Pd1)]
        pattern: PatternArg,
        #[arg(long = "cap-b", default_value_t = DEFAULT_ANCILLA_CAP)]
        cap_b: usize,
        #[arg(long = "cap-c", default_value_t = DEFAULT_ANCILLA_CAP)]
        cap_c: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Compare every closed form with the truncated Fock oracle
    Verify {
        #[command(flatten)]
        point: Point,
        /// Relative tolerance
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Single<const ORDER: u32> {
    #[command(flatten)]
    point: Point,
    #[arg(long, default_value_t = ORDER)]
    order: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Copy, Clone, ValueEnum)]
enum PdcArg {
    First,
    Exact,
}

#[derive(Copy, Clone, ValueEnum)]
enum PatternArg {
    Pd1,
    Pd2,
}

enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_) | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(Error::Io(e))
    }
}

/// A finished rendering plus the exit code it should produce.
struct Rendered {
    bytes: Vec<u8>,
    code: u8,
}

impl Rendered {
    fn ok(bytes: Vec<u8>) -> Self {
        Rendered { bytes, code: 0 }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(Error::from).map_err(Failure::Numeric)?;
    buf.push(b'\n');
    Ok(buf)
}

fn rows_bytes(rows: &[SweepRow], format: Format) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => emit_csv(rows, &mut buf)?,
        Format::Json => emit_json(rows, &mut buf)?,
    }
    Ok(buf)
}

fn read_spec(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn check_order(kind: WitnessKind, order: u32) -> Result<(), Failure> {
    nonclassical::sweep::check_witness_order(kind, order).map_err(|e| Failure::Usage(e.to_string()))
}

fn single(kind: WitnessKind, point: &Point, order: u32, format: Option<Format>) -> Result<Rendered, Failure> {
    let order = if kind.takes_order() { order } else { 0 };
    check_order(kind, order)?;
    let rec = evaluate(kind, order, &point.state()?, Complex64::new(0.1, 0.0))?;
    Ok(Rendered::ok(rows_bytes(&[SweepRow::from(&rec)], format.unwrap_or(Format::Csv))?))
}

#[derive(Serialize)]
struct MomentRow {
    m: u32,
    n: u32,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct PsRow {
    beta1_re: f64,
    beta1_im: f64,
    beta2_re: f64,
    beta2_im: f64,
    value: f64,
    nonclassical: bool,
}

#[derive(Serialize)]
struct QPoint {
    re: f64,
    im: f64,
    q: f64,
}

#[derive(Serialize)]
struct QGrid {
    zero: Option<(f64, f64)>,
    minimum: QPoint,
    integral: f64,
    re_range: (f64, f64),
    im_range: (f64, f64),
    n_re: usize,
    n_im: usize,
    /// `values[j][i]` at `(re_i, im_j)`
    values: Vec<Vec<f64>>,
}

fn run(command: Command) -> Result<(Rendered, Option<PathBuf>), Failure> {
    let (rendered, out) = match command {
        Command::Moments { point, m, n, order, output } => {
            let p = point.state()?;
            let ms: Vec<u32> = m.map_or_else(|| (0..=order).collect(), |m| vec![m]);
            let ns: Vec<u32> = n.map_or_else(|| (0..=order).collect(), |n| vec![n]);
            let mut rows = Vec::new();
            for &m in &ms {
                for &n in &ns {
                    let z = general_moment(&p, m, n)?;
                    rows.push(MomentRow { m, n, re: z.re, im: z.im });
                }
            }
            let bytes = match output.format.unwrap_or(Format::Csv) {
                Format::Json => json_bytes(&rows)?,
                Format::Csv => {
                    let mut s = String::from("m,n,re,im\n");
                    for r in &rows {
                        s += &format!("{},{},{},{}\n", r.m, r.n, fmt_f64(r.re), fmt_f64(r.im));
                    }
                    s.into_bytes()
                }
            };
            (Rendered::ok(bytes), output.out)
        }
        Command::Mandel(s) => (single(WitnessKind::Mandel, &s.point, s.order, s.output.format)?, s.output.out),
        Command::Hoa(s) => (single(WitnessKind::Hoa, &s.point, s.order, s.output.format)?, s.output.out),
        Command::Hosps(s) => (single(WitnessKind::Hosps, &s.point, s.order, s.output.format)?, s.output.out),
        Command::Klyshko(s) => (single(WitnessKind::Klyshko, &s.point, s.order, s.output.format)?, s.output.out),
        Command::AgarwalTara { point, output } => {
            (single(WitnessKind::AgarwalTara, &point, 0, output.format)?, output.out)
        }
        Command::Hos { single: s, phase } => {
            check_order(WitnessKind::Hos, s.order)?;
            let rec = nonclassical::witnesses::hos_at_phase(&s.point.state()?, s.order, phase)?;
            let bytes = rows_bytes(&[SweepRow::from(&rec)], s.output.format.unwrap_or(Format::Csv))?;
            (Rendered::ok(bytes), s.output.out)
        }
        Command::Qfunc { point, beta_re, beta_im, half_width, points, output } => {
            let p = point.state()?;
            let format = output.format.unwrap_or(Format::Csv);
            let bytes = if let (Some(re), Some(im)) = (beta_re, beta_im) {
                let q = husimi_q(&p, Complex64::new(re, im));
                match format {
                    Format::Json => json_bytes(&QPoint { re, im, q })?,
                    Format::Csv => format!("re,im,q\n{},{},{}\n", fmt_f64(re), fmt_f64(im), fmt_f64(q)).into_bytes(),
                }
            } else {
                if points < 2 {
                    return Err(Failure::Usage("--points must be at least 2".into()));
                }
                let grid = husimi_grid(&p, GridSpec::square(half_width, point.alpha(), points))?;
                match format {
                    Format::Csv => {
                        let mut buf = Vec::new();
                        grid.write_csv(&mut buf)?;
                        buf
                    }
                    Format::Json => {
                        let (at, q) = grid.minimum();
                        json_bytes(&QGrid {
                            zero: q_zero(&p).map(|z| (z.re, z.im)),
                            minimum: QPoint { re: at.re, im: at.im, q },
                            integral: grid.integral(),
                            re_range: grid.spec.re_range,
                            im_range: grid.spec.im_range,
                            n_re: grid.spec.n_re,
                            n_im: grid.spec.n_im,
                            values: grid.values,
                        })?
                    }
                }
            };
            (Rendered::ok(bytes), output.out)
        }
        Command::Psmatrix { point, beta_re, beta_im, beta1_re, beta1_im, radius, radii, angles, output } => {
            let p = point.state()?;
            let beta2 = beta_re.zip(beta_im).map(|(re, im)| Complex64::new(re, im));
            let beta1 = beta1_re.zip(beta1_im).map(|(re, im)| Complex64::new(re, im));
            // the special case has no cancellation, so its sign is exact;
            // the general determinant gets the usual boundary band
            let exact_sign = beta1.is_none();
            let row = |b1: Complex64, b2: Complex64, value: f64| PsRow {
                beta1_re: b1.re,
                beta1_im: b1.im,
                beta2_re: b2.re,
                beta2_im: b2.im,
                value,
                nonclassical: if exact_sign {
                    value < 0.0
                } else {
                    value < -nonclassical::witnesses::BOUNDARY_TOL
                },
            };
            let rows = match (beta1, beta2) {
                (Some(b1), Some(b2)) => vec![row(b1, b2, psmatrix_det(&p, b1, b2))],
                (None, Some(b2)) => {
                    let b1 = q_zero(&p).ok_or_else(|| Error::Domain("r = 0 has no Husimi zero; pass --beta1-re/--beta1-im".into()))?;
                    vec![row(b1, b2, psmatrix_special(&p, b2)?)]
                }
                (Some(b1), None) => nonclassical::phase_space::disk_points(b1, radius, radii, angles)
                    .into_iter()
                    .map(|b2| row(b1, b2, psmatrix_det(&p, b1, b2)))
                    .collect(),
                (None, None) => {
                    let b1 = q_zero(&p).ok_or_else(|| Error::Domain("r = 0 has no Husimi zero; pass --beta1-re/--beta1-im".into()))?;
                    psmatrix_disk_scan(&p, radius, radii, angles)?
                        .into_iter()
                        .map(|(b2, v)| row(b1, b2, v))
                        .collect()
                }
            };
            let bytes = match output.format.unwrap_or(Format::Csv) {
                Format::Json => json_bytes(&rows)?,
                Format::Csv => {
                    let mut s = String::from("beta1_re,beta1_im,beta2_re,beta2_im,value,nonclassical\n");
                    for r in &rows {
                        s += &format!(
                            "{},{},{},{},{},{}\n",
                            fmt_f64(r.beta1_re),
                            fmt_f64(r.beta1_im),
                            fmt_f64(r.beta2_re),
                            fmt_f64(r.beta2_im),
                            fmt_f64(r.value),
                            r.nonclassical
                        );
                    }
                    s.into_bytes()
                }
            };
            (Rendered::ok(bytes), output.out)
        }
        Command::Sweep { spec, output } => {
            let spec = SweepSpec::from_json(&read_spec(&spec)?)?;
            let rows = run_sweep(&spec)?;
            (Rendered::ok(rows_bytes(&rows, output.format.unwrap_or(Format::Csv))?), output.out)
        }
        Command::DomainMask { spec, output } => {
            let spec = MaskSpec::from_json(&read_spec(&spec)?)?;
            let mask = domain_mask(&spec)?;
            let mut buf = Vec::new();
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => mask.write_csv(&mut buf)?,
                Format::Json => mask.write_json(&mut buf)?,
            }
            (Rendered::ok(buf), output.out)
        }
        Command::HeraldSim { alpha_re, alpha_im, t1, t2, eta, pdc_order, pattern, cap_b, cap_c, output } => {
            let order = match pdc_order {
                PdcArg::First => PdcOrder::First,
                PdcArg::Exact => PdcOrder::Exact,
            };
            let pattern = match pattern {
                PatternArg::Pd1 => HeraldPattern::Pd1ClickPd2Silent,
                PatternArg::Pd2 => HeraldPattern::Pd2ClickPd1Silent,
            };
            let mut config = SchemeConfig::new(t1, t2, 0.0)?;
            config.eta = eta;
            config.cap_b = cap_b;
            config.cap_c = cap_c;
            let config = config.with_order(order)?;
            let outcome = scheme_fidelity_branch(Complex64::new(alpha_re, alpha_im), &config, pattern)?;
            let bytes = match output.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&outcome)?,
                Format::Csv => format!(
                    "success_probability,implied_t_re,implied_t_im,implied_r_re,implied_r_im,fidelity\n{},{},{},{},{},{}\n",
                    fmt_f64(outcome.success_probability),
                    fmt_f64(outcome.implied_t.re),
                    fmt_f64(outcome.implied_t.im),
                    fmt_f64(outcome.implied_r.re),
                    fmt_f64(outcome.implied_r.im),
                    fmt_f64(outcome.fidelity)
                )
                .into_bytes(),
            };
            (Rendered::ok(bytes), output.out)
        }
        Command::Verify { point, tol, output } => {
            let report = verify_all_with_tail(&point.state()?, tol, point.tail_tol)?;
            let bytes = match output.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&report)?,
                Format::Csv => {
                    let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_f64);
                    let mut s = String::from("quantity,closed_form,oracle,abs_err,rel_err,pass\n");
                    for e in &report.entries {
                        s += &format!(
                            "{},{},{},{},{},{}\n",
                            e.quantity,
                            opt(e.closed_form),
                            opt(e.oracle),
                            fmt_f64(e.abs_err),
                            fmt_f64(e.rel_err),
                            e.pass
                        );
                    }
                    s.into_bytes()
                }
            };
            let code = if report.all_pass() { 0 } else { 3 };
            (Rendered { bytes, code }, output.out)
        }
    };
    Ok((rendered, out))
}

/// Writes through a sibling temporary file so a failure never leaves a
/// truncated destination behind.
fn deliver(bytes: &[u8], out: Option<&Path>) -> io::Result<()> {
    match out {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
        Some(path) => {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, path).inspect_err(|_| {
                let _ = fs::remove_file(&tmp);
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok((rendered, out)) => {
            if let Err(e) = deliver(&rendered.bytes, out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(rendered.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
