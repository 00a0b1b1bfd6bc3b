//! The `corrsim` command line: curves, series reports, simulations, the CHSH
//! game, the quantum-to-vector reduction and the lower-bound experiments.
//!
//! Every command is a pure function of its flags (including `--seed`) that
//! returns its full output text and a pass/fail verdict; `main` writes the
//! text once, atomically, and maps the verdict to the exit code.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corrfun::{
    b_eps, h2_sign_report, h_ort, majority_sign_report, mixed_sign_report, SignCheck,
};
use crate::error::{Error, Result};
use crate::krivine::invert_h;
use crate::mc::{derive_seed, trial_rng};
use crate::protocols::{sample_pair_with_rho, simulate, span_coordinates, Protocol, UnitVector};
use crate::quantum::{
    chsh_game_value, chsh_instance, reduce_to_vectors, DensityMatrix, Observable,
};

/// `1/2 + 1/(2√2)`.
pub const QUANTUM_CHSH: f64 = 0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2;
pub const CLASSICAL_CHSH: f64 = 0.75;

/// `(3 − √2)/2`.
pub fn transcript_bound() -> f64 {
    (3.0 - 2f64.sqrt()) / 2.0
}

#[derive(Parser, Debug)]
#[command(
    name = "corrsim",
    version,
    about = "Simulate quantum correlations with shared randomness and two bits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Correlation curve ρ ↦ E[αβ]: analytic value and Monte Carlo estimate (CSV).
    Curve(CurveArgs),
    /// Coefficient signs of a correlation series and bounds on its inverse.
    Series(SeriesArgs),
    /// Run a protocol on one input pair (JSON summary).
    Simulate(SimulateArgs),
    /// Play the CHSH game with a protocol (JSON summary).
    Chsh(ChshArgs),
    /// Reduce a quantum instance to a pair of real unit vectors (JSON).
    Reduce(ReduceArgs),
    /// Lower-bound experiments.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ProtocolName {
    Nocomm,
    Maj,
    Ort,
    /// The mixed protocol on embedded inputs.
    Mixed,
    /// The plain 1-or-2-bit mixture without embedding.
    MixedRaw,
    /// The two-bit protocol on embedded inputs.
    Transformed,
    Constant,
}

#[derive(Args, Debug, Clone)]
pub struct ProtocolArgs {
    #[arg(long, value_enum, default_value = "transformed")]
    pub protocol: ProtocolName,
    /// Bits for `maj` (even) and `ort`.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Input dimension.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    /// Fail unless every point lies within 4·stderr (+ declared bias).
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SeriesTarget {
    Ort2,
    Mixed,
    Maj4,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    #[arg(long, value_enum, default_value = "ort2")]
    pub target: SeriesTarget,
    #[arg(long, default_value_t = 41)]
    pub order: usize,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub mc: McArgs,
    /// Inner product of a sampled input pair.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "instance")]
    pub rho: Option<f64>,
    /// Quantum instance file; its reduced vectors are the inputs.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ChshArgs {
    #[arg(long, value_enum, default_value = "transformed")]
    pub protocol: ProtocolName,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Instance file (default: the EPR state with A₀ = Z, B₀ = (Z+X)/√2).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// B(ε) = 2 − E[αβ | ρ = 1−ε] + E[αβ | ρ = −1+ε] for the orthant protocol.
    Bneps(BnepsArgs),
    /// Most frequent message on uniformly random CHSH inputs.
    TranscriptBound(TranscriptArgs),
}

#[derive(Args, Debug)]
pub struct BnepsArgs {
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01, 0.001])]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct TranscriptArgs {
    #[arg(long, value_enum, default_value = "transformed")]
    pub protocol: ProtocolName,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Builds a protocol for inputs of dimension `n`.
pub fn build_protocol(name: ProtocolName, k: usize, n: usize) -> Result<Protocol> {
    match name {
        ProtocolName::Nocomm => Ok(Protocol::NoComm),
        ProtocolName::Maj => Protocol::majority(k),
        ProtocolName::Ort => Protocol::orthant(k),
        ProtocolName::Mixed => Protocol::mixed(n),
        ProtocolName::MixedRaw => Ok(Protocol::mixed_raw()),
        ProtocolName::Transformed => Protocol::transformed(n),
        ProtocolName::Constant => Ok(Protocol::Constant),
    }
}

/// Target value: `ρ` for embedded protocols, the correlation function otherwise.
fn analytic(protocol: &Protocol, rho: f64) -> Result<f64> {
    match protocol.embedding() {
        Some(_) => Ok(rho),
        None => protocol.correlation(rho),
    }
}

// --------------------------------------------------------------------------
// curve

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub rho: f64,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub trials: u64,
}

pub const CURVE_HEADER: &str = "rho,analytic,mc_mean,mc_stderr,trials";

pub fn curve_rows(
    protocol: &Protocol,
    n: usize,
    points: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    if points < 2 {
        return Err(Error::InvalidInput {
            field: "points".into(),
            reason: "need at least 2".into(),
        });
    }
    (0..points)
        .map(|i| {
            let rho = (-1.0 + 2.0 * i as f64 / (points - 1) as f64).clamp(-1.0, 1.0);
            let (a, b) =
                sample_pair_with_rho(n, rho, &mut trial_rng(derive_seed(seed, 2 * i as u64), 0))?;
            let report = simulate(
                protocol,
                &[(a, b)],
                trials,
                derive_seed(seed, 2 * i as u64 + 1),
            )?;
            let est = report.pairs[0].estimate;
            Ok(CurveRow {
                rho,
                analytic: analytic(protocol, rho)?,
                mc_mean: est.mean,
                mc_stderr: est.stderr,
                trials,
            })
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.rho, r.analytic, r.mc_mean, r.mc_stderr, r.trials
        );
    }
    s
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(Error::InvalidInput {
            field: "header".into(),
            reason: format!("expected {CURVE_HEADER}"),
        });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::InvalidInput {
                field: format!("line {}: {what}", i + 2),
                reason: line.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad("field count"));
            }
            let num = |j: usize, name: &str| f[j].parse::<f64>().map_err(|_| bad(name));
            Ok(CurveRow {
                rho: num(0, "rho")?,
                analytic: num(1, "analytic")?,
                mc_mean: num(2, "mc_mean")?,
                mc_stderr: num(3, "mc_stderr")?,
                trials: f[4].parse().map_err(|_| bad("trials"))?,
            })
        })
        .collect()
}

// --------------------------------------------------------------------------
// series

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseRow {
    pub degree: usize,
    pub d: f64,
    /// `1/k − d_k`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub target: SeriesTarget,
    pub order: usize,
    /// `(degree, c_k)` for odd degrees.
    pub c: Vec<(usize, f64)>,
    pub inverse: Vec<InverseRow>,
    /// `Σ d_k` through `order`.
    pub inverse_mass: f64,
    pub inverse_check: std::result::Result<(), String>,
    pub checks: Vec<SignCheck>,
    pub passed: bool,
}

pub fn series_report(target: SeriesTarget, order: usize) -> Result<SeriesReport> {
    let report = match target {
        SeriesTarget::Ort2 => h2_sign_report(order)?,
        SeriesTarget::Mixed => mixed_sign_report(order)?,
        SeriesTarget::Maj4 => majority_sign_report(4, order)?,
    };
    let c = (1..=order)
        .step_by(2)
        .map(|k| (k, report.series.coeff(k)))
        .collect();
    let d = report.series.revert(order)?;
    let inverse = crate::krivine::InverseSeries::unchecked(d, None);
    let inverse_check = invert_h(&report.series, order)
        .map(|_| ())
        .map_err(|e| e.to_string());
    let passed = report.passed() && inverse_check.is_ok();
    Ok(SeriesReport {
        target,
        order,
        c,
        inverse: inverse
            .bound_margins()
            .into_iter()
            .map(|(degree, d, margin)| InverseRow { degree, d, margin })
            .collect(),
        inverse_mass: inverse.partial_mass(order),
        inverse_check,
        checks: report.checks,
        passed,
    })
}

impl SeriesReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "target {:?}, order {}", self.target, self.order);
        let _ = writeln!(
            s,
            "{:>6} {:>24} {:>24} {:>24}",
            "degree", "c_k", "d_k", "1/k - d_k"
        );
        for ((k, ck), row) in self.c.iter().zip(&self.inverse) {
            let _ = writeln!(
                s,
                "{k:>6} {ck:>24.16e} {:>24.16e} {:>24.16e}",
                row.d, row.margin
            );
        }
        let _ = writeln!(s, "sum of d_k: {:.16}", self.inverse_mass);
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {}: {}", verdict(c.passed), c.claim, c.detail);
        }
        match &self.inverse_check {
            Ok(()) => {
                let _ = writeln!(s, "[PASS] inverse coefficients in [0, 1/k], mass <= 1");
            }
            Err(e) => {
                let _ = writeln!(s, "[FAIL] inverse coefficients: {e}");
            }
        }
        let _ = writeln!(s, "overall: {}", verdict(self.passed));
        s
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

// --------------------------------------------------------------------------
// simulate

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub protocol: String,
    pub n: usize,
    pub rho: f64,
    pub target: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean_bits: f64,
    pub max_bits: usize,
    pub alpha_plus: f64,
    pub beta_plus: f64,
    pub truncation: Option<usize>,
    pub tail_mass: Option<f64>,
    pub transcripts: BTreeMap<String, u64>,
}

pub fn simulate_pair(
    protocol: &Protocol,
    a: &UnitVector,
    b: &UnitVector,
    trials: u64,
    seed: u64,
) -> Result<SimulateSummary> {
    let report = simulate(protocol, &[(a.clone(), b.clone())], trials, seed)?;
    let pair = &report.pairs[0];
    let (alpha_plus, beta_plus) = pair.marginals();
    let rho = pair.rho.clamp(-1.0, 1.0);
    Ok(SimulateSummary {
        protocol: report.protocol.clone(),
        n: a.dim(),
        rho,
        target: analytic(protocol, rho)?,
        mean: pair.estimate.mean,
        stderr: pair.estimate.stderr,
        trials,
        seed,
        mean_bits: report.mean_bits,
        max_bits: report.max_bits,
        alpha_plus,
        beta_plus,
        truncation: protocol.embedding().map(|e| e.truncation()),
        tail_mass: protocol.embedding().map(|e| e.tail_mass()),
        transcripts: report.transcripts,
    })
}

// --------------------------------------------------------------------------
// quantum instances

type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// A quantum instance on `C^d ⊗ C^d`; complex entries are `[re, im]`,
/// matrices are lists of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub d: usize,
    pub rho: JsonMatrix,
    #[serde(rename = "A")]
    pub a: JsonMatrix,
    #[serde(rename = "B")]
    pub b: JsonMatrix,
}

fn to_json_matrix(m: &DMatrix<Complex64>) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn from_json_matrix(m: &JsonMatrix, size: usize, field: &str) -> Result<DMatrix<Complex64>> {
    if m.len() != size {
        return Err(Error::InvalidInput {
            field: field.into(),
            reason: format!("expected {size} rows, found {}", m.len()),
        });
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != size {
            return Err(Error::InvalidInput {
                field: format!("{field}[{i}]"),
                reason: format!("expected {size} entries, found {}", row.len()),
            });
        }
    }
    Ok(DMatrix::from_fn(size, size, |i, j| {
        Complex64::new(m[i][j][0], m[i][j][1])
    }))
}

impl InstanceFile {
    pub fn from_instance(rho: &DensityMatrix, a: &Observable, b: &Observable) -> InstanceFile {
        InstanceFile {
            d: rho.local_dim(),
            rho: to_json_matrix(rho.matrix()),
            a: to_json_matrix(a.matrix()),
            b: to_json_matrix(b.matrix()),
        }
    }

    pub fn parse(text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput {
            field: "instance".into(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<InstanceFile> {
        InstanceFile::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_instance(&self) -> Result<(DensityMatrix, Observable, Observable)> {
        let field = |name: &str, e: Error| match e {
            Error::InvalidInput { reason, .. } => Error::InvalidInput {
                field: name.into(),
                reason,
            },
            other => other,
        };
        let rho = DensityMatrix::new(from_json_matrix(&self.rho, self.d * self.d, "rho")?)
            .map_err(|e| field("rho", e))?;
        let a =
            Observable::new(from_json_matrix(&self.a, self.d, "A")?).map_err(|e| field("A", e))?;
        let b =
            Observable::new(from_json_matrix(&self.b, self.d, "B")?).map_err(|e| field("B", e))?;
        Ok((rho, a, b))
    }

    /// The EPR state with `A = Z`, `B = (Z+X)/√2`.
    pub fn chsh_default() -> InstanceFile {
        let inst = chsh_instance();
        InstanceFile::from_instance(&inst.rho, &inst.alice[0], &inst.bob[0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceOutput {
    pub d: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub expectation: f64,
    pub inner_product: f64,
    pub identity_error: f64,
    pub norm_error: f64,
    pub passed: bool,
}

pub fn reduce_instance(file: &InstanceFile) -> Result<ReduceOutput> {
    let (rho, a, b) = file.to_instance()?;
    let r = reduce_to_vectors(&rho, &a, &b)?;
    let inner = r.a.dot(&r.b);
    let norm = |v: &UnitVector| (v.dot(v).sqrt() - 1.0).abs();
    let identity_error = (inner - r.expectation).abs();
    let norm_error = norm(&r.a).max(norm(&r.b));
    Ok(ReduceOutput {
        d: file.d,
        a: r.a.as_slice().to_vec(),
        b: r.b.as_slice().to_vec(),
        expectation: r.expectation,
        inner_product: inner,
        identity_error,
        norm_error,
        passed: identity_error <= 1e-10 && norm_error <= 1e-10,
    })
}

// --------------------------------------------------------------------------
// chsh and experiments

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSummary {
    pub protocol: String,
    pub win_rate: f64,
    pub stderr: f64,
    pub classical_bound: f64,
    pub quantum_value: f64,
    pub per_input: [[f64; 2]; 2],
    pub tail_mass: Option<f64>,
    pub mean_bits: f64,
    pub max_bits: usize,
    pub trials: u64,
    pub seed: u64,
}

pub fn chsh_summary(protocol: &Protocol, trials: u64, seed: u64) -> Result<ChshSummary> {
    let r = chsh_game_value(protocol, trials, seed)?;
    Ok(ChshSummary {
        protocol: r.protocol,
        win_rate: r.win_rate,
        stderr: r.stderr,
        classical_bound: CLASSICAL_CHSH,
        quantum_value: QUANTUM_CHSH,
        per_input: r.per_input,
        tail_mass: protocol.embedding().map(|e| e.tail_mass()),
        mean_bits: r.report.mean_bits,
        max_bits: r.report.max_bits,
        trials,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnepsRow {
    pub epsilon: f64,
    pub analytic: f64,
    pub mc: f64,
    pub mc_stderr: f64,
    /// `analytic / (8ε/π)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnepsReport {
    pub k: usize,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<BnepsRow>,
    /// For k = 1: every ratio at ε ≤ 1e−3 lies in [0.99, 1.01].
    pub passed: bool,
}

pub fn bneps(k: usize, n: usize, eps: &[f64], trials: u64, seed: u64) -> Result<BnepsReport> {
    let protocol = Protocol::orthant(k)?;
    let rows = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let analytic = b_eps(|x| h_ort(k, x).unwrap_or(f64::NAN), e)?;
            let mut rng = trial_rng(derive_seed(seed, 4 * i as u64), 0);
            let near = sample_pair_with_rho(n, 1.0 - e, &mut rng)?;
            let far = sample_pair_with_rho(n, -1.0 + e, &mut rng)?;
            let r = simulate(
                &protocol,
                &[near, far],
                trials,
                derive_seed(seed, 4 * i as u64 + 1),
            )?;
            let (p, q) = (r.pairs[0].estimate, r.pairs[1].estimate);
            Ok(BnepsRow {
                epsilon: e,
                analytic,
                mc: 2.0 - p.mean + q.mean,
                mc_stderr: (p.stderr.powi(2) + q.stderr.powi(2)).sqrt(),
                ratio: analytic / (8.0 * e / std::f64::consts::PI),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().any(|r| !r.analytic.is_finite()) {
        return Err(Error::Unsupported(format!(
            "analytic correlation for k = {k}"
        )));
    }
    let passed = k != 1
        || rows
            .iter()
            .filter(|r| r.epsilon <= 1e-3)
            .all(|r| (0.99..=1.01).contains(&r.ratio));
    Ok(BnepsReport {
        k,
        n,
        trials,
        seed,
        rows,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptReport {
    pub protocol: String,
    pub trials: u64,
    pub seed: u64,
    pub max_frequency: f64,
    pub stderr: f64,
    pub bound: f64,
    pub transcripts: BTreeMap<String, u64>,
    pub passed: bool,
}

pub fn transcript_experiment(
    protocol: &Protocol,
    trials: u64,
    seed: u64,
) -> Result<TranscriptReport> {
    let r = chsh_game_value(protocol, trials, seed)?;
    let (max_frequency, stderr) = r.report.max_transcript_frequency();
    Ok(TranscriptReport {
        protocol: r.protocol,
        trials,
        seed,
        max_frequency,
        stderr,
        bound: transcript_bound(),
        transcripts: r.report.transcripts,
        passed: max_frequency <= transcript_bound() + 4.0 * stderr,
    })
}

// --------------------------------------------------------------------------
// dispatch

/// Output text plus the verdict of any checks the command made.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
    pub out: Option<PathBuf>,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let (text, passed, out) = match &cli.command {
        Command::Curve(a) => {
            let p = build_protocol(a.protocol.protocol, a.protocol.k, a.protocol.n)?;
            let rows = curve_rows(&p, a.protocol.n, a.points, a.mc.trials, a.mc.seed)?;
            let slack = p.declared_bias().unwrap_or(0.0);
            let ok = !a.check
                || rows
                    .iter()
                    .all(|r| (r.mc_mean - r.analytic).abs() <= 4.0 * r.mc_stderr + slack);
            (curve_csv(&rows), ok, &a.out)
        }
        Command::Series(a) => {
            let r = series_report(a.target, a.order)?;
            let text = if a.json { json(&r)? } else { r.to_text() };
            (text, r.passed, &a.out)
        }
        Command::Simulate(a) => {
            let p = build_protocol(a.protocol.protocol, a.protocol.k, a.protocol.n)?;
            let (x, y, p) = match (&a.instance, a.rho) {
                (Some(path), _) => {
                    let (rho, oa, ob) = InstanceFile::load(path)?.to_instance()?;
                    let r = reduce_to_vectors(&rho, &oa, &ob)?;
                    // only inner products matter, so work in the span of the pair
                    let v = span_coordinates(&[r.a, r.b])?;
                    let n = v[0].dim();
                    let p = build_protocol(a.protocol.protocol, a.protocol.k, n)?;
                    (v[0].clone(), v[1].clone(), p)
                }
                (None, rho) => {
                    let rho = rho.unwrap_or(0.6);
                    let (x, y) = sample_pair_with_rho(
                        a.protocol.n,
                        rho,
                        &mut trial_rng(derive_seed(a.mc.seed, u64::MAX), 0),
                    )?;
                    (x, y, p)
                }
            };
            (
                json(&simulate_pair(&p, &x, &y, a.mc.trials, a.mc.seed)?)?,
                true,
                &a.out,
            )
        }
        Command::Chsh(a) => {
            let p = build_protocol(a.protocol, a.k, 2)?;
            (
                json(&chsh_summary(&p, a.mc.trials, a.mc.seed)?)?,
                true,
                &a.out,
            )
        }
        Command::Reduce(a) => {
            let file = match &a.instance {
                Some(path) => InstanceFile::load(path)?,
                None => InstanceFile::chsh_default(),
            };
            let r = reduce_instance(&file)?;
            (json(&r)?, r.passed, &a.out)
        }
        Command::Experiment(Experiment::Bneps(a)) => {
            let r = bneps(a.k, a.n, &a.eps, a.mc.trials, a.mc.seed)?;
            (json(&r)?, r.passed, &a.out)
        }
        Command::Experiment(Experiment::TranscriptBound(a)) => {
            let p = build_protocol(a.protocol, a.k, 2)?;
            let r = transcript_experiment(&p, a.mc.trials, a.mc.seed)?;
            (json(&r)?, r.passed, &a.out)
        }
    };
    Ok(Outcome {
        text,
        passed,
        out: out.out.clone(),
    })
}

/// Writes `text` to a sibling temporary file and renames it into place.
pub fn write_atomically(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 when every check passed, 1 when a check failed, 2 on errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let written = match &outcome.out {
                Some(path) => write_atomically(path, &outcome.text),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = curve_rows(&Protocol::orthant(1).unwrap(), 3, 5, 500, 9).unwrap();
        assert_eq!(rows[2].rho, 0.0);
        assert_eq!(rows[2].analytic, 0.0);
        let text = curve_csv(&rows);
        assert!(text.starts_with(CURVE_HEADER));
        assert_eq!(parse_curve_csv(&text).unwrap(), rows);
    }

    #[test]
    fn instance_round_trip_and_errors() {
        let f = InstanceFile::chsh_default();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(InstanceFile::parse(&text).unwrap(), f);
        let r = reduce_instance(&f).unwrap();
        assert!(r.passed);
        let mut bad = f.clone();
        bad.a[1].pop();
        match bad.to_instance().unwrap_err() {
            Error::InvalidInput { field, .. } => assert_eq!(field, "A[1]"),
            e => panic!("{e:?}"),
        }
        let mut bad = f;
        bad.b[0][0] = [2.0, 0.0];
        match bad.to_instance().unwrap_err() {
            Error::InvalidInput { field, .. } => assert_eq!(field, "B"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn bneps_ratio() {
        let r = bneps(1, 3, &[1e-3], 1000, 0).unwrap();
        assert!(r.passed, "{:?}", r.rows);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "corrsim",
            "simulate",
            "--protocol",
            "mixed-raw",
            "--rho",
            "-0.5",
        ])
        .unwrap();
        match cli.command {
            Command::Simulate(a) => {
                assert_eq!(a.rho, Some(-0.5));
                assert_eq!(a.mc.trials, 1_000_000);
                assert_eq!(a.protocol.n, 3);
            }
            _ => panic!(),
        }
    }
}
