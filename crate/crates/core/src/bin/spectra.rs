//! `spectra` command-line tool.
//!
//! Exit status: 0 on success, 1 when a verification fails or the input is
//! mathematically unusable (e.g. reducible), 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use spectra::capacity::{normalized_capacity, NORMALIZED_LIMIT};
use spectra::constructions::{
    approx_trace_counterexample, beyond_half, chet, chet_scan, debruijn, debruijn_nonexpanding_set, klawe_vazirani,
    rootn, trace_conjecture_search,
};
use spectra::core::{balanced, is_irreducible, perron};
use spectra::expansion::{gamma, mu_expansion, phi_best, phi_interval_scan, phi_witness, ExpansionReport, Method, EXACT_LIMIT};
use spectra::io::{chet_csv, default_digits, matrix_to_string, precision_label, read_matrix, records_csv, round12, MatrixFormat, DIGITS_ENV};
use spectra::mixing::mixing_report;
use spectra::spectra::{lambda2, singular_values, spectral_gap, spectrum, EXACT_ROOTS_LIMIT};
use spectra::verify::{run_suite, Suite};
use spectra::{Error, Matrix, PerronData, PrecisionConfig};

#[derive(Parser)]
#[command(name = "spectra", version, about = "Edge expansion, spectra, mixing and capacity of nonnegative matrices")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every randomized command.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a named matrix family and write it out.
    Construct {
        family: Family,
        /// Family parameter: n for rootn, chet and approx-trace; k for debruijn; p for kv.
        param: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// json, rational-json, decimal-json or csv.
        #[arg(long)]
        format: Option<String>,
        /// Decimal digits for chet.
        #[arg(long, env = DIGITS_ENV)]
        digits: Option<u32>,
    },
    /// Report requested quantities of a matrix file as JSON.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        phi: bool,
        #[arg(long)]
        delta: bool,
        #[arg(long)]
        gamma: bool,
        /// Measure the mixing time at this accuracy and evaluate every bound family.
        #[arg(long, value_name = "EPS")]
        mixing: Option<f64>,
        /// Singular values, and the normalized capacity of the balanced form for small n.
        #[arg(long)]
        sigma: bool,
        #[arg(long)]
        mu: bool,
        /// Full eigenvalue and singular value lists.
        #[arg(long)]
        spectrum: bool,
        /// Largest n for exhaustive cut enumeration.
        #[arg(long, default_value_t = EXACT_LIMIT)]
        limit: usize,
    },
    /// Run a seeded randomized verification suite.
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Parameter scans written as CSV.
    Scan {
        #[command(subcommand)]
        target: ScanTarget,
    },
    /// Tables and spectra for plotting.
    Export {
        #[command(subcommand)]
        what: ExportTarget,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rootn,
    Chet,
    Debruijn,
    Kv,
    BeyondHalf,
    ApproxTrace,
}

#[derive(Subcommand)]
enum ScanTarget {
    /// Smallest Chet coefficients for every n in `lo..=hi`.
    Chet {
        lo: usize,
        hi: usize,
        #[arg(long, env = DIGITS_ENV)]
        digits: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random banded matrices against the trace conjecture.
    TraceConjecture {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExportTarget {
    /// Chet coefficients `i, c_i, b_i`.
    Chet {
        n: usize,
        #[arg(long, env = DIGITS_ENV)]
        digits: Option<u32>,
        /// Digits after the decimal point.
        #[arg(long, default_value_t = 30)]
        places: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues, singular values and gap of a matrix file as JSON.
    Spectrum {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-encode a matrix file.
    Matrix {
        file: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

/// Parameter, I/O and parse problems are the caller's to fix; everything else is a
/// property of the input.
fn classify(e: Error) -> Failure {
    match e {
        Error::NotPerfectSquare(_) | Error::NotPrime(_) | Error::OutOfRange(_) | Error::Parse(_) | Error::Io(_) => {
            Failure::Usage(e.to_string())
        }
        _ => Failure::Check(e.to_string()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn lib<T>(r: spectra::Result<T>) -> CliResult<T> {
    r.map_err(classify)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let (Failure::Usage(m) | Failure::Check(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.cmd {
        Cmd::Construct { family, param, out, format, digits } => construct(family, param, out.as_deref(), format, digits),
        Cmd::Analyze { file, phi, delta, gamma, mixing, sigma, mu, spectrum, limit } => {
            let opts = AnalyzeOpts { phi, delta, gamma, mixing, sigma, mu, spectrum, limit };
            analyze(&file, opts)
        }
        Cmd::Verify { suite, trials, json } => verify(&suite, trials, cli.seed, json),
        Cmd::Scan { target } => scan(target, cli.seed),
        Cmd::Export { what } => export(what),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn decimal_cfg(digits: Option<u32>) -> CliResult<PrecisionConfig> {
    lib(PrecisionConfig::decimal(digits.unwrap_or_else(default_digits)))
}

fn need(param: Option<usize>, what: &str) -> CliResult<usize> {
    param.ok_or_else(|| Failure::Usage(format!("missing parameter {what}")))
}

/// Rounds every float in a JSON tree to 12 significant digits.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map_or(Value::Number(n), |x| json!(round12(x))),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| Failure::Check(e.to_string()))
}

fn construct(family: Family, param: Option<usize>, out: Option<&Path>, format: Option<String>, digits: Option<u32>) -> CliResult<u8> {
    let (m, witness): (Matrix, Option<Vec<usize>>) = match family {
        Family::Rootn => (lib(rootn(need(param, "n")?))?, Some(vec![0])),
        Family::Chet => {
            let n = need(param, "n")?;
            (lib(chet(n, &decimal_cfg(digits)?))?.0, None)
        }
        Family::Debruijn => {
            let k = u32::try_from(need(param, "k")?).map_err(|_| Failure::Usage("k too large".into()))?;
            (lib(debruijn(k))?, Some(lib(debruijn_nonexpanding_set(k))?))
        }
        Family::Kv => (lib(klawe_vazirani(need(param, "p")?))?, None),
        Family::BeyondHalf => (beyond_half(), None),
        Family::ApproxTrace => (lib(approx_trace_counterexample(need(param, "n")?))?.0, None),
    };
    let format: MatrixFormat = lib(format.as_deref().unwrap_or("json").parse())?;
    let text = lib(matrix_to_string(&m, format))?;
    let summary = summary_line(&m, witness)?;
    match out {
        Some(p) => {
            emit(Some(p), &text)?;
            println!("{summary}");
        }
        None => {
            emit(None, &text)?;
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

fn summary_line(m: &Matrix, witness: Option<Vec<usize>>) -> CliResult<String> {
    let n = m.n();
    let ds = if m.is_doubly_stochastic(1e-12) { "yes" } else { "no" };
    let l2 = lib(lambda2(m))?;
    let pd = PerronData::uniform(n);
    let phi = match witness {
        Some(s) => lib(phi_witness(&m.to_machine(), &pd, &s))?,
        None if n <= 16 => lib(phi_best(m, &lib(perron(m, &PrecisionConfig::machine()))?, 16))?,
        None => lib(phi_interval_scan(&m.to_machine(), &lib(perron(m, &PrecisionConfig::machine()))?))?,
    };
    let relation = if phi.method == Method::Exact { "=" } else { "<=" };
    Ok(format!(
        "n={n} precision={} doubly_stochastic={ds} lambda2={}{:+}i phi{relation}{} witness={:?}",
        precision_label(m),
        round12(l2.re),
        round12(l2.im),
        round12(phi.phi),
        phi.argmin.members
    ))
}

struct AnalyzeOpts {
    phi: bool,
    delta: bool,
    gamma: bool,
    mixing: Option<f64>,
    sigma: bool,
    mu: bool,
    spectrum: bool,
    limit: usize,
}

fn phi_json(rep: &ExpansionReport) -> Value {
    let kind = if rep.method == Method::Exact { "exact" } else { "upper-bound" };
    json!({
        "value": rep.phi,
        "method": rep.method,
        "provenance": kind,
        "witness": rep.argmin.members,
        "cuts_examined": rep.cuts_examined,
    })
}

fn analyze(file: &Path, mut o: AnalyzeOpts) -> CliResult<u8> {
    let m = read_matrix(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    if !m.is_nonnegative() || !is_irreducible(&m) {
        return Err(Failure::Check(Error::NotIrreducible.to_string()));
    }
    if !(o.phi || o.delta || o.gamma || o.mixing.is_some() || o.sigma || o.mu || o.spectrum) {
        o.phi = true;
        o.delta = true;
    }
    let n = m.n();
    let pd = lib(perron(&m, &PrecisionConfig::machine()))?;
    let mut rep = Map::new();
    rep.insert("file".into(), json!(file.display().to_string()));
    rep.insert("n".into(), json!(n));
    rep.insert("precision".into(), json!(precision_label(&m)));
    rep.insert("perron_value".into(), json!(pd.r));
    let eig_method = if m.rational().is_some() && n <= EXACT_ROOTS_LIMIT { "exact-characteristic-polynomial" } else { "numeric" };
    if o.phi {
        rep.insert("phi".into(), phi_json(&lib(phi_best(&m, &pd, o.limit))?));
    }
    if o.delta {
        let d = lib(spectral_gap(&m))?;
        rep.insert("delta".into(), json!({"value": d, "method": eig_method, "provenance": "exact"}));
    }
    if o.gamma {
        let g = lib(gamma(&m, o.limit))?;
        let kind = if g.exact { "exact" } else { "upper-bound" };
        rep.insert(
            "gamma".into(),
            json!({"value": g.gamma, "re_lambda2": g.re_lambda2, "phi": phi_json(&g.phi), "provenance": kind}),
        );
    }
    if let Some(eps) = o.mixing {
        let mix = lib(mixing_report(&m, &pd, eps))?;
        let mut v = to_json(&mix)?;
        v["provenance"] = json!("measured tau with bound intervals");
        rep.insert("mixing".into(), v);
    }
    if o.sigma {
        let (a, bpd) = lib(balanced(&m, &PrecisionConfig::machine()))?;
        let sv = singular_values(a.values());
        let mut v = json!({
            "singular_values_balanced": sv,
            "sigma2": sv.get(1).copied().unwrap_or(0.0),
            "method": "svd of the balanced matrix",
        });
        if n <= NORMALIZED_LIMIT {
            let nc = lib(normalized_capacity(&a, &bpd.w(), NORMALIZED_LIMIT))?;
            v["normalized_capacity"] = json!({
                "value": nc.sigma, "s": nc.s, "t": nc.t, "min_restricted_phi": nc.phi_min,
                "provenance": "exact enumeration",
            });
        }
        rep.insert("sigma".into(), v);
    }
    if o.mu {
        let v = if m.is_doubly_stochastic(1e-9) {
            let mu = lib(mu_expansion(&m, 30))?;
            json!({"value": mu.mu, "argmax": mu.argmax, "provenance": "exact"})
        } else {
            json!({"skipped": "mu is defined for doubly stochastic matrices"})
        };
        rep.insert("mu".into(), v);
    }
    if o.spectrum {
        let s = lib(spectrum(&m))?;
        rep.insert("spectrum".into(), to_json(&s.to_json(None))?);
    }
    let text = serde_json::to_string_pretty(&round_json(Value::Object(rep))).map_err(|e| Failure::Check(e.to_string()))?;
    println!("{text}");
    Ok(0)
}

fn verify(suite: &str, trials: Option<usize>, seed: u64, as_json: bool) -> CliResult<u8> {
    let suite: Suite = lib(suite.parse())?;
    let trials = trials.unwrap_or(suite.default_trials());
    let rep = lib(run_suite(suite, trials, seed))?;
    if as_json {
        let text = serde_json::to_string_pretty(&round_json(to_json(&rep)?)).map_err(|e| Failure::Check(e.to_string()))?;
        println!("{text}");
    } else {
        println!("suite {} seed {} trials {}", rep.suite, rep.seed, rep.trials);
        for c in &rep.checks {
            let slack = c.worst_slack.map_or("n/a".to_string(), |s| format!("{:.3e}", s));
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            println!("{verdict} {} ({} evaluations, worst slack {slack})", c.name, c.evaluations);
            for f in &c.failures {
                println!("    {f}");
            }
        }
        println!("{}", if rep.passed { "all checks passed" } else { "some checks failed" });
    }
    Ok(if rep.passed { 0 } else { 1 })
}

fn scan(target: ScanTarget, seed: u64) -> CliResult<u8> {
    match target {
        ScanTarget::Chet { lo, hi, digits, out } => {
            let rows = lib(chet_scan(lo, hi, &decimal_cfg(digits)?))?;
            emit(out.as_deref(), &lib(records_csv(&rows))?)?;
            let bad: Vec<usize> = rows.iter().filter(|r| !r.nonnegative()).map(|r| r.n).collect();
            if bad.is_empty() {
                eprintln!("all {} matrices nonnegative", rows.len());
                Ok(0)
            } else {
                eprintln!("not confirmed nonnegative for n = {bad:?}");
                Ok(1)
            }
        }
        ScanTarget::TraceConjecture { k, n, trials, symmetric, out } => {
            let rep = lib(trace_conjecture_search(k, n, trials, seed, symmetric))?;
            if let Some(p) = out.as_deref() {
                emit(Some(p), &lib(records_csv(&rep.outcomes))?)?;
            }
            let text = serde_json::to_string_pretty(&round_json(to_json(&rep)?)).map_err(|e| Failure::Check(e.to_string()))?;
            println!("{text}");
            Ok(if rep.violations.is_empty() { 0 } else { 1 })
        }
    }
}

fn export(what: ExportTarget) -> CliResult<u8> {
    match what {
        ExportTarget::Chet { n, digits, places, out } => {
            let (_, data) = lib(chet(n, &decimal_cfg(digits)?))?;
            emit(out.as_deref(), &chet_csv(&data, places))?;
        }
        ExportTarget::Spectrum { file, out } => {
            let m = read_matrix(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let s = lib(spectrum(&m))?;
            let delta = spectral_gap(&m).ok();
            let text = serde_json::to_string_pretty(&s.to_json(delta)).map_err(|e| Failure::Check(e.to_string()))?;
            emit(out.as_deref(), &text)?;
        }
        ExportTarget::Matrix { file, format, out } => {
            let m = read_matrix(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let format: MatrixFormat = lib(format.parse())?;
            emit(out.as_deref(), &lib(matrix_to_string(&m, format))?)?;
        }
    }
    Ok(0)
}
