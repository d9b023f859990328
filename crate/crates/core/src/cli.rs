//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 selftest
//! failure.

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::montecarlo::{simulate_decoding, SimOptions, TrialStats};
use crate::probability::{report, Entry, ProbParams, ProbReport, TableRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bdlrpc", version, about = "BD-LRPC decoding: bounds, tables and Monte Carlo simulation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the generation timestamp so output is byte-reproducible
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every probability formula and failure bound at one parameter point
    Bounds {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        r: usize,
    },
    /// Columns r, P_1, B_2, P_{r(d-1)} rounded to 5 decimals
    Table {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        /// Inclusive range a..b
        #[arg(long, value_parser = parse_range, default_value = "1..5")]
        r_range: RangeInclusive<usize>,
    },
    /// Monte Carlo decoding runs
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, conflicts_with = "r_range", required_unless_present = "r_range")]
        r: Option<usize>,
        /// Inclusive range a..b, one run per r
        #[arg(long, value_parser = parse_range)]
        r_range: Option<RangeInclusive<usize>>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, env = "BDLRPC_SEED", default_value_t = 1)]
        seed: u64,
        /// 0 = all cores, 1 = sequential
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Run outside the decoding radius
        #[arg(long)]
        force: bool,
        /// Check the sufficient decoding conditions per trial
        #[arg(long)]
        diagnose: bool,
        /// Sample a fresh parity-check matrix per trial
        #[arg(long)]
        resample_code: bool,
    },
    /// Failure bounds D_New, D_FL, D_G over a range of error ranks
    Curve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_parser = parse_range, default_value = "0..10")]
        r_range: RangeInclusive<usize>,
    },
    /// Fast consistency checks
    Selftest,
}

#[derive(Args, Debug, Clone, Copy)]
struct ParamArgs {
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long, default_value_t = 37)]
    m: usize,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
}

impl ParamArgs {
    fn with_r(&self, r: usize) -> ProbParams {
        ProbParams { q: self.q, m: self.m, n: self.n, k: self.k, d: self.d, t: self.t, r }
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut buf = Vec::new();
    let status = match execute(&cli, &mut buf) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_RUNTIME;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &buf),
        None => stdout.write_all(&buf),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_RUNTIME;
    }
    status
}

fn execute(cli: &Cli, out: &mut Vec<u8>) -> Result<i32, Failure> {
    match &cli.command {
        Command::Bounds { params, r } => {
            let rep = report(&params.with_r(*r))?;
            let config = json!({"command": "bounds", "params": params.with_r(*r)});
            match cli.format {
                Format::Json => emit_json(cli, out, config, serde_json::to_value(&rep).expect("report serialises"))?,
                Format::Csv => emit_csv(cli, out, &config, &ProbReport::CSV_HEADER, [rep.csv_row()])?,
            }
        }
        Command::Table { q, n, k, d, r_range } => {
            let base = ProbParams { q: *q, m: 1, n: *n, k: *k, d: *d, t: 2, r: 0 };
            base.validate()?;
            let rows: Vec<TableRow> = r_range.clone().map(|r| TableRow::new(*q, *n, *k, *d, r)).collect();
            let config = json!({"command": "table", "q": q, "n": n, "k": k, "d": d,
                "r_range": [r_range.start(), r_range.end()]});
            match cli.format {
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|row| {
                            let c = row.csv_row();
                            json!({"r": row.r, "P_1": c[1], "B_2": c[2], "P_{r(d-1)}": c[3],
                                "entries": {"P_1": row.p1, "B_2": row.b2, "P_{r(d-1)}": row.p_opt}})
                        })
                        .collect();
                    emit_json(cli, out, config, Value::Array(rows))?
                }
                Format::Csv => emit_csv(cli, out, &config, &TableRow::CSV_HEADER, rows.iter().map(TableRow::csv_row))?,
            }
        }
        Command::Curve { params, r_range } => {
            params.with_r(0).validate()?;
            let reports = r_range.clone().map(|r| report(&params.with_r(r))).collect::<Result<Vec<_>, _>>()?;
            let config = json!({"command": "curve", "params": params.with_r(0),
                "r_range": [r_range.start(), r_range.end()]});
            match cli.format {
                Format::Json => {
                    let rows: Vec<Value> = reports
                        .iter()
                        .map(|rep| {
                            json!({"r": rep.params.r, "pt": rep.pt, "d_new": rep.d_new, "d_fl": rep.d_fl,
                                "d_g": rep.d_g, "new_below_fl_exact": rep.new_below_fl_exact})
                        })
                        .collect();
                    emit_json(cli, out, config, Value::Array(rows))?
                }
                Format::Csv => emit_csv(cli, out, &config, &curve_header(), reports.iter().map(curve_row))?,
            }
        }
        Command::Simulate { params, r, r_range, trials, seed, workers, force, diagnose, resample_code } => {
            let ranks: Vec<usize> = match (r, r_range) {
                (Some(r), _) => vec![*r],
                (None, Some(range)) => range.clone().collect(),
                (None, None) => unreachable!("clap requires --r or --r-range"),
            };
            let opts = SimOptions { workers: *workers, force: *force, diagnose: *diagnose, resample_code: *resample_code };
            let stats = ranks
                .iter()
                .map(|&r| simulate_decoding(&params.with_r(r), *trials, *seed, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let config = json!({"command": "simulate", "params": params.with_r(ranks[0]), "ranks": ranks,
                "trials": trials, "seed": seed, "workers": workers, "force": force, "diagnose": diagnose,
                "resample_code": resample_code});
            match cli.format {
                Format::Json => emit_json(cli, out, config, serde_json::to_value(&stats).expect("stats serialise"))?,
                Format::Csv => emit_csv(cli, out, &config, &TrialStats::CSV_HEADER, stats.iter().map(TrialStats::csv_row))?,
            }
        }
        Command::Selftest => {
            let results = selftest();
            let mut all = true;
            for (name, ok) in &results {
                all &= ok;
                writeln!(out, "{} {name}", if *ok { "PASS" } else { "FAIL" })?;
            }
            writeln!(out, "{}/{} checks passed", results.iter().filter(|r| r.1).count(), results.len())?;
            return Ok(if all { EXIT_OK } else { EXIT_SELFTEST });
        }
    }
    Ok(EXIT_OK)
}

fn full_config(cli: &Cli, config: &Value) -> Value {
    let mut c = config.clone();
    c["format"] = json!(cli.format);
    c["version"] = json!(env!("CARGO_PKG_VERSION"));
    c
}

fn timestamp() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn emit_json(cli: &Cli, out: &mut Vec<u8>, config: Value, results: Value) -> Result<(), Failure> {
    let mut doc = json!({"config": full_config(cli, &config), "results": results});
    if !cli.no_timestamp {
        doc["generated_at"] = json!(timestamp());
    }
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| Failure::Runtime(e.to_string()))?;
    out.push(b'\n');
    Ok(())
}

/// CSV preceded by `#`-prefixed header lines carrying the resolved config.
fn emit_csv<H, R, S>(cli: &Cli, out: &mut Vec<u8>, config: &Value, header: &[H], rows: R) -> Result<(), Failure>
where
    H: AsRef<[u8]>,
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    writeln!(out, "# config: {}", full_config(cli, config))?;
    if !cli.no_timestamp {
        writeln!(out, "# generated_at: {}", timestamp())?;
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

const CURVE_COLUMNS: [&str; 4] = ["pt", "d_new", "d_fl", "d_g"];

fn curve_header() -> Vec<String> {
    let mut h = vec!["r".to_string()];
    for c in CURVE_COLUMNS {
        for suffix in ["", "_log10", "_log10_complement", "_status"] {
            h.push(format!("{c}{suffix}"));
        }
    }
    h.push("pt_source".into());
    h.push("new_below_fl_exact".into());
    h
}

fn curve_row(rep: &ProbReport) -> Vec<String> {
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
    let mut row = vec![rep.params.r.to_string()];
    for e in [&rep.pt.value, &rep.d_new, &rep.d_fl, &rep.d_g] {
        row.push(opt(e.value));
        row.push(opt(e.log10_value));
        row.push(opt(e.log10_complement));
        row.push(status_label(e));
    }
    row.push(rep.pt.source.map_or(String::new(), |s| json!(s).as_str().unwrap_or_default().to_owned()));
    row.push(rep.new_below_fl_exact.map_or(String::new(), |b| b.to_string()));
    row
}

fn status_label(e: &Entry) -> String {
    json!(e.status).as_str().unwrap_or_default().to_owned()
}

/// Table values, field identities, exact bound comparisons and a short
/// decoding run.
pub fn selftest() -> Vec<(&'static str, bool)> {
    use crate::code::{add_words, sample_error, CodeInstance, CodeParams, Requirements};
    use crate::decoder::{decode, DecoderConfig};
    use crate::field::Field;
    use crate::probability::{exact, gaussian_binomial};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use std::cmp::Ordering;

    let mut out = Vec::new();
    let table = [
        ["1", "0.99953", "0.99991", "0.99995"],
        ["2", "0.98447", "0.99982", "0.99986"],
        ["3", "0.57759", "0.99957", "0.99968"],
        ["4", "0.00000", "0.99536", "0.99931"],
        ["5", "0.00000", "0.74854", "0.99858"],
    ];
    out.push((
        "table q=2 n=32 k=16 d=5",
        table.iter().enumerate().all(|(i, want)| TableRow::new(2, 32, 16, 5, i + 1).csv_row() == want),
    ));
    out.push(("field F_8 modulus x^3+x+1", Field::new(2, 3).is_ok_and(|f| f.modulus() == [1, 1, 0, 1])));
    out.push((
        "alpha^4 = alpha^2 + alpha in F_8",
        Field::new(2, 3).is_ok_and(|f| f.alpha_power(4) == f.add(&f.alpha_power(2), &f.alpha())),
    ));
    out.push(("gaussian binomial [4 2]_2 = 35", gaussian_binomial(4, 2, 2) == BigUint::from(35u32)));
    let fig = |r| ProbParams { q: 2, m: 37, n: 32, k: 16, d: 2, t: 2, r };
    out.push((
        "zero errors: failure bounds 0",
        report(&fig(0)).is_ok_and(|rep| rep.d_new.value == Some(0.0) && rep.d_fl.value == Some(0.0)),
    ));
    out.push((
        "exact D_New < D_FL for r = 6..10",
        (6..=10).all(|r| exact::compare_new_fl(&fig(r)) == Some(Ordering::Less)),
    ));
    let decode_ok = (|| -> crate::error::Result<bool> {
        let f = Field::new(2, 24)?;
        let p = CodeParams::new(2, 24, 20, 10, 2)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let code = CodeInstance::sample(&f, p, Requirements::both(), &mut rng)?;
        let cfg = DecoderConfig::new(2)?;
        let mut ok = 0;
        for _ in 0..20 {
            let c = code.random_codeword(&mut rng);
            let e = sample_error(&f, 20, 2, &mut rng)?;
            if matches!(decode(&code, &add_words(&f, &c, &e), &cfg)?,
                crate::decoder::DecodeOutcome::Success { codeword, .. } if codeword == c)
            {
                ok += 1;
            }
        }
        Ok(ok >= 18)
    })();
    out.push(("decode 20 rank-2 errors", decode_ok.unwrap_or(false)));
    out
}
