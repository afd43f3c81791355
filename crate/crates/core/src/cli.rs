//! Command-line front end: tables of the evaluators and the verification suite.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::assocfn::{assoc_fn_counting_ln, assoc_fn_sup_ln};
use crate::conjugate::{phi_sigma, WeightFn};
use crate::error::{usage, Error, Result};
use crate::grid::{linear, log_spaced};
use crate::io::{fmt_f64, write_csv};
use crate::lambertw::lambert_w0_eval;
use crate::sequences::{quotient_bounds, LogWeightSequence, LogSequence, SequenceParams, EXHAUSTIVE_LIMIT};
use crate::verify::{run_suite, ClaimOutcome, SuiteConfig};

/// Environment variable naming the directory for relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "GEVREY_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gevrey", version, about = "Extended Gevrey sequences: evaluation tables and numerical verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal Lambert W: columns x, w, residual.
    Lambertw(RunArgs),
    /// log M_p for p = 0..=p-max: columns p, log_M.
    Sequence(RunArgs),
    /// log m_p with its closed-form bounds: columns p, log_m, lower, upper.
    Quotients(RunArgs),
    /// Associated function: columns k, T_sup, T_counting, argmax_p.
    Assocfn(RunArgs),
    /// phi_sigma: columns t, phi (the row t = e is always present).
    Phi(RunArgs),
    /// Young conjugate of phi_sigma: columns y, t_star, phi_star.
    Conjugate(RunArgs),
    /// Run the verification suite; exits 1 if any selected claim fails.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// `min:max:points_per_decade`; with `--linear` the third field is the
/// number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("expected min:max:points_per_decade, got {s:?}"));
        };
        let min: f64 = min.trim().parse().map_err(|e| format!("bad grid min {min:?}: {e}"))?;
        let max: f64 = max.trim().parse().map_err(|e| format!("bad grid max {max:?}: {e}"))?;
        let points: usize = points.trim().parse().map_err(|e| format!("bad points per decade {points:?}: {e}"))?;
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(format!("grid needs finite min < max, got {min}:{max}"));
        }
        if points < 4 {
            return Err(format!("grid needs at least 4 points per decade, got {points}"));
        }
        Ok(Self { min, max, points })
    }
}

impl GridSpec {
    /// Log-spaced points; a zero lower end contributes `0` followed by the
    /// log grid on `[1, max]`.
    pub fn points(&self, linear_spacing: bool) -> Result<Vec<f64>> {
        if linear_spacing {
            return linear(self.min, self.max, self.points);
        }
        if self.min < 0.0 {
            return Err(usage("log-spaced grid needs min >= 0"));
        }
        if self.min == 0.0 {
            if !(self.max > 1.0) {
                return Err(usage("log-spaced grid from 0 needs max > 1"));
            }
            let mut out = vec![0.0];
            out.extend(log_spaced(1.0, self.max, self.points)?);
            return Ok(out);
        }
        log_spaced(self.min, self.max, self.points)
    }
}

/// Shared flags.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    /// Exponent of the corollary weight.
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    /// Scale constant for the counting and integral checks (default e).
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Ratio in the liminf condition.
    #[arg(long = "Q", default_value_t = 3)]
    pub q: u64,
    /// Grid as min:max:points_per_decade.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// Use linear spacing; the third grid field is then the number of points.
    #[arg(long)]
    pub linear: bool,
    /// Largest index for sequence tables and condition checks.
    #[arg(long = "p-max")]
    pub p_max: Option<u64>,
    /// Comma-separated claim identifiers for `verify`.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; relative paths are resolved against $GEVREY_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A rendered table.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self, format: Format) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        match format {
            Format::Csv => write_csv(&mut out, &self.columns, &self.rows)?,
            Format::Json => {
                let rows: Vec<Vec<Value>> =
                    self.rows.iter().map(|r| r.iter().map(|&x| json_number(x)).collect()).collect();
                let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
                out = to_json(&doc)?;
            }
            Format::Text => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect()).collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|i| cells.iter().map(|r| r[i].len()).chain([self.columns[i].len()]).max().unwrap_or(0))
                    .collect();
                let line = |fields: Vec<&str>| {
                    fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect::<Vec<_>>().join("  ") + "\n"
                };
                out.extend(line(self.columns.clone()).into_bytes());
                for r in &cells {
                    out.extend(line(r.iter().map(String::as_str).collect()).into_bytes());
                }
            }
        }
        Ok(out)
    }
}

/// Non-finite values become JSON `null`.
fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn to_json(value: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| usage(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

fn grid_or(args: &RunArgs, default: &str) -> Result<Vec<f64>> {
    let spec = match args.grid {
        Some(g) => g,
        None => default.parse().map_err(usage)?,
    };
    spec.points(args.linear)
}

fn p_indices(p_max: u64) -> Vec<u64> {
    if p_max <= EXHAUSTIVE_LIMIT {
        (0..=p_max).collect()
    } else {
        std::iter::once(0).chain(crate::grid::p_grid(p_max)).collect()
    }
}

fn table(command: &Command, args: &RunArgs) -> Result<Table> {
    let params = || SequenceParams::new(args.tau, args.sigma);
    Ok(match command {
        Command::Lambertw(_) => {
            let rows = grid_or(args, "0:700:8")?
                .into_iter()
                .map(|x| lambert_w0_eval(x).map(|e| vec![x, e.w, e.residual]))
                .collect::<Result<_>>()?;
            Table { columns: vec!["x", "w", "residual"], rows }
        }
        Command::Sequence(_) => {
            let seq = LogWeightSequence::ExtendedGevrey(params()?);
            let rows = p_indices(args.p_max.unwrap_or(100))
                .into_iter()
                .map(|p| seq.log_weight(p).map(|v| vec![p as f64, v]))
                .collect::<Result<_>>()?;
            Table { columns: vec!["p", "log_M"], rows }
        }
        Command::Quotients(_) => {
            let params = params()?;
            let seq = LogWeightSequence::ExtendedGevrey(params);
            let rows = p_indices(args.p_max.unwrap_or(100))
                .into_iter()
                .filter(|&p| p >= 1)
                .map(|p| {
                    let (lo, hi) = if p >= 2 { quotient_bounds(&params, p as f64) } else { (f64::NAN, f64::NAN) };
                    seq.log_quotient(p).map(|v| vec![p as f64, v, lo, hi])
                })
                .collect::<Result<_>>()?;
            Table { columns: vec!["p", "log_m", "lower", "upper"], rows }
        }
        Command::Assocfn(_) => {
            let params = params()?;
            if !(args.h > 0.0 && args.h.is_finite()) {
                return Err(Error::Domain(format!("h must be positive, got {}", args.h)));
            }
            let mut rows = Vec::new();
            for k in grid_or(args, "1:1e10:16")? {
                if !(k > 0.0) {
                    return Err(usage("assocfn grid needs k > 0"));
                }
                let t = assoc_fn_sup_ln(&params, args.h, k.ln());
                let tc = if args.h == 1.0 { assoc_fn_counting_ln(&params, k.ln()).value } else { f64::NAN };
                rows.push(vec![k, t.value, tc, t.argmax_p as f64]);
            }
            Table { columns: vec!["k", "T_sup", "T_counting", "argmax_p"], rows }
        }
        Command::Phi(_) => {
            let mut ts = grid_or(args, "0:100:32")?;
            let e = std::f64::consts::E;
            if !ts.contains(&e) {
                ts.push(e);
                ts.sort_by(f64::total_cmp);
            }
            let rows = ts.into_iter().map(|t| phi_sigma(args.sigma, t).map(|v| vec![t, v])).collect::<Result<_>>()?;
            Table { columns: vec!["t", "phi"], rows }
        }
        Command::Conjugate(_) => {
            let phi = WeightFn::phi_sigma(args.sigma)?.log_composition();
            let table = phi.conjugate_table(&grid_or(args, "0:100:16")?)?;
            let rows = table.rows.iter().map(|r| vec![r.y, r.t_star, r.value]).collect();
            Table { columns: vec!["y", "t_star", "phi_star"], rows }
        }
        Command::Verify(_) => unreachable!("verify is not a table"),
    })
}

fn suite_config(args: &RunArgs) -> SuiteConfig {
    let defaults = SuiteConfig::default();
    SuiteConfig {
        tau: args.tau,
        sigma: args.sigma,
        h: args.h,
        s: args.s,
        c: args.c.unwrap_or(defaults.c),
        q: args.q,
        p_max: args.p_max.unwrap_or(defaults.p_max),
        p_max_norme: args.p_max.map_or(defaults.p_max_norme, |p| p.min(defaults.p_max_norme)),
    }
}

fn summary(results: &BTreeMap<String, ClaimOutcome>) -> String {
    let width = results.keys().map(String::len).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  result\n", "claim");
    for (id, r) in results {
        out.push_str(&format!("{id:<width$}  {}\n", if r.holds { "pass" } else { "FAIL" }));
    }
    out
}

fn emit(args: &RunArgs, bytes: &[u8]) -> Result<()> {
    let io_err = |e: io::Error| usage(format!("cannot write output: {e}"));
    match &args.output {
        Some(path) => {
            let path = match std::env::var_os(OUTPUT_DIR_ENV) {
                Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                _ => path.clone(),
            };
            File::create(&path).and_then(|mut f| f.write_all(bytes)).map_err(io_err)
        }
        None => io::stdout().write_all(bytes).map_err(io_err),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let (command, args) = match &cli.command {
        c @ (Command::Lambertw(a)
        | Command::Sequence(a)
        | Command::Quotients(a)
        | Command::Assocfn(a)
        | Command::Phi(a)
        | Command::Conjugate(a)
        | Command::Verify(a)) => (c, a),
    };
    if let Command::Verify(_) = command {
        let results = run_suite(args.only.as_deref(), &suite_config(args))?;
        let format = args.format.unwrap_or(Format::Json);
        let table = summary(&results);
        match format {
            Format::Json => {
                emit(args, &to_json(&results)?)?;
                eprint!("{table}");
            }
            Format::Text => emit(args, table.as_bytes())?,
            Format::Csv => {
                let mut out = b"claim,holds\n".to_vec();
                for (id, r) in &results {
                    out.extend(format!("{id},{}\n", r.holds).into_bytes());
                }
                emit(args, &out)?;
            }
        }
        let failed: Vec<&str> = results.iter().filter(|(_, r)| !r.holds).map(|(id, _)| id.as_str()).collect();
        if failed.is_empty() {
            return Ok(EXIT_OK);
        }
        eprintln!("failed claims: {}", failed.join(", "));
        return Ok(EXIT_CLAIM_FAILED);
    }
    let bytes = table(command, args)?.render(args.format.unwrap_or(Format::Csv))?;
    emit(args, &bytes)?;
    Ok(EXIT_OK)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Range(_) | Error::Usage(_) => EXIT_USAGE,
        Error::Numerical(_) | Error::Divergence { .. } => EXIT_NUMERICAL,
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gevrey: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parsing() {
        let g: GridSpec = "1:1e10:16".parse().unwrap();
        assert_eq!(g, GridSpec { min: 1.0, max: 1e10, points: 16 });
        assert!("1:1e10".parse::<GridSpec>().is_err());
        assert!("5:1:8".parse::<GridSpec>().is_err());
        assert!("1:10:3".parse::<GridSpec>().is_err());
        let pts = "0:700:8".parse::<GridSpec>().unwrap().points(false).unwrap();
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[1], 1.0);
        assert_eq!(*pts.last().unwrap(), 700.0);
        assert_eq!("0:1:5".parse::<GridSpec>().unwrap().points(true).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn phi_table_contains_e_row() {
        let cli = Cli::try_parse_from(["gevrey", "phi", "--sigma", "2", "--grid", "0:100:32"]).unwrap();
        let Command::Phi(args) = &cli.command else { panic!() };
        let t = table(&cli.command, args).unwrap();
        let row = t.rows.iter().find(|r| r[0] == std::f64::consts::E).unwrap();
        assert!((row[1] - std::f64::consts::E.powi(2)).abs() < 1e-14);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["gevrey", "phi", "--sigma", "1"]), EXIT_USAGE);
        assert_eq!(run(["gevrey", "phi", "--grid", "bad"]), EXIT_USAGE);
        assert_eq!(run(["gevrey", "verify", "--only", "nope"]), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Divergence { cap: 1.0 }), EXIT_NUMERICAL);
    }
}
