//! `oseen`: bounds, sweeps and the verification registry from the command line.
//!
//! Rows go to stdout, diagnostics to stderr. Exit codes: 0 success, 1
//! computation failure, 2 usage error.

use std::f64::consts::PI;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use oseen_core::analysis::{
    self, FitResult, GridPolicy, Quantity, ScanConfig, SweepPoint,
};
use oseen_core::discretization::ModeSpec;
use oseen_core::verify::{self, CheckReport, Suite, VerifyConfig};
use oseen_core::Error;

const CSV_HEADER: &str = "alpha,k,n,r_max,quantity,value,lambda_star,converged,elapsed_ms";
const VERIFY_HEADER: &str = "check_id,passed,measured,tolerance,samples";

#[derive(Parser)]
#[command(name = "oseen", version, about = "Spectral and pseudospectral bounds for the linearized Oseen vortex")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral lower bound Σ(α,k).
    Spectrum(ModeArgs),
    /// Pseudospectral bound Ψ(α,k) from the λ scan.
    Pseudo {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 64)]
        lambda_points: usize,
        #[arg(long, default_value_t = 1e-3)]
        refine_tol: f64,
    },
    /// One quantity over several α, with an optional power-law fit.
    Sweep {
        /// Comma-separated α values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alphas: Vec<f64>,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        k: i64,
        #[arg(long)]
        quantity: QuantityArg,
        /// Print the fitted slope as a final JSON line.
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Quasimode residual ratio ‖ℒ₁u‖/‖u‖ at β₁ = α/8π.
    Quasimode {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Runs the identity/inequality registry.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    k: i64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Base node count (automatic when omitted).
    #[arg(long)]
    n: Option<usize>,
    /// Truncation radius (automatic when omitted).
    #[arg(long)]
    rmax: Option<f64>,
    /// Relative tolerance of the grid-doubling check.
    #[arg(long, default_value_t = 1e-2)]
    tolerance: f64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Record wall-clock time in elapsed_ms (otherwise 0, keeping output reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Sigma,
    Psi,
    Range,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Sigma => Quantity::Sigma,
            QuantityArg::Psi => Quantity::Psi,
            QuantityArg::Range => Quantity::Range,
        }
    }
}

impl GridArgs {
    fn policy(&self) -> Result<GridPolicy, Error> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Usage("--tolerance must be positive".into()));
        }
        if let Some(r) = self.rmax {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Usage("--rmax must be positive".into()));
            }
        }
        Ok(GridPolicy { n: self.n, r_max: self.rmax, tolerance: self.tolerance, ..Default::default() })
    }
}

/// One output record; `lambda_star` is empty for Σ and the range bound.
struct Row {
    alpha: f64,
    k: i64,
    n: usize,
    r_max: f64,
    quantity: String,
    value: f64,
    lambda_star: Option<f64>,
    converged: bool,
    elapsed_ms: u128,
}

impl Row {
    fn from_point(p: &SweepPoint, timing: bool) -> Self {
        Row {
            alpha: p.alpha,
            k: p.k,
            n: p.grid.n(),
            r_max: p.grid.r_max(),
            quantity: p.quantity.tag().to_string(),
            value: p.value,
            lambda_star: p.lambda_star,
            converged: p.converged,
            elapsed_ms: if timing { p.elapsed.as_millis() } else { 0 },
        }
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            sig9(self.alpha),
            self.k,
            self.n,
            sig9(self.r_max),
            self.quantity,
            sig9(self.value),
            self.lambda_star.map(sig9).unwrap_or_default(),
            self.converged,
            self.elapsed_ms
        )
    }

    fn json(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "k": self.k,
            "n": self.n,
            "r_max": self.r_max,
            "quantity": self.quantity,
            "value": finite_or_null(self.value),
            "lambda_star": self.lambda_star,
            "converged": self.converged,
            "elapsed_ms": self.elapsed_ms as u64,
        })
    }
}

/// Nine significant digits, `%g` style, so that identical runs print
/// identical bytes.
fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.8e}");
        let (mant, e) = s.split_once('e').unwrap();
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Run metadata. β_k = αk/8π and ν_k = λ*/β_k are echoed per row so that the
/// α convention cannot be misread.
fn meta(rows: &[Row], policy: Option<&GridPolicy>) -> Value {
    let mut m = json!({ "version": env!("CARGO_PKG_VERSION") });
    if let Some(p) = policy {
        m["grid_policy"] = json!({
            "n": p.n,
            "r_max": p.r_max,
            "tolerance": p.tolerance,
            "max_doublings": p.max_doublings,
        });
    }
    let betas: Vec<f64> = rows.iter().map(|r| r.alpha * r.k as f64 / (8.0 * PI)).collect();
    let nus: Vec<Value> = rows
        .iter()
        .zip(&betas)
        .map(|(r, &b)| match r.lambda_star {
            Some(l) if b != 0.0 => json!(l / b),
            _ => Value::Null,
        })
        .collect();
    m["beta_k"] = json!(betas);
    m["nu_k"] = json!(nus);
    m
}

fn fit_json(fit: &FitResult, excluded: &[f64]) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "max_residual": fit.max_residual,
        "points": fit.points.len(),
        "excluded": excluded,
    })
}

fn emit_rows(rows: &[Row], format: Format, fit: Option<Value>, meta: Value) {
    match format {
        Format::Csv => {
            println!("{CSV_HEADER}");
            for r in rows {
                println!("{}", r.csv());
            }
            if let Some(f) = fit {
                println!("{}", json!({ "fit": f }));
            }
        }
        Format::Json => {
            let mut doc = json!({
                "rows": rows.iter().map(Row::json).collect::<Vec<_>>(),
                "meta": meta,
            });
            if let Some(f) = fit {
                doc["fit"] = f;
            }
            println!("{doc}");
        }
    }
}

fn warn_unconverged(rows: &[Row]) {
    for r in rows.iter().filter(|r| !r.converged) {
        eprintln!(
            "warning: {} at alpha = {}, k = {} did not converge under grid doubling",
            r.quantity, r.alpha, r.k
        );
    }
}

fn check_alpha(alpha: f64) -> Result<(), Error> {
    if alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("alpha must be finite, got {alpha}")))
    }
}

fn run_mode(args: &ModeArgs, quantity: Quantity, scan: Option<ScanConfig>) -> Result<u8, Error> {
    check_alpha(args.alpha)?;
    let policy = args.grid.policy()?;
    let point = match scan {
        Some(scan) => {
            let mode = ModeSpec::new(args.alpha, args.k)?;
            let start = std::time::Instant::now();
            let b = analysis::pseudospectral_bound_with(mode, &policy, &scan)?;
            for note in &b.notes {
                eprintln!("note: {note}");
            }
            SweepPoint {
                alpha: args.alpha,
                k: args.k,
                quantity,
                value: b.psi_bound.unwrap_or(f64::NAN),
                lambda_star: b.lambda_star,
                grid: b.grid,
                converged: b.converged,
                elapsed: start.elapsed(),
            }
        }
        None => analysis::evaluate(args.alpha, args.k, quantity, &policy)?,
    };
    let rows = vec![Row::from_point(&point, args.out.timing)];
    warn_unconverged(&rows);
    let m = meta(&rows, Some(&policy));
    emit_rows(&rows, args.out.format, None, m);
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Spectrum(args) => run_mode(&args, Quantity::Sigma, None),
        Command::Pseudo { mode, lambda_points, refine_tol } => {
            if lambda_points < 3 {
                return Err(Error::Usage("--lambda-points must be at least 3".into()));
            }
            if !(refine_tol > 0.0) {
                return Err(Error::Usage("--refine-tol must be positive".into()));
            }
            let scan = ScanConfig { points: lambda_points, refine_tol, ..Default::default() };
            run_mode(&mode, Quantity::Psi, Some(scan))
        }
        Command::Sweep { alphas, k, quantity, fit, grid, out } => {
            for &a in &alphas {
                check_alpha(a)?;
            }
            let policy = grid.policy()?;
            let quantity = Quantity::from(quantity);
            let (points, fit_value) = if fit {
                let res = analysis::scaling_sweep(&alphas, k, quantity, &policy)?;
                let f = fit_json(&res.fit, &res.excluded);
                (res.points, Some(f))
            } else {
                (analysis::sweep_points(&alphas, k, quantity, &policy)?, None)
            };
            let rows: Vec<Row> = points.iter().map(|p| Row::from_point(p, out.timing)).collect();
            warn_unconverged(&rows);
            let m = meta(&rows, Some(&policy));
            emit_rows(&rows, out.format, fit_value, m);
            Ok(0)
        }
        Command::Quasimode { alpha, out } => {
            check_alpha(alpha)?;
            let beta_1 = alpha / (8.0 * PI);
            let start = std::time::Instant::now();
            let q = analysis::quasimode(beta_1, None)?;
            let elapsed_ms = if out.timing { start.elapsed().as_millis() } else { 0 };
            let scaled = q.ratio / beta_1.abs().powf(1.0 / 3.0);
            let grid = q.u.grid();
            let row = |quantity: &str, value: f64| Row {
                alpha,
                k: 1,
                n: grid.n(),
                r_max: grid.r_max(),
                quantity: quantity.into(),
                value,
                lambda_star: Some(q.lambda),
                converged: true,
                elapsed_ms,
            };
            let rows = vec![row("quasimode_ratio", q.ratio), row("quasimode_ratio_scaled", scaled)];
            let mut m = meta(&rows, None);
            m["r1"] = json!(q.r1);
            m["orthogonality"] = json!(q.orthogonality);
            emit_rows(&rows, out.format, None, m);
            Ok(0)
        }
        Command::Verify { suite, seed, format } => {
            let suite: Suite = suite.parse()?;
            let config = VerifyConfig { seed, ..Default::default() };
            let reports = verify::run_suite(suite, &config)?;
            print_reports(&reports, format, seed);
            let failed: Vec<&str> =
                reports.iter().filter(|r| !r.passed).map(|r| r.check_id.as_str()).collect();
            if failed.is_empty() {
                eprintln!("{} checks passed", reports.len());
                Ok(0)
            } else {
                eprintln!("{} of {} checks failed: {}", failed.len(), reports.len(), failed.join(", "));
                Ok(1)
            }
        }
    }
}

fn print_reports(reports: &[CheckReport], format: Format, seed: u64) {
    match format {
        Format::Csv => {
            println!("{VERIFY_HEADER}");
            for r in reports {
                println!(
                    "{},{},{},{},{}",
                    r.check_id,
                    r.passed,
                    sig9(r.measured),
                    sig9(r.tolerance),
                    r.samples
                );
            }
        }
        Format::Json => {
            let checks: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "check_id": r.check_id,
                        "passed": r.passed,
                        "measured": finite_or_null(r.measured),
                        "tolerance": r.tolerance,
                        "samples": r.samples,
                        "detail": r.detail,
                    })
                })
                .collect();
            let doc = json!({
                "checks": checks,
                "meta": { "version": env!("CARGO_PKG_VERSION"), "seed": seed },
            });
            println!("{doc}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(2513.27412287), "2513.27412");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(30.0), "30");
        assert_eq!(sig9(-1.0e-7), "-1e-7");
        assert_eq!(sig9(2.5e10), "2.5e10");
        assert_eq!(sig9(0.0), "0");
    }
}
