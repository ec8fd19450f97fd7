//! Command-line front end: argument parsing, config resolution and the
//! CSV/JSON artifacts of each subcommand.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{self, circular_placements, hockey_stick, Check};
use crate::error::{Error, Result};
use crate::fredholm::{det_fredholm, tracy_widom_cdf, u_beta_cdf, DetOptions, DetValue, UPath};
use crate::kernels::{
    self, bessel_kernel, cubic_double_contour, cubic_rhs, hard_edge_limit, okounkov, okounkov_quadrature,
};
use crate::lpp::{monte_carlo_antidiagonal, monte_carlo_gmn, SimConfig};
use crate::params::{digamma_one_plus, ParamSeq};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "lpplab",
    version,
    about = "Last-passage percolation with decaying parameters: simulation, kernels and Fredholm determinants"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo samples of G(m, n) or of the anti-diagonal process.
    Simulate(SimulateArgs),
    /// Evaluate a registered kernel on a grid.
    Kernel(KernelArgs),
    /// Fredholm determinants at a list of xi.
    Fredholm(FredholmArgs),
    /// Tabulate F_TW or U_beta over a xi grid.
    DistTable(DistArgs),
    /// Run a named experiment and write its JSON report.
    Experiment(ExperimentArgs),
    /// Check the identity suite; exits nonzero when any check fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; without it CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SeqArgs {
    /// Power parameters t_k = k^alpha.
    #[arg(long, conflicts_with_all = ["beta", "constant"])]
    alpha: Option<f64>,
    /// Linear parameters t_k = k + beta.
    #[arg(long, conflicts_with = "constant", allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Constant parameters t_k = c.
    #[arg(long)]
    constant: Option<f64>,
}

impl SeqArgs {
    fn seq(&self) -> Result<Option<ParamSeq>> {
        Ok(match (self.alpha, self.beta, self.constant) {
            (Some(a), _, _) => Some(ParamSeq::power(a)?),
            (_, Some(b), _) => Some(ParamSeq::linear(b)?),
            (_, _, Some(c)) => Some(ParamSeq::constant(c)?),
            _ => None,
        })
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    seq: SeqArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Lattice size n (and m unless given); N in anti-diagonal mode.
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long = "M")]
    m: Option<u64>,
    /// Record k -> G(N + k, N - k) instead of G(m, n).
    #[arg(long)]
    antidiagonal: bool,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    /// Registered kernel name.
    #[arg(long)]
    name: Option<String>,
    /// Kernel parameters as JSON.
    #[arg(long)]
    params: Option<String>,
    /// x grid a:b:step.
    #[arg(long, allow_hyphen_values = true)]
    x_grid: Option<String>,
    /// y grid a:b:step (defaults to the x grid).
    #[arg(long, allow_hyphen_values = true)]
    y_grid: Option<String>,
}

#[derive(Args, Debug)]
struct FredholmArgs {
    #[command(flatten)]
    common: Common,
    /// U_beta with t_k = k + beta; without it the Airy kernel is used.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Registered kernel to use instead of U_beta / Airy.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    kernel_params: Option<String>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    xi: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_grid: Option<String>,
    #[arg(long, value_enum)]
    path: Option<PathArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Contour,
    Bessel,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Distribution {
    TracyWidom,
    UBeta,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    dist: Option<Distribution>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_grid: Option<String>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    /// Experiment name (gumbel, exponent, triviality, soft-edge).
    name: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
}

/// Config file contents; every field optional except the schema version.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    schema_version: u32,
    seq: Option<ParamSeq>,
    n: Option<u64>,
    m: Option<u64>,
    seed: Option<u64>,
    samples: Option<u64>,
    antidiagonal: Option<bool>,
    kernel: Option<String>,
    kernel_params: Option<Value>,
    x_grid: Option<String>,
    y_grid: Option<String>,
    beta: Option<f64>,
    distribution: Option<Distribution>,
    xi: Option<Vec<f64>>,
    xi_grid: Option<String>,
    path: Option<UPath>,
    det: Option<DetOptions>,
    params: Option<Value>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig {
            schema_version: SCHEMA_VERSION,
            ..Default::default()
        });
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: FileConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            path.display(),
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

/// Parses a:b:step into the inclusive grid a + i step.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("grid {spec:?} must look like a:b:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Resource(format!("grid {spec:?} has {count} points")));
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

fn parse_json_arg(what: &str, s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| Error::Config(format!("--{what}: {e}")))
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config("--workers must be >= 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::Resource(format!("thread pool: {e}")))
}

/// Header lines carrying the command and resolved config.
fn csv_header(command: &str, resolved: &Value) -> String {
    format!("# lpplab {command}\n# config: {resolved}\n")
}

/// Writes `body` to `dir/name`, or to stdout without a directory.
fn emit(dir: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(name), body)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn emit_json(dir: Option<&Path>, name: &str, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidArgument(e.to_string()))? + "\n";
    emit(dir, name, &text)
}

#[derive(Serialize)]
struct SimulateResolved {
    seq: ParamSeq,
    m: u64,
    n: u64,
    seed: u64,
    samples: u64,
    antidiagonal: bool,
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let f = load_config(a.common.config.as_deref())?;
    let n =
        a.n.or(f.n)
            .ok_or_else(|| Error::Config("simulate needs --N or n".into()))?;
    let r = SimulateResolved {
        seq: a.seq.seq()?.or(f.seq).unwrap_or(ParamSeq::Linear { beta: 0.0 }),
        m: a.m.or(f.m).unwrap_or(n),
        n,
        seed: a.seed.or(f.seed).unwrap_or(0),
        samples: a.samples.or(f.samples).unwrap_or(1),
        antidiagonal: a.antidiagonal || f.antidiagonal.unwrap_or(false),
    };
    let cfg = SimConfig {
        seq: r.seq,
        m: r.m,
        n: r.n,
        seed: r.seed,
        samples: r.samples,
    };
    let resolved = serde_json::to_value(&r).unwrap_or(Value::Null);
    let mut out = csv_header("simulate", &resolved);
    if r.antidiagonal {
        let profiles = monte_carlo_antidiagonal(&cfg, a.common.workers)?;
        out.push_str("# seed,substream,k,value\n");
        for (s, p) in profiles.iter().enumerate() {
            for (k, v) in p {
                let _ = writeln!(out, "{},{s},{k},{v}", r.seed);
            }
        }
    } else {
        let g = monte_carlo_gmn(&cfg, a.common.workers)?;
        out.push_str("# seed,substream,value\n");
        for (s, v) in g.iter().enumerate() {
            let _ = writeln!(out, "{},{s},{v}", r.seed);
        }
    }
    emit(a.common.out.as_deref(), "samples.csv", &out)
}

fn kernel(a: KernelArgs) -> Result<()> {
    let f = load_config(a.common.config.as_deref())?;
    let name = a
        .name
        .or(f.kernel)
        .ok_or_else(|| Error::Config("kernel needs --name".into()))?;
    let params = match a.params {
        Some(p) => parse_json_arg("params", &p)?,
        None => f.kernel_params.unwrap_or_else(|| json!({})),
    };
    let xg = a
        .x_grid
        .or(f.x_grid)
        .ok_or_else(|| Error::Config("kernel needs --x-grid".into()))?;
    let yg = a.y_grid.or(f.y_grid).unwrap_or_else(|| xg.clone());
    let (xs, ys) = (parse_grid(&xg)?, parse_grid(&yg)?);
    let k = kernels::build(&name, &params)?;
    // one row per task, so values do not depend on the worker count
    let rows: Vec<Vec<f64>> = pool(a.common.workers)?.install(|| {
        xs.par_iter()
            .map(|&x| k.eval_grid(&[x], &ys).map(|m| m.iter().copied().collect()))
            .collect::<Result<_>>()
    })?;
    let resolved = json!({ "kernel": name, "kernel_params": params, "x_grid": xg, "y_grid": yg });
    let mut out = csv_header("kernel", &resolved);
    out.push_str("x,y,value\n");
    for (x, row) in xs.iter().zip(&rows) {
        for (y, v) in ys.iter().zip(row) {
            let _ = writeln!(out, "{x},{y},{v}");
        }
    }
    let dir = a.common.out.as_deref();
    emit(dir, "kernel.csv", &out)?;
    if dir.is_some() {
        emit_json(
            dir,
            "kernel.json",
            &json!({ "config": resolved, "kernel": k.describe(), "symmetric": k.symmetric() }),
        )?;
    }
    Ok(())
}

fn xi_list(flags: Vec<f64>, flag_grid: Option<String>, f: &FileConfig) -> Result<Vec<f64>> {
    if !flags.is_empty() {
        return Ok(flags);
    }
    if let Some(g) = flag_grid.or_else(|| f.xi_grid.clone()) {
        return parse_grid(&g);
    }
    f.xi.clone()
        .ok_or_else(|| Error::Config("need --xi or --xi-grid".into()))
}

fn det_table<F>(xis: &[f64], workers: Option<usize>, eval: F) -> Result<Vec<DetValue>>
where
    F: Fn(f64) -> Result<DetValue> + Sync + Send,
{
    pool(workers)?.install(|| xis.par_iter().map(|&xi| eval(xi)).collect())
}

fn table_csv(command: &str, resolved: &Value, xis: &[f64], vals: &[DetValue]) -> String {
    let mut out = csv_header(command, resolved);
    out.push_str("xi,cdf,err_estimate\n");
    for (xi, d) in xis.iter().zip(vals) {
        let _ = writeln!(out, "{xi},{},{}", d.value, d.err_estimate);
    }
    out
}

fn fredholm(a: FredholmArgs) -> Result<()> {
    let f = load_config(a.common.config.as_deref())?;
    let xis = xi_list(a.xi, a.xi_grid, &f)?;
    let det = f.det.unwrap_or_default();
    let path = match a.path {
        Some(PathArg::Contour) => UPath::Contour,
        Some(PathArg::Bessel) => UPath::Bessel,
        None => f.path.unwrap_or(UPath::Bessel),
    };
    let kernel_name = a.kernel.or(f.kernel);
    let beta = a.beta.or(f.beta);
    let (resolved, vals) = if let Some(name) = kernel_name {
        let params = match a.kernel_params {
            Some(p) => parse_json_arg("kernel-params", &p)?,
            None => f.kernel_params.unwrap_or_else(|| json!({})),
        };
        let k = kernels::build(&name, &params)?;
        let vals = det_table(&xis, a.common.workers, |xi| det_fredholm(k.as_ref(), xi, &det))?;
        (
            json!({ "kernel": name, "kernel_params": params, "xi": xis, "det": det }),
            vals,
        )
    } else if let Some(beta) = beta {
        let vals = det_table(&xis, a.common.workers, |xi| u_beta_cdf(beta, xi, path, &det))?;
        (
            json!({ "distribution": "u_beta", "beta": beta, "path": path, "xi": xis, "det": det }),
            vals,
        )
    } else {
        let vals = det_table(&xis, a.common.workers, |xi| tracy_widom_cdf(xi, &det))?;
        (json!({ "distribution": "tracy_widom", "xi": xis, "det": det }), vals)
    };
    let dir = a.common.out.as_deref();
    emit(dir, "fredholm.csv", &table_csv("fredholm", &resolved, &xis, &vals))?;
    if dir.is_some() {
        emit_json(
            dir,
            "fredholm.json",
            &json!({ "config": resolved, "orders": vals.iter().map(|v| v.order).collect::<Vec<_>>() }),
        )?;
    }
    Ok(())
}

fn dist_table(a: DistArgs) -> Result<()> {
    let f = load_config(a.common.config.as_deref())?;
    let grid = a
        .xi_grid
        .or(f.xi_grid.clone())
        .ok_or_else(|| Error::Config("dist-table needs --xi-grid".into()))?;
    let xis = parse_grid(&grid)?;
    let det = f.det.unwrap_or_default();
    let beta = a.beta.or(f.beta);
    let dist = a.dist.or(f.distribution).unwrap_or(if beta.is_some() {
        Distribution::UBeta
    } else {
        Distribution::TracyWidom
    });
    let path = f.path.unwrap_or(UPath::Bessel);
    let (resolved, vals) = match dist {
        Distribution::TracyWidom => (
            json!({ "distribution": dist, "xi_grid": grid, "det": det }),
            det_table(&xis, a.common.workers, |xi| tracy_widom_cdf(xi, &det))?,
        ),
        Distribution::UBeta => {
            let beta = beta.ok_or_else(|| Error::Config("u-beta table needs --beta".into()))?;
            (
                json!({ "distribution": dist, "beta": beta, "path": path, "xi_grid": grid, "det": det }),
                det_table(&xis, a.common.workers, |xi| u_beta_cdf(beta, xi, path, &det))?,
            )
        }
    };
    let dir = a.common.out.as_deref();
    emit(dir, "dist.csv", &table_csv("dist-table", &resolved, &xis, &vals))?;
    if dir.is_some() {
        emit_json(
            dir,
            "dist.json",
            &json!({ "config": resolved, "map": det.map, "orders": vals.iter().map(|v| v.order).collect::<Vec<_>>() }),
        )?;
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let f = load_config(a.common.config.as_deref())?;
    let mut params = f.params.unwrap_or_else(|| json!({}));
    let obj = params
        .as_object_mut()
        .ok_or_else(|| Error::Config("experiment params must be a JSON object".into()))?;
    if let Some(seed) = a.seed.or(f.seed) {
        match a.name.as_str() {
            "gumbel" => obj.insert("seeds".into(), json!([seed])),
            _ => obj.insert("seed".into(), json!(seed)),
        };
    }
    if let Some(s) = a.samples.or(f.samples) {
        obj.insert("samples".into(), json!(s));
    }
    let report = analysis::run_experiment(&a.name, &params, a.common.workers)?;
    emit_json(a.common.out.as_deref(), &format!("experiment-{}.json", a.name), &report)
}

/// Identity suite shared by `verify` and the tests.
pub fn verify_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for beta in [0.0, 1.0] {
        let delta = 2.0 * digamma_one_plus(beta);
        let seq = ParamSeq::linear(beta)?;
        for (u, v) in [(0.2, 0.35), (0.05, 0.4)] {
            let (x, y) = ((1.0f64 / u).ln() + delta, (1.0f64 / v).ln() + delta);
            let lhs = hard_edge_limit(&seq, x, y, None)? / (u * v).sqrt();
            let rhs = 4.0 * bessel_kernel(2.0 * beta + 1.0, 4.0 * u, 4.0 * v)?;
            checks.push(Check::near(
                format!("bessel relation beta={beta} (u,v)=({u},{v})"),
                lhs,
                rhs,
                1e-5,
            ));
        }
    }
    for (tau, xi, sigma, eta) in [(0.3, 0.5, -0.2, 1.0), (-0.4, -0.6, 0.5, 0.3)] {
        let l = cubic_double_contour(tau, xi, sigma, eta)?;
        let r = cubic_rhs(tau, xi, sigma, eta)?;
        checks.push(Check::near(
            format!("cubic contour identity at ({tau},{xi},{sigma},{eta})"),
            l,
            r,
            1e-6,
        ));
    }
    for (c, xi, eta) in [(0.5, 0.0, 0.0), (1.0, 0.5, -0.5)] {
        let q = okounkov_quadrature(c, xi, eta)?;
        checks.push(Check::near(
            format!("gaussian-airy integral c={c} xi={xi} eta={eta}"),
            q,
            okounkov(c, xi, eta)?,
            1e-6,
        ));
    }
    let mut placements = true;
    for m in 1..=12u32 {
        for r in 0..=m {
            let want = analysis::binomial(m as u64, r as u64)?
                + if r > 0 {
                    analysis::binomial(m as u64 - 1, r as u64 - 1)?
                } else {
                    0
                };
            placements &= circular_placements(m, r)? as u128 == want;
        }
    }
    checks.push(Check::holds("circular placements m <= 12", placements));
    let mut hockey = true;
    for n in 0..=20 {
        for m in 0..=20 {
            let (l, r) = hockey_stick(n, m)?;
            hockey &= l == r;
        }
    }
    checks.push(Check::holds("hockey stick n, m <= 20", hockey));
    let reports = (0..100)
        .map(|s| analysis::trace_identity_check(6, s))
        .collect::<Result<Vec<_>>>()?;
    let first = reports[0].winner;
    let consistent = first.is_some() && reports.iter().all(|r| r.winner == first);
    checks.push(Check::holds(
        format!("two-line determinant identity, winner {first:?}"),
        consistent,
    ));
    let graded = reports
        .iter()
        .filter_map(|r| r.graded_max_discrepancy)
        .fold(0.0, f64::max);
    checks.push(Check::below("graded trace identity max discrepancy", graded, 1e-10));
    Ok(checks)
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let checks = verify_checks()?;
    let pass = checks.iter().all(|c| c.pass);
    emit_json(
        a.common.out.as_deref(),
        "verify.json",
        &json!({ "checks": checks, "pass": pass }),
    )?;
    Ok(pass)
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::NonConvergence(_) => 3,
        Error::Resource(_) => 4,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.cmd {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Kernel(a) => kernel(a).map(|_| true),
        Command::Fredholm(a) => fredholm(a).map(|_| true),
        Command::DistTable(a) => dist_table(a).map(|_| true),
        Command::Experiment(a) => experiment(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("lpplab: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("-1:-1:0.1").unwrap(), vec![-1.0]);
        assert_eq!(parse_grid("0:0.3:0.1").unwrap().len(), 4);
        for bad in ["0:1", "a:1:0.1", "1:0:0.1", "0:1:0"] {
            assert!(matches!(parse_grid(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::NonConvergence("x".into())), 3);
        assert_eq!(exit_code(&Error::Resource("x".into())), 4);
        assert_eq!(exit_code(&Error::Pole("x".into())), 1);
    }

    #[test]
    fn bad_config_is_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{\"schema_version\": 1, \"sed\": 3}").unwrap();
        let code = run(["lpplab", "simulate", "--N", "4", "--config", p.to_str().unwrap()]);
        assert_eq!(code, 2);
        std::fs::write(&p, "{\"schema_version\": 9}").unwrap();
        assert_eq!(
            run(["lpplab", "simulate", "--N", "4", "--config", p.to_str().unwrap()]),
            2
        );
        assert_eq!(run(["lpplab", "simulate", "--bogus"]), 2);
    }
}
