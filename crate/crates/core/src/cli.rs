//! Command-line front end.
//!
//! Four subcommands:
//!
//! - `solve` — run one simulation; writes `energy.csv`, `errors.json`,
//!   `run-config.json`, and optional VTK snapshots into `--out`.
//! - `convergence` — run a spatial or temporal sweep; writes
//!   `convergence.csv` and `slopes.json`.
//! - `coeffs` — print the exact correction-coefficient table for an order.
//! - `mesh-info` — print statistics for a structured or imported mesh.
//!
//! Every knob is a flag; `--config file.json` supplies defaults for any flag
//! not given on the command line (flags win).  Exit codes: 0 success, 2 bad
//! configuration or usage, 3 solver failure (partial outputs are kept and a
//! `FAILED.txt` marker is written next to them).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::coeffs;
use crate::feec::FeOrder;
use crate::io;
use crate::mesh::Mesh2d;
use crate::operators::{OperatorsError, SolverKind};
use crate::problems::Problem;
use crate::stepper::{self, BcMode, RunConfig, StepperError, SweepOutcome};

/// Arbitrary even-order implicit leapfrog solver for the three-field Maxwell
/// system on 2D simplicial Whitney-form complexes.
#[derive(Parser)]
#[command(name = "maxwell-lfr", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write its diagnostics.
    Solve(SolveArgs),
    /// Run a refinement sweep and fit convergence slopes.
    Convergence(ConvergenceArgs),
    /// Print the correction-coefficient table for one scheme order.
    Coeffs(CoeffsArgs),
    /// Print mesh statistics (structured n×n or imported .node/.ele).
    MeshInfo(MeshInfoArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Benchmark problem: 1 or 2 (also accepts "example1"/"example2").
    #[arg(long)]
    example: Option<String>,
    /// Time-integration order (even, >= 2).
    #[arg(long = "R", value_name = "R")]
    time_order: Option<usize>,
    /// Finite element order: 1 or 2.
    #[arg(long)]
    order: Option<u8>,
    /// Structured-mesh resolution (cells per side of the unit square).
    #[arg(long)]
    n: Option<usize>,
    /// Time step; must divide the final time evenly (alternative: --steps).
    #[arg(long)]
    dt: Option<f64>,
    /// Number of time steps (alternative: --dt).
    #[arg(long)]
    steps: Option<usize>,
    /// Final time [default: the problem's, 1.0 for both examples].
    #[arg(long = "T", value_name = "T")]
    t_final: Option<f64>,
    /// Permittivity [default: the problem's].
    #[arg(long)]
    eps: Option<f64>,
    /// Permeability [default: the problem's].
    #[arg(long)]
    mu: Option<f64>,
    /// Boundary handling: auto | homogeneous | constrained [default: auto].
    #[arg(long)]
    bc: Option<String>,
    /// Linear solver: dense | iterative [default: dense].
    #[arg(long)]
    solver: Option<String>,
    /// Output directory [default: maxwell-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a VTK field snapshot every K states (state 0 included).
    #[arg(long = "dump-fields", value_name = "K")]
    dump_fields: Option<usize>,
    /// Stdout summary format: text | json [default: text].
    #[arg(long)]
    format: Option<String>,
    /// JSON file supplying defaults for any flag not set (keys named like
    /// the flags: example, R, order, n, dt, steps, T, eps, mu, bc, solver,
    /// mode, dt-list, n-list, ref-ratio).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Refinement axis: spatial | temporal.
    #[arg(long)]
    mode: Option<String>,
    /// Mesh resolutions for a spatial sweep, comma separated (>= 3).
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Time steps for a temporal sweep, comma separated (>= 3).
    #[arg(long = "dt-list", value_delimiter = ',')]
    dt_list: Vec<f64>,
    /// Self-reference refinement ratio for temporal sweeps (odd) [default: 33].
    #[arg(long = "ref-ratio")]
    ref_ratio: Option<usize>,
}

#[derive(Args)]
struct CoeffsArgs {
    /// Scheme order (even, 2..=32).
    #[arg(long = "R", value_name = "R")]
    time_order: u32,
    /// Output format: text | json [default: text].
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct MeshInfoArgs {
    /// Structured-mesh resolution.
    #[arg(long)]
    n: Option<usize>,
    /// Triangle-format vertex file (with --ele).
    #[arg(long)]
    node: Option<PathBuf>,
    /// Triangle-format element file (with --node).
    #[arg(long)]
    ele: Option<PathBuf>,
    /// Output format: text | json [default: text].
    #[arg(long)]
    format: Option<String>,
}

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Solver-class failures exit 3; everything else about a run's setup
/// (including the dense-capacity guard) is a configuration error, exit 2.
fn classify(err: StepperError) -> CliError {
    match &err {
        StepperError::Build(OperatorsError::Linalg { .. }) | StepperError::Projection(_) => {
            CliError::Solver(err.to_string())
        }
        _ => CliError::Config(err.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Flag/config-file resolution
// ---------------------------------------------------------------------------

/// The `--config` JSON object, or an empty object when absent.
fn load_config_file(path: Option<&Path>) -> Result<Value, CliError> {
    let Some(path) = path else {
        return Ok(json!({}));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
    if !v.is_object() {
        return Err(CliError::Config(format!(
            "config file {} must contain a JSON object",
            path.display()
        )));
    }
    Ok(v)
}

fn file_str(file: &Value, key: &str) -> Option<String> {
    let v = file.get(key)?;
    v.as_str()
        .map(str::to_owned)
        .or_else(|| v.as_u64().map(|x| x.to_string()))
}

fn file_u64(file: &Value, key: &str) -> Option<u64> {
    file.get(key)?.as_u64()
}

fn file_f64(file: &Value, key: &str) -> Option<f64> {
    file.get(key)?.as_f64()
}

struct Resolved {
    cfg: RunConfig,
    out: PathBuf,
    dump_fields: Option<usize>,
    json_summary: bool,
}

fn parse_format(flag: Option<&str>) -> Result<bool, CliError> {
    match flag.unwrap_or("text") {
        "text" => Ok(false),
        "json" => Ok(true),
        other => Err(CliError::Config(format!(
            "unknown format {other:?}; expected text or json"
        ))),
    }
}

/// Merges flags over the config file and materializes a validated RunConfig.
/// Sweeps seed `dt` from their sweep lists before calling this.
fn resolve_common(args: &CommonArgs) -> Result<Resolved, CliError> {
    let file = load_config_file(args.config.as_deref())?;

    let example = args
        .example
        .clone()
        .or_else(|| file_str(&file, "example"))
        .ok_or_else(|| CliError::Config("missing --example (1 or 2)".into()))?;
    let problem = Problem::by_id(&example)
        .ok_or_else(|| CliError::Config(format!("unknown example {example:?}; expected 1 or 2")))?;

    let time_order = args
        .time_order
        .or(file_u64(&file, "R").map(|x| x as usize))
        .ok_or_else(|| CliError::Config("missing --R (even scheme order)".into()))?;
    let order = args
        .order
        .or(file_u64(&file, "order").map(|x| x as u8))
        .ok_or_else(|| CliError::Config("missing --order (1 or 2)".into()))?;
    let fe_order = FeOrder::try_from_u8(order)
        .ok_or_else(|| CliError::Config(format!("finite element order must be 1 or 2, got {order}")))?;
    let n = args
        .n
        .or(file_u64(&file, "n").map(|x| x as usize))
        .ok_or_else(|| CliError::Config("missing --n (mesh resolution)".into()))?;

    let mut cfg = RunConfig::new(problem, time_order, fe_order, n);
    if let Some(t) = args.t_final.or(file_f64(&file, "T")) {
        cfg.t_final = t;
    }
    if let Some(e) = args.eps.or(file_f64(&file, "eps")) {
        cfg.eps = e;
    }
    if let Some(m) = args.mu.or(file_f64(&file, "mu")) {
        cfg.mu = m;
    }
    match args
        .bc
        .clone()
        .or_else(|| file_str(&file, "bc"))
        .as_deref()
        .unwrap_or("auto")
    {
        "auto" => cfg.bc = BcMode::Auto,
        "homogeneous" => cfg.bc = BcMode::Homogeneous,
        "constrained" => cfg.bc = BcMode::Constrained,
        other => {
            return Err(CliError::Config(format!(
                "unknown bc mode {other:?}; expected auto, homogeneous or constrained"
            )))
        }
    }
    match args
        .solver
        .clone()
        .or_else(|| file_str(&file, "solver"))
        .as_deref()
        .unwrap_or("dense")
    {
        "dense" => cfg.solver = SolverKind::Dense,
        "iterative" => cfg.solver = SolverKind::Iterative,
        other => {
            return Err(CliError::Config(format!(
                "unknown solver {other:?}; expected dense or iterative"
            )))
        }
    }

    let dt = args.dt.or(file_f64(&file, "dt"));
    let steps = args.steps.or(file_u64(&file, "steps").map(|x| x as usize));
    cfg = cfg.with_time_grid(dt, steps).map_err(classify)?;
    cfg.validate().map_err(classify)?;

    let out = args
        .out
        .clone()
        .or_else(|| file_str(&file, "out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("maxwell-out"));
    let json_summary = parse_format(
        args.format
            .clone()
            .or_else(|| file_str(&file, "format"))
            .as_deref(),
    )?;
    Ok(Resolved {
        cfg,
        out,
        dump_fields: args.dump_fields.or(file_u64(&file, "dump-fields").map(|x| x as usize)),
        json_summary,
    })
}

/// Writes `run-config.json`: the resolved config plus a `meta` object, the
/// one place allowed to differ between reruns.
fn write_run_config(out: &Path, cfg: &RunConfig, wall_seconds: f64) -> Result<(), CliError> {
    let mut meta = Map::new();
    meta.insert("wall_seconds".into(), json!(wall_seconds));
    io::write_json(&out.join("run-config.json"), &io::with_meta(io::config_json(cfg), meta))?;
    Ok(())
}

fn write_failure_marker(out: &Path, message: &str) -> Result<(), CliError> {
    fs::write(out.join("FAILED.txt"), format!("{message}\n"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let r = resolve_common(&args.common)?;
    fs::create_dir_all(&r.out)?;

    let mut dump_error: Option<std::io::Error> = None;
    let diag = {
        let out = r.out.clone();
        let every = r.dump_fields;
        let mut observe = |disc: &stepper::Discretization, state: &stepper::State| {
            if let Some(k) = every {
                if k > 0 && state.n % k == 0 && dump_error.is_none() {
                    let path = out.join(format!("fields-{:06}.vtk", state.n));
                    let title = format!("state {} of a maxwell-lfr run", state.n);
                    if let Err(e) = io::write_vtk(&path, disc, state, &title) {
                        dump_error = Some(e);
                    }
                }
            }
        };
        stepper::run_with(&r.cfg, &mut observe).map_err(classify)?
    };
    if let Some(e) = dump_error {
        return Err(CliError::Io(e));
    }

    io::write_energy_csv(&r.out.join("energy.csv"), &diag.energy)?;
    write_run_config(&r.out, &r.cfg, diag.wall_seconds)?;

    if let Some(msg) = &diag.failure {
        write_failure_marker(&r.out, msg)?;
        return Err(CliError::Solver(msg.clone()));
    }
    let errors = diag
        .errors
        .expect("errors are computed whenever the march succeeds");
    io::write_json(&r.out.join("errors.json"), &io::errors_json(&r.cfg, &errors))?;

    if r.json_summary {
        println!(
            "{}",
            json!({
                "err_p": errors.p,
                "err_E": errors.e,
                "err_H": errors.h,
                "err_total": errors.total,
                "max_rel_drift": diag.max_rel_drift,
                "wall_seconds": diag.wall_seconds,
                "out": r.out.display().to_string(),
            })
        );
    } else {
        println!(
            "{} R={} r={} n={} dt={} steps={}: err_p={:.3e} err_E={:.3e} err_H={:.3e} \
             max_drift={:.3e} wall={:.2}s -> {}",
            r.cfg.problem.id,
            r.cfg.time_order,
            r.cfg.fe_order.as_u8(),
            r.cfg.n,
            r.cfg.dt,
            r.cfg.steps,
            errors.p,
            errors.e,
            errors.h,
            diag.max_rel_drift,
            diag.wall_seconds,
            r.out.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// convergence
// ---------------------------------------------------------------------------

fn cmd_convergence(args: &ConvergenceArgs) -> Result<(), CliError> {
    let file = load_config_file(args.common.config.as_deref())?;
    let mode = args
        .mode
        .clone()
        .or_else(|| file_str(&file, "mode"))
        .ok_or_else(|| CliError::Config("missing --mode (spatial or temporal)".into()))?;

    let mut n_list = args.n_list.clone();
    if n_list.is_empty() {
        if let Some(Value::Array(xs)) = file.get("n-list") {
            n_list = xs.iter().filter_map(|x| x.as_u64()).map(|x| x as usize).collect();
        }
    }
    let mut dt_list = args.dt_list.clone();
    if dt_list.is_empty() {
        if let Some(Value::Array(xs)) = file.get("dt-list") {
            dt_list = xs.iter().filter_map(Value::as_f64).collect();
        }
    }
    let ref_ratio = args
        .ref_ratio
        .or(file_u64(&file, "ref-ratio").map(|x| x as usize))
        .unwrap_or(33);

    // Seed the base config from the sweep lists so resolution always
    // succeeds: a sweep overrides n (spatial) or the time grid (temporal)
    // per run anyway.
    let mut common = args.common.clone();
    let wall = std::time::Instant::now();
    match mode.as_str() {
        "spatial" => {
            if n_list.len() < 3 {
                return Err(CliError::Config(format!(
                    "a spatial sweep needs at least 3 mesh resolutions, got {}",
                    n_list.len()
                )));
            }
            common.n = Some(common.n.unwrap_or(n_list[0]));
            let r = resolve_common(&common)?;
            fs::create_dir_all(&r.out)?;
            let outcome = stepper::spatial_sweep(&r.cfg, &n_list).map_err(classify)?;
            finish_sweep(&r, &mode, outcome, wall.elapsed().as_secs_f64())
        }
        "temporal" => {
            if dt_list.len() < 3 {
                return Err(CliError::Config(format!(
                    "a temporal sweep needs at least 3 time steps, got {}",
                    dt_list.len()
                )));
            }
            common.dt = Some(common.dt.unwrap_or(dt_list[0]));
            common.steps = None;
            let r = resolve_common(&common)?;
            fs::create_dir_all(&r.out)?;
            let outcome =
                stepper::temporal_self_sweep(&r.cfg, &dt_list, ref_ratio).map_err(classify)?;
            finish_sweep(&r, &mode, outcome, wall.elapsed().as_secs_f64())
        }
        other => Err(CliError::Config(format!(
            "unknown mode {other:?}; expected spatial or temporal"
        ))),
    }
}

fn finish_sweep(
    r: &Resolved,
    mode: &str,
    outcome: SweepOutcome,
    wall_seconds: f64,
) -> Result<(), CliError> {
    io::write_convergence_csv(&r.out.join("convergence.csv"), &outcome.rows)?;
    write_run_config(&r.out, &r.cfg, wall_seconds)?;
    if let Some(msg) = &outcome.failure {
        write_failure_marker(&r.out, msg)?;
        return Err(CliError::Solver(msg.clone()));
    }
    let slopes = stepper::sweep_slopes(&outcome.rows);
    io::write_json(
        &r.out.join("slopes.json"),
        &io::slopes_json(&r.cfg, mode, &slopes, outcome.rows.len()),
    )?;
    if r.json_summary {
        println!(
            "{}",
            json!({
                "mode": mode,
                "field_slopes": { "p": slopes.p, "E": slopes.e, "H": slopes.h },
                "points": outcome.rows.len(),
                "fit_residual": slopes.fit_residual,
                "wall_seconds": wall_seconds,
                "out": r.out.display().to_string(),
            })
        );
    } else {
        println!(
            "{mode} sweep {} R={} r={} ({} points): slope_p={:.3} slope_E={:.3} slope_H={:.3} \
             fit_residual={:.2e} wall={:.2}s -> {}",
            r.cfg.problem.id,
            r.cfg.time_order,
            r.cfg.fe_order.as_u8(),
            outcome.rows.len(),
            slopes.p,
            slopes.e,
            slopes.h,
            slopes.fit_residual,
            wall_seconds,
            r.out.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// coeffs
// ---------------------------------------------------------------------------

fn cmd_coeffs(args: &CoeffsArgs) -> Result<(), CliError> {
    let r = args.time_order;
    if r > 32 {
        return Err(CliError::Config(format!(
            "coefficient tables are supported for R <= 32, got {r}"
        )));
    }
    let gammas = coeffs::gammas_for_order(r).map_err(|e| CliError::Config(e.to_string()))?;
    let s_max = gammas.len() - 1;
    let composition = coeffs::gamma_composition(s_max);
    let routes_agree = gammas == composition;
    let json_out = parse_format(args.format.as_deref())?;

    if json_out {
        println!(
            "{}",
            json!({
                "R": r,
                "gamma": gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "gamma_f64": gammas.iter().map(coeffs::rational_to_f64).collect::<Vec<_>>(),
                "routes_agree": routes_agree,
            })
        );
    } else {
        println!("correction coefficients for order R = {r}");
        println!("{:>3}  {:>24}  {:>24}", "s", "gamma_s (exact)", "gamma_s (f64)");
        for (s, g) in gammas.iter().enumerate() {
            println!("{s:>3}  {:>24}  {:>24}", g.to_string(), coeffs::rational_to_f64(g));
        }
        println!("series and composition routes agree: {routes_agree}");
    }
    if !routes_agree {
        return Err(CliError::Config(
            "internal inconsistency: coefficient routes disagree".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mesh-info
// ---------------------------------------------------------------------------

fn cmd_mesh_info(args: &MeshInfoArgs) -> Result<(), CliError> {
    let json_out = parse_format(args.format.as_deref())?;
    let (mesh, loaded) = match (&args.n, &args.node, &args.ele) {
        (Some(n), None, None) => (
            Mesh2d::structured_unit_square(*n).map_err(|e| CliError::Config(e.to_string()))?,
            None,
        ),
        (None, Some(node), Some(ele)) => {
            let (m, report) = Mesh2d::from_triangle_files(node, ele)
                .map_err(|e| CliError::Config(e.to_string()))?;
            (m, Some(report))
        }
        _ => {
            return Err(CliError::Config(
                "mesh-info needs either --n or both --node and --ele".into(),
            ))
        }
    };
    if let Some(report) = &loaded {
        if report.flipped_triangles > 0 {
            eprintln!(
                "warning: reoriented {} clockwise triangle(s)",
                report.flipped_triangles
            );
        }
    }
    if json_out {
        println!("{}", serde_json::to_value(mesh.stats()).unwrap());
    } else {
        print!("{}", mesh.stats_text());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parses arguments and runs the selected subcommand; returns the process
/// exit code.
pub fn main() -> ExitCode {
    crate::linalg::pin_sequential();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Convergence(a) => cmd_convergence(a),
        Cmd::Coeffs(a) => cmd_coeffs(a),
        Cmd::MeshInfo(a) => cmd_mesh_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common_defaults() -> CommonArgs {
        CommonArgs {
            example: Some("1".into()),
            time_order: Some(2),
            order: Some(1),
            n: Some(2),
            dt: Some(0.25),
            steps: None,
            t_final: None,
            eps: None,
            mu: None,
            bc: None,
            solver: None,
            out: None,
            dump_fields: None,
            format: None,
            config: None,
        }
    }

    #[test]
    fn flags_resolve_to_config() {
        let r = resolve_common(&common_defaults()).unwrap();
        assert_eq!(r.cfg.problem.id, "example1");
        assert_eq!(r.cfg.time_order, 2);
        assert_eq!(r.cfg.n, 2);
        assert_eq!(r.cfg.steps, 4);
        assert_eq!(r.cfg.t_final, 1.0);
        assert!(!r.json_summary);
    }

    #[test]
    fn config_file_fills_missing_flags_but_flags_win() {
        let dir = std::env::temp_dir().join("maxlfr-cli-test-config");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        fs::write(&path, r#"{"example": 2, "R": 6, "order": 2, "n": 4, "dt": 0.5, "T": 2.0}"#)
            .unwrap();
        let mut args = common_defaults();
        args.example = None; // from file: example2
        args.time_order = Some(4); // flag beats the file's 6
        args.order = None;
        args.n = None;
        args.dt = None;
        args.config = Some(path);
        let r = resolve_common(&args).unwrap();
        assert_eq!(r.cfg.problem.id, "example2");
        assert_eq!(r.cfg.time_order, 4);
        assert_eq!(r.cfg.fe_order.as_u8(), 2);
        assert_eq!(r.cfg.n, 4);
        assert_eq!(r.cfg.t_final, 2.0);
        assert_eq!(r.cfg.steps, 4);
    }

    fn expect_err(r: Result<Resolved, CliError>) -> CliError {
        match r {
            Err(e) => e,
            Ok(_) => panic!("expected a configuration error"),
        }
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut odd = common_defaults();
        odd.time_order = Some(7);
        let err = expect_err(resolve_common(&odd));
        assert_eq!(err.exit_code(), 2, "odd R: {err}");

        let mut bad_bc = common_defaults();
        bad_bc.bc = Some("perfectly-matched-layer".into());
        assert_eq!(expect_err(resolve_common(&bad_bc)).exit_code(), 2);

        let mut no_grid = common_defaults();
        no_grid.dt = None;
        assert_eq!(expect_err(resolve_common(&no_grid)).exit_code(), 2);
    }

    #[test]
    fn cli_parses_frozen_flag_names() {
        let cli = Cli::try_parse_from([
            "maxwell-lfr",
            "solve",
            "--example",
            "1",
            "--R",
            "6",
            "--order",
            "2",
            "--n",
            "8",
            "--dt",
            "0.03125",
            "--bc",
            "auto",
            "--solver",
            "dense",
            "--T",
            "1.0",
            "--eps",
            "1.0",
            "--mu",
            "1.0",
            "--format",
            "json",
            "--dump-fields",
            "8",
            "--out",
            "somewhere",
        ])
        .unwrap();
        match cli.cmd {
            Cmd::Solve(a) => {
                assert_eq!(a.common.time_order, Some(6));
                assert_eq!(a.common.dump_fields, Some(8));
            }
            _ => panic!("expected solve"),
        }
        assert!(Cli::try_parse_from(["maxwell-lfr", "solve", "--R", "nope"]).is_err());
        let conv = Cli::try_parse_from([
            "maxwell-lfr",
            "convergence",
            "--example",
            "1",
            "--mode",
            "temporal",
            "--dt-list",
            "0.125,0.0625,0.03125",
            "--ref-ratio",
            "33",
            "--R",
            "2",
            "--order",
            "2",
            "--n",
            "8",
        ])
        .unwrap();
        match conv.cmd {
            Cmd::Convergence(a) => {
                assert_eq!(a.dt_list.len(), 3);
                assert_eq!(a.ref_ratio, Some(33));
            }
            _ => panic!("expected convergence"),
        }
    }
}
