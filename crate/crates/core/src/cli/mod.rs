//! Command-line front end: `design`, `simulate`, `analyze`, `netlist`, `verify`.

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{condition_of_f, pseudospectrum, select_regular_indices, Objective, Window, DEFAULT_EPSILONS};
use crate::circuit::{build_a0, modal_report, netlist, parse_netlist, simulate, verify_transfer_with};
use crate::error::{Error, Result};
use crate::polysys::{system_k, DesignSpec};
use crate::solver::{enumerate, refine_with, validate_with, write_solutions_csv, Budget, DesignSolution, EnumerateOptions, SolutionSet};
pub use config::{CommonArgs, ConfigFile, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_BAD_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "marx", version, about = "Design and verify parasitic capacitors of n-stage Marx generators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate every real design, validate it and pick the regular one.
    Design(CommonArgs),
    /// Simulate the discharge of one design and check the energy transfer.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        select: SelectArgs,
        /// Number of time samples over [0, T].
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Condition numbers and pseudospectra for every design.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid points per axis.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Write a SPICE netlist of one design.
    Netlist {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        select: SelectArgs,
    },
    /// Validate a solution file without enumerating.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Solution file (JSON).
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
    },
}

/// Which design a command acts on.
#[derive(Debug, Clone, Default, Args)]
pub struct SelectArgs {
    /// 1-based position in the enumerated set (default: the regular design).
    #[arg(long)]
    pub index: Option<usize>,
    /// Solution file (JSON) with `k` or `scaled`, or a file written by `design`.
    #[arg(long, conflicts_with = "scaled")]
    pub solution: Option<PathBuf>,
    /// `n^2 c_i / c` values, comma separated; refined by Newton before use.
    #[arg(long, value_delimiter = ',')]
    pub scaled: Option<Vec<f64>>,
}

/// How a command that ran to completion ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Incomplete,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec(_)
        | Error::InvalidArgument(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::DimensionMismatch { .. }
        | Error::NonPositive { .. } => EXIT_BAD_INPUT,
        _ => EXIT_FAILED,
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Design(common) => RunConfig::resolve(common).and_then(|c| cmd_design(&c)),
        Command::Simulate { common, select, samples } => RunConfig::resolve(common).and_then(|mut c| {
            c.samples = samples.unwrap_or(c.samples);
            cmd_simulate(&c, select)
        }),
        Command::Analyze { common, resolution } => RunConfig::resolve(common).and_then(|mut c| {
            c.resolution = resolution.unwrap_or(c.resolution);
            cmd_analyze(&c)
        }),
        Command::Netlist { common, select } => RunConfig::resolve(common).and_then(|c| cmd_netlist(&c, select)),
        Command::Verify {
            common,
            solution,
            samples,
        } => RunConfig::resolve(common).and_then(|mut c| {
            c.samples = samples.unwrap_or(c.samples);
            cmd_verify(&c, solution)
        }),
    };
    match result {
        Ok(Outcome::Pass) => EXIT_OK,
        Ok(Outcome::Fail(why)) => {
            eprintln!("verification failed: {why}");
            EXIT_FAILED
        }
        Ok(Outcome::Incomplete) => {
            eprintln!("path budget exhausted; outputs are partial");
            EXIT_BUDGET
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    spec: &'a DesignSpec,
    v0: f64,
}

fn manifest<'a>(cfg: &'a RunConfig, command: &'a str) -> Manifest<'a> {
    Manifest {
        tool: "marx",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        spec: &cfg.spec,
        v0: cfg.v0,
    }
}

fn csv_header(cfg: &RunConfig, command: &str) -> String {
    let alpha: Vec<String> = cfg.spec.alpha().iter().map(u32::to_string).collect();
    format!(
        "# marx {} command={command} seed={} n={} alpha={} c={} ell={} v0={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        cfg.spec.n(),
        alpha.join(" "),
        cfg.spec.c(),
        cfg.spec.ell(),
        cfg.v0
    )
}

fn write_json<T: Serialize>(cfg: &RunConfig, command: &str, name: &str, data: &T) -> Result<PathBuf> {
    let doc = json!({ "manifest": manifest(cfg, command), "data": data });
    let path = cfg.out.join(name);
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(path)
}

fn write_csv(cfg: &RunConfig, command: &str, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
    let mut buf = csv_header(cfg, command).into_bytes();
    body(&mut buf)?;
    let path = cfg.out.join(name);
    fs::write(&path, buf)?;
    Ok(path)
}

fn write_run_manifest(cfg: &RunConfig, command: &str, files: &[PathBuf]) -> Result<()> {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let doc = json!({
        "manifest": manifest(cfg, command),
        "tolerances": cfg.tolerances,
        "timestamp": created,
        "files": names,
    });
    fs::write(cfg.out.join("manifest.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

fn prepare_out(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    Ok(())
}

fn enumerate_for(cfg: &RunConfig) -> Result<SolutionSet> {
    let options = EnumerateOptions {
        seed: cfg.seed,
        budget: Budget {
            max_paths: cfg.paths_budget,
            ..Budget::default()
        },
        tolerances: cfg.tolerances.clone(),
    };
    enumerate(&cfg.spec, &options)
}

pub fn cmd_design(cfg: &RunConfig) -> Result<Outcome> {
    prepare_out(cfg)?;
    let set = enumerate_for(cfg)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Json) {
        files.push(write_json(cfg, "design", "solutions.json", &set)?);
    }
    if cfg.wants(Format::Csv) {
        files.push(write_csv(cfg, "design", "solutions.csv", |b| write_solutions_csv(&set, b))?);
    }
    let regular: Vec<&DesignSolution> = set.regular().collect();
    files.push(write_json(cfg, "design", "regular.json", &json!({ "complete": set.complete, "regular": regular }))?);
    write_run_manifest(cfg, "design", &files)?;

    let s = &set.path_stats;
    println!(
        "n = {}: {} real solutions from {}/{} paths ({} complex, {} diverged, {} failed)",
        cfg.spec.n(),
        s.real,
        s.tracked,
        s.total,
        s.complex,
        s.diverged,
        s.failed
    );
    for (i, sol) in set.solutions.iter().enumerate() {
        let row: Vec<String> = sol.scaled.iter().map(|v| format!("{v:.5}")).collect();
        let tag = if sol.regular { "  (regular)" } else { "" };
        println!("{:3}  {}  cond {:.4}{tag}", i + 1, row.join(" "), sol.condition);
    }
    if !set.complete {
        return Ok(Outcome::Incomplete);
    }
    if let Some(bad) = set.solutions.iter().position(|s| !s.valid) {
        return Ok(Outcome::Fail(format!("solution {} failed validation", bad + 1)));
    }
    if regular.is_empty() {
        return Ok(Outcome::Fail("no solution satisfies the convexity constraints".into()));
    }
    Ok(Outcome::Pass)
}

/// Reads a solution from JSON: a bare object with `k` or `scaled`, or a file
/// written by `design` (picking `index`, else the regular design).
pub fn read_solution(path: &Path, spec: &DesignSpec, index: Option<usize>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text)?;
    if let Some(data) = v.get("data").cloned() {
        v = data;
    }
    if let Some(list) = v.get("regular").cloned() {
        v = json!({ "solutions": list });
    }
    if let Some(list) = v.get("solutions").and_then(Value::as_array) {
        let chosen = match index {
            Some(i) => list
                .get(i.wrapping_sub(1))
                .ok_or_else(|| Error::InvalidArgument(format!("no solution number {i}")))?,
            None => list
                .iter()
                .find(|s| s.get("regular").and_then(Value::as_bool).unwrap_or(false))
                .or(if list.len() == 1 { list.first() } else { None })
                .ok_or_else(|| Error::InvalidArgument("no regular solution in file; pass --index".into()))?,
        };
        v = chosen.clone();
    }
    let n = spec.n();
    let scale = (n * n) as f64;
    let k: Vec<f64> = if let Some(k) = v.get("k") {
        serde_json::from_value(k.clone())?
    } else if let Some(s) = v.get("scaled") {
        let s: Vec<f64> = serde_json::from_value(s.clone())?;
        s.iter().map(|x| x / scale).collect()
    } else {
        return Err(Error::InvalidArgument("solution needs a `k` or `scaled` array".into()));
    };
    if k.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k.len(),
        });
    }
    Ok(k)
}

fn choose(cfg: &RunConfig, select: &SelectArgs) -> Result<DesignSolution> {
    let tol = &cfg.tolerances;
    let system = system_k(&cfg.spec)?;
    if let Some(scaled) = &select.scaled {
        let n = cfg.spec.n();
        if scaled.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: scaled.len(),
            });
        }
        let guess: Vec<f64> = scaled.iter().map(|s| s / (n * n) as f64).collect();
        return refine_with(&system, &guess, tol);
    }
    if let Some(path) = &select.solution {
        let k = read_solution(path, &cfg.spec, select.index)?;
        return crate::solver::design_solution(&cfg.spec, k, tol);
    }
    let set = enumerate_for(cfg)?;
    match select.index {
        Some(i) => set
            .solutions
            .get(i.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("only {} solutions; no number {i}", set.solutions.len()))),
        None => {
            let idx = select_regular_indices(&set.solutions, &Objective::Flatness, tol);
            idx.first().map(|&i| set.solutions[i].clone()).ok_or(Error::EmptySelection)
        }
    }
}

pub fn cmd_simulate(cfg: &RunConfig, select: &SelectArgs) -> Result<Outcome> {
    prepare_out(cfg)?;
    let sol = choose(cfg, select)?;
    let model = build_a0(&cfg.spec, &sol.f)?;
    let trace = simulate(&model, cfg.v0, cfg.samples)?;
    let report = verify_transfer_with(&trace, &cfg.tolerances);
    let mut files = Vec::new();
    if cfg.wants(Format::Json) {
        files.push(write_json(cfg, "simulate", "trace.json", &trace)?);
    }
    if cfg.wants(Format::Csv) {
        files.push(write_csv(cfg, "simulate", "trace.csv", |b| trace.write_csv(b))?);
    }
    files.push(write_json(cfg, "simulate", "transfer.json", &json!({ "solution": sol, "transfer": report }))?);
    write_run_manifest(cfg, "simulate", &files)?;
    println!(
        "v_L(T) = {:.9} (n v0 = {}), endpoint residual {:.3e}, energy drift {:.3e}",
        report.load_voltage,
        cfg.spec.n() as f64 * cfg.v0,
        report.endpoint_residual,
        report.energy_drift
    );
    Ok(if report.passed {
        Outcome::Pass
    } else {
        Outcome::Fail("energy transfer check".into())
    })
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Outcome> {
    prepare_out(cfg)?;
    let set = enumerate_for(cfg)?;
    let mut files = Vec::new();
    let mut table = Vec::new();
    for (i, sol) in set.solutions.iter().enumerate() {
        let sens = condition_of_f(&sol.f, &cfg.tolerances)?;
        let model = build_a0(&cfg.spec, &sol.f)?;
        let grid = pseudospectrum(&model, Window::around(&model), (cfg.resolution, cfg.resolution), &DEFAULT_EPSILONS)?;
        let stem = format!("pseudospectrum_{}", i + 1);
        if cfg.wants(Format::Json) {
            files.push(write_json(cfg, "analyze", &format!("{stem}.json"), &grid)?);
        }
        if cfg.wants(Format::Csv) {
            files.push(write_csv(cfg, "analyze", &format!("{stem}.csv"), |b| grid.write_csv(b))?);
        }
        println!("{:3}  cond {:.4}  grid max {:.4e}{}", i + 1, sens.max_condition, grid.max(), if sol.regular { "  (regular)" } else { "" });
        table.push(json!({
            "index": i + 1,
            "scaled": sol.scaled,
            "regular": sol.regular,
            "sensitivity": sens,
            "grid_max": grid.max(),
        }));
    }
    if cfg.wants(Format::Json) {
        files.push(write_json(cfg, "analyze", "conditions.json", &table)?);
    }
    if cfg.wants(Format::Csv) {
        files.push(write_csv(cfg, "analyze", "conditions.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["index", "max_condition", "regular"])?;
            for row in &table {
                w.write_record([
                    row["index"].to_string(),
                    format!("{:.10}", row["sensitivity"]["max_condition"].as_f64().unwrap_or(f64::NAN)),
                    row["regular"].to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        })?);
    }
    write_run_manifest(cfg, "analyze", &files)?;
    Ok(if set.complete { Outcome::Pass } else { Outcome::Incomplete })
}

pub fn cmd_netlist(cfg: &RunConfig, select: &SelectArgs) -> Result<Outcome> {
    prepare_out(cfg)?;
    let sol = choose(cfg, select)?;
    let text = format!("{}{}", csv_header(cfg, "netlist").replacen('#', "*", 1), netlist(&cfg.spec, &sol.k, cfg.v0)?);
    parse_netlist(&text)?;
    let path = cfg.out.join("marx.cir");
    fs::write(&path, &text)?;
    write_run_manifest(cfg, "netlist", &[path.clone()])?;
    println!("wrote {}", path.display());
    Ok(Outcome::Pass)
}

pub fn cmd_verify(cfg: &RunConfig, solution: &Path) -> Result<Outcome> {
    prepare_out(cfg)?;
    let tol = &cfg.tolerances;
    let k = read_solution(solution, &cfg.spec, None)?;
    let sol = crate::solver::design_solution(&cfg.spec, k, tol)?;
    let validation = validate_with(&sol, &cfg.spec, tol)?;
    let model = build_a0(&cfg.spec, &sol.f)?;
    let modal = modal_report(&model, tol)?;
    let transfer = verify_transfer_with(&simulate(&model, cfg.v0, cfg.samples)?, tol);
    let path = write_json(
        cfg,
        "verify",
        "verify.json",
        &json!({ "solution": sol, "validation": validation, "modal": modal, "transfer": transfer }),
    )?;
    write_run_manifest(cfg, "verify", &[path])?;
    let mut failures = validation.failures.clone();
    if !modal.passed {
        failures.push("modal structure".into());
    }
    if !transfer.passed {
        failures.push("energy transfer".into());
    }
    println!(
        "spectral error {:.3e}, modal deviation {:.3e}, transfer residual {:.3e}",
        validation.eig_error, modal.design_deviation, transfer.endpoint_residual
    );
    Ok(if failures.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail(failures.join("; "))
    })
}
