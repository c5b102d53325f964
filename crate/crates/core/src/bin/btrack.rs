//! Scenario-driven command line for the boundary tracking simulator.
//!
//! Subcommands: `run` (single trial, trace/summary/plot artifacts),
//! `compare` (paired-seed batches per strategy, mean/std table), `omega`
//! (worst-case angular speed bound breakdown), `ranges` (communication and
//! sensing range bounds versus the scenario's radios).
//!
//! Exit codes: 0 success, 2 validation or I/O failure, 3 non-convergence
//! under `--require-convergence`. Failures also emit one machine-readable
//! JSON object on stderr: `{"error":{"kind":...,"message":...}}`.

use boundary_tracking::engine::{run, run_batch, write_csv, SimTrace, Strategy};
use boundary_tracking::limited_range::{necessary_bounds, sufficient_bounds};
use boundary_tracking::scenario::{parse_scenario, BuiltScenario, ScenarioError};
use boundary_tracking::svg;
use clap::{Parser, Subcommand};
use serde_json::json;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "btrack", version, about = "boundary tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trace/summary/plot artifacts
    Run {
        /// scenario file (TOML)
        scenario: PathBuf,
        /// override a scenario field by dot path, e.g. --set run.sigma=0.05
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        /// seed override (takes precedence over the scenario's run.seed)
        #[arg(long)]
        seed: Option<u64>,
        /// exit with status 3 if the run does not converge
        #[arg(long)]
        require_convergence: bool,
        /// output directory (overrides the scenario's output.dir)
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// write SVG plots even if the scenario leaves output.plots off
        #[arg(long)]
        plots: bool,
    },
    /// Run paired-seed batches per strategy and print a comparison table
    Compare {
        /// scenario file (TOML); its strategy field is replaced per column
        scenario: PathBuf,
        /// strategies to compare (comma separated)
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "constant,self_triggered"
        )]
        strategies: Vec<String>,
        /// trials per strategy; trial t of every strategy shares a seed
        #[arg(long, default_value_t = 30)]
        trials: usize,
        /// base seed; trial seeds are base, base+1, ...
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// write bar charts with standard-deviation whiskers
        #[arg(long)]
        plots: bool,
        /// print the table as JSON instead of aligned text
        #[arg(long)]
        json: bool,
    },
    /// Print the worst-case angular speed bound for the scenario geometry
    Omega {
        scenario: PathBuf,
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        /// print JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Check the scenario's radio ranges against the geometric bounds
    Ranges {
        scenario: PathBuf,
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        /// print JSON instead of text
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::NonConvergence(_) => "non_convergence",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<boundary_tracking::engine::EngineError> for CliError {
    fn from(e: boundary_tracking::engine::EngineError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{payload}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, set, seed, require_convergence, out_dir, plots } => {
            cmd_run(&scenario, &set, seed, require_convergence, out_dir, plots)
        }
        Command::Compare {
            scenario,
            strategies,
            trials,
            seed,
            set,
            out_dir,
            plots,
            json,
        } => cmd_compare(&scenario, &strategies, trials, seed, &set, out_dir, plots, json),
        Command::Omega { scenario, set, json } => cmd_omega(&scenario, &set, json),
        Command::Ranges { scenario, set, json } => cmd_ranges(&scenario, &set, json),
    }
}

fn read_scenario(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read scenario {}: {e}", path.display())))
}

/// Flag wins over the scenario's `run.seed`; otherwise one is generated
/// (and the caller prints it, so the run stays reproducible).
fn resolve_seed(flag: Option<u64>, file_seed: Option<u64>) -> (u64, bool) {
    match (flag, file_seed) {
        (Some(s), _) => (s, false),
        (None, Some(s)) => (s, false),
        (None, None) => (rand::random::<u64>(), true),
    }
}

/// The snake_case wire name of a serde-tagged unit variant.
fn tag<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| "?".to_owned())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = if xs.len() < 2 {
        0.0
    } else {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    (m, var.sqrt())
}

fn fnum(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        "-".to_owned()
    }
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn summary_json(scenario: &Path, built: &BuiltScenario, trace: &SimTrace) -> serde_json::Value {
    let cfg = &built.config;
    json!({
        "summary_schema": 1,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario.display().to_string(),
        "strategy": cfg.strategy,
        "estimator": cfg.estimator,
        "n_robots": cfg.n_robots,
        "dt": cfg.dt,
        "sigma": cfg.sigma,
        "omega_max": cfg.omega_max,
        "omega_breakdown": built.omega_breakdown,
        "summary": trace.summary,
    })
}

fn cmd_run(
    scenario_path: &Path,
    set: &[String],
    seed_flag: Option<u64>,
    require_convergence: bool,
    out_dir: Option<PathBuf>,
    plots_flag: bool,
) -> Result<(), CliError> {
    let text = read_scenario(scenario_path)?;
    let file = parse_scenario(&text, set)?;
    let (seed, generated) = resolve_seed(seed_flag, file.run.seed);
    let built = file.build(seed)?;
    let cfg = &built.config;
    println!("seed: {seed}{}", if generated { " (generated)" } else { "" });

    let trace = run(cfg)?;

    let out = out_dir.unwrap_or_else(|| PathBuf::from(&built.output.dir));
    fs::create_dir_all(&out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let mut wrote: Vec<String> = Vec::new();
    if built.output.csv {
        let path = out.join("trace.csv");
        let file = fs::File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        let mut w = io::BufWriter::new(file);
        write_csv(&trace, &mut w)?;
        w.flush()?;
        wrote.push(path.display().to_string());
    }
    if built.output.summary {
        let path = out.join("summary.json");
        let doc = summary_json(scenario_path, &built, &trace);
        write_text(&path, &format!("{:#}\n", doc))?;
        wrote.push(path.display().to_string());
    }
    if built.output.plots || plots_flag {
        let path = out.join("trajectories.svg");
        write_text(&path, &svg::trajectories(&trace, &cfg.polygon))?;
        wrote.push(path.display().to_string());
        let cerr: Vec<f64> = trace.records.iter().map(|r| r.cerr).collect();
        let path = out.join("cerr.svg");
        write_text(
            &path,
            &svg::series_chart(
                "ring configuration error",
                "error (rad)",
                &[("cerr".to_owned(), cerr)],
            ),
        )?;
        wrote.push(path.display().to_string());
        let terr: Vec<f64> = trace.records.iter().map(|r| r.terr).collect();
        let path = out.join("terr.svg");
        write_text(
            &path,
            &svg::series_chart(
                "target tracking error",
                "error (m)",
                &[("terr".to_owned(), terr)],
            ),
        )?;
        wrote.push(path.display().to_string());
    }

    let s = &trace.summary;
    println!("strategy: {}  estimator: {}", tag(&cfg.strategy), tag(&cfg.estimator));
    println!("steps: {}", s.steps);
    match s.ctime {
        Some(k) => println!("converged: yes (ctime = {k} steps)"),
        None => println!("converged: no"),
    }
    println!("com_bar: {:.6} messages/robot/step", s.com_bar);
    println!("final_cerr: {:.6} rad", s.final_cerr);
    println!("mean_terr: {:.6} m", s.mean_terr);
    if !wrote.is_empty() {
        println!("wrote: {}", wrote.join(", "));
    }

    if require_convergence && !s.converged {
        return Err(CliError::NonConvergence(format!(
            "run did not converge within {} steps (final_cerr = {:.6})",
            cfg.max_steps, s.final_cerr
        )));
    }
    Ok(())
}

fn parse_strategy(name: &str) -> Result<Strategy, CliError> {
    serde_json::from_value(serde_json::Value::String(name.trim().to_owned())).map_err(|_| {
        CliError::Validation(format!(
            "unknown strategy '{name}' (expected constant, self_triggered, or self_triggered_limited)"
        ))
    })
}

struct CompareRow {
    name: String,
    trials: usize,
    converged: usize,
    ctime_mean: f64,
    ctime_std: f64,
    com_mean: f64,
    com_std: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    scenario_path: &Path,
    strategy_names: &[String],
    trials: usize,
    seed_flag: Option<u64>,
    set: &[String],
    out_dir: Option<PathBuf>,
    plots_flag: bool,
    json_out: bool,
) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Validation("--trials must be at least 1".to_owned()));
    }
    if strategy_names.is_empty() {
        return Err(CliError::Validation("--strategies must name at least one strategy".to_owned()));
    }
    let strategies = strategy_names
        .iter()
        .map(|s| parse_strategy(s))
        .collect::<Result<Vec<_>, _>>()?;

    let text = read_scenario(scenario_path)?;
    let file = parse_scenario(&text, set)?;
    let (base_seed, generated) = resolve_seed(seed_flag, file.run.seed);
    let built = file.build(base_seed)?;
    if !json_out {
        // in JSON mode the seed is reported inside the document instead
        println!("base seed: {base_seed}{}", if generated { " (generated)" } else { "" });
    }
    let trial_seeds: Vec<u64> = (0..trials as u64).map(|i| base_seed.wrapping_add(i)).collect();

    let mut rows: Vec<CompareRow> = Vec::new();
    for strategy in &strategies {
        let mut cfg = built.config.clone();
        cfg.strategy = *strategy;
        let traces = run_batch(&cfg, &trial_seeds)?;
        let ctimes: Vec<f64> = traces
            .iter()
            .filter_map(|t| t.summary.ctime.map(|k| k as f64))
            .collect();
        let coms: Vec<f64> = traces.iter().map(|t| t.summary.com_bar).collect();
        let (ctime_mean, ctime_std) = mean_std(&ctimes);
        let (com_mean, com_std) = mean_std(&coms);
        rows.push(CompareRow {
            name: tag(strategy),
            trials,
            converged: ctimes.len(),
            ctime_mean,
            ctime_std,
            com_mean,
            com_std,
        });
    }

    let doc = json!({
        "compare_schema": 1,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario_path.display().to_string(),
        "base_seed": base_seed,
        "trials": trials,
        "rows": rows.iter().map(|r| json!({
            "strategy": r.name,
            "trials": r.trials,
            "converged": r.converged,
            "ctime_mean": r.ctime_mean,
            "ctime_std": r.ctime_std,
            "com_bar_mean": r.com_mean,
            "com_bar_std": r.com_std,
        })).collect::<Vec<_>>(),
    });

    if json_out {
        println!("{doc:#}");
    } else {
        println!(
            "{:<24} {:>6} {:>9} {:>11} {:>10} {:>12} {:>11}",
            "strategy", "trials", "converged", "ctime_mean", "ctime_std", "com_bar_mean",
            "com_bar_std"
        );
        for r in &rows {
            println!(
                "{:<24} {:>6} {:>9} {:>11} {:>10} {:>12} {:>11}",
                r.name,
                r.trials,
                r.converged,
                fnum(r.ctime_mean),
                fnum(r.ctime_std),
                fnum(r.com_mean),
                fnum(r.com_std)
            );
        }
        let baseline = &rows[0];
        for r in rows.iter().skip(1) {
            if baseline.com_mean > 0.0 && r.com_mean.is_finite() {
                println!(
                    "com_bar ratio {}/{}: {:.3}",
                    r.name,
                    baseline.name,
                    r.com_mean / baseline.com_mean
                );
            }
        }
    }

    let out = out_dir.unwrap_or_else(|| PathBuf::from(&built.output.dir));
    fs::create_dir_all(&out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let mut wrote: Vec<String> = Vec::new();
    if built.output.summary {
        let path = out.join("compare.json");
        write_text(&path, &format!("{doc:#}\n"))?;
        wrote.push(path.display().to_string());
    }
    if built.output.plots || plots_flag {
        let ctime_bars: Vec<(String, f64, f64)> = rows
            .iter()
            .map(|r| {
                let m = if r.ctime_mean.is_finite() { r.ctime_mean } else { 0.0 };
                let s = if r.ctime_std.is_finite() { r.ctime_std } else { 0.0 };
                (r.name.clone(), m, s)
            })
            .collect();
        let path = out.join("compare_ctime.svg");
        write_text(&path, &svg::bar_chart("convergence time", "steps", &ctime_bars))?;
        wrote.push(path.display().to_string());
        let com_bars: Vec<(String, f64, f64)> =
            rows.iter().map(|r| (r.name.clone(), r.com_mean, r.com_std)).collect();
        let path = out.join("compare_com.svg");
        write_text(
            &path,
            &svg::bar_chart("communication rate", "messages/robot/step", &com_bars),
        )?;
        wrote.push(path.display().to_string());
    }
    if !wrote.is_empty() && !json_out {
        println!("wrote: {}", wrote.join(", "));
    }
    Ok(())
}

fn cmd_omega(scenario_path: &Path, set: &[String], json_out: bool) -> Result<(), CliError> {
    let text = read_scenario(scenario_path)?;
    let file = parse_scenario(&text, set)?;
    let seed = file.run.seed.unwrap_or(0);
    let built = file.build(seed)?;
    match &built.omega_breakdown {
        None => {
            if json_out {
                let doc = json!({
                    "tool_version": env!("CARGO_PKG_VERSION"),
                    "mode": "fixed",
                    "omega_max": built.config.omega_max,
                });
                println!("{doc:#}");
            } else {
                println!(
                    "omega_max fixed by the scenario: {:.9} rad/s (geometric computation skipped)",
                    built.config.omega_max
                );
            }
        }
        Some(b) => {
            if json_out {
                let doc = json!({
                    "tool_version": env!("CARGO_PKG_VERSION"),
                    "mode": "computed",
                    "case1": b.case1,
                    "case2": b.case2,
                    "case3": b.case3,
                    "omega_max": b.omega_max,
                });
                println!("{doc:#}");
            } else {
                println!("edge chord, perpendicular foot on the edge (case 1): {:.9} rad/s", b.case1);
                println!("edge chord anchored at an edge endpoint   (case 2): {:.9} rad/s", b.case2);
                println!("vertex crossing with in-place turn        (case 3): {:.9} rad/s", b.case3);
                println!("omega_max = {:.9} rad/s", b.omega_max);
            }
        }
    }
    Ok(())
}

fn cmd_ranges(scenario_path: &Path, set: &[String], json_out: bool) -> Result<(), CliError> {
    let text = read_scenario(scenario_path)?;
    let file = parse_scenario(&text, set)?;
    let seed = file.run.seed.unwrap_or(0);
    let built = file.build(seed)?;
    let cfg = &built.config;
    let nec = necessary_bounds(&cfg.polygon, cfg.n_robots);
    let suf = sufficient_bounds(&cfg.polygon, cfg.n_robots);
    let r_c = cfg.ranges.communication;
    let r_s = cfg.ranges.sensing;
    let nec_rc = if r_c >= nec.r_c { "ok" } else { "warning" };
    let nec_rs = if r_s >= nec.r_s { "ok" } else { "warning" };
    let suf_rc = if r_c >= suf.r_c { "met" } else { "not met" };
    let suf_rs = if r_s >= suf.r_s { "met" } else { "not met" };
    let show = |v: f64| if v.is_finite() { format!("{v:.6}") } else { "unlimited".to_owned() };

    if json_out {
        let opt = |v: f64| if v.is_finite() { json!(v) } else { json!(null) };
        let doc = json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "n_robots": cfg.n_robots,
            "necessary": {"r_c": nec.r_c, "r_s": nec.r_s},
            "sufficient": {"r_c": suf.r_c, "r_s": suf.r_s},
            "scenario": {"r_c": opt(r_c), "r_s": opt(r_s)},
            "necessary_status": {"r_c": nec_rc, "r_s": nec_rs},
            "sufficient_status": {"r_c": suf_rc, "r_s": suf_rs},
        });
        println!("{doc:#}");
    } else {
        println!("robots: {}", cfg.n_robots);
        println!("necessary bounds (below these the uniform ring is unreachable):");
        println!("  r_c >= {:.6}   scenario r_c = {}   {}", nec.r_c, show(r_c), nec_rc);
        println!("  r_s >= {:.6}   scenario r_s = {}   {}", nec.r_s, show(r_s), nec_rs);
        println!("sufficient bounds (at or above these every start converges):");
        println!("  r_c >= {:.6}   scenario r_c = {}   {}", suf.r_c, show(r_c), suf_rc);
        println!("  r_s >= {:.6}   scenario r_s = {}   {}", suf.r_s, show(r_s), suf_rs);
    }
    Ok(())
}
