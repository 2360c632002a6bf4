//! Command-line front end: `run`, `compare`, `sweep`, `slice`.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3
//! simulation failure, 4 file I/O failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::report::build_report;
use crate::config::RunConfig;
use crate::error::Error;
use crate::excitation::StrategyKind;
use crate::io;
use crate::scenario::{RunOptions, ScenarioRun};
use crate::sweep::{run_sweep, with_pool, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Planes written by `run`, in rotor diameters.
pub const RUN_SLICE_PLANES: [f64; 7] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];

#[derive(Debug, Parser)]
#[command(name = "helixwake", version, about = "Wake-mixing pitch control simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one strategy and write its time series and wake slices.
    Run(RunArgs),
    /// Compare strategies against the baseline and write the report.
    Compare(CompareArgs),
    /// Grid search over Strouhal number and amplitude.
    Sweep(SweepArgs),
    /// Export one wake slice as grid text, CSV and PNG heatmap.
    Slice(SliceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration. Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Simulated time, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Time step, s.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// baseline, yaw-dipc, tilt-dipc, helix-ccw, helix-cw, dic or sic.
    #[arg(long)]
    pub strategy: StrategyKind,
    /// Write slices averaged over the analysis window instead of the final state.
    #[arg(long)]
    pub time_mean: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated strategies; the config list when omitted.
    #[arg(long, value_delimiter = ',')]
    pub strategy: Vec<StrategyKind>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// TOML sweep specification.
    #[arg(long)]
    pub sweep: PathBuf,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[command(flatten)]
    pub common: Common,
    /// baseline, yaw-dipc, tilt-dipc, helix-ccw, helix-cw, dic or sic.
    #[arg(long)]
    pub strategy: StrategyKind,
    /// Downstream distance in rotor diameters.
    #[arg(long)]
    pub x: f64,
    /// Average over the analysis window.
    #[arg(long)]
    pub time_mean: bool,
    /// Write `(u - u_baseline) / U` instead of the velocity.
    #[arg(long)]
    pub relative: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: format!("configuration error: {e}"),
        }
    }

    fn simulation(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_SIMULATION,
            message: format!("simulation error: {e}"),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("i/o error on {}: {e}", path.display()),
        }
    }
}

type CmdResult = std::result::Result<(), CliError>;

fn read_text(path: &Path) -> std::result::Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_config(common: &Common) -> std::result::Result<RunConfig, CliError> {
    let mut cfg: RunConfig = match &common.config {
        Some(path) => toml::from_str(&read_text(path)?).map_err(|e| CliError::config(Error::from(e)))?,
        None => RunConfig::default(),
    };
    if let Some(d) = common.duration {
        cfg.duration = d;
    }
    if let Some(dt) = common.dt {
        cfg.dt = dt;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate().map_err(CliError::config)?;
    Ok(cfg)
}

fn provenance(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("config-hash: {}", cfg.hash()),
        format!("helixwake {}", env!("CARGO_PKG_VERSION")),
    ]
}

fn output_dir(cfg: &RunConfig) -> std::result::Result<&Path, CliError> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir)
}

fn write(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn plane_tag(x: f64) -> String {
    format!("{x}D")
}

fn simulate(cfg: &RunConfig, kind: StrategyKind, planes: &[f64]) -> std::result::Result<ScenarioRun, CliError> {
    let scenario = cfg.scenario();
    let options = RunOptions {
        mean_slice_planes: planes.to_vec(),
    };
    scenario
        .run_strategy(&scenario.strategy(kind), &options)
        .map_err(CliError::simulation)
}

pub fn cmd_run(args: &RunArgs) -> CmdResult {
    let cfg = load_config(&args.common)?;
    let scenario = cfg.scenario();
    let planes: Vec<f64> = RUN_SLICE_PLANES
        .iter()
        .copied()
        .filter(|&x| x <= cfg.grid.x_extent)
        .collect();
    let run = simulate(&cfg, args.strategy, if args.time_mean { &planes } else { &[] })?;
    let dir = output_dir(&cfg)?;
    let header = provenance(&cfg);
    let name = args.strategy.name();

    let csv = io::timeseries_to_csv(&run.series, &header).map_err(CliError::simulation)?;
    write(&dir.join(format!("{name}_timeseries.csv")), &csv)?;

    let model = scenario.wake_model().map_err(CliError::simulation)?;
    for &x in &planes {
        let slice = if args.time_mean {
            run.wake.mean_slice(x).cloned().expect("requested plane")
        } else {
            model.slice(&run.wake.final_state, x).map_err(CliError::simulation)?
        };
        let stem = format!("{name}_slice_{}", plane_tag(x));
        write(&dir.join(format!("{stem}.grid")), &io::slice_to_grid(&slice, &header))?;
        let csv = io::slice_to_csv(&slice, &header).map_err(CliError::simulation)?;
        write(&dir.join(format!("{stem}.csv")), &csv)?;
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let mut cfg = load_config(&args.common)?;
    if !args.strategy.is_empty() {
        cfg.strategies = args.strategy.clone();
    }
    let kinds = cfg.strategies_with_baseline();
    let scenario = cfg.scenario();
    let f_e = scenario.excitation_frequency().map_err(CliError::config)?;

    let runs = with_pool(|| {
        kinds
            .par_iter()
            .map(|&k| scenario.run(k))
            .collect::<crate::Result<Vec<_>>>()
    })
    .map_err(CliError::config)?
    .map_err(CliError::simulation)?;
    let report = build_report(&runs, cfg.flow.turbulence_intensity, f_e).map_err(CliError::simulation)?;

    let dir = output_dir(&cfg)?;
    let header = provenance(&cfg);
    let csv = report.to_csv(&header).map_err(CliError::simulation)?;
    write(&dir.join("report.csv"), &csv)?;
    let table = report.to_table();
    let mut text: String = header.iter().map(|h| format!("# {h}\n")).collect();
    text.push_str(&table);
    write(&dir.join("report.txt"), &text)?;
    print!("{table}");
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let cfg = load_config(&args.common)?;
    let spec = SweepSpec::from_toml(&read_text(&args.sweep)?).map_err(CliError::config)?;
    let result = run_sweep(&spec, &cfg.scenario()).map_err(CliError::simulation)?;
    let dir = output_dir(&cfg)?;
    let csv = result.to_csv(&spec, &provenance(&cfg)).map_err(CliError::simulation)?;
    write(&dir.join(format!("sweep_{}.csv", spec.strategy.name())), &csv)?;
    for f in &result.failures {
        eprintln!("failed point St={} A={}: {}", f.strouhal, f.amplitude, f.message);
    }
    if let Some(best) = result.best() {
        println!(
            "best: St={} A={} objective={:.3}",
            best.strouhal, best.amplitude, best.objective
        );
    }
    Ok(())
}

pub fn cmd_slice(args: &SliceArgs) -> CmdResult {
    let cfg = load_config(&args.common)?;
    if !(args.x.is_finite() && args.x > 0.0 && args.x <= cfg.grid.x_extent) {
        return Err(CliError::config(Error::InvalidInput {
            field: "x".into(),
            reason: format!("{} D outside the wake domain (0, {}] D", args.x, cfg.grid.x_extent),
        }));
    }
    let scenario = cfg.scenario();
    let model = scenario.wake_model().map_err(CliError::simulation)?;
    let planes = [args.x];
    let pick = |run: &ScenarioRun| -> std::result::Result<crate::wake::SliceField, CliError> {
        if args.time_mean {
            Ok(run.wake.mean_slice(args.x).cloned().expect("requested plane"))
        } else {
            model.slice(&run.wake.final_state, args.x).map_err(CliError::simulation)
        }
    };
    let slice = pick(&simulate(&cfg, args.strategy, &planes)?)?;
    let (slice, center) = if args.relative {
        let base = pick(&simulate(&cfg, StrategyKind::Baseline, &planes)?)?;
        let rel = slice
            .relative_to(&base, cfg.flow.wind_speed)
            .map_err(CliError::simulation)?;
        (rel, 0.0)
    } else {
        (slice, cfg.flow.wind_speed)
    };

    let dir = output_dir(&cfg)?;
    let header = provenance(&cfg);
    let mut stem = format!("{}_{}", args.strategy.name(), plane_tag(args.x));
    if args.time_mean {
        stem.push_str("_mean");
    }
    if args.relative {
        stem.push_str("_rel");
    }
    // Plane tags may contain a dot, so extensions are appended, not set.
    write(&dir.join(format!("{stem}.grid")), &io::slice_to_grid(&slice, &header))?;
    let csv = io::slice_to_csv(&slice, &header).map_err(CliError::simulation)?;
    write(&dir.join(format!("{stem}.csv")), &csv)?;
    let png = dir.join(format!("{stem}.png"));
    io::write_heatmap(&slice, center, &png).map_err(|e| CliError::io(&png, e))?;
    println!("wrote {}", png.display());
    Ok(())
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Slice(a) => cmd_slice(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
