use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::json;

use dicke::experiments::config::{Engine, Grid, InitialState, RunConfig};
use dicke::experiments::critical::{critical_line, CriticalLineSpec};
use dicke::experiments::quench::with_lab_frame_spin;
use dicke::experiments::{contours, ground_state_report, run_quench, scan, write_atomic, write_csv_atomic, Manifest, Schedule, ScanSpec};
use dicke::mexhat::{self, MexHatParams};
use dicke::TimeSeries;

#[derive(Parser, Debug)]
#[command(name = "dicke", version, about = "Simulations of the rotationally driven Dicke model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override `output.dir`.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Override the coupling λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the drive velocity δφ.
    #[arg(long)]
    delta_phi: Option<f64>,
    /// Override the run length in drive periods.
    #[arg(long)]
    periods: Option<f64>,
}

#[derive(Args, Debug)]
struct EngineArgs {
    /// quantum, meanfield, linear or geomphase.
    #[arg(long)]
    engine: Option<Engine>,
    /// meanfield, exact or preset.
    #[arg(long)]
    initial: Option<String>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, requires_all = ["stop", "count"])]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact and mean-field ground states of the undriven and co-rotating Hamiltonians.
    GroundState(#[command(flatten)] Common),
    /// Quench into the rotating frame and record the observables.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Scan the coupling λ.
    ScanLambda {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Scan the drive velocity δφ.
    ScanDphi {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Locate the darkness minimum per δφ and fit the dynamic critical line.
    CriticalLine(#[command(flatten)] Common),
    /// Orbits in the isotropic quartic double well.
    Mexhat {
        #[command(flatten)]
        common: Common,
        /// Closed-form and numerical ⟨ρ²⟩ over a grid of depths.
        #[arg(long)]
        sweep_eps: bool,
    },
    /// Classical potential V(Q, q) in the co-rotating frame.
    Contours(#[command(flatten)] Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::GroundState(c) | Command::CriticalLine(c) | Command::Contours(c) => c,
            Command::Evolve { common, .. }
            | Command::ScanLambda { common, .. }
            | Command::ScanDphi { common, .. }
            | Command::Mexhat { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::GroundState(_) => "ground-state",
            Command::Evolve { .. } => "evolve",
            Command::ScanLambda { .. } => "scan-lambda",
            Command::ScanDphi { .. } => "scan-dphi",
            Command::CriticalLine(_) => "critical-line",
            Command::Mexhat { .. } => "mexhat",
            Command::Contours(_) => "contours",
        }
    }
}

fn load_config(common: &Common, engine: Option<&EngineArgs>) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config).with_context(|| format!("reading {}", common.config.display()))?;
    if let Some(l) = common.lambda {
        cfg.model = cfg.model.with_lambda(l);
    }
    if let Some(d) = common.delta_phi {
        cfg.model = cfg.model.with_delta_phi(d);
    }
    if let Some(t) = common.periods {
        cfg.protocol.periods = Some(t);
    }
    if let Some(dir) = &common.out_dir {
        cfg.output.dir = dir.clone();
    }
    if let Some(e) = engine {
        if let Some(kind) = e.engine {
            cfg.engine.kind = kind;
        }
        if let Some(init) = &e.initial {
            cfg.engine.initial = Some(match init.as_str() {
                "meanfield" => InitialState::Meanfield,
                "exact" => InitialState::Exact,
                "preset" => InitialState::Preset,
                other => bail!("unknown initial state '{other}' (expected meanfield, exact or preset)"),
            });
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn grid_override(cfg_grid: Option<Grid>, args: &GridArgs, what: &str) -> anyhow::Result<Grid> {
    match (args.start, args.stop, args.count) {
        (Some(a), Some(b), Some(n)) => Ok(Grid::new(a, b, n)?),
        _ => cfg_grid.with_context(|| format!("no {what} grid: set protocol.scan.{what} or pass --start/--stop/--count")),
    }
}

struct Outputs {
    dir: PathBuf,
    stem: String,
    manifest: Manifest,
}

impl Outputs {
    fn new(cfg: &RunConfig, command: &str) -> Self {
        Outputs {
            dir: cfg.output.dir.clone(),
            stem: cfg.output.stem.clone().unwrap_or_else(|| command.to_string()),
            manifest: Manifest::new(command, cfg),
        }
    }

    fn csv(&mut self, suffix: &str, series: &TimeSeries) -> anyhow::Result<()> {
        let path = self.dir.join(format!("{}{suffix}.csv", self.stem));
        write_csv_atomic(&path, series)?;
        self.manifest.outputs.push(path);
        Ok(())
    }

    /// The manifest goes last, so its presence marks a completed run.
    fn finish(self) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(format!("{}.manifest.json", self.stem));
        write_atomic(&path, self.manifest.to_json()?.as_bytes())?;
        Ok(path)
    }
}

fn run(cmd: &Command) -> anyhow::Result<PathBuf> {
    let engine_args = match cmd {
        Command::Evolve { engine, .. } | Command::ScanLambda { engine, .. } | Command::ScanDphi { engine, .. } => {
            Some(engine)
        }
        _ => None,
    };
    let cfg = load_config(cmd.common(), engine_args)?;
    let mut out = Outputs::new(&cfg, cmd.name());
    let p = cfg.model;

    match cmd {
        Command::GroundState(_) => out.csv("", &ground_state_report(&p)?)?,
        Command::Evolve { .. } => {
            let schedule = Schedule::in_periods(&p, cfg.periods(), cfg.protocol.samples_per_period);
            let mut series = run_quench(&p, &cfg.engine, schedule)?;
            if matches!(cfg.engine.kind, Engine::Meanfield | Engine::Linear) {
                series = with_lab_frame_spin(&series, &p)?;
            }
            out.manifest.summary = json!({ "samples": series.len(), "truncated": series.truncated });
            out.csv("", &series)?;
        }
        Command::ScanLambda { grid, .. } | Command::ScanDphi { grid, .. } => {
            let along_lambda = matches!(cmd, Command::ScanLambda { .. });
            let mut spec = ScanSpec {
                base: p,
                engine: cfg.engine,
                lambda: None,
                delta_phi: None,
                periods: cfg.periods(),
                samples_per_period: cfg.protocol.samples_per_period,
            };
            if along_lambda {
                spec.lambda = Some(grid_override(cfg.protocol.scan.lambda, grid, "lambda")?);
            } else {
                spec.delta_phi = Some(grid_override(cfg.protocol.scan.delta_phi, grid, "delta_phi")?);
            }
            let result = scan(&spec)?;
            for f in &result.failures {
                eprintln!("point {} (lambda={}, delta_phi={}) failed: {}", f.index, f.lambda, f.delta_phi, f.message);
            }
            out.csv("", &result.table)?;
            out.manifest.failures = result.failures;
        }
        Command::CriticalLine(_) => {
            let cl = &cfg.protocol.critical_line;
            let fit = critical_line(&CriticalLineSpec {
                base: p,
                engine: cfg.engine,
                delta_phi: cl.delta_phi.values(),
                lambda_step: cl.lambda_step,
                lambda_span: cl.lambda_span,
                periods: cfg.periods(),
                samples_per_period: cfg.protocol.samples_per_period,
            })?;
            out.manifest.summary = json!({
                "lambda_c0": fit.lambda_c0,
                "coefficient": fit.coefficient,
                "exponent": fit.exponent,
                "rms_residual": fit.rms_residual,
                "max_residual": fit.max_residual,
                "within_resolution": fit.within_resolution(),
            });
            println!("lambda_min = {:.4} + {:.4} * delta_phi^{:.4}", fit.lambda_c0, fit.coefficient, fit.exponent);
            out.csv("", &fit.table())?;
        }
        Command::Mexhat { sweep_eps, .. } => {
            let m = cfg.protocol.mexhat;
            let params = MexHatParams::new(m.mass, m.quadratic, m.quartic, m.depth)?;
            let tol = mexhat::default_tolerances();
            if *sweep_eps {
                let depths = mexhat::default_depth_grid(&params, m.points);
                out.csv("", &mexhat::sweep(&params, &depths, m.half_periods, tol)?)?;
            } else {
                let t_half = mexhat::half_period(&params);
                if !t_half.is_finite() {
                    bail!("depth {} sits on the separatrix; the orbit never returns", m.depth);
                }
                let (_, plus) = mexhat::turning_points(&params);
                let t_final = t_half * m.half_periods as f64;
                let dt = t_half / m.samples_per_half_period.max(1) as f64;
                let series = mexhat::integrate_mexhat([plus, 0.0], [0.0, 0.0], &params, t_final, dt, tol)?;
                out.manifest.summary = json!({
                    "half_period": t_half,
                    "avg_rho2": mexhat::average_rho_squared(&params),
                });
                out.csv("", &series)?;
            }
        }
        Command::Contours(_) => out.csv("", &contours(&p, &cfg.protocol.contours)?)?,
    }
    out.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let config = &cli.command.common().config;
    if !Path::new(config).is_file() {
        eprintln!("error: config file {} not found\n", config.display());
        let _ = Cli::command().print_help();
        return ExitCode::from(2);
    }
    match run(&cli.command) {
        Ok(manifest) => {
            eprintln!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
