use clap::{Parser, Subcommand};
use needlab::field::SphereDensity;
use needlab::needlet::NeedletFrame;
use needlab_cli::config::ExperimentConfig;
use needlab_cli::report::{emit_report, write_json, ReportFormat};
use needlab_cli::sweep::{bound_reports, run_sweep_with, SweepContext};
use needlab_cli::{demo_point_source_test, demo_threshold_density, HarnessError, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "needlab", version, about = "Needlet coefficients of spherical Poisson fields: simulations and bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<ReportFormat>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Window, cubature and localization audit of the frame.
    FrameCheck,
    /// Replicated simulations over the configured grid.
    Sweep,
    /// Needlet thresholding density estimation.
    DemoThreshold,
    /// Max-coefficient test for point sources.
    DemoSources,
    /// Bound reports only, no simulation.
    Bounds,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| HarnessError::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.base_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load(cli)?;
    let out = |name: &str| cfg.output.dir.join(format!("{}_{name}.json", cfg.output.stem));
    match cli.command {
        Command::FrameCheck => {
            let top = cfg.j.iter().copied().max().unwrap_or(1).max(1);
            let frame = NeedletFrame::build(cfg.base, top).map_err(|e| core(e, "building the frame"))?;
            let diag = frame.diagnostics(&[1.0, 2.0, 3.0]).map_err(|e| core(e, "frame diagnostics"))?;
            let loc = frame.fit_localization(cfg.tau, 4000).map_err(|e| core(e, "localization fit"))?;
            let path = out("frame");
            write_json(&(diag, loc), &path)?;
            println!("{}", path.display());
        }
        Command::Sweep => {
            cfg.check_budget()?;
            let ctx = SweepContext::new(&cfg)?;
            let table = run_sweep_with(&cfg, &ctx)?;
            let formats = match cli.format {
                Some(f) => vec![f],
                None => vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg],
            };
            for f in formats {
                println!("{}", emit_report(&table, f, &cfg.output)?.display());
            }
        }
        Command::DemoThreshold => {
            let params = cfg.threshold.clone().ok_or_else(|| HarnessError::Config("missing \"threshold\" section".into()))?;
            let density = SphereDensity::from_spec(&cfg.density).map_err(|e| core(e, "density"))?;
            let frame = NeedletFrame::build(cfg.base, params.j_max.max(1)).map_err(|e| core(e, "building the frame"))?;
            let table = demo_threshold_density(&frame, &density, &params, cfg.base_seed)?;
            let path = out("threshold");
            write_json(&table, &path)?;
            println!("{}", path.display());
        }
        Command::DemoSources => {
            let params =
                cfg.source_test.clone().ok_or_else(|| HarnessError::Config("missing \"source_test\" section".into()))?;
            let density = SphereDensity::from_spec(&cfg.density).map_err(|e| core(e, "density"))?;
            let frame = NeedletFrame::build(cfg.base, params.j.max(1)).map_err(|e| core(e, "building the frame"))?;
            let locations: Vec<_> = cfg.sources().iter().map(|s| s.location).collect();
            let table = demo_point_source_test(&frame, &density, &locations, &params, cfg.base_seed)?;
            let path = out("sources");
            write_json(&table, &path)?;
            println!("{}", path.display());
        }
        Command::Bounds => {
            let ctx = SweepContext::new(&cfg)?;
            let reports = bound_reports(&cfg, &ctx)?;
            let path = out("bounds");
            write_json(&(&ctx.constants, ctx.kappa, reports), &path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn core(source: needlab::Error, context: &str) -> HarnessError {
    HarnessError::Core { context: context.into(), source }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
