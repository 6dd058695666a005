use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ddest::channel::{generate_wssus, DDChannel};
use ddest::metrics::training_overhead_for;
use ddest_cli::{list_scenarios, preset, run_scenario, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ddest", version, about = "Delay-Doppler channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write results.csv, summary.json and config.toml.
    Run(RunArgs),
    /// List the scenario presets.
    List,
    /// Show a resolved configuration, or validate and summarise a channel file.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset id (see `ddest list`).
    #[arg(long)]
    scenario: Option<String>,
    /// Large-scale preset instead of the desk-scale default.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated SNR list in dB (`inf` for noiseless).
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output root; defaults to the config's `out` or `results`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (1 gives byte-identical reruns on any machine).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    source: Source,
    /// Channel realization file to validate.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Draw one WSSUS realization from the configuration and save it here.
    #[arg(long)]
    save_channel: Option<PathBuf>,
}

fn resolve(src: &Source) -> Result<ExperimentConfig> {
    let mut cfg = match (&src.config, &src.scenario) {
        (Some(path), scenario) => {
            if src.full {
                bail!("--full selects a preset and cannot be combined with --config");
            }
            let cfg = ExperimentConfig::load(path)?;
            if let Some(id) = scenario {
                if *id != cfg.scenario {
                    bail!("--scenario {id} disagrees with `scenario = \"{}\"` in {}", cfg.scenario, path.display());
                }
            }
            cfg
        }
        (None, Some(id)) => preset(id, src.full)?,
        (None, None) => bail!("pass --scenario <id> or --config <path>"),
    };
    if let Some(seed) = src.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = src.trials {
        cfg.trials = trials;
    }
    if let Some(snr) = &src.snr {
        cfg.snr_db = snr.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = resolve(&args.source)?;
    let root = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let report = run_scenario(&cfg, args.threads)?;
    let dir = report.write(&root)?;
    println!("{}: {} rows in {:.2} s -> {}", cfg.scenario, report.table.len(), report.wall_clock_s, dir.display());
    Ok(())
}

fn list() {
    println!("{:<20} {:<12} description", "id", "kind");
    for s in list_scenarios() {
        println!("{:<20} {:<12} {}", s.id, s.kind, s.description);
    }
}

fn describe_channel(ch: &DDChannel) {
    println!(
        "paths = {}, tau_D = {:e} s, nu_D = {:e} Hz, total power = {:.6}, seed = {:?}",
        ch.paths().len(),
        ch.delay_spread(),
        ch.doppler_spread(),
        ch.total_power(),
        ch.seed()
    );
}

fn inspect(args: &InspectArgs) -> Result<()> {
    if let Some(path) = &args.channel {
        let ch = DDChannel::load(path).with_context(|| format!("loading {}", path.display()))?;
        describe_channel(&ch);
        if args.source.config.is_none() && args.source.scenario.is_none() {
            return Ok(());
        }
    }
    let cfg = resolve(&args.source)?;
    print!("{}", cfg.to_toml()?);
    let nu = cfg.doppler_spread().ok();
    if let Ok(grid) = cfg.grid() {
        println!(
            "# T = {:e} s, F = {:e} Hz, B = {:e} Hz, S = {:e} s, BS = {}",
            grid.symbol_duration(),
            grid.subcarrier_spacing(),
            grid.bandwidth(),
            grid.frame_length(),
            grid.bs()
        );
        if let Ok(p) = cfg.pattern(&grid) {
            println!("# pilot grid {} x {}, overhead {:.5}", p.n_pilots(), p.m_pilots(), p.overhead());
        }
        if let Some(nu) = nu {
            let o = training_overhead_for(&grid, cfg.channel.delay_spread, nu)?;
            println!("# minimum pilot slots {}, overhead ratio {:.5} (exact {:.5})", o.min_slots, o.ratio, o.exact_ratio);
        }
    }
    if let Some(path) = &args.save_channel {
        let nu = match nu {
            Some(nu) => nu,
            None => cfg.sweep.speeds_mps.first().map(|&v| cfg.doppler_for_speed(v)).context("no Doppler spread in config")?,
        };
        let ch = generate_wssus(cfg.channel.delay_spread, nu, cfg.channel.paths, cfg.seed)?;
        ch.save(path)?;
        describe_channel(&ch);
        println!("# saved to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            list();
            Ok(())
        }
        Command::Inspect(args) => inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
