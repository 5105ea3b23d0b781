use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trapflow::dynamics::Mode;
use trapflow_harness::{exit, run_campaign, HarnessError, LoadedConfig, Overrides, Task};

#[derive(Parser)]
#[command(name = "trapflow", version, about = "Trap-model campaigns on implicit graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Campaign config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Default)]
struct SimulateFlags {
    /// e.g. `hypercube:20` or `complete:65536`.
    #[arg(long)]
    graph: Option<String>,
    /// e.g. `rem:beta=3` or `pareto:alpha=0.1,scale=1`.
    #[arg(long)]
    landscape: Option<String>,
    /// e.g. `rem:alpha=0.2`, `pareto:target_r=500` or `explicit:alpha=0.5,g=10,b=0.05,f=1`.
    #[arg(long)]
    scales: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Upper deep-trap threshold; `inf` allowed.
    #[arg(long)]
    em: Option<f64>,
    /// Horizon T in units of r_n steps.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    /// Comma-separated sample times in units of r_n.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "quenched" => Ok(Mode::Quenched),
        "annealed" => Ok(Mode::Annealed),
        _ => Err(format!("expected quenched or annealed, got {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Clock and deep-trap traces per replica.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: SimulateFlags,
    },
    /// Two-time correlation estimates.
    Aging(Common),
    /// Condition audit reports.
    Conditions(Common),
    /// Reference draws and fdd values of the extremal process.
    ExtremalReference(Common),
    /// Print the scale summary of a config as JSON.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    let (task, common, flags) = match cli.command {
        Command::Report { config } => {
            let lc = LoadedConfig::load(&config, &Overrides::default())?;
            let report = trapflow_harness::tasks::scale_report(&lc)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("json value"));
            return Ok(exit::OK);
        }
        Command::Simulate { common, flags } => (Task::Simulate, common, flags),
        Command::Aging(c) => (Task::Aging, c, SimulateFlags::default()),
        Command::Conditions(c) => (Task::Conditions, c, SimulateFlags::default()),
        Command::ExtremalReference(c) => (Task::ExtremalReference, c, SimulateFlags::default()),
    };
    let overrides = Overrides {
        task: Some(task),
        graph: flags.graph,
        landscape: flags.landscape,
        scales: flags.scales,
        epsilon: flags.epsilon,
        em: flags.em,
        horizon: flags.horizon,
        replicas: flags.replicas,
        grid: flags.grid,
        seed: flags.seed,
        mode: flags.mode,
    };
    let lc = LoadedConfig::load(&common.config, &overrides)?;
    let parallelism = common.parallelism.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let manifest = run_campaign(&lc, parallelism, &common.out)?;
    eprintln!(
        "{}: {} outputs in {} (config {}, exit {})",
        manifest.task,
        manifest.outputs.len(),
        common.out.display(),
        &manifest.config_hash[..12],
        manifest.exit_status
    );
    Ok(manifest.exit_status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("trapflow: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
