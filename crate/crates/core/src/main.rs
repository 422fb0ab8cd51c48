use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use autoca::experiment::{compare, preset, run_all, AgentFamily, ExperimentConfig, RunError, PRESETS};

#[derive(Parser)]
#[command(name = "autoca", version, about = "Channel-access simulation and multi-agent learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset, a single arm, or a config file and write result directories.
    Run(RunArgs),
    /// Summarize finished runs side by side.
    Compare {
        /// Arm directories or output directories holding several arms.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Named preset (see --list-presets).
    #[arg(long, conflicts_with_all = ["topology", "config"])]
    preset: Option<String>,
    /// Topology name such as `topo3p` or group notation like `{A,B|C}`.
    #[arg(long)]
    topology: Option<String>,
    /// Agent family: madrl-ht, madrl-alt-obs, madrl-alpha-reward, csma or rtscts.
    #[arg(long, requires = "topology")]
    agent: Option<String>,
    /// TOML file with a full arm configuration.
    #[arg(long, conflicts_with = "topology")]
    config: Option<PathBuf>,
    /// Either a count (`3` means seeds 1..=3) or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// Training epochs for learned agents.
    #[arg(long)]
    epochs: Option<usize>,
    /// Slots per evaluation window.
    #[arg(long)]
    eval_window: Option<u64>,
    /// Output directory; each arm writes a subdirectory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, RunError> {
    let bad = || RunError::Config(format!("cannot parse seeds from {text:?}"));
    if text.contains(',') {
        return text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect();
    }
    let n: u64 = text.trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((1..=n).collect())
}

fn arms(args: &RunArgs) -> Result<Vec<ExperimentConfig>, RunError> {
    let mut arms = if let Some(name) = &args.preset {
        preset(name).ok_or_else(|| RunError::Config(format!("unknown preset {name}; known: {}", PRESETS.join(", "))))?
    } else if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        vec![ExperimentConfig::from_toml(&text)?]
    } else if let Some(topology) = &args.topology {
        let family = match &args.agent {
            Some(a) => AgentFamily::parse(a).ok_or_else(|| RunError::Config(format!("unknown agent family {a}")))?,
            None => AgentFamily::MadrlHt,
        };
        let mut arm = if family.is_learned() {
            autoca::experiment::learned(family.name(), topology, family)
        } else {
            autoca::experiment::baseline(family.name(), topology, family)
        };
        arm.name = format!("{}-{}", family.name(), topology.replace(|c: char| !c.is_ascii_alphanumeric(), "_"));
        vec![arm]
    } else {
        return Err(RunError::Config("one of --preset, --topology or --config is required".into()));
    };
    for arm in &mut arms {
        if let Some(s) = &args.seeds {
            arm.seeds = parse_seeds(s)?;
        }
        if let Some(e) = args.epochs {
            arm.train.epochs = e;
        }
        if let Some(w) = args.eval_window {
            arm.eval.window = w;
        }
    }
    Ok(arms)
}

fn run(args: RunArgs) -> Result<(), RunError> {
    if args.list_presets {
        PRESETS.iter().for_each(|p| println!("{p}"));
        return Ok(());
    }
    let arms = arms(&args)?;
    for dir in run_all(&arms, &args.out)? {
        println!("{}", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare { dirs, json } => compare(&dirs).map(|c| {
            if json {
                println!("{}", serde_json::to_string_pretty(&c).expect("comparison serializes"));
            } else {
                print!("{}", c.render());
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
