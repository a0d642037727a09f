//! `netsirs` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netsirs_cli::commands::{graph_summary, partition_summary, threshold_text};
use netsirs_cli::config::{ExperimentConfig, InitialCondition, Method};
use netsirs_cli::recipes::{reproduce_all, Figure, ReproduceOptions};
use netsirs_cli::{run, CliResult, RunManifest};

#[derive(Parser)]
#[command(
    name = "netsirs",
    version,
    about = "SIRS epidemics with vaccination on networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    tmax: Option<f64>,
    /// 1-based node infected at time 0 (replaces the configured start).
    #[arg(long)]
    initial_node: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph and print its degrees and spectral radius.
    Graph(ConfigArg),
    /// Detect or verify the equitable partition and print the quotient.
    Partition(ConfigArg),
    /// Print the epidemic threshold quantities of every sweep cell.
    Threshold(ConfigArg),
    /// Master equation, hitting time and bounds of the exact chain.
    Exact {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        o: Overrides,
    },
    /// Monte Carlo prevalence curves.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        o: Overrides,
    },
    /// Mean-field trajectories, threshold and equilibrium.
    Meanfield {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        o: Overrides,
        /// Integrate the quotient system of the partition instead.
        #[arg(long)]
        quotient: bool,
    },
    /// Run the configuration with the method it names.
    Run {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        o: Overrides,
    },
    /// Regenerate a figure bundle (`all` for every figure).
    Reproduce {
        figure: String,
        #[command(flatten)]
        o: Overrides,
    },
}

fn load(cfg: &ConfigArg, method: Option<Method>, o: &Overrides) -> CliResult<ExperimentConfig> {
    let mut c = ExperimentConfig::load(&cfg.config)?;
    if let Some(m) = method {
        c.method = m;
    }
    if let Some(s) = o.seed {
        c.base_seed = s;
    }
    if let Some(d) = &o.out {
        c.output_dir = d.clone();
    }
    if let Some(p) = o.paths {
        c.paths = p;
    }
    if let Some(t) = o.tmax {
        c.t_max = t;
    }
    if let Some(node) = o.initial_node {
        c.initial = InitialCondition::OneInfected { node };
    }
    Ok(c)
}

fn report(dir: &std::path::Path, m: &RunManifest) {
    for f in &m.outputs {
        println!("{}  {}", f.sha256, dir.join(&f.file).display());
    }
}

fn execute(cfg: ExperimentConfig) -> CliResult<()> {
    let m = run(&cfg)?;
    report(&cfg.output_dir, &m);
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let no_overrides = Overrides {
        seed: None,
        out: None,
        paths: None,
        tmax: None,
        initial_node: None,
    };
    match cli.command {
        Command::Graph(c) => print!("{}", graph_summary(&load(&c, None, &no_overrides)?)?),
        Command::Partition(c) => print!("{}", partition_summary(&load(&c, None, &no_overrides)?)?),
        Command::Threshold(c) => print!("{}", threshold_text(&load(&c, None, &no_overrides)?)?),
        Command::Exact { cfg, o } => execute(load(&cfg, Some(Method::Exact), &o)?)?,
        Command::Simulate { cfg, o } => execute(load(&cfg, Some(Method::Simulate), &o)?)?,
        Command::Meanfield { cfg, o, quotient } => {
            let m = if quotient {
                Method::Quotient
            } else {
                Method::Meanfield
            };
            execute(load(&cfg, Some(m), &o)?)?
        }
        Command::Run { cfg, o } => execute(load(&cfg, None, &o)?)?,
        Command::Reproduce { figure, o } => {
            let figs = if figure.eq_ignore_ascii_case("all") {
                Figure::ALL.to_vec()
            } else {
                vec![figure.parse()?]
            };
            let opts = ReproduceOptions {
                out_dir: o.out.unwrap_or_else(|| PathBuf::from("out")),
                paths: o.paths,
                seed: o.seed.unwrap_or(0),
                t_max: o.tmax,
                initial_node: o.initial_node.unwrap_or(1),
            };
            let manifests = reproduce_all(&figs, &opts)?;
            for (f, m) in figs.iter().zip(&manifests) {
                report(&opts.out_dir.join(f.name()), m);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
