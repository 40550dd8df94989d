use std::path::PathBuf;
use std::process::ExitCode;

use agewise_cli::{
    configure_threads, parse_config, run_analyze, run_optimize, run_reproduce, run_simulate,
    CliError, Fig3Variant, Figure,
};
use clap::{Parser, Subcommand, ValueEnum};

/// Exact age-of-information analysis, simulation and threshold search.
#[derive(Parser)]
#[command(name = "agewise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic AoI pmf and costs for the configured policy.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Slot-level simulation of the configured policy.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides sim.slots.
        #[arg(long)]
        slots: Option<u64>,
        /// Overrides sim.seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Budget-constrained exhaustive threshold search.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Overrides search.tau_max.
        #[arg(long)]
        tau_max: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Figure data tables from the built-in example configs.
    Reproduce {
        figure: FigureArg,
        /// Threshold set for fig3.
        #[arg(long, value_enum, default_value_t = VariantArg::Text)]
        variant: VariantArg,
        /// Overrides the simulation length of fig3 and fig4.
        #[arg(long)]
        slots: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Text,
    Caption,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Analyze { config, out } => run_analyze(&parse_config(&config)?, &out),
        Command::Simulate {
            config,
            slots,
            seed,
            out,
        } => run_simulate(&parse_config(&config)?, slots, seed, &out),
        Command::Optimize {
            config,
            tau_max,
            out,
        } => run_optimize(&parse_config(&config)?, tau_max, &out),
        Command::Reproduce {
            figure,
            variant,
            slots,
            out,
        } => {
            let figure = match figure {
                FigureArg::Fig2 => Figure::Fig2,
                FigureArg::Fig3 => Figure::Fig3,
                FigureArg::Fig4 => Figure::Fig4,
            };
            let variant = match variant {
                VariantArg::Text => Fig3Variant::Text,
                VariantArg::Caption => Fig3Variant::Caption,
            };
            run_reproduce(figure, variant, slots, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
