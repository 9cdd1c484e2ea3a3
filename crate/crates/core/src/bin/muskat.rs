use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use muskat::output::Summary;
use muskat::presets::{self, Overrides};

#[derive(Parser)]
#[command(name = "muskat", version, about = "Corner experiments for the Muskat slope equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Flags {
    /// Output directory for CSV files and summary.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid size (power of two).
    #[arg(long = "n-points")]
    n_points: Option<usize>,
    /// Rescale the data to this measured size.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            n_points: self.n_points,
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }

    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Kernel L1 norms against their bounds.
    VerifyKernels {
        #[command(flatten)]
        flags: Flags,
    },
    /// Velocity field cancellation and q~ scaling.
    VerifyVelocity {
        #[command(flatten)]
        flags: Flags,
    },
    /// Discrete norms under grid doubling.
    VerifyNorms {
        #[command(flatten)]
        flags: Flags,
    },
}

fn report(summary: &Summary) -> ExitCode {
    print!("{}", summary.render());
    if summary.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, flags } => {
            presets::run_config_file(config, flags.out.as_deref(), &flags.overrides()).map(|o| o.summary)
        }
        Command::Preset { name, flags } => {
            presets::run_preset(name, &flags.out_or(&format!("out/{name}")), &flags.overrides())
        }
        Command::VerifyKernels { flags } => {
            presets::verify_kernels(&flags.out_or("out/verify-kernels"), &flags.overrides())
        }
        Command::VerifyVelocity { flags } => {
            presets::verify_velocity(&flags.out_or("out/verify-velocity"), &flags.overrides())
        }
        Command::VerifyNorms { flags } => {
            presets::verify_norms(&flags.out_or("out/verify-norms"), &flags.overrides())
        }
    };
    match result {
        Ok(s) => report(&s),
        Err(e) => {
            eprintln!("muskat: {e}");
            ExitCode::from(2)
        }
    }
}
