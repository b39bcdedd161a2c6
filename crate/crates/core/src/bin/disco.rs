use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use disco_core::compose::{compose_variant, write_variant, ComposeError, Formats};
use disco_core::config::load_config;

#[derive(Parser)]
#[command(name = "disco", version, about = "Compose score variants from a piece configuration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render one or more variants of a piece.
    Compose {
        #[arg(long)]
        config: PathBuf,
        /// Base seed; defaults to the one in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of variants; defaults to the config value, else 1.
        #[arg(long)]
        variants: Option<usize>,
        /// Output directory; defaults to $DISCO_OUT, else ./out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated list of `sco` and `txt`.
        #[arg(long, value_delimiter = ',', default_value = "sco,txt")]
        format: Vec<Format>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Sco,
    Txt,
}

fn run(cli: Cli) -> Result<(), ComposeError> {
    let Command::Compose {
        config,
        seed,
        variants,
        out,
        format,
    } = cli.command;
    let config = load_config(&config)?;
    let seed = seed.unwrap_or(config.seed);
    let variants = variants.or(config.variants).unwrap_or(1);
    let out = out
        .or_else(|| std::env::var_os("DISCO_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let formats = Formats {
        score: format.contains(&Format::Sco),
        notation: format.contains(&Format::Txt),
    };
    for index in 0..variants {
        let variant = compose_variant(&config, index, seed)?;
        let written = write_variant(&out, &config.name, &variant, formats)?;
        print!("{}", variant.summary());
        for path in written {
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
