use std::path::PathBuf;
use std::process::ExitCode;

use artauth_cli::commands::{self, Context};
use artauth_cli::{CliError, Config};
use artauth_core::model::ModalityView;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "artauth", version, about = "Multimodal painting authentication from visual and X-ray textures")]
struct Cli {
    /// Flat TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (directory for `synth`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Feature view used for training and analysis.
    #[arg(long, global = true, value_parser = parse_view)]
    modality: Option<ModalityView>,
    /// Linear hue variance instead of the circular default.
    #[arg(long, global = true)]
    strict_paper: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract fused feature rows for every painting in a manifest.
    Extract {
        manifest: PathBuf,
        /// Write the rows that succeeded even when others failed.
        #[arg(long)]
        allow_partial: bool,
    },
    /// Grid search with painting-grouped cross-validation.
    Cv {
        features: PathBuf,
        /// Where to write the refitted model (default: <out>.model.json).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Fit a model on authentic feature rows.
    Train { features: PathBuf },
    /// Score a visual/X-ray pair, or a feature table with --features.
    Score {
        model: PathBuf,
        #[arg(required_unless_present = "features")]
        visual: Option<PathBuf>,
        #[arg(required_unless_present = "features")]
        xray: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["visual", "xray"])]
        features: Option<PathBuf>,
    },
    /// Write a synthetic corpus and its manifest.
    Synth,
    /// PCA feature importance of a model or a feature table.
    Importance { input: PathBuf },
}

fn parse_view(s: &str) -> Result<ModalityView, String> {
    s.parse()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref())?.with_overrides(cli.seed, cli.strict_paper);
    let ctx = Context {
        config,
        out: cli.out,
        modality: cli.modality,
    };
    match cli.command {
        Command::Extract {
            manifest,
            allow_partial,
        } => commands::extract(&ctx, &manifest, allow_partial),
        Command::Cv { features, model } => commands::cv(&ctx, &features, model.as_deref()),
        Command::Train { features } => commands::train(&ctx, &features),
        Command::Score {
            model,
            visual,
            xray,
            features,
        } => match (features, visual, xray) {
            (Some(f), _, _) => commands::score_batch(&ctx, &model, &f),
            (None, Some(v), Some(x)) => commands::score(&ctx, &model, &v, &x),
            _ => Err(CliError::input("score needs VISUAL and XRAY, or --features")),
        },
        Command::Synth => {
            let dir = ctx
                .out
                .clone()
                .ok_or_else(|| CliError::input("synth needs --out DIR"))?;
            commands::synth(&ctx, &dir)
        }
        Command::Importance { input } => commands::importance(&ctx, &input),
    }
    .map(drop)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
