use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use np_plasmon::pipeline::{compare_report, run_pipeline, PipelineError, RunConfig, Stage};

#[derive(Parser)]
#[command(version, about = "Neumann-Poincare spectra and plasmon localization on closed surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Triangulate the surface and write the mesh file.
    Mesh(RunArgs),
    /// Assemble the operators and solve for the spectrum.
    Spectrum(RunArgs),
    /// Dump plasmon fields on the cross-section region.
    Plasmon(RunArgs),
    /// Region norms, decay fit and outlier detection.
    Decay(RunArgs),
    /// Energy sweep for anomalous localized resonance.
    Calr(RunArgs),
    /// All stages.
    Report(RunArgs),
    /// Compare two completed runs.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// Write the comparison here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    deterministic: bool,
    #[arg(long, overrides_with = "no_cache")]
    cache: bool,
    #[arg(long = "no-cache", overrides_with = "cache")]
    no_cache: bool,
    #[arg(long)]
    j_max: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
        config.deterministic |= self.deterministic;
        if self.cache {
            config.cache = true;
        }
        if self.no_cache {
            config.cache = false;
        }
        if let Some(j) = self.j_max {
            config.j_max = j;
        }
        Ok(config)
    }
}

fn run(command: Command) -> Result<(), PipelineError> {
    let (args, stage) = match command {
        Command::Compare { run_a, run_b, out } => {
            let report = serde_json::to_string_pretty(&compare_report(&run_a, &run_b)?).unwrap();
            match out {
                Some(path) => std::fs::write(&path, report + "\n")
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?,
                None => println!("{report}"),
            }
            return Ok(());
        }
        Command::Mesh(a) => (a, Stage::Mesh),
        Command::Spectrum(a) => (a, Stage::Spectrum),
        Command::Plasmon(a) => (a, Stage::Plasmon),
        Command::Decay(a) => (a, Stage::Decay),
        Command::Calr(a) => (a, Stage::Calr),
        Command::Report(a) => (a, Stage::Report),
    };
    let config = args.config()?;
    if let Some(threads) = config.threads {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    let summary = run_pipeline(&config, stage)?;
    println!("{}", serde_json::to_string_pretty(&summary.manifest["summary"]).unwrap());
    println!("wrote {}", summary.out.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
