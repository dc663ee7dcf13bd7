use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use citepref::error::ErrorClass;
use citepref::pipeline::synth::{write_synthetic, SynthOptions};
use citepref::pipeline::{run_pipeline, RunConfig, Stage};

#[derive(Parser)]
#[command(name = "citepref", version, about = "Country-level citation preference analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the corpus.
    Ingest(RunArgs),
    /// Per-year preference scores.
    Preference(RunArgs),
    /// Signed preference networks.
    Network(RunArgs),
    /// Centrality measures.
    Metrics(RunArgs),
    /// Block model community detection.
    Communities(RunArgs),
    /// Structural balance against a null ensemble.
    Balance(RunArgs),
    /// Country-year and dyad covariates.
    Covariates(RunArgs),
    /// Idea detection and diffusion.
    Ideas(RunArgs),
    /// Regression models.
    Regress(RunArgs),
    /// Tables and figures.
    Report(RunArgs),
    /// Every stage.
    All(RunArgs),
    /// Write a synthetic input corpus with known planted preferences.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    publications: Option<String>,
    #[arg(long)]
    citations: Option<String>,
    #[arg(long = "covariates-cy")]
    covariates_cy: Option<String>,
    #[arg(long = "covariates-dyad")]
    covariates_dyad: Option<String>,
    #[arg(long)]
    ideas: Option<String>,
    #[arg(long)]
    texts: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long = "min-cited")]
    min_cited: Option<String>,
    #[arg(long)]
    damping: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Inclusive range, A:B.
    #[arg(long)]
    years: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Skip SVG figures.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = SynthOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = SynthOptions::default().countries)]
    countries: usize,
    #[arg(long, default_value_t = SynthOptions::default().publications)]
    publications: usize,
}

impl RunArgs {
    fn config(&self) -> citepref::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("publications", &self.publications),
            ("citations", &self.citations),
            ("covariates-cy", &self.covariates_cy),
            ("covariates-dyad", &self.covariates_dyad),
            ("ideas", &self.ideas),
            ("texts", &self.texts),
            ("alpha", &self.alpha),
            ("window", &self.window),
            ("min-cited", &self.min_cited),
            ("damping", &self.damping),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("years", &self.years),
            ("out", &self.out),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v, Path::new(""))?;
            }
        }
        if self.no_plots {
            cfg.plots = false;
        }
        Ok(cfg)
    }
}

fn exit_code(class: ErrorClass) -> ExitCode {
    ExitCode::from(match class {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numeric => 4,
    })
}

fn run(args: &RunArgs, until: Stage) -> ExitCode {
    let cfg = match args.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(e.class());
        }
    };
    match run_pipeline(&cfg, until) {
        Ok(summary) => {
            log::info!("{} files written to {}", summary.files.len(), cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.error.class())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CITEPREF_LOG", "warn")).init();
    let cli = Cli::parse();
    let (args, until) = match &cli.command {
        Command::Synth(s) => {
            let opts = SynthOptions {
                seed: s.seed,
                countries: s.countries,
                publications: s.publications,
                ..Default::default()
            };
            return match write_synthetic(&s.out, &opts) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(e.class())
                }
            };
        }
        Command::Ingest(a) => (a, Stage::Ingest),
        Command::Preference(a) => (a, Stage::Preference),
        Command::Network(a) => (a, Stage::Network),
        Command::Metrics(a) => (a, Stage::Metrics),
        Command::Communities(a) => (a, Stage::Communities),
        Command::Balance(a) => (a, Stage::Balance),
        Command::Covariates(a) => (a, Stage::Covariates),
        Command::Ideas(a) => (a, Stage::Ideas),
        Command::Regress(a) => (a, Stage::Regress),
        Command::Report(a) | Command::All(a) => (a, Stage::Report),
    };
    run(args, until)
}
