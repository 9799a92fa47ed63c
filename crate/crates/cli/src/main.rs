use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sngca_cli::manifest::parse_model;
use sngca_cli::{
    cmd_benchmark, cmd_generate, cmd_run, configure_threads, BenchmarkOptions, BenchmarkSuite,
    CliError, CliResult, ManifestFile, RunManifest,
};
use sngca_core::ModelSpec;

#[derive(Parser)]
#[command(name = "sngca", version, about = "Sparse non-Gaussian component analysis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV plus a JSON sidecar with the target basis.
    Generate {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        noise_r: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run replicated estimations from a manifest and/or flags.
    Run(RunArgs),
    /// Run one of the experiment grids and write its mean-ε table.
    Benchmark {
        #[arg(long, value_parser = parse_suite)]
        suite: BenchmarkSuite,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated grid values (noise exponents or dimensions).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON manifest; flags below override its keys.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    delta_stop: Option<f64>,
    #[arg(long)]
    c_mvee: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    m_hint: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    noise_r: Option<f64>,
    #[arg(long)]
    stop_rule: Option<String>,
}

fn parse_suite(s: &str) -> Result<BenchmarkSuite, String> {
    match s {
        "progress" => Ok(BenchmarkSuite::Progress),
        "noise" => Ok(BenchmarkSuite::Noise),
        "dims" => Ok(BenchmarkSuite::Dims),
        _ => Err(format!("unknown suite {s:?}; expected progress, noise or dims")),
    }
}

impl RunArgs {
    fn into_manifest(self) -> CliResult<RunManifest> {
        let base = match &self.manifest {
            Some(p) => ManifestFile::load(p)?,
            None => ManifestFile::default(),
        };
        let flags = ManifestFile {
            model: self.model,
            input: self.input,
            truth: self.truth,
            d: self.d,
            n: self.n,
            j: self.j,
            l: self.l,
            max_iter: self.max_iter,
            delta_stop: self.delta_stop,
            c_mvee: self.c_mvee,
            alpha: self.alpha,
            m_hint: self.m_hint,
            seed: self.seed,
            replications: self.replications,
            family: self.family,
            damping: self.damping,
            noise_r: self.noise_r,
            stop_rule: self.stop_rule,
        };
        RunManifest::resolve(base.overridden_by(flags), self.out_dir)
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Generate {
            model,
            d,
            n,
            seed,
            noise_r,
            out,
        } => {
            let mut spec = ModelSpec::new(parse_model(&model)?, d, n, seed);
            spec.noise_r = noise_r;
            let side = cmd_generate(&spec, &out)?;
            println!("wrote {} and {}", out.display(), side.display());
        }
        Command::Run(args) => {
            let manifest = args.into_manifest()?;
            let summary = cmd_run(&manifest)?;
            for s in &summary.iterations {
                match s.mean_epsilon {
                    Some(e) => println!("iteration {}: runs {} mean ε {e:.6}", s.iteration, s.runs),
                    None => println!("iteration {}: runs {} mean m {:.2}", s.iteration, s.runs, s.mean_m),
                }
            }
        }
        Command::Benchmark {
            suite,
            out_dir,
            model,
            reps,
            n,
            seed,
            grid,
        } => {
            let mut opts = BenchmarkOptions::new(suite, out_dir);
            opts.model = model.as_deref().map(parse_model).transpose()?;
            opts.reps = reps;
            opts.n = n;
            opts.seed = seed;
            opts.grid = grid;
            let path = cmd_benchmark(&opts)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CliError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
