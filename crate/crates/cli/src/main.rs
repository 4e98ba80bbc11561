use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use densestream::generators::{churn, clique_buildup, erdos_renyi_dynamic, planted_clique};
use densestream::replay::{self, AlphaChoice, Mode, OracleAlgo, RunConfig, RunError};
use densestream::sampling::{HashMode, SamplerKind};
use densestream::stream::{read_stream, StreamFile};

#[derive(Parser)]
#[command(name = "densestream", version, about = "Densest-subgraph estimation over dynamic edge streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a stream and print one JSON line per checkpoint.
    Run(RunArgs),
    /// Compare an engine with the exact optimum at every checkpoint.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Number of seeds to try, starting at --seed.
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Evaluate an exact or peeling oracle at every checkpoint.
    Oracle(RunArgs),
    /// Write a generated stream.
    Gen(GenArgs),
    /// Report sampler occupancy after replaying a stream in stream mode.
    Diagnostics(RunArgs),
    /// Print a decomposition of the full-space engine after replaying a stream.
    Dump {
        #[command(flatten)]
        run: RunArgs,
        /// Ladder rung, 1-based; defaults to the rung behind the estimate.
        #[arg(long)]
        rung: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Stream file; `-` reads standard input.
    input: PathBuf,
    #[arg(long, default_value = "full")]
    mode: Mode,
    #[arg(long)]
    epsilon: Option<f64>,
    /// A number at least 1, or `auto`.
    #[arg(long, default_value = "auto")]
    alpha: AlphaChoice,
    /// Multiplier on sampling and threshold constants.
    #[arg(long)]
    scale: Option<f64>,
    /// Dense-regime sampling multiplier in stream mode.
    #[arg(long)]
    sample_scale: Option<f64>,
    /// Overridden by DENSESTREAM_SEED.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "flow")]
    algo: OracleAlgo,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    #[arg(long, default_value = "reference")]
    sampler: SamplerKind,
    #[arg(long, default_value = "auto")]
    hash: HashMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    ErdosRenyiDynamic,
    PlantedClique,
    CliqueBuildup,
    Churn,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Edge probability.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Clique size.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Fraction of inserted edges deleted again.
    #[arg(long, default_value_t = 0.5)]
    delete_fraction: f64,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn env_seed(seed: u64) -> Result<u64, String> {
    match std::env::var("DENSESTREAM_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("DENSESTREAM_SEED must be an integer, got {v:?}")),
        Err(_) => Ok(seed),
    }
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        // a closed downstream pipe is not an error of ours
        let code = if e.kind() == io::ErrorKind::BrokenPipe { 0 } else { 1 };
        Failure { code, message: e.to_string() }
    }
}

impl RunArgs {
    fn config(&self, mode: Mode) -> Result<RunConfig, Failure> {
        Ok(RunConfig {
            mode,
            epsilon: self.epsilon,
            alpha: self.alpha,
            scale: self.scale,
            sample_scale: self.sample_scale,
            seed: env_seed(self.seed).map_err(Failure::usage)?,
            checkpoint_every: self.checkpoint_every,
            algo: self.algo,
            sampler: self.sampler,
            hash_mode: self.hash,
        })
    }

    fn stream(&self) -> Result<StreamFile, Failure> {
        let mut text = String::new();
        if self.input.as_os_str() == "-" {
            io::stdin().read_to_string(&mut text)?;
        } else {
            File::open(&self.input)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| Failure::usage(format!("{}: {e}", self.input.display())))?;
        }
        read_stream(text.as_bytes()).map_err(|e| Failure::usage(format!("{}: {e}", self.input.display())))
    }
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let (config, stream) = (args.config(args.mode)?, args.stream()?);
            let records = replay::run(&config, &stream)?;
            let mut out = open_out(&args.out)?;
            for r in &records {
                writeln!(out, "{}", r.to_json())?;
            }
            out.flush()?;
        }
        Command::Oracle(args) => {
            let (config, stream) = (args.config(Mode::Oracle)?, args.stream()?);
            let mut out = open_out(&args.out)?;
            for r in &replay::run(&config, &stream)? {
                writeln!(out, "{}", r.to_json())?;
            }
            out.flush()?;
        }
        Command::Compare { run, trials } => {
            let (config, stream) = (run.config(run.mode)?, run.stream()?);
            let report = replay::compare(&config, &stream, trials)?;
            let mut out = open_out(&run.out)?;
            write_json(&mut *out, &report)?;
            out.flush()?;
        }
        Command::Diagnostics(args) => {
            let (config, stream) = (args.config(Mode::Stream)?, args.stream()?);
            let mut out = open_out(&args.out)?;
            write_json(&mut *out, &replay::diagnostics(&config, &stream)?)?;
            out.flush()?;
        }
        Command::Dump { run, rung } => {
            let (config, stream) = (run.config(Mode::Full)?, run.stream()?);
            let mut out = open_out(&run.out)?;
            let dump = replay::dump(&config, &stream, rung)?;
            writeln!(out, "{}", serde_json::to_string(&dump).map_err(io::Error::from)?)?;
            out.flush()?;
        }
        Command::Gen(g) => {
            let seed = env_seed(g.seed).map_err(Failure::usage)?;
            if !(0.0..=1.0).contains(&g.p) || !(0.0..=1.0).contains(&g.delete_fraction) {
                return Err(Failure::usage("--p and --delete-fraction must lie in [0, 1]"));
            }
            let stream = match g.kind {
                GenKind::ErdosRenyiDynamic => erdos_renyi_dynamic(g.n, g.p, g.delete_fraction, seed),
                GenKind::PlantedClique => {
                    if g.k > g.n {
                        return Err(Failure::usage("clique larger than the graph"));
                    }
                    planted_clique(g.n, g.k, g.p, seed)
                }
                GenKind::CliqueBuildup => clique_buildup(g.k),
                GenKind::Churn => churn(g.n, g.steps, seed),
            };
            let mut out = open_out(&g.out)?;
            out.write_all(stream.to_text().as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("densestream: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
