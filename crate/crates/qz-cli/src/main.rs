use clap::{Args, Parser, Subcommand, ValueEnum};
use qz_cli::commands::{
    write_discriminants, write_histogram, write_integral_check, write_predict, verify_sample,
    PredictGrid, CURVE_COLUMNS,
};
use qz_cli::error::CliError;
use qz_cli::job::{run_zeros, JobConfig};
use qz_cli::zerofile;
use qz_core::{DiscriminantRange, Sign};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qz",
    version,
    about = "Critical-line zeros of quadratic Dirichlet L-functions and their density statistics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Neg,
    Pos,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Neg => Sign::Negative,
            SignArg::Pos => Sign::Positive,
        }
    }
}

#[derive(Args)]
struct WindowArgs {
    /// Smallest modulus of the half-open window [x-min, x-min + span)
    #[arg(long)]
    x_min: u64,
    /// Window width in moduli
    #[arg(long)]
    span: u64,
    /// Discriminant sign
    #[arg(long, value_enum, default_value = "neg")]
    sign: SignArg,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Guaranteed decimal digits of Z on the evaluation box
    #[arg(long, default_value_t = 15)]
    digits: u32,
    /// Scan ordinates in (0, t-max]
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    /// Grid points per mean zero spacing
    #[arg(long, default_value_t = 50)]
    step_divisor: u32,
    /// Discriminants per precomputation batch
    #[arg(long, default_value_t = 8)]
    batch: usize,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the fundamental discriminants of a window
    Discriminants {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute zeros for every discriminant in a window
    Zeros {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Zero-file output path
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint path (default: <out>.ckpt)
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Re-evaluate recorded zeros through the direct series
    Verify {
        /// Zero file to audit
        file: PathBuf,
        /// Number of recorded zeros to re-evaluate
        #[arg(long, default_value_t = 32)]
        sample: usize,
        /// Sampling seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Bin a zero file into rescaled density columns
    Histogram {
        /// Zero file to bin
        file: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        bin_width: f64,
        #[arg(long, default_value_t = 3.0)]
        tau_max: f64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the prediction curves on a tau grid
    Predict {
        /// Reference scale X of the family
        #[arg(long)]
        x_min: u64,
        /// Window width entering the ratios average
        #[arg(long, default_value_t = 10_000_000)]
        span: u64,
        #[arg(long, default_value_t = 0.05)]
        tau_min: f64,
        #[arg(long, default_value_t = 4.4)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Comma-separated column subset (default: all)
        #[arg(long)]
        curves: Option<String>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Excised-integral convergence table for the ratios term
    IntegralCheck {
        #[arg(long)]
        x_min: u64,
        #[arg(long, default_value_t = 10_000_000)]
        span: u64,
        #[arg(long, default_value_t = 0.4)]
        sigma: f64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(
            fs::File::create(p).map_err(|e| CliError::io(format!("create {}: {e}", p.display())))?,
        )),
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn read_dataset(path: &PathBuf) -> Result<zerofile::Dataset, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("read {}: {e}", path.display())))?;
    zerofile::parse(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Discriminants { pipeline, out } => {
            let range = DiscriminantRange {
                x_min: pipeline.window.x_min,
                span: pipeline.window.span,
                sign: pipeline.window.sign.into(),
            };
            let header = zerofile::Header {
                x_min: pipeline.window.x_min,
                span: pipeline.window.span,
                digits: pipeline.digits,
                t_max: pipeline.t_max,
                step_divisor: pipeline.step_divisor,
                sign: pipeline.window.sign.into(),
            };
            let mut sink = open_sink(&out)?;
            let n = write_discriminants(&range, &header, sink.as_mut())?;
            eprintln!("count={n}");
        }
        Cmd::Zeros { pipeline, out, checkpoint } => {
            let checkpoint = checkpoint.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".ckpt");
                PathBuf::from(p)
            });
            let cfg = JobConfig {
                x_min: pipeline.window.x_min,
                span: pipeline.window.span,
                digits: pipeline.digits,
                t_max: pipeline.t_max,
                step_divisor: pipeline.step_divisor,
                batch: pipeline.batch,
                workers: pipeline.workers,
                sign: pipeline.window.sign.into(),
                out,
                checkpoint,
            };
            let summary = run_zeros(&cfg)?;
            eprintln!(
                "done: discs={} zeros={} batches={}",
                summary.discs, summary.zeros, summary.batches
            );
        }
        Cmd::Verify { file, sample, seed } => {
            let ds = read_dataset(&file)?;
            verify_sample(&ds, sample, seed, &mut std::io::stdout())?;
        }
        Cmd::Histogram { file, bin_width, tau_max, out } => {
            let ds = read_dataset(&file)?;
            let mut sink = open_sink(&out)?;
            write_histogram(&ds, bin_width, tau_max, sink.as_mut())?;
        }
        Cmd::Predict { x_min, span, tau_min, tau_max, grid_step, curves, out } => {
            let columns: Vec<String> = match curves {
                Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
                None => CURVE_COLUMNS.iter().map(|s| s.to_string()).collect(),
            };
            let grid = PredictGrid { tau_min, tau_max, step: grid_step };
            let mut sink = open_sink(&out)?;
            write_predict(x_min, span, &grid, &columns, sink.as_mut())?;
        }
        Cmd::IntegralCheck { x_min, span, sigma, out } => {
            let mut sink = open_sink(&out)?;
            write_integral_check(x_min, span, sigma, sink.as_mut())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
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
            ExitCode::from(e.exit_code())
        }
    }
}
