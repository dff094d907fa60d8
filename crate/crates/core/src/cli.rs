//! The `ssimehs` command line.
//!
//! Results go to stdout as `key=value` lines; notes and errors go to
//! stderr. Exit statuses:
//!
//! | status | meaning                                        |
//! |--------|------------------------------------------------|
//! | 0      | success                                        |
//! | 1      | internal failure (non-finite gradient)         |
//! | 2      | unreadable, unwritable or malformed image file |
//! | 3      | size, level or histogram mismatch              |
//! | 4      | watermark capacity or detection failure        |
//! | 5      | invalid parameter value                        |
//! | 64     | command-line usage error                       |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ehs::EhsVariant;
use crate::error::Error;
use crate::image::{count_images_with_histogram, generate_target, histogram_of, GrayImage, Histogram, TargetKind};
use crate::io::{read_pgm, trace_to_csv, write_pgm};
use crate::optimizer::{
    ascend, auto_mu, estimate_mu0, AscentConfig, DEFAULT_GRID_POINTS, DEFAULT_MAX_ITERATIONS, DEFAULT_MU_PROBE,
    DEFAULT_PLATEAU_EPSILON,
};
use crate::ssim::{ssim_index, SsimParams};
use crate::watermark;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_WATERMARK: i32 = 4;
pub const EXIT_PARAMETER: i32 = 5;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "ssimehs",
    version,
    about = "Exact histogram specification optimized for SSIM"
)]
pub struct Cli {
    /// Accepted for harness compatibility; nothing here is randomized.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Give an image a target histogram exactly, maximizing SSIM to the input.
    Specify {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exact histogram equalization (uniform target).
    Equalize {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Estimate the step-size bound from a three-iteration probe run.
    EstimateMu {
        input: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = DEFAULT_MU_PROBE)]
        mu_probe: f64,
        #[arg(long, value_enum, default_value_t = EhsArg::Classic)]
        ehs: EhsArg,
    },
    /// Hide a bit string by emptying histogram bins.
    WatermarkEmbed {
        input: PathBuf,
        output: PathBuf,
        /// Message as a string of 0 and 1 characters.
        #[arg(long, default_value = "")]
        message: String,
        #[arg(long, default_value_t = DEFAULT_MU_PROBE)]
        mu: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        iters: usize,
    },
    /// Read a bit string back from a marked image's histogram.
    WatermarkDetect {
        input: PathBuf,
        /// Number of bits to read.
        #[arg(long)]
        bins: usize,
    },
    /// SSIM between two images.
    Metrics { a: PathBuf, b: PathBuf },
    /// Number of distinct images that share a histogram.
    Count {
        #[arg(long, conflicts_with = "counts", required_unless_present = "counts")]
        histogram_of: Option<PathBuf>,
        /// Comma-separated bin counts, e.g. "2,1,1".
        #[arg(long)]
        counts: Option<String>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TargetArgs {
    /// Use the histogram of another image.
    #[arg(long)]
    pub ref_image: Option<PathBuf>,
    /// Flat histogram.
    #[arg(long)]
    pub uniform: bool,
    /// Bin i weighted by i + 1.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_MU_PROBE, conflicts_with = "auto_mu")]
    pub mu: f64,
    /// Estimate the step-size bound, then search below it.
    #[arg(long)]
    pub auto_mu: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub iters: usize,
    #[arg(long, value_enum, default_value_t = EhsArg::Classic)]
    pub ehs: EhsArg,
    /// Stop when one iteration changes SSIM by less than this (0 disables).
    #[arg(long, default_value_t = DEFAULT_PLATEAU_EPSILON)]
    pub plateau: f64,
    /// Stop once SSIM reaches this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Candidates for the step-size search.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EhsArg {
    Classic,
    Coltuc,
}

impl From<EhsArg> for EhsVariant {
    fn from(a: EhsArg) -> Self {
        match a {
            EhsArg::Classic => EhsVariant::Classic,
            EhsArg::Coltuc => EhsVariant::StrictOrdering,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Pgm(_) | Error::InvalidImage(_) => EXIT_INPUT,
        Error::HistogramMismatch { .. }
        | Error::LevelMismatch { .. }
        | Error::DimensionMismatch(..)
        | Error::ImageTooSmall { .. } => EXIT_MISMATCH,
        Error::Watermark(_) => EXIT_WATERMARK,
        Error::InvalidParameter(_) | Error::InvalidWindow { .. } | Error::EmptyHistogram | Error::StepModel(_) => {
            EXIT_PARAMETER
        }
        Error::NonFiniteGradient(_) => EXIT_INTERNAL,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_input(path: &PathBuf) -> Result<GrayImage, Error> {
    read_pgm(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Pgm(msg) => Error::Pgm(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn resolve_target(img: &GrayImage, target: &TargetArgs) -> Result<Histogram, Error> {
    let total = img.len() as u64;
    if let Some(path) = &target.ref_image {
        let reference = read_input(path)?;
        return generate_target(TargetKind::FromImage(&reference), img.levels(), total);
    }
    let kind = if target.linear {
        TargetKind::Linear
    } else {
        TargetKind::Uniform
    };
    generate_target(kind, img.levels(), total)
}

fn print_value(out: &mut dyn Write, key: &str, v: f64) -> Result<(), Error> {
    writeln!(out, "{key}={v:?}")?;
    Ok(())
}

fn choose_mu(
    img: &GrayImage,
    h: &Histogram,
    cfg: &AscentConfig,
    grid: usize,
    err: &mut dyn Write,
) -> Result<f64, Error> {
    let choice = auto_mu(img, h, DEFAULT_MU_PROBE, grid, cfg)?;
    if let Some(e) = &choice.estimate {
        writeln!(
            err,
            "probe: p={:e} q={} ssim_init={} mu0={}",
            e.p, e.q, e.ssim_init, e.mu0
        )?;
    }
    if let Some(why) = &choice.fallback {
        writeln!(err, "step-size model not used ({why}); mu={}", choice.mu)?;
    }
    Ok(choice.mu)
}

fn optimize(
    input: &PathBuf,
    output: &PathBuf,
    target: &TargetArgs,
    run: &RunArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Error> {
    let img = read_input(input)?;
    let h = resolve_target(&img, target)?;
    let mut cfg = AscentConfig::new(run.mu)
        .iterations(run.iters)
        .plateau(run.plateau)
        .variant(run.ehs.into())
        .ssim_params(SsimParams::for_levels(img.levels()));
    cfg.ssim_threshold = run.threshold;
    if run.auto_mu {
        cfg.mu = choose_mu(&img, &h, &cfg, run.grid, err)?;
    }
    let result = ascend(&img, &h, &cfg)?;
    write_pgm(output, &result.image)?;
    if let Some(path) = &run.trace {
        fs::write(path, trace_to_csv(&result.trace))?;
    }
    print_value(out, "ssim", result.trace.best_ssim)?;
    print_value(out, "mu", cfg.mu)?;
    writeln!(out, "iterations={}", result.trace.len())?;
    writeln!(out, "best_iteration={}", result.trace.best_iteration)?;
    Ok(())
}

fn parse_counts(s: &str) -> Result<Histogram, Error> {
    let counts = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad bin count {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::InvalidParameter(
            "histogram must count at least one pixel".into(),
        ));
    }
    Ok(Histogram::new(counts))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    match command {
        Command::Specify {
            input,
            output,
            target,
            run,
        } => optimize(&input, &output, &target, &run, out, err),
        Command::Equalize { input, output, run } => {
            let target = TargetArgs {
                ref_image: None,
                uniform: true,
                linear: false,
            };
            optimize(&input, &output, &target, &run, out, err)
        }
        Command::EstimateMu {
            input,
            target,
            mu_probe,
            ehs,
        } => {
            let img = read_input(&input)?;
            let h = resolve_target(&img, &target)?;
            let e = estimate_mu0(&img, &h, mu_probe, ehs.into(), &SsimParams::for_levels(img.levels()))?;
            print_value(out, "p", e.p)?;
            print_value(out, "q", e.q)?;
            print_value(out, "ssim_init", e.ssim_init)?;
            print_value(out, "mu0", e.mu0)?;
            Ok(())
        }
        Command::WatermarkEmbed {
            input,
            output,
            message,
            mu,
            iters,
        } => {
            let img = read_input(&input)?;
            let bits = watermark::parse_bits(&message)?;
            let cfg = AscentConfig::new(mu)
                .iterations(iters)
                .ssim_params(SsimParams::for_levels(img.levels()));
            let (spec, result) = watermark::embed(&img, &bits, &cfg)?;
            write_pgm(&output, &result.image)?;
            print_value(out, "ssim", result.trace.best_ssim)?;
            print_value(out, "ssim_plain_ehs", result.trace.records[0].ssim)?;
            let holes: Vec<String> = spec.hole_bins.iter().map(|b| b.to_string()).collect();
            writeln!(out, "holes={}", holes.join(","))?;
            Ok(())
        }
        Command::WatermarkDetect { input, bins } => {
            let img = read_input(&input)?;
            let bits = watermark::detect(&histogram_of(&img), bins)?;
            writeln!(out, "bits={}", watermark::format_bits(&bits))?;
            Ok(())
        }
        Command::Metrics { a, b } => {
            let (a, b) = (read_input(&a)?, read_input(&b)?);
            if a.levels() != b.levels() {
                return Err(Error::LevelMismatch {
                    histogram: a.levels(),
                    image: b.levels(),
                });
            }
            let s = ssim_index(&a.to_real(), &b.to_real(), &SsimParams::for_levels(a.levels()))?;
            print_value(out, "ssim", s)
        }
        Command::Count {
            histogram_of: path,
            counts,
        } => {
            let h = match (path, counts) {
                (Some(path), _) => histogram_of(&read_input(&path)?),
                (None, Some(c)) => parse_counts(&c)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            writeln!(out, "count={}", count_images_with_histogram(&h))?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("ssimehs").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn count_from_counts() {
        assert_eq!(run_args(&["count", "--counts", "1,1"]).1, "count=2\n");
        assert_eq!(run_args(&["count", "--counts", "2,2"]).1, "count=6\n");
        assert_eq!(run_args(&["count", "--counts", "2,1,1"]).1, "count=12\n");
        assert_eq!(run_args(&["count", "--counts", "2,x"]).0, EXIT_PARAMETER);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["count"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["specify", "a.pgm", "b.pgm"]).0, EXIT_USAGE);
        assert_eq!(
            run_args(&["specify", "a.pgm", "b.pgm", "--uniform", "--linear"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_input() {
        let (code, _, err) = run_args(&["metrics", "/nonexistent/a.pgm", "/nonexistent/b.pgm"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("/nonexistent/a.pgm"));
    }
}
