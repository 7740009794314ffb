//! Command line front end for the path signature toolkit.
//!
//! Subcommands cover the full pipeline: compute a signature from a CSV of
//! points, invert a signature back into a polyline, recover a two-piece
//! path exactly, and tabulate gaps, bounds, lattice decay, development
//! witnesses, and length estimates.
//!
//! Exit codes: 0 on success, 1 when input data or arithmetic is rejected,
//! 2 for bad command lines. Output files are written via a temporary file
//! and renamed into place, so readers never observe a half-written file.

use clap::{Parser, Subcommand, ValueEnum};
use pathsig::bounds::{
    binomial_bound, gap_curve, graded_development, lattice_decay, length_estimate,
    lower_bound_constant,
};
use pathsig::dataio::{parse_points_csv, read_signature, write_signature};
use pathsig::insertion::solve_two_piece;
use pathsig::reconstruct::{
    reconstruct_path, IntervalMode, LengthMode, ReconstructionConfig, Smoothing,
};
use pathsig::signature::path_signature;
use pathsig::tensor::NormKind;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathsig", version, about = "Truncated path signatures and their inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the truncated signature of a polyline given as CSV points.
    Signature(SignatureArgs),
    /// Reconstruct a polyline from a signature file.
    Invert(InvertArgs),
    /// Recover both increments of a two-piece path from a signature file.
    TwoPiece(TwoPieceArgs),
    /// Tabulate measured insertion gaps, optionally with the closed-form
    /// bound for one linear piece.
    Bounds(BoundsArgs),
    /// Tabulate the exact norm decay of the unit two-piece lattice corner.
    Lattice(LatticeArgs),
    /// Tabulate hyperbolic development witnesses, optionally with the
    /// piecewise linear decay constant.
    Develop(DevelopArgs),
    /// Estimate the path length from one signature level.
    Length(LengthArgs),
}

#[derive(clap::Args)]
struct SignatureArgs {
    /// CSV of points, one per line, `#` comments allowed.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Truncation depth of the signature.
    #[arg(long)]
    depth: usize,
    /// Signature file to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct InvertArgs {
    /// Signature file produced by the `signature` subcommand.
    #[arg(long, value_name = "FILE")]
    sig: PathBuf,
    /// Level the directions are solved on; the file must also carry the
    /// level above it.
    #[arg(long)]
    level: usize,
    /// Number of clock samples.
    #[arg(long)]
    samples: usize,
    /// Use this path length instead of estimating one.
    #[arg(long, conflicts_with = "estimate_length")]
    length: Option<f64>,
    /// Estimate the length from the signature (the default).
    #[arg(long)]
    estimate_length: bool,
    /// Norm used when estimating the length.
    #[arg(long, value_enum, default_value = "l2")]
    norm: NormArg,
    /// Span of the clock the output covers.
    #[arg(long, value_enum, default_value = "inner")]
    interval: IntervalArg,
    /// Odd moving-average window for the solved directions.
    #[arg(long, value_name = "WIDTH")]
    smooth_window: Option<usize>,
    /// CSV to write: per-sample estimates, then the integrated vertices.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct TwoPieceArgs {
    /// Signature file of a two-piece path.
    #[arg(long, value_name = "FILE")]
    sig: PathBuf,
    /// Level paired with the one above it.
    #[arg(long)]
    level: usize,
    /// Optional CSV with the recovered increments as one row.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BoundsArgs {
    /// CSV of points, one per line.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Clock time the true direction is taken at; strictly inside (0, 1).
    #[arg(long)]
    theta: f64,
    #[arg(long, value_enum, default_value = "l1")]
    norm: NormArg,
    /// Inclusive level range `a..b`.
    #[arg(long, value_parser = parse_level_range)]
    levels: LevelRange,
    /// Clock time where the linear piece containing theta starts; adds the
    /// closed-form bound column.
    #[arg(long, requires = "t")]
    s: Option<f64>,
    /// Clock time where that piece ends.
    #[arg(long, requires = "s")]
    t: Option<f64>,
    /// CSV to write instead of printing to stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct LatticeArgs {
    /// Inclusive level range `a..b`.
    #[arg(long, value_parser = parse_level_range)]
    levels: LevelRange,
    /// CSV to write instead of printing to stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DevelopArgs {
    /// CSV of points, one per line.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Largest level to develop to.
    #[arg(long)]
    depth: usize,
    /// Turning angle for the decay constant column; needs --pieces and --c.
    #[arg(long, requires = "pieces")]
    omega: Option<f64>,
    /// Number of linear pieces for the decay constant column.
    #[arg(long, requires = "c")]
    pieces: Option<usize>,
    /// Leading constant in (0, 1) for the decay constant column.
    #[arg(long, requires = "omega")]
    c: Option<f64>,
    /// CSV to write instead of printing to stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct LengthArgs {
    /// Signature file.
    #[arg(long, value_name = "FILE")]
    sig: PathBuf,
    /// Level the estimate is read from.
    #[arg(long)]
    level: usize,
    #[arg(long, value_enum, default_value = "l2")]
    norm: NormArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
}

impl From<NormArg> for NormKind {
    fn from(arg: NormArg) -> Self {
        match arg {
            NormArg::L1 => NormKind::L1,
            NormArg::L2 => NormKind::L2,
            NormArg::Linf => NormKind::Linf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IntervalArg {
    Inner,
    Full,
}

#[derive(Clone, Copy, Debug)]
struct LevelRange {
    start: usize,
    end: usize,
}

fn parse_level_range(text: &str) -> Result<LevelRange, String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected an inclusive range like 1..8, got {text:?}"))?;
    let start: usize = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let end: usize = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    if start < 1 {
        return Err("level ranges start at 1".into());
    }
    if start > end {
        return Err(format!("empty range {start}..{end}"));
    }
    Ok(LevelRange { start, end })
}

/// Reports a flag combination clap cannot see through, in clap's style.
fn usage_error(message: &str) -> ! {
    eprintln!("error: {message}");
    std::process::exit(2);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Signature(args) => signature_command(args),
        Command::Invert(args) => invert_command(args),
        Command::TwoPiece(args) => two_piece_command(args),
        Command::Bounds(args) => bounds_command(args),
        Command::Lattice(args) => lattice_command(args),
        Command::Develop(args) => develop_command(args),
        Command::Length(args) => length_command(args),
    }
}

fn read_path(file: &Path) -> Result<pathsig::PiecewiseLinearPath, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    Ok(parse_points_csv(&text)?)
}

fn read_signature_file(
    file: &Path,
) -> Result<pathsig::TruncatedTensorSeries, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    Ok(read_signature(&text)?)
}

/// Writes through a sibling temporary file and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn emit(out: Option<&Path>, contents: &str) -> std::io::Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn signature_command(args: SignatureArgs) -> Result<(), Box<dyn std::error::Error>> {
    let path = read_path(&args.input)?;
    let sig = path_signature(&path, args.depth)?;
    write_atomic(&args.out, &write_signature(&sig)?)?;
    eprintln!(
        "signature: {} points, dimension {}, depth {}, length {:?}",
        path.vertices().len(),
        path.dim(),
        args.depth,
        path.length()
    );
    Ok(())
}

fn invert_command(args: InvertArgs) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(w) = args.smooth_window {
        if w == 0 || w % 2 == 0 {
            usage_error(&format!("--smooth-window must be odd, got {w}"));
        }
    }
    if let Some(l) = args.length {
        if !(l > 0.0 && l.is_finite()) {
            usage_error(&format!("--length must be a positive number, got {l}"));
        }
    }
    let sig = read_signature_file(&args.sig)?;
    let config = ReconstructionConfig {
        level: args.level,
        samples: args.samples,
        length_mode: match args.length {
            Some(l) => LengthMode::Given(l),
            None => LengthMode::Estimated(args.norm.into()),
        },
        interval: match args.interval {
            IntervalArg::Inner => IntervalMode::Inner,
            IntervalArg::Full => IntervalMode::Full,
        },
        smoothing: match args.smooth_window {
            Some(w) => Smoothing::MovingAverage(w),
            None => Smoothing::None,
        },
    };
    let result = reconstruct_path(&sig, &config)?;

    let dim = sig.dim();
    let mut csv = String::from("theta");
    for j in 1..=dim {
        let _ = write!(csv, ",d{j}");
    }
    csv.push_str(",residual,ambiguous\n");
    for i in 0..result.thetas.len() {
        let _ = write!(csv, "{:?}", result.thetas[i]);
        for x in result.derivatives[i].coords() {
            let _ = write!(csv, ",{x:?}");
        }
        let _ = writeln!(
            csv,
            ",{:?},{}",
            result.residuals[i],
            u8::from(result.ambiguous[i])
        );
    }
    csv.push_str("\nindex");
    for j in 1..=dim {
        let _ = write!(csv, ",x{j}");
    }
    csv.push('\n');
    for (k, vertex) in result.vertices.iter().enumerate() {
        let _ = write!(csv, "{k}");
        for x in vertex {
            let _ = write!(csv, ",{x:?}");
        }
        csv.push('\n');
    }
    write_atomic(&args.out, &csv)?;

    let flagged = result.ambiguous.iter().filter(|&&a| a).count();
    eprintln!(
        "invert: {} samples at level {}, length {:?}, {} ambiguous",
        args.samples, args.level, result.length_used, flagged
    );
    Ok(())
}

fn two_piece_command(args: TwoPieceArgs) -> Result<(), Box<dyn std::error::Error>> {
    let sig = read_signature_file(&args.sig)?;
    let solution = solve_two_piece(sig.try_level(args.level)?, sig.try_level(args.level + 1)?)?;
    println!("a = {:?}", solution.a);
    println!("b = {:?}", solution.b);
    println!("residual = {:?}", solution.residual);
    if solution.rank_deficient {
        eprintln!("two-piece: system is rank deficient; reported the minimum-norm pair");
    }
    if let Some(out) = &args.out {
        let dim = sig.dim();
        let mut csv = String::new();
        for j in 1..=dim {
            let _ = write!(csv, "a{j},");
        }
        for j in 1..=dim {
            let _ = write!(csv, "b{j},");
        }
        csv.push_str("residual,rank_deficient\n");
        for x in solution.a.iter().chain(&solution.b) {
            let _ = write!(csv, "{x:?},");
        }
        let _ = writeln!(csv, "{:?},{}", solution.residual, u8::from(solution.rank_deficient));
        write_atomic(out, &csv)?;
    }
    Ok(())
}

fn bounds_command(args: BoundsArgs) -> Result<(), Box<dyn std::error::Error>> {
    if !(args.theta > 0.0 && args.theta < 1.0) {
        usage_error(&format!("--theta must lie strictly inside (0, 1), got {}", args.theta));
    }
    let piece = match (args.s, args.t) {
        (Some(s), Some(t)) => {
            if !(s >= 0.0 && s < t && t <= 1.0) {
                usage_error(&format!("--s {s} and --t {t} must satisfy 0 <= s < t <= 1"));
            }
            Some((s, t))
        }
        _ => None,
    };
    let path = read_path(&args.input)?;
    let curve = gap_curve(
        &path,
        args.theta,
        args.levels.start..=args.levels.end,
        args.norm.into(),
    )?;
    let mut csv = String::from(if piece.is_some() {
        "level,position,gap,bound\n"
    } else {
        "level,position,gap\n"
    });
    for point in &curve.points {
        let _ = write!(csv, "{},{},{:?}", point.level, point.position, point.gap);
        if let Some((s, t)) = piece {
            let _ = write!(csv, ",{:?}", binomial_bound(s, t, point.level, point.position)?);
        }
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(())
}

fn lattice_command(args: LatticeArgs) -> Result<(), Box<dyn std::error::Error>> {
    let mut csv = String::from("n,l1,hs\n");
    for n in args.levels.start..=args.levels.end {
        let decay = lattice_decay(n);
        let _ = writeln!(csv, "{n},{:?},{:?}", decay.l1, decay.hs);
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(())
}

fn develop_command(args: DevelopArgs) -> Result<(), Box<dyn std::error::Error>> {
    let constant = match (args.pieces, args.omega, args.c) {
        (Some(pieces), Some(omega), Some(c)) => Some(lower_bound_constant(pieces, omega, c)?),
        _ => None,
    };
    let path = read_path(&args.input)?;
    let development = graded_development(&path, args.depth)?;
    let mut csv = String::from(if constant.is_some() {
        "n,witness,lower_bound\n"
    } else {
        "n,witness\n"
    });
    for n in 1..=args.depth {
        let _ = write!(csv, "{n},{:?}", development.witness(n)?);
        if let Some(value) = constant {
            let _ = write!(csv, ",{value:?}");
        }
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(())
}

fn length_command(args: LengthArgs) -> Result<(), Box<dyn std::error::Error>> {
    let sig = read_signature_file(&args.sig)?;
    let estimate = length_estimate(&sig, args.level, args.norm.into())?;
    println!("{estimate:?}");
    Ok(())
}
