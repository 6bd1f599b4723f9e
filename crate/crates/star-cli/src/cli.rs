//! Subcommand definitions and the dispatch loop of the `star` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use star_core::metrics;
use star_core::noise::{self, NoiseSpec};
use star_core::prox::TensorNorm;
use star_core::solver::{self, LipschitzSource, Mode, Model, SolveOptions};

use crate::{htc, report, schedule, CliError, Result};

/// Denoiser for 3-D image cubes (.htc): subspace + dictionary sparse
/// coding + low-rank patch prior, solved by ADMM.
#[derive(Debug, Parser)]
#[command(name = "star", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt a cube with seeded synthetic noise.
    Simulate(SimulateArgs),
    /// Denoise a cube with the STAR or STAR-S model.
    Denoise(DenoiseArgs),
    /// Compare two cubes with PSNR / SSIM / SAM / ERGAS.
    Metrics(MetricsArgs),
    /// Emit a default stage schedule.
    InitSchedule(InitScheduleArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Input cube.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output cube.
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    /// Gaussian sigma on the 0-255 scale (0 disables).
    #[arg(long, default_value_t = 0.0)]
    gaussian: f64,
    /// Salt-and-pepper fraction of pixels per band (0 disables).
    #[arg(long, default_value_t = 0.0)]
    impulse: f64,
    /// Fraction of bands that receive dead lines (0 disables).
    #[arg(long, default_value_t = 0.0)]
    deadlines: f64,
    /// RNG seed; each corruption derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Star,
    #[value(name = "star-s")]
    StarS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Classical,
    Unrolled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TnnArg {
    Tsvd,
    #[value(name = "mode3-unfold")]
    Mode3Unfold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LipschitzArg {
    /// Bound the ISTA step by a power-iteration estimate of ||H||².
    Auto,
    /// Use the schedule's lipschitz field verbatim.
    Schedule,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    /// Noisy input cube.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Denoised output cube.
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Stage schedule (JSON); defaults to the built-in 9-stage 0.02
    /// schedule.
    #[arg(long, value_name = "FILE")]
    schedule: Option<PathBuf>,
    /// Subspace rank n4; defaults to min(9, band count).
    #[arg(long)]
    rank: Option<usize>,
    /// Patch side; the depth is clamped to the rank.
    #[arg(long, default_value_t = 9)]
    patch: usize,
    /// Patch stride; clamped to the patch dims.
    #[arg(long, default_value_t = 6)]
    stride: usize,
    /// Classical-mode stop threshold on the relative primal residual.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Classical-mode iteration cap.
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Classical-mode inner ISTA steps per stage.
    #[arg(long, default_value_t = 10)]
    inner_iters: usize,
    /// Classical-mode ISTA step-bound source.
    #[arg(long, value_enum, default_value_t = LipschitzArg::Auto)]
    lipschitz: LipschitzArg,
    /// Tensor nuclear-norm convention.
    #[arg(long = "tnn", value_enum, default_value_t = TnnArg::Tsvd)]
    tnn: TnnArg,
    /// Write the solve report (JSON) here.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Worker threads for per-patch updates (0 = all cores). Results do
    /// not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed for the step-bound probe.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// STAR-S only: fit the basis against the raw input instead of the
    /// sparse-corrected one.
    #[arg(long, default_value_t = false)]
    a_block_raw: bool,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Reference (clean) cube.
    #[arg(long = "ref", value_name = "FILE")]
    reference: PathBuf,
    /// Cube under test.
    #[arg(long = "test", value_name = "FILE")]
    test: PathBuf,
}

#[derive(Debug, Args)]
struct InitScheduleArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Number of stages.
    #[arg(long, default_value_t = 9)]
    k: usize,
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
}

impl ModelArg {
    fn to_model(self) -> Model {
        match self {
            ModelArg::Star => Model::Star,
            ModelArg::StarS => Model::StarS,
        }
    }
}

/// Parses `argv` and runs one subcommand.
/// Exit codes: 0 success, 1 usage error, 2 data/numeric error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let _ = e.print();
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Denoise(args) => run_denoise(args),
        Command::Metrics(args) => run_metrics(args),
        Command::InitSchedule(args) => run_init_schedule(args),
    };
    match result {
        Ok(()) => 0,
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut cube = htc::read_cube(&args.input)?;
    // Fixed application order: gaussian, impulse, dead lines. The noise
    // module domain-separates each corruption's RNG stream internally.
    if args.gaussian > 0.0 {
        cube = noise::apply(&cube, NoiseSpec::Gaussian { sigma_255: args.gaussian }, args.seed)?;
    }
    if args.impulse > 0.0 {
        cube = noise::apply(&cube, NoiseSpec::Impulse { ratio: args.impulse }, args.seed)?;
    }
    if args.deadlines > 0.0 {
        cube = noise::apply(
            &cube,
            NoiseSpec::DeadLines { band_ratio: args.deadlines },
            args.seed,
        )?;
    }
    htc::write_cube(&args.output, &cube)?;
    let (n1, n2, n3) = cube.dims();
    println!(
        "simulate: wrote {} ({n1}x{n2}x{n3}, gaussian={}, impulse={}, deadlines={}, seed={})",
        args.output.display(),
        args.gaussian,
        args.impulse,
        args.deadlines,
        args.seed
    );
    Ok(())
}

fn run_denoise(args: DenoiseArgs) -> Result<()> {
    let cube = htc::read_cube(&args.input)?;
    let (n1, n2, n3) = cube.dims();
    let model = args.model.to_model();

    let sched = match &args.schedule {
        Some(path) => schedule::load_schedule(path)?,
        None => solver::default_schedule(model),
    };
    if sched.model != model {
        return Err(CliError::Usage(format!(
            "--model {} does not match the schedule's model {}",
            schedule::model_to_str(model),
            schedule::model_to_str(sched.model)
        )));
    }

    // Rank defaults to min(9, n3); an explicit value is passed through and
    // validated by the solver.
    let rank = args.rank.unwrap_or_else(|| 9.min(n3));
    if args.patch == 0 || args.stride == 0 {
        return Err(CliError::Usage("--patch and --stride must be >= 1".into()));
    }
    // Patch spatial sides clamp to the image, depth to the rank; stride
    // clamps to the patch.
    let patch = (args.patch.min(n1), args.patch.min(n2), args.patch.min(rank));
    if patch != (args.patch, args.patch, args.patch) {
        eprintln!(
            "note: patch clamped to {}x{}x{} for a {n1}x{n2}x{n3} cube at rank {rank}",
            patch.0, patch.1, patch.2
        );
    }
    let stride = (
        args.stride.min(patch.0),
        args.stride.min(patch.1),
        args.stride.min(patch.2),
    );

    let opts = SolveOptions {
        rank,
        patch,
        stride,
        tol: args.tol,
        max_iters: args.max_iters,
        inner_iters: args.inner_iters,
        lipschitz: match args.lipschitz {
            LipschitzArg::Auto => LipschitzSource::Auto,
            LipschitzArg::Schedule => LipschitzSource::Schedule,
        },
        tensor_norm: match args.tnn {
            TnnArg::Tsvd => TensorNorm::TSvd,
            TnnArg::Mode3Unfold => TensorNorm::Mode3Unfold,
        },
        a_block_sparse_corrected: !args.a_block_raw,
        seed: args.seed,
    };
    let mode = match args.mode {
        ModeArg::Classical => Mode::Classical,
        ModeArg::Unrolled => Mode::Unrolled,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
    let (denoised, solve_report) = pool.install(|| solver::run(&cube, &sched, mode, &opts))?;

    htc::write_cube(&args.output, &denoised)?;
    if let Some(path) = &args.report {
        report::write_report(path, &solve_report)?;
    }
    if !solve_report.degenerate_a_stages.is_empty() {
        eprintln!(
            "note: basis update was degenerate at stages {:?} (kept previous basis)",
            solve_report.degenerate_a_stages
        );
    }
    println!(
        "denoise: wrote {} (iterations={}, final_residual={:e}, wall_ms={:.1})",
        args.output.display(),
        solve_report.iterations,
        solve_report.residuals.last().copied().unwrap_or(f64::NAN),
        solve_report.wall_ms
    );
    Ok(())
}

fn run_metrics(args: MetricsArgs) -> Result<()> {
    let reference = htc::read_cube(&args.reference)?;
    let test = htc::read_cube(&args.test)?;
    let r = metrics::evaluate(&test, &reference)?;
    // One machine-readable record, then the human table.
    println!(
        "METRICS psnr_db={:.12} ssim={:.12} sam_rad={:.12} ergas={:.12}",
        r.psnr_db, r.ssim, r.sam_rad, r.ergas
    );
    println!("  index   value");
    println!("  PSNR    {:10.4} dB", r.psnr_db);
    println!(
        "  SSIM    {:10.4}{}",
        r.ssim,
        if r.ssim_uniform_window {
            "  (uniform full-band window)"
        } else {
            ""
        }
    );
    println!(
        "  SAM     {:10.4} rad{}",
        r.sam_rad,
        if r.sam_skipped_pixels > 0 {
            format!("  ({} zero-norm pixels skipped)", r.sam_skipped_pixels)
        } else {
            String::new()
        }
    );
    println!(
        "  ERGAS   {:10.4}{}",
        r.ergas,
        if r.ergas_skipped_bands > 0 {
            format!("  ({} zero-mean bands skipped)", r.ergas_skipped_bands)
        } else {
            String::new()
        }
    );
    Ok(())
}

fn run_init_schedule(args: InitScheduleArgs) -> Result<()> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be >= 1".into()));
    }
    let model = args.model.to_model();
    let mut sched = solver::default_schedule(model);
    sched.stages = vec![sched.stages[0].clone(); args.k];
    schedule::save_schedule(&args.output, &sched)?;
    println!(
        "init-schedule: wrote {} ({} stages, model {})",
        args.output.display(),
        args.k,
        schedule::model_to_str(model)
    );
    Ok(())
}
