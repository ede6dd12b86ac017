use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reg4dof::fmp::fmp_prune;
use reg4dof::io::{
    format_matches, read_cloud, read_matches, read_pose, with_suffix, write_cloud_xyz,
    write_matches, write_pose,
};
use reg4dof::pipeline::{register_pair, register_sequence, Method, PipelineConfig};
use reg4dof::synth::{
    eval_errors, generate_overlap_pair, generate_planted_with, overlap_matches, OverlapSpec,
    PlantedSpec, SUCCESS_ROTATION_DEG, SUCCESS_TRANSLATION_M,
};
use reg4dof::{Error, InlierConfig, MatchSet};

const EXIT_INGESTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Globally optimal 4DOF registration of levelled scan pairs.
///
/// Exit status: 0 on success (including runs whose optimality could not be
/// certified, reported as exact_flag = false), 1 when an input cannot be read
/// or parsed, 2 for invalid options or parameters.
#[derive(Parser)]
#[command(name = "reg4dof", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register one scan pair from a match file.
    #[command(allow_negative_numbers = true)]
    Register(RegisterArgs),
    /// Register consecutive scan pairs and chain the poses.
    #[command(after_help = SEQUENCE_HELP, allow_negative_numbers = true)]
    Sequence(SequenceArgs),
    /// Remove matches that cannot belong to any optimal consensus set.
    #[command(allow_negative_numbers = true)]
    Prune(PruneArgs),
    /// Write a synthetic match file and its ground-truth pose.
    #[command(allow_negative_numbers = true)]
    Synth(SynthArgs),
    /// Compare an estimated pose against ground truth.
    #[command(allow_negative_numbers = true)]
    Evaluate(EvaluateArgs),
}

const SEQUENCE_HELP: &str = "\
Match file k (counting from 1) pairs points of scan k (first three columns)
with points of scan k-1 (last three), so its pose maps scan k into scan k-1.
Global poses map every scan into scan 0:

    G_0 = identity
    G_k = G_(k-1) o P_k      (apply P_k first, then G_(k-1))

Example: P_1 = (theta 0.1, t 1 0 0), P_2 = (theta 0.2, t 0 1 0).
A point x of scan 2 lands in scan 0 at G_2(x) = P_1(P_2(x)), so
G_2 = (theta 0.3, t R(0.1)(0 1 0) + (1 0 0)).";

#[derive(Args)]
struct SolverArgs {
    /// Inlier threshold in metres.
    #[arg(long)]
    epsilon: f64,
    /// Skip match pruning.
    #[arg(long)]
    no_fmp: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Bnb)]
    method: MethodArg,
    /// Smallest translation cube half-side the search subdivides, metres.
    #[arg(long, default_value_t = reg4dof::bnb::DEFAULT_MIN_HALF_SIDE)]
    min_half_side: f64,
    /// RANSAC random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RANSAC success probability used to stop early.
    #[arg(long, default_value_t = reg4dof::ransac::RansacConfig::DEFAULT_CONFIDENCE)]
    confidence: f64,
    /// RANSAC iteration cap.
    #[arg(long, default_value_t = reg4dof::ransac::RansacConfig::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    /// Leave stage timings out of the report.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bnb,
    Ransac,
}

impl SolverArgs {
    fn config(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = PipelineConfig::new(InlierConfig::new(self.epsilon)?);
        cfg.fmp = !self.no_fmp;
        cfg.method = match self.method {
            MethodArg::Bnb => Method::Bnb,
            MethodArg::Ransac => Method::Ransac,
        };
        cfg.min_half_side = self.min_half_side;
        cfg.seed = self.seed;
        cfg.ransac_confidence = self.confidence;
        cfg.ransac_max_iterations = self.max_iterations;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RegisterArgs {
    /// Match file: rows of "px py pz qx qy qz".
    #[arg(long)]
    matches: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Report path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SequenceArgs {
    /// Match files for consecutive scan pairs, in order.
    #[arg(long, num_args = 1.., required = true)]
    matches: Vec<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    epsilon: f64,
    /// Where to write the surviving matches.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthMode {
    /// Random inliers and outliers around a random pose.
    Planted,
    /// Two overlapping subsets of a point cloud.
    Overlap,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    mode: SynthMode,
    /// Output prefix; writes <prefix>.matches.txt and <prefix>.truth.txt.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of matches.
    #[arg(short = 'M', long = "count", default_value_t = 1000)]
    count: usize,
    /// Inlier threshold used to label and reject samples, metres.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Planted mode: number of inliers.
    #[arg(long, default_value_t = 50)]
    inliers: usize,
    /// Noise magnitude in metres (planted: at most epsilon, default epsilon;
    /// overlap: default 0.05).
    #[arg(long)]
    noise: Option<f64>,
    /// Overlap mode: input cloud (.xyz or ASCII .ply).
    #[arg(long, required_if_eq("mode", "overlap"))]
    cloud: Option<PathBuf>,
    /// Overlap mode: overlap ratio in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Overlap mode: fraction of matches that are outliers.
    #[arg(long, default_value_t = 0.95)]
    outlier_rate: f64,
    /// Overlap mode: mean nearest-neighbour spacing after rescaling, metres.
    #[arg(long, default_value_t = OverlapSpec::DEFAULT_SPACING)]
    spacing: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Registration report (or any file with theta/theta_rad and t keys).
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth pose file.
    #[arg(long)]
    gt: PathBuf,
    /// Print a pass/fail line against the success thresholds.
    #[arg(long)]
    thresholds: bool,
    #[arg(long, default_value_t = SUCCESS_ROTATION_DEG)]
    max_rotation_deg: f64,
    #[arg(long, default_value_t = SUCCESS_TRANSLATION_M)]
    max_translation: f64,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn register(args: RegisterArgs) -> Result<(), Error> {
    let cfg = args.solver.config()?;
    let matches = read_matches(&args.matches)?;
    let report = register_pair(&matches, &cfg)?;
    emit(
        args.out.as_deref(),
        &report.to_text(!args.solver.no_timings),
    )
}

fn sequence(args: SequenceArgs) -> Result<(), Error> {
    let cfg = args.solver.config()?;
    let sets = args
        .matches
        .iter()
        .enumerate()
        .map(|(i, path)| {
            read_matches(path).map_err(|e| Error::Pair {
                index: i + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<MatchSet>, Error>>()?;
    let report = register_sequence(&sets, &cfg)?;
    emit(
        args.out.as_deref(),
        &report.to_text(!args.solver.no_timings),
    )
}

fn prune(args: PruneArgs) -> Result<(), Error> {
    let cfg = InlierConfig::new(args.epsilon)?;
    let matches = read_matches(&args.matches)?;
    let report = fmp_prune(&matches, &cfg);
    write_matches(
        &args.out,
        &report.kept,
        &format!(
            "pruned from {} with epsilon = {}",
            args.matches.display(),
            args.epsilon
        ),
    )?;
    println!("input_size = {}", matches.len());
    println!("pruned_size = {}", report.kept.len());
    println!("lower_bound = {}", report.lower_bound);
    println!("prune_ms = {:.3}", report.elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Error> {
    let cfg = InlierConfig::new(args.epsilon)?;
    let matches_path = with_suffix(&args.out, ".matches.txt");
    let truth_path = with_suffix(&args.out, ".truth.txt");
    let (instance, header) = match args.mode {
        SynthMode::Planted => {
            let mut spec = PlantedSpec::new(args.count, args.inliers, args.seed);
            spec.noise = args.noise;
            let inst = generate_planted_with(&spec, &cfg)?;
            let header = format!(
                "planted: {} matches, {} inliers, epsilon {}, seed {}",
                args.count, args.inliers, args.epsilon, args.seed
            );
            (inst, header)
        }
        SynthMode::Overlap => {
            let cloud_path = args
                .cloud
                .as_ref()
                .ok_or_else(|| Error::Config("--cloud is required in overlap mode".into()))?;
            let spec = OverlapSpec::new(args.tau, args.seed)?
                .with_noise(args.noise.unwrap_or(OverlapSpec::DEFAULT_NOISE))
                .with_spacing(args.spacing);
            spec.validate()?;
            let cloud = read_cloud(cloud_path)?;
            let pair = generate_overlap_pair(&cloud, &spec)?;
            let inst = overlap_matches(&pair, args.count, args.outlier_rate, &cfg, args.seed)?;
            write_cloud_xyz(with_suffix(&args.out, ".source.xyz"), &pair.source)?;
            write_cloud_xyz(with_suffix(&args.out, ".target.xyz"), &pair.target)?;
            let header = format!(
                "overlap: {} tau {}, {} matches, outlier rate {}, seed {}",
                cloud_path.display(),
                args.tau,
                args.count,
                args.outlier_rate,
                args.seed
            );
            (inst, header)
        }
    };
    fs::write(&matches_path, format_matches(&instance.matches, &header)).map_err(|source| {
        Error::Io {
            path: matches_path.clone(),
            source,
        }
    })?;
    write_pose(&truth_path, &instance.truth)?;
    eprintln!(
        "wrote {} ({} matches, {} inliers) and {}",
        matches_path.display(),
        instance.matches.len(),
        instance.inlier_count(),
        truth_path.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let est = read_pose(&args.est)?;
    let gt = read_pose(&args.gt)?;
    let report = eval_errors(&est, &gt);
    println!("rotation_error_deg = {:.6}", report.rotation_error_deg);
    println!("translation_error_m = {:.6}", report.translation_error_m);
    if args.thresholds {
        let pass = report.within(args.max_rotation_deg, args.max_translation);
        println!(
            "result = {} (thresholds {} deg, {} m)",
            if pass { "pass" } else { "fail" },
            args.max_rotation_deg,
            args.max_translation
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Register(a) => register(a),
        Command::Sequence(a) => sequence(a),
        Command::Prune(a) => prune(a),
        Command::Synth(a) => synth(a),
        Command::Evaluate(a) => evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reg4dof: {e}");
            ExitCode::from(if e.is_ingestion() {
                EXIT_INGESTION
            } else {
                EXIT_CONFIG
            })
        }
    }
}
