use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swinglens::evaluation::{
    benchmark, fit_target, generate_swings, join_features, BenchmarkConfig, LabeledDataset, ModelFamily,
    SwingSynthConfig,
};
use swinglens::features::{default_schema, FeatureMatrix, FeatureSchema, FeatureVector, LabelPolicy, Target};
use swinglens::feedback::{
    compare_sessions, default_density_floor, export_curves_csv, extract_curves, generate_feedback, optimal_value,
    render_curve_svg, svg_file_name, Objective, DEFAULT_GRID_SIZE,
};
use swinglens::metrics::write_metric_dump;
use swinglens::models::{load_model, save_model, Activation, SavedModel, TrainedModel, TrainingConfig};
use swinglens::pose::{
    keypoints_to_json, pair_records, parse_ball_csv, parse_keypoint_file_with, write_ball_csv, BallRecord, ClubType,
    IngestOptions, View,
};
use swinglens::{extract_features, Error};

#[derive(Parser)]
#[command(name = "swinglens", version, about = "Golf swing features, ball-flight models and swing feedback")]
struct Cli {
    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute metrics and feature vectors from keypoint JSON.
    Extract(ExtractArgs),
    /// Train and score LR and NAM models for every target on a held-out split.
    Benchmark(BenchmarkArgs),
    /// Train one model on all rows and save it as JSON.
    Train(TrainArgs),
    /// Render shape functions of a saved NAM as SVG files plus a CSV.
    Explain(ExplainArgs),
    /// Rank per-feature changes that move a golfer toward the model optimum.
    Feedback(FeedbackArgs),
    /// Report feature shifts and ball dispersion between two sessions.
    Compare(CompareArgs),
    /// Write a synthetic keypoint file and matching ball CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct LabelArgs {
    /// Direction angles with |angle| at most this many degrees are straight.
    #[arg(long, default_value_t = 6.0)]
    dir_threshold: f64,
    /// Spin axes with |axis| at most this many degrees are straight.
    #[arg(long, default_value_t = 10.0)]
    spin_threshold: f64,
}

impl LabelArgs {
    fn policy(&self) -> Result<LabelPolicy, Error> {
        for t in [self.dir_threshold, self.spin_threshold] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Invalid(format!("threshold {t} must be a non-negative number")));
            }
        }
        Ok(LabelPolicy {
            direction_threshold: self.dir_threshold,
            spin_threshold: self.spin_threshold,
        })
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Seed for splits, initialization and shuffling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// NAM hidden layer widths, e.g. `64,32`.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// NAM activation: softplus or tanh.
    #[arg(long)]
    activation: Option<String>,
}

impl ModelArgs {
    fn apply(&self, mut cfg: TrainingConfig) -> Result<TrainingConfig, Error> {
        cfg.seed = self.seed;
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.l2 {
            cfg.l2_penalty = v;
        }
        if let Some(v) = &self.hidden {
            cfg.hidden_sizes = v.clone();
        }
        if let Some(a) = &self.activation {
            cfg.activation = match a.to_ascii_lowercase().as_str() {
                "softplus" => Activation::Softplus,
                "tanh" => Activation::Tanh,
                other => return Err(Error::Invalid(format!("unknown activation `{other}`"))),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// Keypoint JSON file.
    #[arg(long)]
    keypoints: PathBuf,
    /// Launch-monitor CSV to pair by swing id.
    #[arg(long)]
    balls: Option<PathBuf>,
    /// Output directory for features.csv and metrics.csv.
    #[arg(long)]
    out: PathBuf,
    /// Camera view to extract; swings of the other view are skipped.
    #[arg(long, default_value = "FACEON")]
    view: View,
    /// JSON schema file overriding the default feature selection.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Convert left-handed swings to right-handed form.
    #[arg(long)]
    mirror: bool,
    /// Reject swings with any joint below this confidence.
    #[arg(long, default_value_t = 0.0)]
    min_confidence: f64,
}

#[derive(Args)]
struct DataArgs {
    /// Feature CSV (`swing_id` plus one column per feature).
    #[arg(long)]
    features: PathBuf,
    /// Ball CSV joined to the features by swing id.
    #[arg(long)]
    balls: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    labels: LabelArgs,
    /// Fraction of rows used for training.
    #[arg(long, default_value_t = 739.0 / 924.0)]
    train_fraction: f64,
    /// Targets to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "direction,spin,speed")]
    targets: Vec<Target>,
    /// Model families to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "lr,nam")]
    models: Vec<ModelFamily>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    labels: LabelArgs,
    #[arg(long)]
    target: Target,
    /// lr or nam.
    #[arg(long, default_value = "nam")]
    family: ModelFamily,
    /// Model JSON output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExplainArgs {
    /// Saved NAM JSON.
    #[arg(long)]
    model: PathBuf,
    /// Training feature CSV defining grid ranges and density.
    #[arg(long)]
    features: PathBuf,
    /// Output directory for SVGs and curves.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    /// Minimum density-bin count for the marked optimum; defaults to 1% of rows.
    #[arg(long)]
    floor: Option<usize>,
}

#[derive(Args)]
struct FeedbackArgs {
    /// Saved NAM JSON.
    #[arg(long)]
    model: PathBuf,
    /// Training feature CSV defining grid ranges and density.
    #[arg(long)]
    features: PathBuf,
    /// Feature CSV of the golfer's swings.
    #[arg(long)]
    swings: PathBuf,
    /// Keep only swings whose id starts with this prefix.
    #[arg(long)]
    id_prefix: Option<String>,
    #[arg(long, default_value = "golfer")]
    golfer: String,
    /// Number of items to report.
    #[arg(short, long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    #[arg(long)]
    floor: Option<usize>,
    /// Also write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    before_features: PathBuf,
    #[arg(long)]
    before_balls: PathBuf,
    #[arg(long)]
    after_features: PathBuf,
    #[arg(long)]
    after_balls: PathBuf,
    /// Also write the comparison as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for keypoints.json and balls.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    swings: usize,
    #[arg(long, default_value_t = 10)]
    golfers: usize,
    #[arg(long, default_value = "I7", value_parser = parse_club)]
    club: ClubType,
    /// Pixel jitter standard deviation.
    #[arg(long, default_value_t = 1.0)]
    jitter: f64,
}

fn parse_club(s: &str) -> Result<ClubType, String> {
    s.parse()
        .map_err(|()| format!("unknown club `{s}` (expected one of W1, W3, I4-I9)"))
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| io_at(dir, e))
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| io_at(path, e))
}

fn read_features(path: &Path) -> Result<FeatureMatrix, Error> {
    if !path.is_file() {
        return Err(io_at(path, std::io::ErrorKind::NotFound.into()));
    }
    Ok(FeatureMatrix::from_path(path)?)
}

fn load_dataset(args: &DataArgs, verbose: bool) -> Result<LabeledDataset, Error> {
    let matrix = read_features(&args.features)?;
    let balls = parse_ball_csv(&args.balls)?;
    let (data, unmatched) = join_features(&matrix, &balls);
    if !unmatched.is_empty() {
        eprintln!("warning: {} feature rows have no ball record and were dropped", unmatched.len());
        if verbose {
            eprintln!("  unmatched: {}", unmatched.join(", "));
        }
    }
    Ok(data)
}

fn load_additive(path: &Path) -> Result<(SavedModel, swinglens::models::AdditiveModel), Error> {
    let saved = load_model(path)?;
    match &saved.model {
        TrainedModel::Additive(m) => {
            let m = m.clone();
            Ok((saved, m))
        }
        TrainedModel::Linear(_) => Err(Error::Invalid(format!(
            "{} holds a linear model; shape functions need a NAM",
            path.display()
        ))),
    }
}

fn check_columns(expected: &[String], matrix: &FeatureMatrix, path: &Path) -> Result<(), Error> {
    if matrix.names != expected {
        return Err(Error::Invalid(format!(
            "{}: feature columns do not match the model's {} features",
            path.display(),
            expected.len()
        )));
    }
    Ok(())
}

fn cmd_extract(args: &ExtractArgs, verbose: bool) -> Result<(), Error> {
    let schema = match &args.schema {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_at(p, e))?;
            FeatureSchema::from_json(&text, args.view)?
        }
        None => default_schema(args.view),
    };
    let options = IngestOptions {
        min_confidence: args.min_confidence,
        mirror: args.mirror,
    };
    let sequences = parse_keypoint_file_with(&args.keypoints, &options)?;
    let total = sequences.len();
    let sequences: Vec<_> = sequences.into_iter().filter(|s| s.view == args.view).collect();
    if sequences.len() < total {
        eprintln!(
            "warning: skipped {} swings not recorded in {} view",
            total - sequences.len(),
            args.view
        );
    }

    let mut rows = Vec::with_capacity(sequences.len());
    let mut metric_values = Vec::with_capacity(sequences.len());
    for seq in &sequences {
        let (values, fv) = extract_features(seq, &schema)?;
        rows.push(fv);
        metric_values.push(values);
    }
    let matrix = FeatureMatrix {
        names: schema.names(),
        rows,
    };

    let paired = match &args.balls {
        Some(path) if path.is_file() => {
            let balls = parse_ball_csv(path)?;
            let pairing = pair_records(sequences.clone(), balls);
            if !pairing.unmatched_sequences.is_empty() {
                eprintln!("warning: {} swings have no ball record", pairing.unmatched_sequences.len());
            }
            if verbose && !pairing.unmatched_balls.is_empty() {
                eprintln!("  ball records without a swing: {}", pairing.unmatched_balls.join(", "));
            }
            Some(pairing.shots.len())
        }
        Some(path) => {
            eprintln!("warning: ball file {} not found; features written without pairing", path.display());
            None
        }
        None => {
            eprintln!("warning: no ball file given; features written without pairing");
            None
        }
    };

    create_dir(&args.out)?;
    let features_path = args.out.join("features.csv");
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    write_file(&features_path, &buf)?;
    let metrics_path = args.out.join("metrics.csv");
    let mut buf = Vec::new();
    write_metric_dump(sequences.iter().zip(metric_values.iter().map(Vec::as_slice)), &mut buf)?;
    write_file(&metrics_path, &buf)?;

    let paired = paired.map_or_else(|| "no ball pairing".to_string(), |n| format!("{n} paired with ball records"));
    println!(
        "extracted {} {} swings x {} features ({paired}) -> {}, {}",
        matrix.rows.len(),
        args.view,
        matrix.names.len(),
        features_path.display(),
        metrics_path.display()
    );
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs, verbose: bool) -> Result<(), Error> {
    let data = load_dataset(&args.data, verbose)?;
    let config = BenchmarkConfig {
        train_fraction: args.train_fraction,
        seed: args.model.seed,
        policy: args.labels.policy()?,
        linear: args.model.apply(TrainingConfig::linear())?,
        nam: args.model.apply(TrainingConfig::nam())?,
        targets: args.targets.clone(),
        families: args.models.clone(),
    };
    eprintln!("seed: {}", config.seed);
    let outcome = benchmark(&data, &config)?;
    let json = outcome.to_json();
    for r in &outcome.reports {
        let score = match (r.auc, r.accuracy, r.mse) {
            (Some(auc), Some(acc), _) => format!("AUC {auc:.4}  accuracy {acc:.4}"),
            (_, _, Some(mse)) => format!("MSE {mse:.4}"),
            _ => String::new(),
        };
        eprintln!("{:<9} {:<3}  {score}  (train {}, test {})", r.task.to_string(), r.model, r.n_train, r.n_test);
    }
    for s in &outcome.skipped {
        eprintln!("skipped {} {}: {}", s.task, s.model, s.reason);
    }
    match &args.out {
        Some(path) => {
            write_file(path, json.as_bytes())?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs, verbose: bool) -> Result<(), Error> {
    let data = load_dataset(&args.data, verbose)?;
    let policy = args.labels.policy()?;
    let base = match args.family {
        ModelFamily::Linear => TrainingConfig::linear(),
        ModelFamily::Additive => TrainingConfig::nam(),
    };
    let config = args.model.apply(base)?;
    eprintln!("seed: {}", config.seed);
    let y = data.targets(args.target, &policy);
    let model = fit_target(&data.rows, &y, &data.names, args.target, args.family, &config)?;
    save_model(
        &SavedModel {
            target: Some(args.target),
            model,
        },
        &args.out,
    )?;
    println!(
        "trained {} for {} on {} rows x {} features -> {}",
        args.family.name(),
        args.target,
        data.len(),
        data.names.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_explain(args: &ExplainArgs) -> Result<(), Error> {
    let (saved, model) = load_additive(&args.model)?;
    let train = read_features(&args.features)?;
    check_columns(&model.feature_names, &train, &args.features)?;
    let values = train.values();
    let curves = extract_curves(&model, &values, args.grid)?;
    let floor = args.floor.unwrap_or_else(|| default_density_floor(values.len()));
    let objective = Objective::for_task(model.task);
    let target = saved.target.map_or("output", Target::as_str);
    create_dir(&args.out)?;
    for curve in &curves {
        let marker = optimal_value(curve, objective, floor).ok();
        let path = args.out.join(svg_file_name(target, &curve.feature));
        write_file(&path, render_curve_svg(curve, marker).as_bytes())?;
    }
    let csv_path = args.out.join("curves.csv");
    export_curves_csv(&curves, &csv_path)?;
    println!("wrote {} SVGs and {} to {}", curves.len(), csv_path.display(), args.out.display());
    Ok(())
}

fn cmd_feedback(args: &FeedbackArgs) -> Result<(), Error> {
    let (saved, model) = load_additive(&args.model)?;
    let train = read_features(&args.features)?;
    check_columns(&model.feature_names, &train, &args.features)?;
    let golfer = read_features(&args.swings)?;
    check_columns(&model.feature_names, &golfer, &args.swings)?;
    let swings: Vec<Vec<f64>> = golfer
        .rows
        .iter()
        .filter(|r| args.id_prefix.as_deref().is_none_or(|p| r.swing_id.starts_with(p)))
        .map(|r: &FeatureVector| r.values.clone())
        .collect();
    if swings.is_empty() {
        return Err(Error::Invalid(match &args.id_prefix {
            Some(p) => format!("{}: no swing id starts with `{p}`", args.swings.display()),
            None => format!("{}: no swings", args.swings.display()),
        }));
    }
    let train_values = train.values();
    let curves = extract_curves(&model, &train_values, args.grid)?;
    let floor = args.floor.unwrap_or_else(|| default_density_floor(train_values.len()));
    let target = saved.target.unwrap_or(match model.task {
        swinglens::models::Task::Regression => Target::Speed,
        swinglens::models::Task::Binary => Target::Direction,
    });
    let report = generate_feedback(&model, &curves, &args.golfer, &swings, target, args.k, floor)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write_file(path, json.as_bytes())?;
    }
    Ok(())
}

fn read_session(features: &Path, balls: &Path) -> Result<(FeatureMatrix, Vec<BallRecord>), Error> {
    Ok((read_features(features)?, parse_ball_csv(balls)?))
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Error> {
    let (before, before_balls) = read_session(&args.before_features, &args.before_balls)?;
    let (after, after_balls) = read_session(&args.after_features, &args.after_balls)?;
    if before.names != after.names {
        return Err(Error::Invalid("the two sessions have different feature columns".into()));
    }
    let c = compare_sessions(&before.names, &before.values(), &before_balls, &after.values(), &after_balls)?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "sessions: {} swings before, {} after", c.n_before, c.n_after);
    let _ = writeln!(
        out,
        "std of lr_distance_out: {:.3} -> {:.3}",
        c.before_lr_distance_std, c.after_lr_distance_std
    );
    let _ = writeln!(
        out,
        "mean |direction_angle|: {:.3} -> {:.3}",
        c.before_mean_abs_direction, c.after_mean_abs_direction
    );
    for f in &c.features {
        let _ = writeln!(out, "{:<28} {:>10.4} -> {:>10.4}  ({:+.4})", f.feature, f.before, f.after, f.shift);
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&c).expect("comparison serializes") + "\n";
        write_file(path, json.as_bytes())?;
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Error> {
    if args.swings == 0 || args.golfers == 0 {
        return Err(Error::Invalid("--swings and --golfers must be positive".into()));
    }
    if !(args.jitter.is_finite() && args.jitter >= 0.0) {
        return Err(Error::Invalid("--jitter must be a non-negative number".into()));
    }
    eprintln!("seed: {}", args.seed);
    let synth = generate_swings(&SwingSynthConfig {
        n_swings: args.swings,
        n_golfers: args.golfers,
        seed: args.seed,
        club: args.club,
        jitter: args.jitter,
    });
    create_dir(&args.out)?;
    let kp = args.out.join("keypoints.json");
    write_file(&kp, keypoints_to_json(&synth.sequences).as_bytes())?;
    let balls = args.out.join("balls.csv");
    let mut buf = Vec::new();
    write_ball_csv(&synth.balls, &mut buf)?;
    write_file(&balls, &buf)?;
    println!("wrote {} swings to {} and {}", synth.sequences.len(), kp.display(), balls.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Extract(a) => cmd_extract(a, cli.verbose),
        Command::Benchmark(a) => cmd_benchmark(a, cli.verbose),
        Command::Train(a) => cmd_train(a, cli.verbose),
        Command::Explain(a) => cmd_explain(a),
        Command::Feedback(a) => cmd_feedback(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
