//! Command-line front end: rule induction, segment extraction, scene
//! classification and the synthetic benchmark.
//!
//! Exit codes: 0 success (an ambiguous classification is data, not
//! failure), 1 usage or parse errors, 2 empty or degenerate input.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use fuzzseg_core::bench::{run_bench, BenchConfig, BenchError};
use fuzzseg_core::config::{Config, ConfigError};
use fuzzseg_core::descriptors::{
    read_scene, write_scene, FrameOrientation, SceneReadError, SegmentDescriptor,
};
use fuzzseg_core::inference::{InferenceError, Winner};
use fuzzseg_core::model::{project_model, CameraPose, ModelError, VehicleClass, VehicleModel3D};
use fuzzseg_core::overlay::render_svg;
use fuzzseg_core::pipeline::{classify_scene, PipelineError};
use fuzzseg_core::preprocess::{extract_segments, LabelMask, PreprocessError};
use fuzzseg_core::rulebase::{induct, RuleBase, RuleBaseParseError, RuleError};

#[derive(Parser)]
#[command(
    name = "fuzzseg",
    version,
    about = "Fuzzy-rule vehicle recognition from segment descriptors"
)]
struct Cli {
    /// JSON config file; omitted fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a 3-D model through a camera and induct its rule base.
    Induct(InductArgs),
    /// Extract segment descriptors from a label mask.
    Extract(ExtractArgs),
    /// Classify a scene against rule bases.
    Classify(ClassifyArgs),
    /// Run the seeded synthetic accuracy benchmark on the bundled models.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InductArgs {
    /// Model file (JSON: class, faces, optional anchor label).
    #[arg(long)]
    model: PathBuf,
    /// Camera pose file (JSON: position, rotation, focal, principal).
    #[arg(long)]
    camera: PathBuf,
    /// Output rule base file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    /// Mask file: binary PGM (P5) or text grid ("W H" header + rows).
    #[arg(long)]
    mask: PathBuf,
    /// Working-frame rotation in radians, applied before accumulation.
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Output scene file (one descriptor JSON object per line).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Rule base files (one per class).
    #[arg(long, required = true, num_args = 1..)]
    rules: Vec<PathBuf>,
    /// Scene input: .jsonl/.json descriptor lines, .pgm binary mask, or
    /// text grid mask.
    #[arg(long)]
    scene: PathBuf,
    /// Merge retention threshold; overrides the config value.
    #[arg(long)]
    tau: Option<f64>,
    /// Working-frame rotation for mask inputs, in radians.
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Write an SVG overlay (input grey, merged blue, model white).
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Classes to include (default: all five).
    #[arg(long, value_delimiter = ',')]
    classes: Vec<VehicleClass>,
    /// Scenes generated per class.
    #[arg(long, default_value_t = 40)]
    scenes: usize,
    /// Maximum fragments per segment (drawn uniformly from 1..=k).
    #[arg(long, default_value_t = 2)]
    split: u32,
    /// Mass-center jitter sigma as a fraction of the model diagonal.
    #[arg(long, default_value_t = 0.02)]
    jitter: f64,
    /// Per-segment drop probability.
    #[arg(long, default_value_t = 0.2)]
    drop: f64,
    /// Random seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the report to a file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 = usage/parse, 2 = empty or degenerate input.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. }
            | CliError::Parse { .. }
            | CliError::Config(_)
            | CliError::Usage(_) => 1,
            CliError::Model(e) => match e {
                ModelError::FaceBehindCamera { .. }
                | ModelError::DegenerateProjection { .. }
                | ModelError::TooFewVisibleFaces { .. }
                | ModelError::AnchorNotVisible(_) => 2,
                _ => 1,
            },
            CliError::Rule(e) => match e {
                RuleError::DegenerateModelSegment { .. } => 2,
                _ => 1,
            },
            CliError::Preprocess(e) => match e {
                PreprocessError::EmptyMask => 2,
                _ => 1,
            },
            CliError::Pipeline(e) => match e {
                PipelineError::Inference(InferenceError::EmptyScene) => 2,
                PipelineError::Preprocess(PreprocessError::EmptyMask) => 2,
                _ => 1,
            },
            CliError::Bench(e) => match e {
                BenchError::Rule(RuleError::DegenerateModelSegment { .. }) => 2,
                BenchError::Pipeline(PipelineError::Inference(InferenceError::EmptyScene)) => 2,
                _ => 1,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
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

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Induct(args) => cmd_induct(args, &config),
        Command::Extract(args) => cmd_extract(args),
        Command::Classify(args) => cmd_classify(args, config),
        Command::Bench(args) => cmd_bench(args, &config),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = read_text(p)?;
            Config::from_json(&text).map_err(|e| match e {
                ConfigError::Parse(err) => parse_error(p, err),
                other => other.into(),
            })
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Parse {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

fn cmd_induct(args: InductArgs, config: &Config) -> Result<(), CliError> {
    let model: VehicleModel3D =
        serde_json::from_str(&read_text(&args.model)?).map_err(|e| parse_error(&args.model, e))?;
    let camera: CameraPose = serde_json::from_str(&read_text(&args.camera)?)
        .map_err(|e| parse_error(&args.camera, e))?;
    let class_model = project_model(&model, &camera)?;
    let rb = induct(&class_model, &config.widths)?;
    write_file(&args.out, rb.to_json_pretty().as_bytes())?;
    eprintln!(
        "inducted {}: {} shape rules, {} placement rules",
        rb.class_id,
        rb.shape_rules.len(),
        rb.placement_rules.len()
    );
    Ok(())
}

fn load_mask(path: &Path) -> Result<LabelMask, CliError> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
    {
        LabelMask::from_pgm(&read_bytes(path)?).map_err(|e| parse_error(path, e))
    } else {
        LabelMask::from_text(&read_text(path)?).map_err(|e| parse_error(path, e))
    }
}

fn cmd_extract(args: ExtractArgs) -> Result<(), CliError> {
    let mask = load_mask(&args.mask)?;
    let frame = FrameOrientation::new(args.angle);
    let labeled = extract_segments(&mask, frame)?;
    let segments: Vec<SegmentDescriptor> = labeled.iter().map(|l| l.segment).collect();
    let tags: Vec<String> = labeled.iter().map(|l| l.label.to_string()).collect();
    let mut out = Vec::new();
    write_scene(&mut out, &segments, Some(&tags)).map_err(|source| CliError::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    write_file(&args.out, &out)?;
    eprintln!("extracted {} segments", segments.len());
    Ok(())
}

fn load_scene(path: &Path, angle: f64) -> Result<Vec<SegmentDescriptor>, CliError> {
    let is_jsonl = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("json"));
    if is_jsonl {
        let text = read_text(path)?;
        return read_scene(text.as_bytes()).map_err(|e| match e {
            SceneReadError::Io(source) => CliError::Io {
                path: path.display().to_string(),
                source,
            },
            other => parse_error(path, other),
        });
    }
    let mask = load_mask(path)?;
    let labeled = extract_segments(&mask, FrameOrientation::new(angle))?;
    Ok(labeled.into_iter().map(|l| l.segment).collect())
}

fn cmd_classify(args: ClassifyArgs, mut config: Config) -> Result<(), CliError> {
    if let Some(tau) = args.tau {
        if !(0.0..=1.0).contains(&tau) {
            return Err(CliError::Usage(format!(
                "--tau must lie in [0, 1], got {tau}"
            )));
        }
        config.tau = tau;
    }
    let mut rulebases = Vec::with_capacity(args.rules.len());
    for path in &args.rules {
        let rb = RuleBase::from_json(&read_text(path)?).map_err(|e| match e {
            RuleBaseParseError::Json(err) => parse_error(path, err),
            RuleBaseParseError::Invalid(err) => err.into(),
        })?;
        rulebases.push(rb);
    }
    let scene = load_scene(&args.scene, args.angle)?;
    let outcome = classify_scene(&scene, &rulebases, &config)?;

    for eval in &outcome.evaluations {
        if !eval.plan.discarded.is_empty() {
            eprintln!(
                "note: {} left {} fragment(s) unmatched: {:?}",
                eval.class_id,
                eval.plan.discarded.len(),
                eval.plan.discarded
            );
        }
    }

    let record = outcome.to_json();
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(&record).expect("result serializes")
    );

    if let Some(overlay_path) = &args.overlay {
        let winner_eval = match &outcome.result.winner {
            Winner::Class(c) => outcome.evaluations.iter().find(|e| &e.class_id == c),
            Winner::Ambiguous(_) => None,
        };
        let svg = match winner_eval {
            Some(eval) => {
                let rb = rulebases
                    .iter()
                    .find(|rb| rb.class_id == eval.class_id)
                    .expect("evaluation class has a rulebase");
                render_svg(&scene, &eval.merged, Some(&rb.model_segments))
            }
            None => render_svg(&scene, &[], None),
        };
        write_file(overlay_path, svg.as_bytes())?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs, config: &Config) -> Result<(), CliError> {
    let bench = BenchConfig {
        classes: if args.classes.is_empty() {
            VehicleClass::ALL.to_vec()
        } else {
            args.classes.clone()
        },
        scenes_per_class: args.scenes,
        split_k: args.split,
        jitter: args.jitter,
        drop_prob: args.drop,
        seed: args.seed.unwrap_or(config.seed),
    };
    let report = run_bench(&bench, config)?;
    let json = report.to_json_pretty();
    print!("{json}");
    if let Some(path) = &args.out {
        write_file(path, json.as_bytes())?;
    }
    Ok(())
}
