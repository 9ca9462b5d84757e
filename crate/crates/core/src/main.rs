use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vidsource::classifiers::{ClassifierKind, TrainedModel};
use vidsource::config::PipelineConfig;
use vidsource::dataset::{write_atomic, LabeledDataset};
use vidsource::pipeline::{self, SelectionReport};
use vidsource::{Error, Result};

/// Video source-camera identification from per-frame forensic features.
#[derive(Parser)]
#[command(name = "vidsource", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration; defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Selection size per ranking.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Cross-validation folds.
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true, value_parser = parse_kind)]
    classifier: Option<ClassifierKind>,
}

fn parse_kind(s: &str) -> std::result::Result<ClassifierKind, String> {
    s.parse::<ClassifierKind>().map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Render the camera bank into a frame tree.
    Simulate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the feature CSV from a frame tree.
    Extract {
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank features with both evaluators and intersect the top k.
    Select {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a classifier and write the model file.
    Train {
        #[arg(long)]
        features: Option<PathBuf>,
        /// Selection report whose feature subset to train on.
        #[arg(long)]
        selection: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label frames with a trained model; prints CSV with the clip majority.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Feature CSV; its columns are matched to the model by name.
        #[arg(long, conflicts_with = "clip")]
        features: Option<PathBuf>,
        /// A single clip directory of frames, extracted on the fly.
        #[arg(long)]
        clip: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate, or train/test when --test is given.
    Evaluate {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        selection: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn effective_config(g: &Global) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(k) = g.k {
        cfg.selection.k = k;
    }
    if let Some(folds) = g.folds {
        cfg.evaluation.folds = folds;
    }
    if let Some(kind) = g.classifier {
        cfg.classifier.kind = kind;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn or(path: &Option<PathBuf>, default: &Path) -> PathBuf {
    path.clone().unwrap_or_else(|| default.to_path_buf())
}

fn load_selection(path: &Option<PathBuf>) -> Result<Option<SelectionReport>> {
    path.as_deref().map(SelectionReport::load).transpose()
}

fn run(cli: Cli) -> Result<()> {
    let cfg = effective_config(&cli.global)?;
    let paths = &cfg.paths;
    pipeline::with_jobs(cli.global.jobs, || match &cli.command {
        Command::Simulate { out } => {
            let root = or(out, &paths.frames);
            let n = pipeline::simulate_to_dir(&cfg.simulation, cfg.seed, &root)?;
            eprintln!("wrote {n} clips under {}", root.display());
            Ok(())
        }
        Command::Extract { frames, out } => {
            let ds = pipeline::extract_dir(&or(frames, &paths.frames), &cfg.distortion, cfg.seed)?;
            let out = or(out, &paths.features);
            ds.write_csv(&out)?;
            eprintln!("wrote {} rows to {}", ds.len(), out.display());
            Ok(())
        }
        Command::Select { features, out } => {
            let ds = LabeledDataset::read_csv(&or(features, &paths.features))?;
            let report = pipeline::select(&ds, &cfg)?;
            pipeline::write_json(&or(out, &paths.selection), &report)?;
            eprintln!("selected {} features: {}", report.selected.names.len(), report.selected.names.join(","));
            Ok(())
        }
        Command::Train { features, selection, out } => {
            let ds = LabeledDataset::read_csv(&or(features, &paths.features))?;
            let selection = load_selection(selection)?;
            let model = pipeline::train_model(&ds, &cfg, selection.as_ref().map(|s| &s.selected))?;
            model.save(&or(out, &paths.model))?;
            Ok(())
        }
        Command::Predict { model, features, clip, out } => {
            let model = TrainedModel::load(&or(model, &paths.model))?;
            let predictions = match clip {
                Some(dir) => pipeline::predict_clip_dir(&model, dir, &cfg)?,
                None => pipeline::predict(&model, &LabeledDataset::read_csv(&or(features, &paths.features))?)?,
            };
            let text = pipeline::predictions_csv(&predictions)?;
            match out {
                Some(path) => write_atomic(path, text.as_bytes()),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e }),
            }
        }
        Command::Evaluate { features, test, selection, out_json, out_csv } => {
            let ds = LabeledDataset::read_csv(&or(features, &paths.features))?;
            let test = test.as_deref().map(LabeledDataset::read_csv).transpose()?;
            let selection = load_selection(selection)?;
            let doc = pipeline::evaluate(&ds, test.as_ref(), &cfg, selection.as_ref().map(|s| &s.selected))?;
            pipeline::write_json(&or(out_json, &paths.report_json), &doc)?;
            write_atomic(&or(out_csv, &paths.report_csv), doc.report.to_csv()?.as_bytes())?;
            let m = &doc.report;
            eprintln!(
                "{}: frame accuracy {:.4}, clip accuracy {:.4}",
                m.classifier, m.frame_level.metrics.overall_accuracy, m.clip_level.metrics.overall_accuracy
            );
            Ok(())
        }
        Command::ShowConfig => {
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
    })?
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let text = e.to_string();
            let message = text
                .lines()
                .find_map(|l| l.strip_prefix("error: "))
                .unwrap_or("a subcommand is required (simulate, extract, select, train, predict, evaluate)");
            return fail("usage", message);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
