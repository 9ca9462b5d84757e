//! The stages behind the command-line tool: simulate, extract, select,
//! train, predict and evaluate.
//!
//! Frame trees are laid out as `<root>/<camera>/<clip>/frame_NNNNNN.png`;
//! the camera directory name is the label and `<camera>/<clip>` the clip id.
//! Work fans out over rayon, but results are assembled in (clip, frame)
//! order and every random stream is keyed by clip id and frame number, so
//! the thread count never changes any output byte.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::camsim::render_clip;
use crate::classifiers::{clip_vote, train, TrainedModel, MODEL_SCHEMA_VERSION};
use crate::config::{PipelineConfig, SimulationConfig};
use crate::dataset::{write_atomic, LabeledDataset};
use crate::distortion::DistortionConfig;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::evaluation::{cross_validate, evaluate_holdout, EvaluationReport, REPORT_SCHEMA_VERSION};
use crate::features::{extract_frame, feature_names, FEATURE_COUNT};
use crate::frames_io::{list_frames, read_frame, write_clip};
use crate::imaging::Frame;
use crate::seed::{derive_seed, derive_seed2, hash_label};
use crate::selection::{correlation_rank, oner_rank, select_intersection, FeatureRanking, SelectedFeatureSet};

pub const SELECTION_SCHEMA_VERSION: u32 = 1;

const SCENE_STREAM: u64 = 0x5343_454E;
const EXTRACT_STREAM: u64 = 0x4558_5452;

/// A clip's label and identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipRef {
    pub label: String,
    pub clip_id: String,
}

pub fn clip_id(camera: &str, clip_index: usize) -> String {
    format!("{camera}/clip_{:03}", clip_index + 1)
}

pub fn scene_seed(master: u64, camera_index: usize, clip_index: usize) -> u64 {
    derive_seed2(derive_seed(master, SCENE_STREAM), camera_index as u64, clip_index as u64)
}

/// Seed of the noise distortion for frame `frame` (0-based) of a clip.
pub fn frame_seed(master: u64, clip_id: &str, frame: usize) -> u64 {
    derive_seed2(derive_seed(master, EXTRACT_STREAM), hash_label(clip_id), frame as u64)
}

/// Runs `f` on a pool of `jobs` threads; 0 means one per core.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| invalid_param(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Renders every clip of the simulated bank, cameras in profile order.
pub fn simulate(sim: &SimulationConfig, seed: u64) -> Result<Vec<(ClipRef, Vec<Frame>)>> {
    sim.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..sim.profiles.len()).flat_map(|c| (0..sim.clips_per_camera).map(move |k| (c, k))).collect();
    jobs.par_iter()
        .map(|&(c, k)| {
            let profile = &sim.profiles[c];
            let clip = render_clip(profile, scene_seed(seed, c, k), sim.frames_per_clip, sim.width, sim.height)?;
            let r = ClipRef { label: profile.id.clone(), clip_id: clip_id(&profile.id, k) };
            Ok((r, clip.frames))
        })
        .collect()
}

/// Renders the bank into a frame tree under `root`, replacing any clip
/// directories of the same name. Returns the number of clips written.
pub fn simulate_to_dir(sim: &SimulationConfig, seed: u64, root: &Path) -> Result<usize> {
    let clips = simulate(sim, seed)?;
    clips
        .par_iter()
        .map(|(r, frames)| {
            let dir = root.join(&r.clip_id);
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            }
            write_clip(&dir, frames)
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(clips.len())
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            let name = entry.file_name().into_string().map_err(|n| Error::Ingest {
                path: dir.to_path_buf(),
                message: format!("directory name {n:?} is not UTF-8"),
            })?;
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Clip directories of a frame tree in (camera, clip) name order.
pub fn discover_clips(root: &Path) -> Result<Vec<(ClipRef, Vec<PathBuf>)>> {
    let mut clips = Vec::new();
    for (camera, camera_dir) in sorted_subdirs(root)? {
        for (clip, clip_dir) in sorted_subdirs(&camera_dir)? {
            let frames = list_frames(&clip_dir)?;
            clips.push((ClipRef { label: camera.clone(), clip_id: format!("{camera}/{clip}") }, frames));
        }
    }
    if clips.is_empty() {
        return Err(Error::Ingest { path: root.to_path_buf(), message: "no <camera>/<clip> directories".into() });
    }
    Ok(clips)
}

/// One feature row per frame. `load(c, f)` supplies frame `f` of clip `c`;
/// `counts[c]` is the clip's frame count.
pub fn extract_rows<F>(clips: &[ClipRef], counts: &[usize], distortion: &DistortionConfig, seed: u64, load: F) -> Result<LabeledDataset>
where
    F: Fn(usize, usize) -> Result<Frame> + Sync,
{
    distortion.validate()?;
    let tasks: Vec<(usize, usize)> = counts.iter().enumerate().flat_map(|(c, &n)| (0..n).map(move |f| (c, f))).collect();
    let results: Vec<Result<Vec<f64>>> = tasks
        .par_iter()
        .map(|&(c, f)| {
            let id = &clips[c].clip_id;
            load(c, f)
                .and_then(|frame| extract_frame(&frame, distortion, frame_seed(seed, id, f)))
                .map(|v| v.values)
                .map_err(|e| Error::Frame { clip: id.clone(), frame: f + 1, source: Box::new(e) })
        })
        .collect();
    let mut rows = Vec::with_capacity(tasks.len());
    for r in results {
        rows.push(r?);
    }
    let labels = tasks.iter().map(|&(c, _)| clips[c].label.clone()).collect();
    let ids = tasks.iter().map(|&(c, _)| clips[c].clip_id.clone()).collect();
    LabeledDataset::new(feature_names().to_vec(), rows, labels, ids)
}

pub fn extract_frames(clips: &[(ClipRef, Vec<Frame>)], distortion: &DistortionConfig, seed: u64) -> Result<LabeledDataset> {
    let refs: Vec<ClipRef> = clips.iter().map(|(r, _)| r.clone()).collect();
    let counts: Vec<usize> = clips.iter().map(|(_, f)| f.len()).collect();
    extract_rows(&refs, &counts, distortion, seed, |c, f| Ok(clips[c].1[f].clone()))
}

pub fn extract_dir(root: &Path, distortion: &DistortionConfig, seed: u64) -> Result<LabeledDataset> {
    let clips = discover_clips(root)?;
    let refs: Vec<ClipRef> = clips.iter().map(|(r, _)| r.clone()).collect();
    let counts: Vec<usize> = clips.iter().map(|(_, f)| f.len()).collect();
    extract_rows(&refs, &counts, distortion, seed, |c, f| read_frame(&clips[c].1[f]))
}

/// Everything needed to regenerate a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub feature_count: usize,
    pub model_schema_version: u32,
    pub report_schema_version: u32,
    pub selection_schema_version: u32,
    pub config: PipelineConfig,
}

impl Provenance {
    pub fn new(config: &PipelineConfig) -> Self {
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            feature_count: FEATURE_COUNT,
            model_schema_version: MODEL_SCHEMA_VERSION,
            report_schema_version: REPORT_SCHEMA_VERSION,
            selection_schema_version: SELECTION_SCHEMA_VERSION,
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub correlation: FeatureRanking,
    pub oner: FeatureRanking,
    pub selected: SelectedFeatureSet,
}

impl SelectionReport {
    pub fn load(path: &Path) -> Result<Self> {
        read_versioned(path, SELECTION_SCHEMA_VERSION)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub provenance: Provenance,
    pub report: EvaluationReport,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

/// Parses a JSON file whose top-level `schema_version` must equal `expected`.
fn read_versioned<T: DeserializeOwned>(path: &Path, expected: u32) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Format { path: path.to_path_buf(), message };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let found = value.get("schema_version").and_then(serde_json::Value::as_u64).ok_or_else(|| bad("no schema_version".into()))?;
    if found != u64::from(expected) {
        return Err(Error::Schema { expected, found: found.min(u64::from(u32::MAX)) as u32 });
    }
    serde_json::from_value(value).map_err(|e| bad(e.to_string()))
}

/// Both rankings and their top-`k` intersection.
pub fn select(ds: &LabeledDataset, config: &PipelineConfig) -> Result<SelectionReport> {
    let correlation = correlation_rank(ds)?;
    let oner = oner_rank(ds, config.selection.oner_min_bucket)?;
    let selected = select_intersection(&correlation, &oner, config.selection.k)?;
    Ok(SelectionReport { schema_version: SELECTION_SCHEMA_VERSION, provenance: Provenance::new(config), correlation, oner, selected })
}

/// Restricts `ds` to a selection's features, or leaves it whole.
pub fn apply_selection(ds: &LabeledDataset, selection: Option<&SelectedFeatureSet>) -> Result<LabeledDataset> {
    match selection {
        Some(s) => ds.project(&s.names),
        None => Ok(ds.clone()),
    }
}

pub fn train_model(ds: &LabeledDataset, config: &PipelineConfig, selection: Option<&SelectedFeatureSet>) -> Result<TrainedModel> {
    let ds = apply_selection(ds, selection)?;
    train(config.classifier.kind, &ds, &config.classifier.hyperparams, config.seed)
}

/// Cross-validation over `ds`, or train-on-`ds`/test-on-`test` when a test
/// set is given.
pub fn evaluate(
    ds: &LabeledDataset,
    test: Option<&LabeledDataset>,
    config: &PipelineConfig,
    selection: Option<&SelectedFeatureSet>,
) -> Result<EvaluationDocument> {
    let report = match test {
        Some(test) => evaluate_holdout(&train_model(ds, config, selection)?, test)?,
        None => {
            let ds = apply_selection(ds, selection)?;
            cross_validate(config.classifier.kind, &ds, &config.classifier.hyperparams, config.evaluation.folds, config.seed)?
        }
    };
    Ok(EvaluationDocument { provenance: Provenance::new(config), report })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramePrediction {
    pub clip_id: String,
    /// 1-based position of the frame within its clip.
    pub frame: usize,
    pub predicted: String,
    pub clip_majority: String,
}

/// Per-frame labels plus each clip's majority label. Columns are matched
/// to the model by name, so any superset of its features is accepted.
pub fn predict(model: &TrainedModel, ds: &LabeledDataset) -> Result<Vec<FramePrediction>> {
    if ds.is_empty() {
        return Err(invalid_input("no rows to predict"));
    }
    let projected = model.project(ds)?;
    let predicted = model.predict_indices(&projected.rows)?;
    let mut out: Vec<Option<FramePrediction>> = vec![None; ds.len()];
    for (clip, rows) in ds.clips() {
        let votes: Vec<usize> = rows.iter().map(|&r| predicted[r]).collect();
        let majority = &model.class_set[clip_vote(&votes, model.class_set.len())?];
        for (pos, &r) in rows.iter().enumerate() {
            out[r] = Some(FramePrediction {
                clip_id: clip.clone(),
                frame: pos + 1,
                predicted: model.class_set[predicted[r]].clone(),
                clip_majority: majority.clone(),
            });
        }
    }
    Ok(out.into_iter().flatten().collect())
}

pub fn predictions_csv(predictions: &[FramePrediction]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in predictions {
        w.serialize(p).map_err(|e| Error::Serde(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Serde(e.to_string()))?).map_err(|e| Error::Serde(e.to_string()))
}

/// Labels a clip directory's frames directly, without a feature file.
pub fn predict_clip_dir(model: &TrainedModel, clip_dir: &Path, config: &PipelineConfig) -> Result<Vec<FramePrediction>> {
    let frames = list_frames(clip_dir)?;
    let id = clip_dir.file_name().and_then(|n| n.to_str()).unwrap_or("clip").to_string();
    let clip = ClipRef { label: String::new(), clip_id: id };
    let ds = extract_rows(&[clip], &[frames.len()], &config.distortion, config.seed, |_, f| read_frame(&frames[f]))?;
    predict(model, &ds)
}
