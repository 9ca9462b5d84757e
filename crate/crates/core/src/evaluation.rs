//! Clip-stratified cross-validation, confusion matrices and per-class
//! precision / recall / F-measure.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{clip_vote, train, ClassifierKind, Hyperparams, TrainedModel};
use crate::dataset::LabeledDataset;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::seed::derive_seed2;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const FOLD_SHUFFLE_STREAM: u64 = 0xF01D;
const FOLD_TRAIN_STREAM: u64 = 0x7EA1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// `(clip id, fold)` in first-appearance order of the clips.
    pub clips: Vec<(String, usize)>,
    /// Fold of every dataset row.
    #[serde(skip)]
    pub row_folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.row_folds.len()).filter(|&i| self.row_folds[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.row_folds.len()).filter(|&i| self.row_folds[i] != fold).collect()
    }
}

/// Label of every clip; a clip whose frames disagree is an error.
pub fn clip_labels(ds: &LabeledDataset) -> Result<Vec<(String, String, Vec<usize>)>> {
    ds.clips()
        .into_iter()
        .map(|(clip, rows)| {
            let label = &ds.labels[rows[0]];
            if let Some(&bad) = rows.iter().find(|&&i| &ds.labels[i] != label) {
                return Err(invalid_input(format!(
                    "clip {clip} mixes labels {label} and {}",
                    ds.labels[bad]
                )));
            }
            Ok((clip, label.clone(), rows))
        })
        .collect()
}

/// Assigns whole clips to `k` folds. Within each class the clips are
/// shuffled and dealt round-robin; the starting fold carries over between
/// classes so fold sizes stay level too.
pub fn stratified_kfold(ds: &LabeledDataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(invalid_param(format!("fold count must be at least 2, got {k}")));
    }
    let clips = clip_labels(ds)?;
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (ci, (_, label, _)) in clips.iter().enumerate() {
        by_class.entry(label.as_str()).or_default().push(ci);
    }
    for (label, members) in &by_class {
        if members.len() < k {
            return Err(invalid_input(format!(
                "class {label} has {} clip(s); {k}-fold cross-validation needs at least {k}",
                members.len()
            )));
        }
    }
    let mut clip_fold = vec![0usize; clips.len()];
    let mut next = 0;
    for (class_index, members) in by_class.values().enumerate() {
        let mut members = members.clone();
        members.sort_by(|&a, &b| clips[a].0.cmp(&clips[b].0));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(seed, FOLD_SHUFFLE_STREAM, class_index as u64));
        members.shuffle(&mut rng);
        for ci in members {
            clip_fold[ci] = next;
            next = (next + 1) % k;
        }
    }
    let mut row_folds = vec![0usize; ds.len()];
    for (ci, (_, _, rows)) in clips.iter().enumerate() {
        for &r in rows {
            row_folds[r] = clip_fold[ci];
        }
    }
    Ok(FoldAssignment {
        k,
        seed,
        clips: clips.iter().zip(&clip_fold).map(|((c, _, _), &f)| (c.clone(), f)).collect(),
        row_folds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_set: Vec<String>,
    /// `counts[actual][predicted]`
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(class_set: Vec<String>) -> Self {
        let n = class_set.len();
        ConfusionMatrix { class_set, counts: vec![vec![0; n]; n] }
    }

    pub fn from_pairs(class_set: Vec<String>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = ConfusionMatrix::new(class_set);
        for (a, p) in pairs {
            m.counts[a][p] += 1;
        }
        m
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, v) in row.iter_mut().zip(o) {
                *c += v;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|c| self.counts[c][c]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    pub overall_accuracy: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F-measure; zero when precision and recall are both zero.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// One-vs-rest precision, recall and F per class, plus trace / total.
pub fn metrics(m: &ConfusionMatrix) -> Result<Metrics> {
    if m.total() == 0 {
        return Err(invalid_input("confusion matrix is empty"));
    }
    let n = m.class_set.len();
    let per_class = (0..n)
        .map(|c| {
            let tp = m.counts[c][c];
            let actual: u64 = m.counts[c].iter().sum();
            let predicted: u64 = (0..n).map(|a| m.counts[a][c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, actual);
            ClassMetrics { class: m.class_set[c].clone(), precision, recall, f_measure: f_measure(precision, recall) }
        })
        .collect();
    Ok(Metrics { per_class, overall_accuracy: ratio(m.trace(), m.total()) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

impl LevelReport {
    fn new(confusion: ConfusionMatrix) -> Result<Self> {
        let metrics = metrics(&confusion)?;
        Ok(LevelReport { confusion, metrics })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub classifier: ClassifierKind,
    pub feature_subset: Vec<String>,
    /// Absent for a train/test evaluation.
    pub folds: Option<FoldAssignment>,
    pub frame_level: LevelReport,
    pub clip_level: LevelReport,
}

impl EvaluationReport {
    /// Table with one row per class and level: precision, recall, F-measure
    /// and the level's overall accuracy.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let ser = |e: csv::Error| Error::Serde(e.to_string());
        w.write_record(["level", "class", "precision", "recall", "f_measure", "overall_accuracy"]).map_err(ser)?;
        for (level, r) in [("frame", &self.frame_level), ("clip", &self.clip_level)] {
            let acc = r.metrics.overall_accuracy.to_string();
            for c in &r.metrics.per_class {
                w.write_record([
                    level,
                    &c.class,
                    &c.precision.to_string(),
                    &c.recall.to_string(),
                    &c.f_measure.to_string(),
                    &acc,
                ])
                .map_err(ser)?;
            }
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Serde(e.to_string()))?).map_err(|e| Error::Serde(e.to_string()))
    }
}

/// Frame and clip confusions of `model` on `test`, indexed by `classes`.
fn score(model: &TrainedModel, test: &LabeledDataset, classes: &[String]) -> Result<(ConfusionMatrix, ConfusionMatrix)> {
    let projected = model.project(test)?;
    let actual = test.targets(classes)?;
    // model classes are a subset of `classes`
    let remap: Vec<usize> = model
        .class_set
        .iter()
        .map(|c| classes.binary_search(c).map_err(|_| invalid_input(format!("unknown class {c}"))))
        .collect::<Result<_>>()?;
    let predicted: Vec<usize> = model.predict_indices(&projected.rows)?.into_iter().map(|p| remap[p]).collect();
    let frames = ConfusionMatrix::from_pairs(classes.to_vec(), actual.iter().copied().zip(predicted.iter().copied()));
    let mut clips = ConfusionMatrix::new(classes.to_vec());
    for (_, rows) in test.clips() {
        let votes: Vec<usize> = rows.iter().map(|&r| predicted[r]).collect();
        clips.counts[actual[rows[0]]][clip_vote(&votes, classes.len())?] += 1;
    }
    Ok((frames, clips))
}

/// Trains on `k - 1` folds and tests on the held-out one, for every fold,
/// pooling the confusions in fold order.
pub fn cross_validate(
    kind: ClassifierKind,
    ds: &LabeledDataset,
    hp: &Hyperparams,
    k: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    ds.validate()?;
    hp.validate()?;
    let folds = stratified_kfold(ds, k, seed)?;
    let classes = ds.class_set();
    let per_fold: Vec<(ConfusionMatrix, ConfusionMatrix)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let model = train(kind, &ds.subset(&folds.train_rows(f)), hp, fold_training_seed(seed, f))?;
            score(&model, &ds.subset(&folds.test_rows(f)), &classes)
        })
        .collect::<Result<_>>()?;
    let mut frames = ConfusionMatrix::new(classes.clone());
    let mut clips = ConfusionMatrix::new(classes);
    for (fm, cm) in &per_fold {
        frames.add(fm);
        clips.add(cm);
    }
    Ok(EvaluationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        classifier: kind,
        feature_subset: ds.feature_names.clone(),
        folds: Some(folds),
        frame_level: LevelReport::new(frames)?,
        clip_level: LevelReport::new(clips)?,
    })
}

/// Scores a trained model on a separate test set.
pub fn evaluate_holdout(model: &TrainedModel, test: &LabeledDataset) -> Result<EvaluationReport> {
    test.validate()?;
    let mut classes = model.class_set.clone();
    for c in test.class_set() {
        if let Err(pos) = classes.binary_search(&c) {
            classes.insert(pos, c);
        }
    }
    let (frames, clips) = score(model, test, &classes)?;
    Ok(EvaluationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        classifier: model.kind,
        feature_subset: model.feature_subset.clone(),
        folds: None,
        frame_level: LevelReport::new(frames)?,
        clip_level: LevelReport::new(clips)?,
    })
}

/// Seed used to train the model of fold `f`.
pub fn fold_training_seed(seed: u64, f: usize) -> u64 {
    derive_seed2(seed, FOLD_TRAIN_STREAM, f as u64)
}
