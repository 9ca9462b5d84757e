//! Five classifiers behind one train/predict interface, plus the model file.

pub mod bayes;
pub mod forest;
pub mod oner;
pub mod svm;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{project_indices, write_atomic, LabeledDataset};
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::seed::argmax_lowest;

use bayes::GaussianNb;
use forest::{ForestConfig, RandomForest};
use oner::OneRRule;
use svm::{LinearSvm, SvmConfig};
use tree::{DecisionTree, GrowConfig};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "rf")]
    RandomForest,
    #[serde(rename = "j48")]
    C45Tree,
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "oner")]
    OneR,
    #[serde(rename = "svm")]
    LinearSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::RandomForest,
        ClassifierKind::C45Tree,
        ClassifierKind::NaiveBayes,
        ClassifierKind::OneR,
        ClassifierKind::LinearSvm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::C45Tree => "j48",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::OneR => "oner",
            ClassifierKind::LinearSvm => "svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| invalid_param(format!("unknown classifier {s:?} (expected rf, j48, nb, oner or svm)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Zero selects `ceil(sqrt(d))`.
    pub max_features: usize,
    pub min_leaf: usize,
    /// Zero means unlimited.
    pub max_depth: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, bootstrap: true, max_features: 0, min_leaf: 1, max_depth: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub min_leaf: usize,
    /// Zero means unlimited.
    pub max_depth: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { min_leaf: 2, max_depth: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BayesParams {
    pub var_floor: f64,
}

impl Default for BayesParams {
    fn default() -> Self {
        BayesParams { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OneRParams {
    pub min_bucket: usize,
}

impl Default for OneRParams {
    fn default() -> Self {
        OneRParams { min_bucket: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { lambda: 1e-4, epochs: 1000, learning_rate: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub rf: ForestParams,
    pub j48: TreeParams,
    pub nb: BayesParams,
    pub oner: OneRParams,
    pub svm: SvmParams,
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.rf.n_trees >= 1, "rf.n_trees must be at least 1"),
            (self.rf.min_leaf >= 1, "rf.min_leaf must be at least 1"),
            (self.j48.min_leaf >= 1, "j48.min_leaf must be at least 1"),
            (self.nb.var_floor > 0.0 && self.nb.var_floor.is_finite(), "nb.var_floor must be positive"),
            (self.oner.min_bucket >= 1, "oner.min_bucket must be at least 1"),
            (self.svm.lambda >= 0.0 && self.svm.lambda.is_finite(), "svm.lambda must be non-negative"),
            (self.svm.epochs >= 1, "svm.epochs must be at least 1"),
            (self.svm.learning_rate > 0.0 && self.svm.learning_rate.is_finite(), "svm.learning_rate must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(invalid_param(*msg)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameters {
    Forest(RandomForest),
    Tree(DecisionTree),
    Bayes(GaussianNb),
    OneR(OneRRule),
    Svm(LinearSvm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub kind: ClassifierKind,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub feature_subset: Vec<String>,
    pub class_set: Vec<String>,
    pub parameters: Parameters,
}

fn nonzero(v: usize) -> Option<usize> {
    (v > 0).then_some(v)
}

/// Trains `kind` on every column of `dataset`.
pub fn train(kind: ClassifierKind, dataset: &LabeledDataset, hp: &Hyperparams, seed: u64) -> Result<TrainedModel> {
    hp.validate()?;
    dataset.validate()?;
    let classes = dataset.class_set();
    if classes.len() < 2 {
        return Err(invalid_input(format!("training needs at least 2 classes, found {}", classes.len())));
    }
    let y = dataset.targets(&classes)?;
    for (c, name) in classes.iter().enumerate() {
        let count = y.iter().filter(|&&l| l == c).count();
        if count < 2 {
            return Err(invalid_input(format!("class {name} has {count} row(s); at least 2 are required")));
        }
    }
    if dataset.width() == 0 {
        return Err(invalid_input("training needs at least one feature"));
    }
    let x = &dataset.rows;
    let k = classes.len();
    let parameters = match kind {
        ClassifierKind::RandomForest => {
            let cfg = ForestConfig {
                n_trees: hp.rf.n_trees,
                bootstrap: hp.rf.bootstrap,
                max_features: nonzero(hp.rf.max_features),
                min_leaf: hp.rf.min_leaf,
                max_depth: nonzero(hp.rf.max_depth),
            };
            Parameters::Forest(RandomForest::fit(x, &y, k, cfg, seed))
        }
        ClassifierKind::C45Tree => {
            let cfg = GrowConfig { min_leaf: hp.j48.min_leaf, max_depth: nonzero(hp.j48.max_depth), max_features: None };
            let idx: Vec<usize> = (0..x.len()).collect();
            Parameters::Tree(DecisionTree::fit(x, &y, k, &idx, cfg, seed))
        }
        ClassifierKind::NaiveBayes => Parameters::Bayes(GaussianNb::fit(x, &y, k, hp.nb.var_floor)),
        ClassifierKind::OneR => Parameters::OneR(oner::fit(x, &y, k, hp.oner.min_bucket)),
        ClassifierKind::LinearSvm => {
            let cfg = SvmConfig { lambda: hp.svm.lambda, epochs: hp.svm.epochs, learning_rate: hp.svm.learning_rate };
            Parameters::Svm(LinearSvm::fit(x, &y, k, cfg))
        }
    };
    Ok(TrainedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        kind,
        hyperparams: hp.clone(),
        seed,
        feature_subset: dataset.feature_names.clone(),
        class_set: classes,
        parameters,
    })
}

impl TrainedModel {
    /// Class index for a row laid out as `feature_subset`.
    pub fn predict_index(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.feature_subset.len() {
            return Err(invalid_input(format!(
                "row has {} values but the model expects {}",
                row.len(),
                self.feature_subset.len()
            )));
        }
        let k = self.class_set.len();
        Ok(match &self.parameters {
            Parameters::Forest(f) => f.predict(row, k),
            Parameters::Tree(t) => t.predict(row),
            Parameters::Bayes(b) => b.predict(row),
            Parameters::OneR(r) => r.predict(row),
            Parameters::Svm(s) => s.predict(row),
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<&str> {
        Ok(&self.class_set[self.predict_index(row)?])
    }

    /// Majority vote over per-row predictions; ties go to the lower class.
    pub fn predict_clip(&self, rows: &[Vec<f64>]) -> Result<&str> {
        let votes = self.predict_indices(rows)?;
        Ok(&self.class_set[clip_vote(&votes, self.class_set.len())?])
    }

    pub fn predict_indices(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|r| self.predict_index(r)).collect()
    }

    /// Reorders `dataset`'s columns to the model's feature subset by name.
    pub fn project(&self, dataset: &LabeledDataset) -> Result<LabeledDataset> {
        project_indices(&dataset.feature_names, &self.feature_subset)?;
        dataset.project(&self.feature_subset)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Serde("model file has no schema_version".into()))?;
        if found != u64::from(MODEL_SCHEMA_VERSION) {
            return Err(Error::Schema { expected: MODEL_SCHEMA_VERSION, found: found.min(u64::from(u32::MAX)) as u32 });
        }
        let model: TrainedModel = serde_json::from_value(value).map_err(|e| Error::Serde(e.to_string()))?;
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let consistent = matches!(
            (&self.parameters, self.kind),
            (Parameters::Forest(_), ClassifierKind::RandomForest)
                | (Parameters::Tree(_), ClassifierKind::C45Tree)
                | (Parameters::Bayes(_), ClassifierKind::NaiveBayes)
                | (Parameters::OneR(_), ClassifierKind::OneR)
                | (Parameters::Svm(_), ClassifierKind::LinearSvm)
        );
        if !consistent || self.class_set.is_empty() {
            return Err(Error::Serde(format!("model parameters do not match kind {}", self.kind)));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Majority of `votes` over `n_classes`; ties go to the lower index.
pub fn clip_vote(votes: &[usize], n_classes: usize) -> Result<usize> {
    if votes.is_empty() {
        return Err(invalid_input("cannot vote on an empty clip"));
    }
    let mut counts = vec![0usize; n_classes];
    for &v in votes {
        counts[v] += 1;
    }
    Ok(argmax_lowest(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut clips = Vec::new();
        for i in 0..90 {
            let c = i % 3;
            // an ordinal column for single-feature rules, one-hot columns for the linear machine
            let mut row = vec![c as f64 * 3.0 + rng.random::<f64>()];
            row.extend((0..3).map(|j| if j == c { 3.0 } else { 0.0 } + rng.random::<f64>()));
            rows.push(row);
            labels.push(format!("cam{c}"));
            clips.push(format!("clip{}", i / 3));
        }
        LabeledDataset::new(["a", "b", "c", "d"].map(String::from).to_vec(), rows, labels, clips).unwrap()
    }

    #[test]
    fn all_kinds_fit_easy_data() {
        let ds = toy();
        for kind in ClassifierKind::ALL {
            let model = train(kind, &ds, &Hyperparams::default(), 7).unwrap();
            let correct = ds.rows.iter().zip(&ds.labels).filter(|(r, l)| model.predict(r).unwrap() == l.as_str()).count();
            assert!(correct as f64 / ds.len() as f64 >= 0.95, "{kind}: {correct}");
        }
    }

    #[test]
    fn model_file_roundtrips_byte_identically() {
        let ds = toy();
        for kind in ClassifierKind::ALL {
            let model = train(kind, &ds, &Hyperparams::default(), 7).unwrap();
            let text = model.to_json().unwrap();
            let back = TrainedModel::from_json(&text).unwrap();
            assert_eq!(back, model);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn forest_is_deterministic() {
        let ds = toy();
        let a = train(ClassifierKind::RandomForest, &ds, &Hyperparams::default(), 7).unwrap().to_json().unwrap();
        let b = train(ClassifierKind::RandomForest, &ds, &Hyperparams::default(), 7).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let ds = toy();
        let model = train(ClassifierKind::OneR, &ds, &Hyperparams::default(), 7).unwrap();
        let text = model.to_json().unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 9", 1);
        let err = TrainedModel::from_json(&text).unwrap_err();
        assert_eq!(err.kind(), "schema-mismatch");
    }

    #[test]
    fn training_preconditions() {
        let one_class = LabeledDataset::new(
            vec!["a".into()],
            vec![vec![1.0], vec![2.0]],
            vec!["x".into(), "x".into()],
            vec!["c".into(), "c".into()],
        )
        .unwrap();
        assert_eq!(train(ClassifierKind::NaiveBayes, &one_class, &Hyperparams::default(), 0).unwrap_err().kind(), "invalid-input");

        let mut bad = toy();
        bad.rows[4][1] = f64::NAN;
        let err = train(ClassifierKind::C45Tree, &bad, &Hyperparams::default(), 0).unwrap_err();
        assert!(err.to_string().contains("row 4") && err.to_string().contains("feature b"), "{err}");
    }

    #[test]
    fn width_mismatch_and_clip_votes() {
        let model = train(ClassifierKind::OneR, &toy(), &Hyperparams::default(), 0).unwrap();
        assert_eq!(model.predict(&[1.0]).unwrap_err().kind(), "invalid-input");
        assert_eq!(clip_vote(&[0, 0, 0], 3).unwrap(), 0);
        assert_eq!(clip_vote(&[2, 2, 1], 3).unwrap(), 2);
        assert_eq!(clip_vote(&[2, 1], 3).unwrap(), 1);
        assert!(clip_vote(&[], 3).is_err());
        assert!(model.predict_clip(&[]).is_err());
    }

    #[test]
    fn kind_tags_parse() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.tag().parse::<ClassifierKind>().unwrap(), k);
        }
        assert!("knn".parse::<ClassifierKind>().is_err());
    }
}
