//! Pipeline configuration, read from TOML.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! The configuration is validated as a whole before any stage runs and is
//! copied verbatim into every report.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camsim::{default_profile_bank, CameraProfile};
use crate::classifiers::{ClassifierKind, Hyperparams};
use crate::distortion::DistortionConfig;
use crate::error::{invalid_param, Error, Result};
use crate::selection::DEFAULT_K;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; every random stream of every stage derives from it.
    pub seed: u64,
    pub distortion: DistortionConfig,
    pub selection: SelectionConfig,
    pub classifier: ClassifierConfig,
    pub evaluation: EvaluationConfig,
    pub simulation: SimulationConfig,
    pub paths: PathsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub k: usize,
    /// Minimum bucket size of the OneR ranking evaluator.
    pub oner_min_bucket: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub clips_per_camera: usize,
    pub frames_per_clip: usize,
    pub width: usize,
    pub height: usize,
    pub profiles: Vec<CameraProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Root of the `<camera>/<clip>/frame_NNNNNN.png` tree.
    pub frames: PathBuf,
    pub features: PathBuf,
    pub selection: PathBuf,
    pub model: PathBuf,
    pub report_json: PathBuf,
    pub report_csv: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            distortion: DistortionConfig::default(),
            selection: SelectionConfig::default(),
            classifier: ClassifierConfig::default(),
            evaluation: EvaluationConfig::default(),
            simulation: SimulationConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { k: DEFAULT_K, oner_min_bucket: 6 }
    }
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { kind: ClassifierKind::RandomForest, hyperparams: Hyperparams::default() }
    }
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { folds: 10 }
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { clips_per_camera: 30, frames_per_clip: 20, width: 128, height: 128, profiles: default_profile_bank() }
    }
}

impl Default for PathsConfig {
    fn default() -> Self {
        let out = Path::new("out");
        PathsConfig {
            frames: out.join("frames"),
            features: out.join("features.csv"),
            selection: out.join("selection.json"),
            model: out.join("model.json"),
            report_json: out.join("report.json"),
            report_csv: out.join("report.csv"),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format { path: origin.to_path_buf(), message: e.message().to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.distortion.validate()?;
        if self.selection.k == 0 {
            return Err(invalid_param("selection k must be at least 1"));
        }
        if self.selection.oner_min_bucket == 0 {
            return Err(invalid_param("selection oner_min_bucket must be at least 1"));
        }
        self.classifier.hyperparams.validate()?;
        if self.evaluation.folds < 2 {
            return Err(invalid_param(format!("folds must be at least 2, got {}", self.evaluation.folds)));
        }
        self.simulation.validate()
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clips_per_camera == 0 || self.frames_per_clip == 0 {
            return Err(invalid_param("simulation needs at least one clip per camera and one frame per clip"));
        }
        let (w, h) = (self.width, self.height);
        if w < 64 || h < 64 || w % 8 != 0 || h % 8 != 0 {
            return Err(invalid_param(format!("simulated frame size {w}x{h} must be at least 64x64 and divisible by 8")));
        }
        if self.profiles.len() < 2 {
            return Err(invalid_param("simulation needs at least two camera profiles"));
        }
        let mut ids = BTreeSet::new();
        for p in &self.profiles {
            p.validate()?;
            if !ids.insert(p.id.as_str()) {
                return Err(invalid_param(format!("camera id {} is used twice", p.id)));
            }
        }
        Ok(())
    }
}
