//! The 88-value per-frame feature vector: 40 image-quality measures, 12
//! colour/histogram features and 36 wavelet statistics, in that order.

pub mod color;
pub mod iqm;
pub mod wavelet;

use std::sync::OnceLock;

use crate::distortion::{make_distorted_set, DistortionConfig, DistortionKind};
use crate::error::Result;
use crate::imaging::{Frame, Orientation};

pub const FEATURE_COUNT: usize = iqm::IQM_LEN + color::COLOR_LEN + wavelet::HOWS_LEN;

/// Canonical feature names, in vector order.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(FEATURE_COUNT);
        for kind in DistortionKind::ALL {
            for m in 1..=iqm::MEASURES {
                names.push(format!("iqm_{}_m{m:02}", kind.tag()));
            }
        }
        for suffix in ["mean_r", "mean_g", "mean_b", "corr_rg", "corr_gb", "corr_br"] {
            names.push(format!("color_{suffix}"));
        }
        for suffix in ["eratio_gb", "eratio_gr", "eratio_br", "com_r", "com_g", "com_b"] {
            names.push(format!("color_{suffix}"));
        }
        for level in 1..=3 {
            for o in Orientation::ALL {
                for stat in ["mean", "var", "skew", "kurt"] {
                    names.push(format!("hows_l{level}_{}_{stat}", o.tag()));
                }
            }
        }
        names
    })
}

/// Position of a name in the canonical order.
pub fn feature_index(name: &str) -> Option<usize> {
    feature_names().iter().position(|n| n == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// See [`iqm::IqmVector::degenerate`].
    pub degenerate: bool,
}

/// Full 88-value extraction for one frame. `seed` drives the noise
/// distortion only.
pub fn extract_frame(frame: &Frame, config: &DistortionConfig, seed: u64) -> Result<FeatureVector> {
    let hows = wavelet::hows_vector(frame)?;
    let set = make_distorted_set(frame, config, seed)?;
    let iqm = iqm::iqm_vector(&set)?;
    let color = color::color_vector(frame);

    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.extend_from_slice(&iqm.values);
    values.extend_from_slice(&color);
    values.extend_from_slice(&hows);
    Ok(FeatureVector { values, degenerate: iqm.degenerate })
}
