//! Seeded synthetic cameras.
//!
//! A procedural scene (multi-octave value noise plus a moving gradient) is
//! sampled through a colour filter array, demosaiced, multiplied by a fixed
//! per-camera gain plane, colour-corrected, gamma-encoded, given read noise,
//! quantized and JPEG round-tripped at the camera's quality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Result};
use crate::imaging::{quantize, Frame};
use crate::jpeg;
use crate::seed::{derive_seed, derive_seed2, mix64};

const PRNU_STREAM: u64 = 0x5052_4E55;
const NOISE_STREAM: u64 = 0x4E4F_4953;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CfaPattern {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

impl CfaPattern {
    /// Colour index (0 = R, 1 = G, 2 = B) sampled at `(x, y)`.
    pub fn channel_at(self, x: usize, y: usize) -> usize {
        let cell = match self {
            CfaPattern::Rggb => [0, 1, 1, 2],
            CfaPattern::Bggr => [2, 1, 1, 0],
            CfaPattern::Grbg => [1, 0, 2, 1],
            CfaPattern::Gbrg => [1, 2, 0, 1],
        };
        cell[(y % 2) * 2 + x % 2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Demosaic {
    Nearest,
    Bilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraProfile {
    pub id: String,
    pub cfa_pattern: CfaPattern,
    pub demosaic: Demosaic,
    /// Relative standard deviation of the gain plane.
    pub prnu_sigma: f64,
    pub color_matrix: [[f64; 3]; 3],
    pub gamma: f64,
    pub jpeg_quality: u8,
    /// In 8-bit code values.
    pub read_noise_sigma: f64,
    pub seed: u64,
}

impl CameraProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(invalid_param(format!("camera {}: {msg}", self.id)));
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id == "." || self.id == ".." {
            return bad(format!("id {:?} is not usable as a directory name", self.id));
        }
        if !(self.prnu_sigma >= 0.0 && self.prnu_sigma.is_finite()) {
            return bad(format!("prnu_sigma {} must be finite and non-negative", self.prnu_sigma));
        }
        if !(self.read_noise_sigma >= 0.0 && self.read_noise_sigma.is_finite()) {
            return bad(format!("read_noise_sigma {} must be finite and non-negative", self.read_noise_sigma));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma {} must be positive", self.gamma));
        }
        if !(1..=100).contains(&self.jpeg_quality) {
            return bad(format!("jpeg_quality {} outside [1, 100]", self.jpeg_quality));
        }
        for (i, row) in self.color_matrix.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if !row.iter().all(|v| v.is_finite()) || (sum - 1.0).abs() > 0.2 {
                return bad(format!("color_matrix row {i} sums to {sum}, expected 1 +- 0.2"));
            }
        }
        Ok(())
    }

    /// Multiplicative gain per pixel, raster order.
    pub fn prnu_plane(&self, width: usize, height: usize) -> Vec<f64> {
        if self.prnu_sigma == 0.0 {
            return vec![1.0; width * height];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, PRNU_STREAM));
        let normal = Normal::new(0.0, self.prnu_sigma).expect("validated sigma");
        (0..width * height).map(|_| 1.0 + normal.sample(&mut rng)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticClip {
    pub camera_id: String,
    pub frames: Vec<Frame>,
    pub clip_seed: u64,
}

/// Random scene parameters drawn once per clip.
struct Scene {
    seed: u64,
    scale: f64,
    octaves: u32,
    brightness: f64,
    contrast: f64,
    chroma: f64,
    tint: [f64; 3],
    pan: (f64, f64),
    grad_dir: (f64, f64),
    grad_amp: f64,
    grad_speed: f64,
}

impl Scene {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        Scene {
            seed,
            scale: rng.random_range(6.0..48.0),
            octaves: rng.random_range(2..=5),
            brightness: rng.random_range(0.2..0.7),
            contrast: rng.random_range(0.08..1.2),
            chroma: rng.random_range(0.0..0.2),
            tint: [rng.random_range(0.85..1.0), rng.random_range(0.85..1.0), rng.random_range(0.85..1.0)],
            pan: (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            grad_dir: (angle.cos(), angle.sin()),
            grad_amp: rng.random_range(0.0..0.4),
            grad_speed: rng.random_range(-0.05..0.05),
        }
    }

    fn lattice(&self, ix: i64, iy: i64, layer: u64) -> f64 {
        let h = mix64(self.seed ^ mix64(ix as u64 ^ mix64(iy as u64 ^ mix64(layer))));
        (h >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Smoothly interpolated lattice noise in [0, 1).
    fn value_noise(&self, x: f64, y: f64, layer: u64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
        let (ix, iy) = (x0 as i64, y0 as i64);
        let top = self.lattice(ix, iy, layer) * (1.0 - sx) + self.lattice(ix + 1, iy, layer) * sx;
        let bottom = self.lattice(ix, iy + 1, layer) * (1.0 - sx) + self.lattice(ix + 1, iy + 1, layer) * sx;
        top * (1.0 - sy) + bottom * sy
    }

    fn fractal(&self, x: f64, y: f64, layer: u64) -> f64 {
        let (mut sum, mut amp, mut norm, mut freq) = (0.0, 1.0, 0.0, 1.0 / self.scale);
        for o in 0..self.octaves {
            sum += amp * self.value_noise(x * freq, y * freq, layer * 16 + u64::from(o));
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        sum / norm
    }

    /// Linear-light RGB in [0, 1] at pixel `(x, y)` of frame `t`.
    fn radiance(&self, x: usize, y: usize, t: usize, width: usize, height: usize) -> [f64; 3] {
        let px = x as f64 + self.pan.0 * t as f64;
        let py = y as f64 + self.pan.1 * t as f64;
        let luma = self.fractal(px, py, 0) - 0.5;
        let u = (x as f64 / width as f64 - 0.5) * self.grad_dir.0 + (y as f64 / height as f64 - 0.5) * self.grad_dir.1;
        let grad = self.grad_amp * (u + self.grad_speed * t as f64);
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let chroma = self.chroma * (self.fractal(px, py, 1 + c as u64) - 0.5);
            *o = (self.tint[c] * (self.brightness + self.contrast * luma + chroma + grad)).clamp(0.0, 1.0);
        }
        out
    }
}

fn demosaic(mosaic: &[f64], width: usize, height: usize, cfa: CfaPattern, method: Demosaic) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]; width * height];
    for y in 0..height {
        for x in 0..width {
            let site = cfa.channel_at(x, y);
            let px = &mut out[y * width + x];
            px[site] = mosaic[y * width + x];
            for (c, v) in px.iter_mut().enumerate() {
                if c == site {
                    continue;
                }
                *v = match method {
                    Demosaic::Nearest => {
                        // first sample of colour c in the pixel's 2x2 cell
                        let (bx, by) = (x - x % 2, y - y % 2);
                        let (sx, sy) = [(0, 0), (1, 0), (0, 1), (1, 1)]
                            .into_iter()
                            .map(|(dx, dy)| (bx + dx, by + dy))
                            .find(|&(sx, sy)| cfa.channel_at(sx, sy) == c)
                            .expect("every 2x2 cell holds all colours");
                        mosaic[sy.min(height - 1) * width + sx.min(width - 1)]
                    }
                    Demosaic::Bilinear => {
                        let (mut sum, mut n) = (0.0, 0.0);
                        for ny in y.saturating_sub(1)..=(y + 1).min(height - 1) {
                            for nx in x.saturating_sub(1)..=(x + 1).min(width - 1) {
                                if cfa.channel_at(nx, ny) == c {
                                    sum += mosaic[ny * width + nx];
                                    n += 1.0;
                                }
                            }
                        }
                        sum / n
                    }
                };
            }
        }
    }
    out
}

/// Renders `n_frames` frames of one scene through `profile`.
pub fn render_clip(profile: &CameraProfile, scene_seed: u64, n_frames: usize, width: usize, height: usize) -> Result<SyntheticClip> {
    profile.validate()?;
    if n_frames == 0 {
        return Err(invalid_input("a clip needs at least one frame"));
    }
    if width < 64 || height < 64 || !width.is_multiple_of(8) || !height.is_multiple_of(8) {
        return Err(invalid_input(format!("clip size {width}x{height} must be at least 64x64 and divisible by 8")));
    }
    let scene = Scene::new(scene_seed);
    let gain = profile.prnu_plane(width, height);
    let noise_seed = derive_seed(profile.seed, NOISE_STREAM);
    let normal = (profile.read_noise_sigma > 0.0).then(|| Normal::new(0.0, profile.read_noise_sigma).expect("validated sigma"));
    let inv_gamma = 1.0 / profile.gamma;
    let m = &profile.color_matrix;

    let frames = (0..n_frames)
        .map(|t| {
            let mosaic: Vec<f64> = (0..width * height)
                .map(|i| {
                    let (x, y) = (i % width, i / width);
                    scene.radiance(x, y, t, width, height)[profile.cfa_pattern.channel_at(x, y)]
                })
                .collect();
            let rgb = demosaic(&mosaic, width, height, profile.cfa_pattern, profile.demosaic);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(noise_seed, scene_seed, t as u64));
            let mut samples = Vec::with_capacity(width * height * 3);
            for (px, g) in rgb.iter().zip(&gain) {
                let lin = px.map(|v| v * g);
                for row in m {
                    let v = (row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]).clamp(0.0, 1.0);
                    let mut code = 255.0 * v.powf(inv_gamma);
                    if let Some(n) = &normal {
                        code += n.sample(&mut rng);
                    }
                    samples.push(quantize(code));
                }
            }
            let frame = Frame::new(width, height, samples)?;
            jpeg::roundtrip(&frame, profile.jpeg_quality)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticClip { camera_id: profile.id.clone(), frames, clip_seed: scene_seed })
}

/// Five fixed cameras that differ in every processing stage.
pub fn default_profile_bank() -> Vec<CameraProfile> {
    let p = |id: &str, cfa, demosaic, prnu_sigma, color_matrix, gamma, jpeg_quality, read_noise_sigma, seed| CameraProfile {
        id: id.to_string(),
        cfa_pattern: cfa,
        demosaic,
        prnu_sigma,
        color_matrix,
        gamma,
        jpeg_quality,
        read_noise_sigma,
        seed,
    };
    vec![
        p(
            "camera-1",
            CfaPattern::Rggb,
            Demosaic::Bilinear,
            0.02,
            [[1.20, -0.15, -0.05], [-0.10, 1.15, -0.05], [-0.05, -0.20, 1.25]],
            2.2,
            70,
            0.5,
            101,
        ),
        p(
            "camera-2",
            CfaPattern::Bggr,
            Demosaic::Nearest,
            0.015,
            [[1.05, -0.05, 0.0], [0.0, 1.0, 0.0], [0.0, -0.05, 1.05]],
            2.0,
            75,
            2.5,
            202,
        ),
        p(
            "camera-3",
            CfaPattern::Grbg,
            Demosaic::Nearest,
            0.025,
            [[1.35, -0.25, -0.10], [-0.15, 1.30, -0.15], [-0.10, -0.25, 1.35]],
            1.8,
            80,
            1.0,
            303,
        ),
        p(
            "camera-4",
            CfaPattern::Gbrg,
            Demosaic::Nearest,
            0.01,
            [[0.90, 0.08, 0.02], [0.05, 0.90, 0.05], [0.02, 0.08, 0.90]],
            2.4,
            85,
            3.5,
            404,
        ),
        p(
            "camera-5",
            CfaPattern::Rggb,
            Demosaic::Bilinear,
            0.03,
            [[1.10, -0.05, -0.05], [-0.05, 1.10, -0.05], [-0.05, -0.05, 1.10]],
            2.6,
            90,
            1.8,
            505,
        ),
    ]
}
