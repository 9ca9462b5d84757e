//! The four reference distortions the image-quality features are measured
//! against: additive noise, Gaussian blur, JPEG recompression and a
//! wavelet-domain compression channel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::imaging::{haar_forward, haar_inverse, quantize, BandPlane, Frame, BANDS, HAAR_LEVELS};
use crate::jpeg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionKind {
    Noise,
    GaussianFilter,
    Jpeg,
    WaveletCompression,
}

impl DistortionKind {
    /// Canonical order used in the feature vector.
    pub const ALL: [DistortionKind; 4] =
        [DistortionKind::Noise, DistortionKind::GaussianFilter, DistortionKind::Jpeg, DistortionKind::WaveletCompression];

    pub fn tag(self) -> &'static str {
        match self {
            DistortionKind::Noise => "noise",
            DistortionKind::GaussianFilter => "gauss",
            DistortionKind::Jpeg => "jpeg",
            DistortionKind::WaveletCompression => "wave",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistortionConfig {
    pub noise_sigma: f64,
    pub gaussian_kernel: usize,
    pub gaussian_sigma: f64,
    pub jpeg_quality: u8,
    pub wavelet_retention: f64,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        DistortionConfig {
            noise_sigma: 2.0,
            gaussian_kernel: 3,
            gaussian_sigma: 0.5,
            jpeg_quality: 75,
            wavelet_retention: 0.10,
        }
    }
}

impl DistortionConfig {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.noise_sigma, "noise sigma")?;
        check_kernel(self.gaussian_kernel)?;
        check_sigma(self.gaussian_sigma, "gaussian sigma")?;
        check_quality(self.jpeg_quality)?;
        check_retention(self.wavelet_retention)
    }
}

fn check_sigma(sigma: f64, what: &str) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid_param(format!("{what} must be > 0, got {sigma}")));
    }
    Ok(())
}

fn check_kernel(size: usize) -> Result<()> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(invalid_param(format!("gaussian kernel size must be odd and >= 3, got {size}")));
    }
    Ok(())
}

fn check_quality(quality: u8) -> Result<()> {
    if !(1..=100).contains(&quality) {
        return Err(invalid_param(format!("jpeg quality must be in [1, 100], got {quality}")));
    }
    Ok(())
}

fn check_retention(retention: f64) -> Result<()> {
    if !(retention > 0.0 && retention <= 1.0) {
        return Err(invalid_param(format!("wavelet retention must be in (0, 1], got {retention}")));
    }
    Ok(())
}

/// Adds independent zero-mean Gaussian noise to every sample.
pub fn add_gaussian_noise(frame: &Frame, sigma: f64, seed: u64) -> Result<Frame> {
    check_sigma(sigma, "noise sigma")?;
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid_param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = frame.samples().iter().map(|&s| quantize(f64::from(s) + normal.sample(&mut rng))).collect();
    Frame::new(frame.width(), frame.height(), samples)
}

/// Normalized `size x size` Gaussian kernel, row-major.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    check_kernel(size)?;
    check_sigma(sigma, "gaussian sigma")?;
    let r = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size * size)
        .map(|i| {
            let (dx, dy) = ((i % size) as f64 - r, (i / size) as f64 - r);
            (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    Ok(k)
}

/// Half-sample symmetric index reflection: `-1 -> 0`, `n -> n - 1`.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

/// Per-band 2-D convolution with a normalized Gaussian kernel and symmetric
/// edge reflection.
pub fn gaussian_filter(frame: &Frame, kernel_size: usize, sigma: f64) -> Result<Frame> {
    let kernel = gaussian_kernel(kernel_size, sigma)?;
    let (w, h) = (frame.width(), frame.height());
    let r = (kernel_size / 2) as isize;
    let src = frame.samples();
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            for k in 0..BANDS {
                let mut acc = 0.0;
                for ky in 0..kernel_size {
                    let sy = reflect(y as isize + ky as isize - r, h);
                    for kx in 0..kernel_size {
                        let sx = reflect(x as isize + kx as isize - r, w);
                        acc += kernel[ky * kernel_size + kx] * f64::from(src[(sy * w + sx) * BANDS + k]);
                    }
                }
                out.push(quantize(acc));
            }
        }
    }
    Frame::new(w, h, out)
}

/// Baseline JPEG encode/decode at `quality`.
pub fn jpeg_roundtrip(frame: &Frame, quality: u8) -> Result<Frame> {
    check_quality(quality)?;
    jpeg::roundtrip(frame, quality)
}

/// Number of coefficients kept out of `n` for a retention fraction.
pub fn retained_count(retention: f64, n: usize) -> usize {
    // the small slack stops 0.1 * 100 = 10.000000000000002 rounding up to 11
    ((retention * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

/// Keeps the `ceil(retention * N)` largest-magnitude coefficients of a
/// three-level Haar transform and zeroes the rest. Ties go to the earlier
/// coefficient in raster order of the Mallat layout.
pub fn compress_plane(plane: &BandPlane, retention: f64) -> Result<BandPlane> {
    check_retention(retention)?;
    let mut coeffs = haar_forward(plane, HAAR_LEVELS)?;
    let n = coeffs.len();
    let keep = retained_count(retention, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| coeffs.values[b].abs().total_cmp(&coeffs.values[a].abs()).then(a.cmp(&b)));
    for &i in &order[keep..] {
        coeffs.values[i] = 0.0;
    }
    haar_inverse(&coeffs, HAAR_LEVELS)
}

/// Wavelet-compression surrogate applied per band. Frames whose edges are not
/// multiples of 8 are compressed over the top-left multiple-of-8 window; the
/// bottom/right remainder passes through unchanged.
pub fn wavelet_compress(frame: &Frame, retention: f64) -> Result<Frame> {
    check_retention(retention)?;
    let (w, h) = (frame.width(), frame.height());
    let (cw, ch) = (w / 8 * 8, h / 8 * 8);
    let mut planes = frame.bands();
    for plane in planes.iter_mut() {
        let compressed = compress_plane(&plane.crop(cw, ch), retention)?;
        for y in 0..ch {
            plane.values[y * w..y * w + cw].copy_from_slice(&compressed.values[y * cw..(y + 1) * cw]);
        }
    }
    Frame::from_planes(&planes)
}

/// A reference frame together with its four distorted versions.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortedSet {
    pub reference: Frame,
    /// In [`DistortionKind::ALL`] order.
    pub distorted: [(DistortionKind, Frame); 4],
}

impl DistortedSet {
    pub fn get(&self, kind: DistortionKind) -> &Frame {
        &self.distorted.iter().find(|(k, _)| *k == kind).expect("all four kinds present").1
    }

    /// Builds a set where every "distorted" entry is the reference itself.
    pub fn identity(frame: &Frame) -> Self {
        DistortedSet {
            reference: frame.clone(),
            distorted: DistortionKind::ALL.map(|k| (k, frame.clone())),
        }
    }
}

pub fn make_distorted_set(frame: &Frame, config: &DistortionConfig, seed: u64) -> Result<DistortedSet> {
    config.validate()?;
    let noise = add_gaussian_noise(frame, config.noise_sigma, seed)?;
    let blur = gaussian_filter(frame, config.gaussian_kernel, config.gaussian_sigma)?;
    let jpeg = jpeg_roundtrip(frame, config.jpeg_quality)?;
    let wave = wavelet_compress(frame, config.wavelet_retention)?;
    Ok(DistortedSet {
        reference: frame.clone(),
        distorted: [
            (DistortionKind::Noise, noise),
            (DistortionKind::GaussianFilter, blur),
            (DistortionKind::Jpeg, jpeg),
            (DistortionKind::WaveletCompression, wave),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noisy(w: usize, h: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
    }

    #[test]
    fn noise_is_deterministic_and_has_expected_spread() {
        let f = Frame::filled(64, 64, [128; 3]).unwrap();
        let a = add_gaussian_noise(&f, 2.0, 42).unwrap();
        assert_eq!(a, add_gaussian_noise(&f, 2.0, 42).unwrap());
        let vals: Vec<f64> = a.samples().iter().map(|&s| f64::from(s)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt();
        assert!((1.7..=2.3).contains(&sd), "sd = {sd}");
    }

    #[test]
    fn vanishing_noise_is_identity() {
        let f = noisy(16, 16, 3);
        assert_eq!(add_gaussian_noise(&f, 1e-6, 9).unwrap(), f);
        assert!(add_gaussian_noise(&f, 0.0, 9).is_err());
        assert!(add_gaussian_noise(&f, -1.0, 9).is_err());
    }

    #[test]
    fn reflection_indices() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(2, 5), 2);
    }

    #[test]
    fn blur_preserves_constants_and_mass() {
        let f = Frame::filled(9, 11, [17, 200, 3]).unwrap();
        assert_eq!(gaussian_filter(&f, 3, 0.5).unwrap(), f);

        let mut samples = vec![0u8; 16 * 16 * 3];
        let c = (8 * 16 + 8) * 3;
        samples[c] = 250;
        let spot = Frame::new(16, 16, samples).unwrap();
        let out = gaussian_filter(&spot, 3, 0.5).unwrap();
        let mass: i32 = out.band_samples(0).map(i32::from).sum();
        assert!((mass - 250).abs() <= 9, "mass {mass}");
        assert!(gaussian_filter(&spot, 4, 0.5).is_err());
        assert!(gaussian_filter(&spot, 1, 0.5).is_err());
    }

    #[test]
    fn jpeg_distortion_contract() {
        let f = noisy(24, 16, 5);
        let a = jpeg_roundtrip(&f, 75).unwrap();
        assert_eq!((a.width(), a.height()), (24, 16));
        assert_eq!(a, jpeg_roundtrip(&f, 75).unwrap());
        let c = Frame::filled(16, 16, [90, 91, 92]).unwrap();
        assert_eq!(jpeg_roundtrip(&c, 100).unwrap(), c);
        assert!(jpeg_roundtrip(&f, 0).is_err());
        assert!(jpeg_roundtrip(&f, 101).is_err());
    }

    #[test]
    fn full_retention_is_near_identity() {
        let f = noisy(16, 24, 6);
        let g = wavelet_compress(&f, 1.0).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert!((i32::from(*a) - i32::from(*b)).abs() <= 1);
        }
        let c = Frame::filled(16, 16, [40, 80, 120]).unwrap();
        assert_eq!(wavelet_compress(&c, 4.0 / 256.0).unwrap(), c);
        assert!(wavelet_compress(&f, 0.0).is_err());
        assert!(wavelet_compress(&f, 1.5).is_err());
    }

    #[test]
    fn wavelet_compress_handles_ragged_edges() {
        let f = noisy(19, 13, 7);
        let g = wavelet_compress(&f, 0.1).unwrap();
        assert_eq!((g.width(), g.height()), (19, 13));
        // remainder column 16.. passes through
        assert_eq!(f.pixel(17, 3), g.pixel(17, 3));
        assert_eq!(f.pixel(2, 12), g.pixel(2, 12));
    }

    #[test]
    fn retained_count_is_exact_for_round_fractions() {
        assert_eq!(retained_count(0.1, 100), 10);
        assert_eq!(retained_count(0.1, 64), 7);
        assert_eq!(retained_count(1.0, 64), 64);
        assert_eq!(retained_count(1e-9, 64), 1);
    }

    #[test]
    fn distorted_set_contract() {
        let f = noisy(16, 16, 8);
        let cfg = DistortionConfig::default();
        let a = make_distorted_set(&f, &cfg, 3).unwrap();
        assert_eq!(a, make_distorted_set(&f, &cfg, 3).unwrap());
        for (_, d) in &a.distorted {
            assert!(d.same_shape(&f));
        }
        let c = Frame::filled(16, 16, [1, 2, 3]).unwrap();
        let s = make_distorted_set(&c, &cfg, 3).unwrap();
        assert_eq!(s.get(DistortionKind::GaussianFilter), &c);

        let bad = DistortionConfig { gaussian_kernel: 2, ..cfg };
        assert!(make_distorted_set(&f, &bad, 3).is_err());
    }
}
