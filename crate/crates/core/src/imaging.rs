//! Raster, transform and histogram primitives shared by the feature extractors.
//!
//! Everything here is a pure function of its arguments. All arithmetic is
//! done in `f64` regardless of the 8-bit input depth.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustdct::DctPlanner;
use rustfft::FftPlanner;

use crate::error::{invalid_input, Result};

/// Number of colour bands in a [`Frame`] (R, G, B).
pub const BANDS: usize = 3;

/// Smallest accepted frame edge.
pub const MIN_FRAME_EDGE: usize = 8;

/// An 8-bit RGB raster. Samples are stored row-major with the three bands
/// interleaved per pixel (`[r, g, b, r, g, b, ...]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width < MIN_FRAME_EDGE || height < MIN_FRAME_EDGE {
            return Err(invalid_input(format!(
                "frame {width}x{height} is smaller than {MIN_FRAME_EDGE}x{MIN_FRAME_EDGE}"
            )));
        }
        let expected = width * height * BANDS;
        if samples.len() != expected {
            return Err(invalid_input(format!(
                "frame {width}x{height} needs {expected} samples, got {}",
                samples.len()
            )));
        }
        Ok(Frame { width, height, samples })
    }

    /// Builds a frame by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * BANDS);
        for y in 0..height {
            for x in 0..width {
                samples.extend_from_slice(&f(x, y));
            }
        }
        Frame::new(width, height, samples)
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Frame::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * BANDS;
        [self.samples[i], self.samples[i + 1], self.samples[i + 2]]
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Iterator over the samples of band `k` in raster order.
    pub fn band_samples(&self, k: usize) -> impl Iterator<Item = u8> + '_ {
        self.samples.iter().skip(k).step_by(BANDS).copied()
    }

    pub fn band(&self, k: usize) -> BandPlane {
        BandPlane {
            width: self.width,
            height: self.height,
            values: self.band_samples(k).map(f64::from).collect(),
        }
    }

    pub fn bands(&self) -> [BandPlane; BANDS] {
        [self.band(0), self.band(1), self.band(2)]
    }

    /// Reassembles a frame from three real planes, rounding to nearest and
    /// clamping to `[0, 255]`.
    pub fn from_planes(planes: &[BandPlane; BANDS]) -> Result<Self> {
        let (w, h) = (planes[0].width, planes[0].height);
        if planes.iter().any(|p| p.width != w || p.height != h) {
            return Err(invalid_input("band planes differ in size"));
        }
        let mut samples = Vec::with_capacity(w * h * BANDS);
        for i in 0..w * h {
            for p in planes {
                samples.push(quantize(p.values[i]));
            }
        }
        Frame::new(w, h, samples)
    }

    /// ITU-R BT.601 luma, unrounded.
    pub fn luminance(&self) -> BandPlane {
        let values = self
            .samples
            .chunks_exact(BANDS)
            .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
            .collect();
        BandPlane { width: self.width, height: self.height, values }
    }
}

/// Round half away from zero and clamp to the 8-bit range.
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// A single real-valued plane, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPlane {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl BandPlane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(invalid_input(format!(
                "plane {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        Ok(BandPlane { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        BandPlane { width, height, values: vec![0.0; width * height] }
    }

    pub fn filled(width: usize, height: usize, v: f64) -> Self {
        BandPlane { width, height, values: vec![v; width * height] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Top-left `width x height` window.
    pub fn crop(&self, width: usize, height: usize) -> BandPlane {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            let row = y * self.width;
            values.extend_from_slice(&self.values[row..row + width]);
        }
        BandPlane { width, height, values }
    }

    fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() || self.width == 0 || self.height == 0 {
            return Err(invalid_input("empty plane"));
        }
        if self.values.len() != self.width * self.height {
            return Err(invalid_input("plane value count does not match its dimensions"));
        }
        Ok(())
    }
}

/// Orthonormal 1-D DCT-II (or its inverse) of every `n`-long row of `data`.
fn dct_rows(data: &mut [f64], n: usize, inverse: bool) {
    thread_local! {
        static PLANNER: RefCell<DctPlanner<f64>> = RefCell::new(DctPlanner::new());
    }
    let dct = PLANNER.with(|p| p.borrow_mut().plan_dct2(n));
    let mut scratch = vec![0.0; dct.get_scratch_len()];
    let (a0, ak) = ((1.0 / n as f64).sqrt(), (2.0 / n as f64).sqrt());
    for row in data.chunks_exact_mut(n) {
        if inverse {
            // the unnormalized DCT-III halves its first input
            row[0] *= 2.0 * a0;
            row[1..].iter_mut().for_each(|v| *v *= ak);
            dct.process_dct3_with_scratch(row, &mut scratch);
        } else {
            dct.process_dct2_with_scratch(row, &mut scratch);
            row[0] *= a0;
            row[1..].iter_mut().for_each(|v| *v *= ak);
        }
    }
}

fn transpose(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = src[y * w + x];
        }
    }
    out
}

/// Separable 2-D transform: rows, then columns via a transpose.
fn separable(plane: &BandPlane, inverse: bool) -> BandPlane {
    let (w, h) = (plane.width, plane.height);
    let mut rows = plane.values.clone();
    dct_rows(&mut rows, w, inverse);
    let mut cols = transpose(&rows, w, h);
    dct_rows(&mut cols, h, inverse);
    BandPlane { width: w, height: h, values: transpose(&cols, h, w) }
}

/// Orthonormal 2-D DCT-II.
pub fn dct2(plane: &BandPlane) -> Result<BandPlane> {
    plane.ensure_non_empty()?;
    Ok(separable(plane, false))
}

/// Inverse of [`dct2`] (orthonormal DCT-III).
pub fn idct2(plane: &BandPlane) -> Result<BandPlane> {
    plane.ensure_non_empty()?;
    Ok(separable(plane, true))
}

/// Unnormalized complex 2-D DFT, row-major.
pub fn dft2(plane: &BandPlane) -> Result<Vec<Complex64>> {
    plane.ensure_non_empty()?;
    let (w, h) = (plane.width, plane.height);
    thread_local! {
        static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    }
    let (row_fft, col_fft) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(w), p.plan_fft_forward(h))
    });
    let mut data: Vec<Complex64> = plane.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();

    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }

    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
    Ok(data)
}

/// Magnitude and phase planes of the unnormalized 2-D DFT.
///
/// Phases lie in `(-pi, pi]`. A bin whose magnitude is at rounding level
/// (at most `1e-12` times the L1 norm of the input, which bounds every bin)
/// is treated as zero and given phase 0.
pub fn dft2_magnitude_phase(plane: &BandPlane) -> Result<(BandPlane, BandPlane)> {
    let spectrum = dft2(plane)?;
    let l1: f64 = plane.values.iter().map(|v| v.abs()).sum();
    let zero_tol = 1e-12 * l1;
    let mut mag = Vec::with_capacity(spectrum.len());
    let mut phase = Vec::with_capacity(spectrum.len());
    for c in &spectrum {
        let m = (c.re * c.re + c.im * c.im).sqrt();
        mag.push(m);
        phase.push(principal_phase(c.im, c.re, m <= zero_tol));
    }
    let (w, h) = (plane.width, plane.height);
    Ok((BandPlane { width: w, height: h, values: mag }, BandPlane { width: w, height: h, values: phase }))
}

/// `atan2` mapped onto `(-pi, pi]`, with the zero-bin convention.
pub fn principal_phase(im: f64, re: f64, is_zero: bool) -> f64 {
    if is_zero {
        return 0.0;
    }
    let p = im.atan2(re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

/// One orthonormal 2-D Haar step over the top-left `w x h` window of a
/// row-major buffer of stride `stride`, in place, using the Mallat layout:
/// approximation top-left, vertical detail top-right, horizontal detail
/// bottom-left, diagonal detail bottom-right.
fn haar_step(buf: &mut [f64], stride: usize, w: usize, h: usize) {
    let (hw, hh) = (w / 2, h / 2);
    let mut out = vec![0.0; w * h];
    for by in 0..hh {
        for bx in 0..hw {
            let a = buf[(2 * by) * stride + 2 * bx];
            let b = buf[(2 * by) * stride + 2 * bx + 1];
            let c = buf[(2 * by + 1) * stride + 2 * bx];
            let d = buf[(2 * by + 1) * stride + 2 * bx + 1];
            out[by * w + bx] = (a + b + c + d) / 2.0;
            out[by * w + hw + bx] = (a - b + c - d) / 2.0;
            out[(hh + by) * w + bx] = (a + b - c - d) / 2.0;
            out[(hh + by) * w + hw + bx] = (a - b - c + d) / 2.0;
        }
    }
    for y in 0..h {
        buf[y * stride..y * stride + w].copy_from_slice(&out[y * w..(y + 1) * w]);
    }
}

fn haar_step_inverse(buf: &mut [f64], stride: usize, w: usize, h: usize) {
    let (hw, hh) = (w / 2, h / 2);
    let mut out = vec![0.0; w * h];
    for by in 0..hh {
        for bx in 0..hw {
            let a = buf[by * stride + bx];
            let v = buf[by * stride + hw + bx];
            let hz = buf[(hh + by) * stride + bx];
            let d = buf[(hh + by) * stride + hw + bx];
            out[(2 * by) * w + 2 * bx] = (a + hz + v + d) / 2.0;
            out[(2 * by) * w + 2 * bx + 1] = (a + hz - v - d) / 2.0;
            out[(2 * by + 1) * w + 2 * bx] = (a - hz + v - d) / 2.0;
            out[(2 * by + 1) * w + 2 * bx + 1] = (a - hz - v + d) / 2.0;
        }
    }
    for y in 0..h {
        buf[y * stride..y * stride + w].copy_from_slice(&out[y * w..(y + 1) * w]);
    }
}

fn check_haar_dims(plane: &BandPlane, levels: u32) -> Result<()> {
    plane.ensure_non_empty()?;
    let m = 1usize << levels;
    if !plane.width.is_multiple_of(m) || !plane.height.is_multiple_of(m) {
        return Err(invalid_input(format!(
            "plane {}x{} is not divisible by {m} for a {levels}-level Haar transform",
            plane.width, plane.height
        )));
    }
    Ok(())
}

/// Multi-level Haar transform in the Mallat layout. Dimensions must be
/// divisible by `2^levels`.
pub fn haar_forward(plane: &BandPlane, levels: u32) -> Result<BandPlane> {
    check_haar_dims(plane, levels)?;
    let mut out = plane.clone();
    let (mut w, mut h) = (plane.width, plane.height);
    for _ in 0..levels {
        haar_step(&mut out.values, plane.width, w, h);
        w /= 2;
        h /= 2;
    }
    Ok(out)
}

/// Inverse of [`haar_forward`].
pub fn haar_inverse(coeffs: &BandPlane, levels: u32) -> Result<BandPlane> {
    check_haar_dims(coeffs, levels)?;
    let mut out = coeffs.clone();
    for level in (0..levels).rev() {
        let (w, h) = (coeffs.width >> level, coeffs.height >> level);
        haar_step_inverse(&mut out.values, coeffs.width, w, h);
    }
    Ok(out)
}

/// Orientation of a Haar detail band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::Horizontal, Orientation::Vertical, Orientation::Diagonal];

    pub fn tag(self) -> &'static str {
        match self {
            Orientation::Horizontal => "h",
            Orientation::Vertical => "v",
            Orientation::Diagonal => "d",
        }
    }
}

/// The nine detail bands of a three-level Haar decomposition plus the
/// (otherwise discarded) level-3 approximation.
#[derive(Debug, Clone)]
pub struct HaarLevel3 {
    /// Ordered (level 1..3) x (horizontal, vertical, diagonal).
    pub details: Vec<BandPlane>,
    pub approximation: BandPlane,
}

pub const HAAR_LEVELS: u32 = 3;

/// Crops the bottom/right remainder so both edges are multiples of 8, then
/// runs a three-level orthonormal Haar decomposition.
pub fn haar_decompose_level3(plane: &BandPlane) -> Result<HaarLevel3> {
    plane.ensure_non_empty()?;
    let m = 1usize << HAAR_LEVELS;
    let (cw, ch) = (plane.width / m * m, plane.height / m * m);
    if cw == 0 || ch == 0 {
        return Err(invalid_input(format!(
            "plane {}x{} is too small for a 3-level Haar decomposition",
            plane.width, plane.height
        )));
    }
    let cropped = if (cw, ch) == (plane.width, plane.height) { plane.clone() } else { plane.crop(cw, ch) };
    let coeffs = haar_forward(&cropped, HAAR_LEVELS)?;

    let mut details = Vec::with_capacity(9);
    for level in 1..=HAAR_LEVELS {
        let (w, h) = (cw >> level, ch >> level);
        for o in Orientation::ALL {
            let (x0, y0) = match o {
                Orientation::Vertical => (w, 0),
                Orientation::Horizontal => (0, h),
                Orientation::Diagonal => (w, h),
            };
            details.push(window(&coeffs, x0, y0, w, h));
        }
    }
    let (aw, ah) = (cw >> HAAR_LEVELS, ch >> HAAR_LEVELS);
    Ok(HaarLevel3 { details, approximation: window(&coeffs, 0, 0, aw, ah) })
}

fn window(plane: &BandPlane, x0: usize, y0: usize, w: usize, h: usize) -> BandPlane {
    let mut values = Vec::with_capacity(w * h);
    for y in y0..y0 + h {
        let row = y * plane.width;
        values.extend_from_slice(&plane.values[row + x0..row + x0 + w]);
    }
    BandPlane { width: w, height: h, values }
}

/// 256-bin histogram of 8-bit samples; bin `b` counts samples equal to `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    pub bins: [u64; 256],
}

impl Histogram256 {
    pub fn from_samples(samples: impl IntoIterator<Item = u8>) -> Self {
        let mut bins = [0u64; 256];
        for s in samples {
            bins[s as usize] += 1;
        }
        Histogram256 { bins }
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Histogram of a plane whose values must be integers in `[0, 255]`.
pub fn histogram256(plane: &BandPlane) -> Result<Histogram256> {
    let mut bins = [0u64; 256];
    for (i, &v) in plane.values.iter().enumerate() {
        if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
            return Err(invalid_input(format!("sample {i} = {v} is not an integer in [0, 255]")));
        }
        bins[v as usize] += 1;
    }
    Ok(Histogram256 { bins })
}
