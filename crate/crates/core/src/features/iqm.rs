//! Ten full-reference image quality measures (M1..M10).
//!
//! Each measure compares a reference raster with a distorted copy band by
//! band. Formulas are applied as written, including the asymmetric ones;
//! see the per-function docs for the zero-denominator conventions.

use std::cell::RefCell;
use std::f64::consts::FRAC_2_PI;
use std::rc::Rc;

use crate::distortion::{DistortedSet, DistortionKind};
use crate::error::{invalid_input, Result};
use crate::imaging::{dct2, dft2_magnitude_phase, idct2, BandPlane, Frame};

pub const MEASURES: usize = 10;
pub const IQM_LEN: usize = MEASURES * 4;

/// 40 measures ordered distortion-major, then M1..M10.
#[derive(Debug, Clone, PartialEq)]
pub struct IqmVector {
    pub values: [f64; IQM_LEN],
    /// Set when some band of the reference had zero energy while the
    /// distorted band did not, so M4/M5 fell back to their degenerate values.
    pub degenerate: bool,
}

fn check_shapes(reference: &[BandPlane], distorted: &[BandPlane]) -> Result<()> {
    if reference.is_empty() || reference.len() != distorted.len() {
        return Err(invalid_input(format!(
            "band count mismatch: {} vs {}",
            reference.len(),
            distorted.len()
        )));
    }
    for (r, d) in reference.iter().zip(distorted) {
        if r.width != d.width || r.height != d.height || r.is_empty() {
            return Err(invalid_input(format!(
                "dimension mismatch: {}x{} vs {}x{}",
                r.width, r.height, d.width, d.height
            )));
        }
    }
    Ok(())
}

/// M1 (band-averaged mean absolute error) and M2 (band-averaged RMSE).
pub fn minkowsky_planes(reference: &[BandPlane], distorted: &[BandPlane]) -> Result<(f64, f64)> {
    check_shapes(reference, distorted)?;
    let k = reference.len() as f64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (r, d) in reference.iter().zip(distorted) {
        let n = r.len() as f64;
        let (mut abs, mut sq) = (0.0, 0.0);
        for (a, b) in r.values.iter().zip(&d.values) {
            let diff = a - b;
            abs += diff.abs();
            sq += diff * diff;
        }
        m1 += abs / n;
        m2 += (sq / n).sqrt();
    }
    Ok((m1 / k, m2 / k))
}

pub fn minkowsky_measures(reference: &Frame, distorted: &Frame) -> Result<(f64, f64)> {
    minkowsky_planes(&reference.bands(), &distorted.bands())
}

/// Angle between the pixel vectors at `i`, via `2 atan2(|u - v|, |u + v|)`
/// on the unit vectors; unlike `acos` of the cosine this is exact at zero.
fn vector_angle(reference: &[BandPlane], distorted: &[BandPlane], i: usize, nr: f64, nd: f64) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (r, d) in reference.iter().zip(distorted) {
        let (u, v) = (r.values[i] / nr, d.values[i] / nd);
        minus += (u - v) * (u - v);
        plus += (u + v) * (u + v);
    }
    2.0 * minus.sqrt().atan2(plus.sqrt())
}

/// M3 (Czekanowski), M4 (cross-correlation), M5 (normalized
/// cross-correlation) and M6 (pixel-vector angle statistic).
///
/// Conventions: a pixel whose two vectors are both zero contributes 0 to M3;
/// a pixel pair where either vector is zero contributes angle 0 to M6. For a
/// band with zero reference energy, M4/M5 use ratios (0, 1) when the
/// distorted band is also zero and (1, 0) otherwise; the latter case is
/// reported through the returned flag.
pub fn correlation_planes(reference: &[BandPlane], distorted: &[BandPlane]) -> Result<([f64; 4], bool)> {
    check_shapes(reference, distorted)?;
    let k = reference.len();
    let n = reference[0].len();

    let mut czek = 0.0;
    let mut angle = 0.0;
    for i in 0..n {
        let (mut min_sum, mut total, mut rr, mut dd) = (0.0, 0.0, 0.0, 0.0);
        for b in 0..k {
            let (r, d) = (reference[b].values[i], distorted[b].values[i]);
            min_sum += r.min(d);
            total += r + d;
            rr += r * r;
            dd += d * d;
        }
        if total != 0.0 {
            czek += 1.0 - 2.0 * min_sum / total;
        }
        if rr > 0.0 && dd > 0.0 {
            angle += FRAC_2_PI * vector_angle(reference, distorted, i, rr.sqrt(), dd.sqrt());
        }
    }

    let mut degenerate = false;
    let (mut err_ratio, mut cc_ratio) = (0.0, 0.0);
    for (r, d) in reference.iter().zip(distorted) {
        let (mut diff_sq, mut cross, mut ref_sq) = (0.0, 0.0, 0.0);
        for (a, b) in r.values.iter().zip(&d.values) {
            diff_sq += (a - b) * (a - b);
            cross += a * b;
            ref_sq += a * a;
        }
        if ref_sq > 0.0 {
            err_ratio += diff_sq / ref_sq;
            cc_ratio += cross / ref_sq;
        } else if diff_sq == 0.0 {
            cc_ratio += 1.0;
        } else {
            degenerate = true;
            err_ratio += 1.0;
        }
    }
    let kf = k as f64;
    let nf = n as f64;
    Ok(([czek / nf, 1.0 - err_ratio / kf, cc_ratio / kf, 1.0 - angle / nf], degenerate))
}

pub fn correlation_measures(reference: &Frame, distorted: &Frame) -> Result<(f64, f64, f64, f64)> {
    let ([m3, m4, m5, m6], _) = correlation_planes(&reference.bands(), &distorted.bands())?;
    Ok((m3, m4, m5, m6))
}

/// DFT magnitude/phase of every band.
pub fn spectra(planes: &[BandPlane]) -> Result<Vec<(BandPlane, BandPlane)>> {
    planes.iter().map(dft2_magnitude_phase).collect()
}

fn spectral_from_spectra(reference: &[(BandPlane, BandPlane)], distorted: &[(BandPlane, BandPlane)]) -> (f64, f64) {
    let (mut m7, mut m8) = (0.0, 0.0);
    let mut count = 0usize;
    for ((rm, rp), (dm, dp)) in reference.iter().zip(distorted) {
        for i in 0..rm.len() {
            m7 += (rm.values[i] - dm.values[i]).powi(2);
            m8 += (rp.values[i].abs() - dp.values[i].abs()).powi(2);
        }
        count += rm.len();
    }
    (m7 / count as f64, m8 / count as f64)
}

/// M7 (spectral magnitude distortion) and M8 (spectral phase distortion on
/// principal-value phases, comparing `|P|` values).
pub fn spectral_planes(reference: &[BandPlane], distorted: &[BandPlane]) -> Result<(f64, f64)> {
    check_shapes(reference, distorted)?;
    Ok(spectral_from_spectra(&spectra(reference)?, &spectra(distorted)?))
}

pub fn spectral_measures(reference: &Frame, distorted: &Frame) -> Result<(f64, f64)> {
    spectral_planes(&reference.bands(), &distorted.bands())
}

/// Band-pass weight of the visual-system model, `rho = sqrt(u^2 + v^2)`.
pub fn hvs_weight(rho: f64) -> f64 {
    if rho < 7.0 {
        0.05 * rho.powf(0.554).exp()
    } else {
        (-9.0 * (rho.log10() - 9f64.log10()).abs().powf(2.3)).exp()
    }
}

/// `H(rho)` over a `width x height` coefficient grid, cached per thread.
fn hvs_weights(width: usize, height: usize) -> Rc<Vec<f64>> {
    thread_local! {
        static CACHE: RefCell<Vec<((usize, usize), Rc<Vec<f64>>)>> = const { RefCell::new(Vec::new()) };
    }
    CACHE.with(|cache| {
        if let Some((_, w)) = cache.borrow().iter().find(|(k, _)| *k == (width, height)) {
            return w.clone();
        }
        let mut weights = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                weights.push(hvs_weight(((u * u + v * v) as f64).sqrt()));
            }
        }
        let weights = Rc::new(weights);
        cache.borrow_mut().push(((width, height), weights.clone()));
        weights
    })
}

/// `U[x] = IDCT(H(rho) * DCT(x))` with zero-based DCT indices.
pub fn hvs_filter(plane: &BandPlane) -> Result<BandPlane> {
    let mut coef = dct2(plane)?;
    for (c, h) in coef.values.iter_mut().zip(hvs_weights(plane.width, plane.height).iter()) {
        *c *= h;
    }
    idct2(&coef)
}

/// `(sum U, sum U^2)` of the filtered plane without the inverse transform:
/// only the DC basis function has a nonzero pixel sum, and the orthonormal
/// transform preserves energy.
fn hvs_moments(plane: &BandPlane) -> Result<(f64, f64)> {
    let coef = dct2(plane)?;
    let weights = hvs_weights(plane.width, plane.height);
    let energy = coef.values.iter().zip(weights.iter()).map(|(c, h)| (c * h) * (c * h)).sum();
    let sum = ((plane.width * plane.height) as f64).sqrt() * weights[0] * coef.values[0];
    Ok((sum, energy))
}

/// 4-neighbour Laplacian responses over interior pixels (all four
/// neighbours present), row-major.
pub fn laplacian_interior(plane: &BandPlane) -> Result<Vec<f64>> {
    let (w, h) = (plane.width, plane.height);
    if w < 3 || h < 3 {
        return Err(invalid_input(format!("Laplacian needs at least 3x3, got {w}x{h}")));
    }
    let mut out = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            out.push(
                plane.at(x, y + 1) + plane.at(x, y - 1) + plane.at(x + 1, y) + plane.at(x - 1, y)
                    - 4.0 * plane.at(x, y),
            );
        }
    }
    Ok(out)
}

fn hvs_from_parts(ref_u: &[(f64, f64)], dist_u: &[(f64, f64)], ref_lap: &[Vec<f64>], dist_lap: &[Vec<f64>]) -> (f64, f64) {
    let mut m9 = 0.0;
    for (&(r_sum, r_energy), &(d_sum, _)) in ref_u.iter().zip(dist_u) {
        if r_energy > 0.0 {
            m9 += (r_sum - d_sum) / r_energy;
        }
    }
    m9 /= ref_u.len() as f64;

    let (mut num, mut den) = (0.0, 0.0);
    for (r, d) in ref_lap.iter().zip(dist_lap) {
        for (a, b) in r.iter().zip(d) {
            num += (a - b) * (a - b);
            den += a * a;
        }
    }
    let m10 = if den > 0.0 { num / den } else { 0.0 };
    (m9, m10)
}

/// M9 (HVS-filtered difference, normalized by the filtered reference
/// energy, averaged over bands) and M10 (Laplacian mean square error pooled
/// over all bands). Zero denominators give 0.
pub fn hvs_planes(reference: &[BandPlane], distorted: &[BandPlane]) -> Result<(f64, f64)> {
    check_shapes(reference, distorted)?;
    let ru = reference.iter().map(hvs_moments).collect::<Result<Vec<_>>>()?;
    let du = distorted.iter().map(hvs_moments).collect::<Result<Vec<_>>>()?;
    let rl = reference.iter().map(laplacian_interior).collect::<Result<Vec<_>>>()?;
    let dl = distorted.iter().map(laplacian_interior).collect::<Result<Vec<_>>>()?;
    Ok(hvs_from_parts(&ru, &du, &rl, &dl))
}

pub fn hvs_measures(reference: &Frame, distorted: &Frame) -> Result<(f64, f64)> {
    hvs_planes(&reference.bands(), &distorted.bands())
}

/// Per-plane intermediates that only depend on one side of a comparison.
struct Prepared {
    bands: Vec<BandPlane>,
    spectra: Vec<(BandPlane, BandPlane)>,
    hvs: Vec<(f64, f64)>,
    laplacian: Vec<Vec<f64>>,
}

impl Prepared {
    fn new(bands: Vec<BandPlane>) -> Result<Self> {
        Ok(Prepared {
            spectra: spectra(&bands)?,
            hvs: bands.iter().map(hvs_moments).collect::<Result<_>>()?,
            laplacian: bands.iter().map(laplacian_interior).collect::<Result<_>>()?,
            bands,
        })
    }
}

fn measures(reference: &Prepared, distorted: &Prepared) -> Result<([f64; MEASURES], bool)> {
    let (m1, m2) = minkowsky_planes(&reference.bands, &distorted.bands)?;
    let ([m3, m4, m5, m6], degenerate) = correlation_planes(&reference.bands, &distorted.bands)?;
    let (m7, m8) = spectral_from_spectra(&reference.spectra, &distorted.spectra);
    let (m9, m10) = hvs_from_parts(&reference.hvs, &distorted.hvs, &reference.laplacian, &distorted.laplacian);
    Ok(([m1, m2, m3, m4, m5, m6, m7, m8, m9, m10], degenerate))
}

/// All ten measures for one reference/distorted pair.
pub fn all_measures(reference: &Frame, distorted: &Frame) -> Result<[f64; MEASURES]> {
    if !reference.same_shape(distorted) {
        return Err(invalid_input("dimension mismatch"));
    }
    let r = Prepared::new(reference.bands().to_vec())?;
    let d = Prepared::new(distorted.bands().to_vec())?;
    Ok(measures(&r, &d)?.0)
}

/// The 40-value IQM block for a distorted set.
pub fn iqm_vector(set: &DistortedSet) -> Result<IqmVector> {
    let reference = Prepared::new(set.reference.bands().to_vec())?;
    let mut values = [0.0; IQM_LEN];
    let mut degenerate = false;
    for (slot, kind) in DistortionKind::ALL.iter().enumerate() {
        let frame = set.get(*kind);
        if !frame.same_shape(&set.reference) {
            return Err(invalid_input(format!("{} frame differs in size from the reference", kind.tag())));
        }
        let (m, flag) = measures(&reference, &Prepared::new(frame.bands().to_vec())?)?;
        values[slot * MEASURES..(slot + 1) * MEASURES].copy_from_slice(&m);
        degenerate |= flag;
    }
    Ok(IqmVector { values, degenerate })
}
