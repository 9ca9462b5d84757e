//! Higher-order statistics of the nine Haar detail sub-bands.

use crate::error::{invalid_input, Result};
use crate::imaging::{haar_decompose_level3, BandPlane, Frame};

pub const HOWS_LEN: usize = 36;

/// Mean, variance (N-1 divisor), skewness and excess kurtosis. Skewness and
/// kurtosis use the N divisor with `sigma = sqrt(variance)`; both are 0 when
/// the band is flat.
pub fn subband_stats(band: &BandPlane) -> Result<[f64; 4]> {
    let n = band.len();
    if n < 2 {
        return Err(invalid_input(format!("sub-band with {n} coefficient(s) has no sample variance")));
    }
    let nf = n as f64;
    let mean = band.values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in &band.values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let var = m2 / (nf - 1.0);
    if var == 0.0 {
        return Ok([mean, 0.0, 0.0, 0.0]);
    }
    let sigma = var.sqrt();
    Ok([mean, var, m3 / (nf * sigma.powi(3)), m4 / (nf * var * var) - 3.0])
}

/// 36 statistics of the luminance plane's level-1..3 detail bands.
pub fn hows_plane(plane: &BandPlane) -> Result<[f64; HOWS_LEN]> {
    let dec = haar_decompose_level3(plane)?;
    let mut out = [0.0; HOWS_LEN];
    for (i, band) in dec.details.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&subband_stats(band)?);
    }
    Ok(out)
}

pub fn hows_vector(frame: &Frame) -> Result<[f64; HOWS_LEN]> {
    if frame.width() < 16 || frame.height() < 16 {
        return Err(invalid_input(format!(
            "frame {}x{} too small for wavelet statistics (needs 16x16)",
            frame.width(),
            frame.height()
        )));
    }
    hows_plane(&frame.luminance())
}
