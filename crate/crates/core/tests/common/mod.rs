//! Naive reference implementations of the 88 features, written straight
//! from the formulas with direct summation. They share nothing with the
//! library beyond the `Frame` accessors, and are deliberately slow.

#![allow(dead_code)]

use std::f64::consts::PI;

use vidsource::imaging::Frame;

/// `planes[k][y][x]`.
pub type Planes = Vec<Vec<Vec<f64>>>;

pub fn planes(f: &Frame) -> Planes {
    (0..3)
        .map(|k| (0..f.height()).map(|y| (0..f.width()).map(|x| f64::from(f.pixel(x, y)[k])).collect()).collect())
        .collect()
}

fn rows(p: &Planes) -> usize {
    p[0].len()
}

fn cols(p: &Planes) -> usize {
    p[0][0].len()
}

pub fn m1_m2(r: &Planes, d: &Planes) -> (f64, f64) {
    let (rr, cc) = (rows(r), cols(r));
    let (mut m1, mut m2) = (0.0, 0.0);
    for k in 0..3 {
        let (mut a, mut s) = (0.0, 0.0);
        for i in 0..rr {
            for j in 0..cc {
                a += (r[k][i][j] - d[k][i][j]).abs();
                s += (r[k][i][j] - d[k][i][j]).powi(2);
            }
        }
        m1 += a / (rr * cc) as f64;
        m2 += (s / (rr * cc) as f64).sqrt();
    }
    (m1 / 3.0, m2 / 3.0)
}

pub fn m3(r: &Planes, d: &Planes) -> f64 {
    let (rr, cc) = (rows(r), cols(r));
    let mut total = 0.0;
    for i in 0..rr {
        for j in 0..cc {
            let mins: f64 = (0..3).map(|k| r[k][i][j].min(d[k][i][j])).sum();
            let sums: f64 = (0..3).map(|k| r[k][i][j] + d[k][i][j]).sum();
            if sums > 0.0 {
                total += 1.0 - 2.0 * mins / sums;
            }
        }
    }
    total / (rr * cc) as f64
}

/// Per-band `(sum (C - D)^2, sum C*D, sum C^2)`.
fn band_sums(r: &Planes, d: &Planes, k: usize) -> (f64, f64, f64) {
    let (mut e, mut x, mut c) = (0.0, 0.0, 0.0);
    for i in 0..rows(r) {
        for j in 0..cols(r) {
            e += (r[k][i][j] - d[k][i][j]).powi(2);
            x += r[k][i][j] * d[k][i][j];
            c += r[k][i][j].powi(2);
        }
    }
    (e, x, c)
}

pub fn m4_m5(r: &Planes, d: &Planes) -> (f64, f64) {
    let (mut s4, mut s5) = (0.0, 0.0);
    for k in 0..3 {
        let (e, x, c) = band_sums(r, d, k);
        if c > 0.0 {
            s4 += e / c;
            s5 += x / c;
        } else if e == 0.0 {
            s5 += 1.0;
        } else {
            s4 += 1.0;
        }
    }
    (1.0 - s4 / 3.0, s5 / 3.0)
}

pub fn m6(r: &Planes, d: &Planes) -> f64 {
    let (rr, cc) = (rows(r), cols(r));
    let mut total = 0.0;
    for i in 0..rr {
        for j in 0..cc {
            // integer samples: the inner products are exact
            let dot: f64 = (0..3).map(|k| r[k][i][j] * d[k][i][j]).sum();
            let nr: f64 = (0..3).map(|k| r[k][i][j] * r[k][i][j]).sum();
            let nd: f64 = (0..3).map(|k| d[k][i][j] * d[k][i][j]).sum();
            if nr == 0.0 || nd == 0.0 {
                continue;
            }
            let parallel = (dot as u128) * (dot as u128) == (nr as u128) * (nd as u128);
            let theta = if parallel { 0.0 } else { (dot / (nr.sqrt() * nd.sqrt())).clamp(-1.0, 1.0).acos() };
            total += 2.0 / PI * theta;
        }
    }
    1.0 - total / (rr * cc) as f64
}

/// Unnormalized 2-D DFT by direct summation, `(re, im)` per bin.
pub fn dft(p: &[Vec<f64>]) -> Vec<Vec<(f64, f64)>> {
    let (h, w) = (p.len(), p[0].len());
    let tw = |n: usize, m: usize, len: usize| {
        let a = -2.0 * PI * ((n * m) % len) as f64 / len as f64;
        (a.cos(), a.sin())
    };
    // rows first
    let mut tmp = vec![vec![(0.0, 0.0); w]; h];
    for y in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..w {
                let (c, s) = tw(u, x, w);
                re += p[y][x] * c;
                im += p[y][x] * s;
            }
            tmp[y][u] = (re, im);
        }
    }
    let mut out = vec![vec![(0.0, 0.0); w]; h];
    for v in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                let (c, s) = tw(v, y, h);
                let (a, b) = tmp[y][u];
                re += a * c - b * s;
                im += a * s + b * c;
            }
            out[v][u] = (re, im);
        }
    }
    out
}

/// Phase in `(-pi, pi]`, 0 for bins at rounding level.
fn phase(re: f64, im: f64, zero_tol: f64) -> f64 {
    if re.hypot(im) <= zero_tol {
        return 0.0;
    }
    let p = im.atan2(re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

pub fn m7_m8(r: &Planes, d: &Planes) -> (f64, f64) {
    let (rr, cc) = (rows(r), cols(r));
    let (mut m7, mut m8) = (0.0, 0.0);
    for k in 0..3 {
        let l1 = |p: &Vec<Vec<f64>>| p.iter().flatten().map(|v| v.abs()).sum::<f64>() * 1e-12;
        let (tr, td) = (l1(&r[k]), l1(&d[k]));
        let (fr, fd) = (dft(&r[k]), dft(&d[k]));
        for v in 0..rr {
            for u in 0..cc {
                let (a, b) = (fr[v][u], fd[v][u]);
                m7 += (a.0.hypot(a.1) - b.0.hypot(b.1)).powi(2);
                m8 += (phase(a.0, a.1, tr).abs() - phase(b.0, b.1, td).abs()).powi(2);
            }
        }
    }
    let n = (3 * rr * cc) as f64;
    (m7 / n, m8 / n)
}

pub fn hvs_h(rho: f64) -> f64 {
    if rho < 7.0 {
        0.05 * rho.powf(0.554).exp()
    } else {
        (-9.0 * (rho.log10() - 9f64.log10()).abs().powf(2.3)).exp()
    }
}

/// Orthonormal DCT-II (or its inverse) along one axis by direct summation.
fn dct1(x: &[f64], inverse: bool) -> Vec<f64> {
    let n = x.len();
    let a = |k: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
    (0..n)
        .map(|o| {
            (0..n)
                .map(|i| {
                    let (k, t) = if inverse { (i, o) } else { (o, i) };
                    let basis = (PI * (2 * t + 1) as f64 * k as f64 / (2 * n) as f64).cos();
                    a(k) * basis * x[i]
                })
                .sum()
        })
        .collect()
}

fn dct2d(p: &[Vec<f64>], inverse: bool) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = p.iter().map(|r| dct1(r, inverse)).collect();
    let (h, w) = (rows.len(), rows[0].len());
    let mut out = vec![vec![0.0; w]; h];
    for x in 0..w {
        let col: Vec<f64> = (0..h).map(|y| rows[y][x]).collect();
        for (y, v) in dct1(&col, inverse).into_iter().enumerate() {
            out[y][x] = v;
        }
    }
    out
}

/// `U[x] = IDCT(H(rho) DCT(x))`, with `u` along columns and `v` along rows.
pub fn hvs_u(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut c = dct2d(p, false);
    for (v, row) in c.iter_mut().enumerate() {
        for (u, val) in row.iter_mut().enumerate() {
            *val *= hvs_h(((u * u + v * v) as f64).sqrt());
        }
    }
    dct2d(&c, true)
}

pub fn m9(r: &Planes, d: &Planes) -> f64 {
    let mut total = 0.0;
    for k in 0..3 {
        let (ur, ud) = (hvs_u(&r[k]), hvs_u(&d[k]));
        let num: f64 = ur.iter().flatten().zip(ud.iter().flatten()).map(|(a, b)| a - b).sum();
        let den: f64 = ur.iter().flatten().map(|a| a * a).sum();
        if den > 0.0 {
            total += num / den;
        }
    }
    total / 3.0
}

pub fn m10(r: &Planes, d: &Planes) -> f64 {
    let (rr, cc) = (rows(r), cols(r));
    let lap = |p: &Vec<Vec<f64>>, i: usize, j: usize| p[i + 1][j] + p[i - 1][j] + p[i][j + 1] + p[i][j - 1] - 4.0 * p[i][j];
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..3 {
        for i in 1..rr - 1 {
            for j in 1..cc - 1 {
                let (a, b) = (lap(&r[k], i, j), lap(&d[k], i, j));
                num += (a - b).powi(2);
                den += a * a;
            }
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn measures(reference: &Frame, distorted: &Frame) -> [f64; 10] {
    let (r, d) = (planes(reference), planes(distorted));
    let (m1, m2) = m1_m2(&r, &d);
    let (m4, m5) = m4_m5(&r, &d);
    let (m7, m8) = m7_m8(&r, &d);
    [m1, m2, m3(&r, &d), m4, m5, m6(&r, &d), m7, m8, m9(&r, &d), m10(&r, &d)]
}

fn mean(p: &[Vec<f64>]) -> f64 {
    p.iter().flatten().sum::<f64>() / p.iter().map(Vec::len).sum::<usize>() as f64
}

fn pearson(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut num, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            num += (x - ma) * (y - mb);
            va += (x - ma).powi(2);
            vb += (y - mb).powi(2);
        }
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        num / (va.sqrt() * vb.sqrt())
    }
}

fn energy_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            num
        }
    } else {
        num / den
    }
}

/// `hg(lo:hi)` with 1-based inclusive bounds.
fn slice_sum(hg: &[f64; 256], lo: usize, hi: usize) -> f64 {
    (lo..=hi).map(|b| hg[b - 1]).sum()
}

pub fn com(p: &[Vec<f64>]) -> f64 {
    let mut hg = [0.0; 256];
    for v in p.iter().flatten() {
        hg[*v as usize] += 1.0;
    }
    let s = |lo, hi| slice_sum(&hg, lo, hi);
    let hg1 = (s(2, 254) - s(1, 253)) + (s(2, 254) + s(3, 255));
    let hg2 = (s(3, 255) - s(2, 254)) + (s(3, 255) + s(4, 256));
    hg1 - hg2
}

pub fn color(f: &Frame) -> [f64; 12] {
    let p = planes(f);
    let e: Vec<f64> = p.iter().map(|b| b.iter().flatten().sum()).collect();
    [
        mean(&p[0]),
        mean(&p[1]),
        mean(&p[2]),
        pearson(&p[0], &p[1]),
        pearson(&p[1], &p[2]),
        pearson(&p[2], &p[0]),
        energy_ratio(e[1], e[2]),
        energy_ratio(e[1], e[0]),
        energy_ratio(e[2], e[0]),
        com(&p[0]),
        com(&p[1]),
        com(&p[2]),
    ]
}

/// Orthonormal Haar analysis matrix: lowpass rows on top, highpass below.
fn haar_matrix(n: usize) -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n / 2 {
        m[i][2 * i] = s;
        m[i][2 * i + 1] = s;
        m[n / 2 + i][2 * i] = s;
        m[n / 2 + i][2 * i + 1] = -s;
    }
    m
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn block(a: &[Vec<f64>], y0: usize, x0: usize, h: usize, w: usize) -> Vec<Vec<f64>> {
    a[y0..y0 + h].iter().map(|r| r[x0..x0 + w].to_vec()).collect()
}

/// Nine detail bands ordered (level 1..3) x (horizontal, vertical,
/// diagonal) and the final approximation. Horizontal detail is lowpass
/// across columns and highpass across rows.
pub fn haar_level3(p: &[Vec<f64>]) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>) {
    let (h, w) = (p.len() / 8 * 8, p[0].len() / 8 * 8);
    let mut approx = block(p, 0, 0, h, w);
    let mut details = Vec::new();
    for _ in 0..3 {
        let (h, w) = (approx.len(), approx[0].len());
        let t = matmul(&matmul(&haar_matrix(h), &approx), &transpose(&haar_matrix(w)));
        let (hh, hw) = (h / 2, w / 2);
        details.push(block(&t, hh, 0, hh, hw));
        details.push(block(&t, 0, hw, hh, hw));
        details.push(block(&t, hh, hw, hh, hw));
        approx = block(&t, 0, 0, hh, hw);
    }
    (details, approx)
}

pub fn moments(b: &[Vec<f64>]) -> [f64; 4] {
    let xs: Vec<f64> = b.iter().flatten().copied().collect();
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return [m, 0.0, 0.0, 0.0];
    }
    let sigma = var.sqrt();
    let skew = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / (n * sigma.powi(3));
    let kurt = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / (n * sigma.powi(4)) - 3.0;
    [m, var, skew, kurt]
}

pub fn hows(f: &Frame) -> Vec<f64> {
    let p = planes(f);
    let y: Vec<Vec<f64>> = (0..f.height())
        .map(|i| (0..f.width()).map(|j| 0.299 * p[0][i][j] + 0.587 * p[1][i][j] + 0.114 * p[2][i][j]).collect())
        .collect();
    haar_level3(&y).0.iter().flat_map(|b| moments(b)).collect()
}

/// All 88 values; `distorted` holds the noise, Gaussian, JPEG and wavelet
/// versions in that order.
pub fn features(reference: &Frame, distorted: &[&Frame; 4]) -> Vec<f64> {
    let mut out = Vec::with_capacity(88);
    for d in distorted {
        out.extend_from_slice(&measures(reference, d));
    }
    out.extend_from_slice(&color(reference));
    out.extend(hows(reference));
    out
}

/// `|a - b| / max(|b|, 1)`: relative error, absolute near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
