//! Colour and histogram features computed from a single frame.

use crate::imaging::{Frame, Histogram256, BANDS};

pub const COLOR_LEN: usize = 12;

/// Per-channel means.
pub fn channel_means(frame: &Frame) -> [f64; 3] {
    let n = (frame.width() * frame.height()) as f64;
    let mut sums = [0u64; 3];
    for px in frame.samples().chunks_exact(BANDS) {
        for k in 0..3 {
            sums[k] += u64::from(px[k]);
        }
    }
    sums.map(|s| s as f64 / n)
}

fn pearson(frame: &Frame, a: usize, b: usize, means: &[f64; 3]) -> f64 {
    let (mut cross, mut va, mut vb) = (0.0, 0.0, 0.0);
    for px in frame.samples().chunks_exact(BANDS) {
        let da = f64::from(px[a]) - means[a];
        let db = f64::from(px[b]) - means[b];
        cross += da * db;
        va += da * da;
        vb += db * db;
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        (cross / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Pearson correlation for the (R,G), (G,B) and (B,R) pairs. A channel with
/// zero variance gives 0.
pub fn pairwise_correlations(frame: &Frame) -> [f64; 3] {
    let means = channel_means(frame);
    [pearson(frame, 0, 1, &means), pearson(frame, 1, 2, &means), pearson(frame, 2, 0, &means)]
}

fn energy_ratio(num: u64, den: u64) -> f64 {
    match (num, den) {
        (0, 0) => 1.0,
        (n, 0) => n as f64,
        (n, d) => n as f64 / d as f64,
    }
}

/// `E_G/E_B`, `E_G/E_R`, `E_B/E_R` with channel energies taken as sample
/// sums. `0/0` is 1; a zero denominator with a nonzero numerator is clamped
/// to 1.
pub fn energy_ratios(frame: &Frame) -> [f64; 3] {
    let mut e = [0u64; 3];
    for px in frame.samples().chunks_exact(BANDS) {
        for k in 0..3 {
            e[k] += u64::from(px[k]);
        }
    }
    let [r, g, b] = e;
    [energy_ratio(g, b), energy_ratio(g, r), energy_ratio(b, r)]
}

/// Neighbour-distribution centre of mass of one histogram, evaluated over
/// the literal 1-based slices `hg(2:254)`, `hg(1:253)`, `hg(3:255)` and
/// `hg(4:256)`.
pub fn histogram_com(hist: &Histogram256) -> f64 {
    // 1-based slice sum hg(lo:hi)
    let slice = |lo: usize, hi: usize| -> i64 { hist.bins[lo - 1..hi].iter().map(|&c| c as i64).sum() };
    let hg1 = (slice(2, 254) - slice(1, 253)) + (slice(2, 254) + slice(3, 255));
    let hg2 = (slice(3, 255) - slice(2, 254)) + (slice(3, 255) + slice(4, 256));
    (hg1 - hg2) as f64
}

pub fn neighbor_com(frame: &Frame) -> [f64; 3] {
    [0, 1, 2].map(|k| histogram_com(&Histogram256::from_samples(frame.band_samples(k))))
}

/// The 12 colour features in canonical order.
pub fn color_vector(frame: &Frame) -> [f64; COLOR_LEN] {
    let mut out = [0.0; COLOR_LEN];
    out[0..3].copy_from_slice(&channel_means(frame));
    out[3..6].copy_from_slice(&pairwise_correlations(frame));
    out[6..9].copy_from_slice(&energy_ratios(frame));
    out[9..12].copy_from_slice(&neighbor_com(frame));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy(seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_fn(16, 16, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
    }

    #[test]
    fn means() {
        assert_eq!(channel_means(&Frame::filled(8, 8, [10, 20, 30]).unwrap()), [10.0, 20.0, 30.0]);
        let checker = Frame::from_fn(8, 8, |x, y| if (x + y) % 2 == 0 { [0; 3] } else { [255; 3] }).unwrap();
        assert_eq!(channel_means(&checker), [127.5; 3]);
    }

    #[test]
    fn correlation_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let same = Frame::from_fn(8, 8, |_, _| {
            let v: u8 = rng.random();
            [v, v, rng.random()]
        })
        .unwrap();
        assert!((pairwise_correlations(&same)[0] - 1.0).abs() < 1e-12);

        let anti = Frame::from_fn(8, 8, |_, _| {
            let v: u8 = rng.random();
            [v, 255 - v, 3]
        })
        .unwrap();
        let c = pairwise_correlations(&anti);
        assert!((c[0] + 1.0).abs() < 1e-12);
        assert_eq!(c[1], 0.0);

        let flat_r = Frame::from_fn(8, 8, |x, _| [9, x as u8, 0]).unwrap();
        assert_eq!(pairwise_correlations(&flat_r)[0], 0.0);
    }

    #[test]
    fn ratios() {
        assert_eq!(energy_ratios(&Frame::filled(8, 8, [77; 3]).unwrap()), [1.0; 3]);
        assert_eq!(energy_ratios(&Frame::filled(8, 8, [0; 3]).unwrap()), [1.0; 3]);
        let prop = Frame::from_fn(8, 8, |x, y| {
            let b = (x * 13 + y * 7) as u8 % 120 + 1;
            [50, 2 * b, b]
        })
        .unwrap();
        assert!((energy_ratios(&prop)[0] - 2.0).abs() < 1e-12);
        let no_blue = Frame::filled(8, 8, [4, 4, 0]).unwrap();
        assert_eq!(energy_ratios(&no_blue)[0], 256.0);
    }

    /// Element-wise evaluation of the slice expressions, independent of
    /// the prefix-sum route above.
    fn com_oracle(bins: &[u64; 256]) -> f64 {
        let hg = |i: usize| bins[i - 1] as f64;
        let mut hg1 = 0.0;
        for j in 0..253 {
            hg1 += (hg(2 + j) - hg(1 + j)) + (hg(2 + j) + hg(3 + j));
        }
        let mut hg2 = 0.0;
        for j in 0..253 {
            hg2 += (hg(3 + j) - hg(2 + j)) + (hg(3 + j) + hg(4 + j));
        }
        hg1 - hg2
    }

    #[test]
    fn com_one_hot_histograms() {
        // all-black: the only mass sits in bin 1, reached only by hg(1:253)
        let black = Frame::filled(8, 8, [0; 3]).unwrap();
        assert_eq!(neighbor_com(&black), [-64.0; 3]);

        // value 128 -> bin 129, inside every slice: hg1 = 1 - 1 + 1 + 1, hg2 = 1 - 1 + 1 + 1
        let mid = Frame::filled(8, 8, [128; 3]).unwrap();
        assert_eq!(neighbor_com(&mid), [0.0; 3]);

        // value 1 -> bin 2: hg1 = (N - N) + (N + 0) = N, hg2 = (0 - N) + (0 + 0) = -N
        let one = Frame::filled(8, 8, [1; 3]).unwrap();
        assert_eq!(neighbor_com(&one), [128.0; 3]);

        // value 255 -> bin 256, only in hg(4:256)
        let white = Frame::filled(8, 8, [255; 3]).unwrap();
        assert_eq!(neighbor_com(&white), [-64.0; 3]);
    }

    #[test]
    fn com_matches_slice_oracle() {
        for seed in 0..5 {
            let f = noisy(seed);
            for k in 0..3 {
                let h = Histogram256::from_samples(f.band_samples(k));
                assert_eq!(histogram_com(&h), com_oracle(&h.bins));
            }
        }
    }

    #[test]
    fn com_depends_only_on_histogram() {
        let f = noisy(9);
        let mut pixels: Vec<[u8; 3]> = f.samples().chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
        pixels.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
        let g = Frame::new(16, 16, pixels.concat()).unwrap();
        assert_eq!(neighbor_com(&f), neighbor_com(&g));
    }

    #[test]
    fn seeded_means_match_direct_sum() {
        let f = noisy(4);
        let m = channel_means(&f);
        for k in 0..3 {
            let direct: f64 = f.band_samples(k).map(f64::from).sum::<f64>() / 256.0;
            assert_eq!(m[k], direct);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn correlation_is_affine_invariant(seed in any::<u64>(), a in 1u8..3, b in 0u8..20) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let f = Frame::from_fn(8, 8, |_, _| [rng.random_range(0..100), rng.random_range(0..100), rng.random_range(0..100)]).unwrap();
                let g = Frame::new(8, 8, f.samples().iter().map(|&s| s * a + b).collect()).unwrap();
                let (cf, cg) = (pairwise_correlations(&f), pairwise_correlations(&g));
                for k in 0..3 {
                    prop_assert!((cf[k] - cg[k]).abs() < 1e-12);
                }
            }

            #[test]
            fn always_finite(rgb in any::<[u8; 3]>()) {
                let f = Frame::filled(8, 8, rgb).unwrap();
                prop_assert!(color_vector(&f).iter().all(|v| v.is_finite()));
            }
        }
    }
}
