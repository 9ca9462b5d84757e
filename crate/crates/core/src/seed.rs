//! Deterministic seed derivation and tie-aware argmax helpers.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for stream `stream` of `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(mix64(master) ^ mix64(stream.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Seed for a pair of stream indices (e.g. clip and frame).
pub fn derive_seed2(master: u64, a: u64, b: u64) -> u64 {
    derive_seed(derive_seed(master, a), b)
}

/// Stable 64-bit hash of a string label (FNV-1a, then mixed).
pub fn hash_label(label: &str) -> u64 {
    let h = label.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01B3));
    mix64(h)
}

/// Index of the largest count; ties go to the lowest index.
pub fn argmax_lowest<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
