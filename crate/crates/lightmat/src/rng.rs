//! Counter-based deterministic random streams.
//!
//! Every random draw in the simulator is addressed by a `(seed, key words)`
//! tuple instead of consuming state from a shared generator. The same key
//! always yields the same draw, no matter how work is ordered or how many
//! worker threads are running, which is what makes experiment reports
//! byte-reproducible under any parallel schedule.
//!
//! The mixer is a splitmix64 chain: each key word is folded into the state
//! and passed through the splitmix64 finalizer, which has full avalanche.

/// Domain-separation tags so different uses of the same indices never
/// collide on the same underlying stream.
pub mod domain {
    /// Photonic slice-product noise draws.
    pub const NOISE: u64 = 0x01;
    /// Random matrix element generation for experiments.
    pub const MATRIX: u64 = 0x02;
    /// Per-trial sub-seeds inside an experiment.
    pub const TRIAL: u64 = 0x03;
    /// Standalone multiplier characterization draws.
    pub const CHARACTERIZATION: u64 = 0x04;
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline(always)]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse `seed` and the key words into one well-mixed 64-bit state.
#[inline(always)]
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &w in words {
        state = splitmix64(state ^ w.wrapping_mul(GOLDEN));
    }
    state
}

/// The `i`-th u64 of the stream addressed by `state` (from [`mix`]).
#[inline(always)]
pub fn stream_u64(state: u64, i: u64) -> u64 {
    splitmix64(state ^ i.wrapping_mul(GOLDEN).rotate_left(17))
}

/// The `i`-th uniform draw in `[0, 1)` of the stream addressed by `state`.
#[inline(always)]
pub fn stream_unit(state: u64, i: u64) -> f64 {
    // 53 high bits -> [0, 1)
    (stream_u64(state, i) >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Standard normal draw for a keyed stream position via Box-Muller.
///
/// Consumes stream positions `2i` and `2i + 1`; the first uniform is mapped
/// into `(0, 1]` so the logarithm is always finite.
#[inline(always)]
pub fn stream_normal(state: u64, i: u64) -> f64 {
    let u1 = ((stream_u64(state, 2 * i) >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
    let u2 = stream_unit(state, 2 * i + 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One-shot keyed standard normal draw.
#[inline(always)]
pub fn keyed_normal(seed: u64, words: &[u64]) -> f64 {
    stream_normal(mix(seed, words), 0)
}

/// One-shot keyed uniform draw in `[lo, hi)`.
#[inline(always)]
pub fn keyed_uniform(seed: u64, words: &[u64], lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * stream_unit(mix(seed, words), 0)
}
