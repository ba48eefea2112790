//! Mantissa slicing and product reconstruction.
//!
//! A `b`-bit mantissa magnitude is decomposed into `s = ceil(b / d)` unsigned
//! `d`-bit slices -- its base-2^d digits, most-significant first, zero-padded
//! at the most-significant end when `d` does not divide `b`. The product of
//! two magnitudes is then the weighted sum of the `s x s` pairwise slice
//! products:
//!
//! ```text
//! u * v = sum_ij slice_i(u) * slice_j(v) * 2^(d * (2s - 2 - i - j))
//! ```
//!
//! Slice products travel as reals between the analog multiply and the
//! shift-and-accumulate stage, so additive noise on each partial propagates
//! through the weights linearly.

use crate::error::{Error, Result};

/// Widest slice the analog multiplier accepts.
pub const MAX_SLICE_WIDTH: u32 = 6;

/// Upper bound on slices per operand (width-1 slices of a 52-bit mantissa).
pub const MAX_SLICES: usize = 52;

/// Slice decomposition geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceConfig {
    slice_width: u32,
    num_slices: u32,
}

impl SliceConfig {
    /// Build a config with an explicit slice count.
    pub fn new(slice_width: u32, num_slices: u32) -> Result<Self> {
        if !(1..=MAX_SLICE_WIDTH).contains(&slice_width) {
            return Err(Error::InvalidConfig(format!(
                "slice width must be in [1, {MAX_SLICE_WIDTH}] bits, got {slice_width}"
            )));
        }
        if num_slices == 0 || num_slices as usize > MAX_SLICES {
            return Err(Error::InvalidConfig(format!(
                "slice count must be in [1, {MAX_SLICES}], got {num_slices}"
            )));
        }
        Ok(Self { slice_width, num_slices })
    }

    /// Config covering a `b`-bit mantissa: `s = ceil(b / d)`.
    pub fn for_mantissa_width(b: u32, slice_width: u32) -> Result<Self> {
        let s = b.div_ceil(slice_width.max(1));
        Self::new(slice_width, s.max(1))
    }

    pub fn slice_width(&self) -> u32 {
        self.slice_width
    }

    pub fn num_slices(&self) -> u32 {
        self.num_slices
    }

    /// Bits covered by the full slice set (`s * d`).
    pub fn covered_bits(&self) -> u32 {
        self.slice_width * self.num_slices
    }

    /// Reconstruction weight of partial `(i, j)`: `2^(d * (2s - 2 - i - j))`.
    #[inline]
    pub fn partial_weight(&self, i: u32, j: u32) -> f64 {
        debug_assert!(i < self.num_slices && j < self.num_slices);
        let shift = self.slice_width * (2 * self.num_slices - 2 - i - j);
        f64::exp2(shift as f64)
    }

    /// Amplification of i.i.d. unit-variance noise on every partial onto the
    /// reconstructed product, as a standard deviation factor:
    /// `sqrt(sum_ij w_ij^2) = sum_i 4^(d * (s - 1 - i))`.
    pub fn noise_gain(&self) -> f64 {
        (0..self.num_slices)
            .map(|i| f64::exp2((2 * self.slice_width * (self.num_slices - 1 - i)) as f64))
            .sum()
    }

    /// Sum of all reconstruction weights: `(sum_i 2^(d * (s - 1 - i)))^2`.
    /// A constant bias `mu` on every partial shifts the product by
    /// `mu * weight_sum`.
    pub fn weight_sum(&self) -> f64 {
        let linear: f64 = (0..self.num_slices)
            .map(|i| f64::exp2((self.slice_width * (self.num_slices - 1 - i)) as f64))
            .sum();
        linear * linear
    }
}

/// A mantissa decomposed into fixed-width unsigned slices, with its sign
/// kept aside (signs never enter the analog path).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlicedOperand {
    sign: i8,
    len: u8,
    slices: [u8; MAX_SLICES],
}

impl SlicedOperand {
    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Slices, most-significant first. Each value is below `2^d`.
    #[inline]
    pub fn slices(&self) -> &[u8] {
        &self.slices[..self.len as usize]
    }

    /// Reassemble the magnitude (exact inverse of [`slice_mantissa`]).
    pub fn magnitude(&self, cfg: &SliceConfig) -> u64 {
        self.slices()
            .iter()
            .fold(0u64, |acc, &s| (acc << cfg.slice_width) | s as u64)
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign;
        self
    }
}

/// Decompose `magnitude` (a `b`-bit value) into the base-2^d digits described
/// by `cfg`, most-significant slice first.
pub fn slice_mantissa(magnitude: u64, b: u32, cfg: &SliceConfig) -> Result<SlicedOperand> {
    if b > 0 && magnitude >> (b - 1) > 1 {
        return Err(Error::InvalidValue(format!(
            "magnitude {magnitude} does not fit {b} bits"
        )));
    }
    if cfg.covered_bits() < b {
        return Err(Error::InvalidConfig(format!(
            "{} slices of {} bits cannot cover a {b}-bit mantissa",
            cfg.num_slices, cfg.slice_width
        )));
    }
    let s = cfg.num_slices as usize;
    let d = cfg.slice_width;
    let mask = (1u64 << d) - 1;
    let mut slices = [0u8; MAX_SLICES];
    for (i, slot) in slices.iter_mut().enumerate().take(s) {
        let shift = d * (s - 1 - i) as u32;
        *slot = ((magnitude >> shift) & mask) as u8;
    }
    Ok(SlicedOperand { sign: 1, len: s as u8, slices })
}

/// Sliced operand with a sign attached.
pub fn slice_signed(sign: i8, magnitude: u64, b: u32, cfg: &SliceConfig) -> Result<SlicedOperand> {
    Ok(slice_mantissa(magnitude, b, cfg)?.with_sign(sign))
}

/// Recombine an `s x s` row-major matrix of slice products into the full
/// product via shift-and-accumulate. With exact partials this equals the
/// exact magnitude product; with perturbed partials the error is exactly the
/// weighted sum of the perturbations.
pub fn reconstruct_product(partials: &[f64], cfg: &SliceConfig) -> Result<f64> {
    let s = cfg.num_slices as usize;
    if partials.len() != s * s {
        return Err(Error::AlignmentError(format!(
            "expected {}x{} = {} partials, got {}",
            s,
            s,
            s * s,
            partials.len()
        )));
    }
    let mut acc = 0.0;
    for i in 0..s {
        for j in 0..s {
            acc += partials[i * s + j] * cfg.partial_weight(i as u32, j as u32);
        }
    }
    Ok(acc)
}
