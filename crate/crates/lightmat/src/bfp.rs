//! Block floating-point conversion.
//!
//! A block of reals is stored as one shared power-of-two exponent plus a
//! sign-magnitude mantissa per element. For a non-zero block the shared
//! exponent is
//!
//! ```text
//! e_s = floor(log2(max_i |x_i|)) - (b - 1)
//! ```
//!
//! which normalizes the largest magnitude into `[2^(b-1), 2^b)`. Each element
//! is then quantized to `round(x_i * 2^-e_s)` with round-to-nearest-even or
//! truncation. A magnitude that rounds up to `2^b` is clamped to `2^b - 1`,
//! keeping the exponent stable at the cost of at most one ULP of error on
//! that element.
//!
//! Mantissas use `b` magnitude bits plus a separate sign. An all-zero block
//! is represented with exponent 0 and zero magnitudes.

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

/// Default width of the shared-exponent field in bits (signed).
pub const DEFAULT_EXPONENT_BITS: u32 = 8;

/// Largest supported mantissa magnitude width. Keeping magnitudes within 52
/// bits guarantees `bfp_to_fp` is exact in binary64.
pub const MAX_MANTISSA_BITS: u32 = 52;

/// Mantissa quantization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Round to nearest, ties to even (default; halves the worst-case error).
    NearestEven,
    /// Round toward zero.
    Truncate,
}

impl Default for Rounding {
    fn default() -> Self {
        Rounding::NearestEven
    }
}

impl std::str::FromStr for Rounding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest-even" => Ok(Rounding::NearestEven),
            "truncate" => Ok(Rounding::Truncate),
            other => Err(Error::Parse(format!(
                "unknown rounding mode '{other}' (expected nearest-even or truncate)"
            ))),
        }
    }
}

/// One sign-magnitude mantissa. `sign` is `+1` or `-1`; a zero magnitude
/// carries sign `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mantissa {
    pub sign: i8,
    pub magnitude: u64,
}

impl Mantissa {
    pub const ZERO: Mantissa = Mantissa { sign: 1, magnitude: 0 };

    #[inline]
    pub fn signed(self) -> i64 {
        self.sign as i64 * self.magnitude as i64
    }
}

/// A block of values sharing one power-of-two exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfpBlock {
    shared_exponent: i32,
    mantissas: Vec<Mantissa>,
    mantissa_width: u32,
}

impl BfpBlock {
    /// Build a block from parts, validating the representation invariants:
    /// magnitudes fit `b` bits, the maximum magnitude is normalized unless
    /// the block is all-zero, and an all-zero block has exponent 0.
    pub fn new(shared_exponent: i32, mantissas: Vec<Mantissa>, mantissa_width: u32) -> Result<Self> {
        check_mantissa_width(mantissa_width)?;
        if mantissas.is_empty() {
            return Err(Error::InvalidConfig("BFP block must be non-empty".into()));
        }
        let limit = 1u64 << mantissa_width;
        let mut max = 0u64;
        for m in &mantissas {
            if m.sign != 1 && m.sign != -1 {
                return Err(Error::InvalidValue(format!("mantissa sign must be +-1, got {}", m.sign)));
            }
            if m.magnitude >= limit {
                return Err(Error::InvalidValue(format!(
                    "mantissa magnitude {} does not fit {} bits",
                    m.magnitude, mantissa_width
                )));
            }
            max = max.max(m.magnitude);
        }
        if max == 0 {
            if shared_exponent != 0 {
                return Err(Error::InvalidValue(
                    "all-zero block must carry shared exponent 0".into(),
                ));
            }
        } else if max < limit / 2 {
            return Err(Error::InvalidValue(format!(
                "block is not normalized: max magnitude {} < 2^{}",
                max,
                mantissa_width - 1
            )));
        }
        Ok(Self { shared_exponent, mantissas, mantissa_width })
    }

    pub fn shared_exponent(&self) -> i32 {
        self.shared_exponent
    }

    pub fn mantissas(&self) -> &[Mantissa] {
        &self.mantissas
    }

    pub fn mantissa_width(&self) -> u32 {
        self.mantissa_width
    }

    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    /// Exponent of the power-of-two upper bound on block values:
    /// `2^(upper_bound_exponent) > |x|` for every element, with equality
    /// approached by the normalized maximum. Equals `e_s + b`.
    pub fn upper_bound_exponent(&self) -> i32 {
        self.shared_exponent + self.mantissa_width as i32
    }
}

/// Multiply by a power of two, exactly, with staging that avoids overflow of
/// the intermediate scale factor for large shifts.
#[inline]
pub(crate) fn scale_by_pow2(x: f64, mut k: i64) -> f64 {
    let mut v = x;
    while k > 1023 {
        v *= f64::exp2(1023.0);
        k -= 1023;
    }
    while k < -1022 {
        v *= f64::exp2(-1022.0);
        k += 1022;
    }
    v * f64::exp2(k as f64)
}

/// `floor(log2(x))` for finite positive `x`, guarded against libm rounding
/// at power-of-two boundaries.
pub(crate) fn floor_log2(x: f64) -> i64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut e = x.log2().floor() as i64;
    while scale_by_pow2(1.0, e) > x {
        e -= 1;
    }
    while scale_by_pow2(1.0, e + 1) <= x {
        e += 1;
    }
    e
}

fn check_mantissa_width(b: u32) -> Result<()> {
    if !(2..=MAX_MANTISSA_BITS).contains(&b) {
        return Err(Error::InvalidConfig(format!(
            "mantissa width must be in [2, {MAX_MANTISSA_BITS}], got {b}"
        )));
    }
    Ok(())
}

fn check_exponent_bits(bits: u32) -> Result<()> {
    if !(2..=31).contains(&bits) {
        return Err(Error::InvalidConfig(format!(
            "exponent width must be in [2, 31] bits, got {bits}"
        )));
    }
    Ok(())
}

#[inline]
fn quantize_magnitude(t: f64, b: u32, rounding: Rounding) -> u64 {
    let rounded = match rounding {
        Rounding::NearestEven => t.round_ties_even(),
        Rounding::Truncate => t.trunc(),
    };
    let limit = (1u64 << b) - 1;
    // Rounding can push the normalized maximum up to 2^b; clamp to keep the
    // exponent stable.
    if rounded >= (limit as f64) + 1.0 {
        limit
    } else {
        rounded as u64
    }
}

/// Convert a block of reals to BFP with the default 8-bit exponent field.
pub fn fp_to_bfp(block: &[f64], b: u32, rounding: Rounding) -> Result<BfpBlock> {
    fp_to_bfp_with_exponent(block, b, rounding, DEFAULT_EXPONENT_BITS)
}

/// Convert a block of reals to BFP, checking that the shared exponent fits a
/// signed `exponent_bits`-wide field.
pub fn fp_to_bfp_with_exponent(
    block: &[f64],
    b: u32,
    rounding: Rounding,
    exponent_bits: u32,
) -> Result<BfpBlock> {
    check_mantissa_width(b)?;
    check_exponent_bits(exponent_bits)?;
    if block.is_empty() {
        return Err(Error::InvalidConfig("cannot convert an empty block".into()));
    }
    let mut max_abs = 0.0f64;
    for &x in block {
        if !x.is_finite() {
            return Err(Error::InvalidValue(format!("non-finite input value {x}")));
        }
        max_abs = max_abs.max(x.abs());
    }
    if max_abs == 0.0 {
        return Ok(BfpBlock {
            shared_exponent: 0,
            mantissas: vec![Mantissa::ZERO; block.len()],
            mantissa_width: b,
        });
    }
    let e_s = floor_log2(max_abs) - (b as i64 - 1);
    let e_min = -(1i64 << (exponent_bits - 1));
    let e_max = (1i64 << (exponent_bits - 1)) - 1;
    if e_s < e_min || e_s > e_max {
        return Err(Error::ExponentOverflow(format!(
            "shared exponent {e_s} does not fit a signed {exponent_bits}-bit field"
        )));
    }
    let mantissas = block
        .iter()
        .map(|&x| {
            let t = scale_by_pow2(x, -e_s);
            let magnitude = quantize_magnitude(t.abs(), b, rounding);
            let sign = if x < 0.0 && magnitude > 0 { -1 } else { 1 };
            Mantissa { sign, magnitude }
        })
        .collect();
    Ok(BfpBlock {
        shared_exponent: e_s as i32,
        mantissas,
        mantissa_width: b,
    })
}

/// Recover the real values of a block: `sign * magnitude * 2^e_s`.
///
/// Exact for magnitude widths up to 52 bits; composing with [`fp_to_bfp`] at
/// the same width returns the identical block.
pub fn bfp_to_fp(block: &BfpBlock) -> Vec<f64> {
    block
        .mantissas
        .iter()
        .map(|m| scale_by_pow2(m.sign as f64 * m.magnitude as f64, block.shared_exponent as i64))
        .collect()
}

/// Partition `a` into row tiles of up to `l` rows; each row of each tile is
/// one independent length-K BFP block. The final tile is ragged when `l`
/// does not divide the row count.
pub fn matrix_to_bfp_tiles_a(
    a: &RealMatrix,
    l: usize,
    b: u32,
    rounding: Rounding,
    exponent_bits: u32,
) -> Result<Vec<Vec<BfpBlock>>> {
    if l < 1 {
        return Err(Error::InvalidConfig("tile size L must be at least 1".into()));
    }
    let mut tiles = Vec::with_capacity(a.rows().div_ceil(l));
    for tile_start in (0..a.rows()).step_by(l) {
        let live = l.min(a.rows() - tile_start);
        let mut blocks = Vec::with_capacity(live);
        for i in 0..live {
            blocks.push(fp_to_bfp_with_exponent(a.row(tile_start + i), b, rounding, exponent_bits)?);
        }
        tiles.push(blocks);
    }
    Ok(tiles)
}

/// Partition `b_matrix` into column tiles of up to `l` columns; each column
/// of each tile is one independent length-K BFP block.
pub fn matrix_to_bfp_tiles_b(
    b_matrix: &RealMatrix,
    l: usize,
    b: u32,
    rounding: Rounding,
    exponent_bits: u32,
) -> Result<Vec<Vec<BfpBlock>>> {
    if l < 1 {
        return Err(Error::InvalidConfig("tile size L must be at least 1".into()));
    }
    let mut tiles = Vec::with_capacity(b_matrix.cols().div_ceil(l));
    for tile_start in (0..b_matrix.cols()).step_by(l) {
        let live = l.min(b_matrix.cols() - tile_start);
        let mut blocks = Vec::with_capacity(live);
        for j in 0..live {
            let col = b_matrix.column(tile_start + j);
            blocks.push(fp_to_bfp_with_exponent(&col, b, rounding, exponent_bits)?);
        }
        tiles.push(blocks);
    }
    Ok(tiles)
}
