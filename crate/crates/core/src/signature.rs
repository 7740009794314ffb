//! Truncated signatures of piecewise linear paths.
//!
//! The signature of a path is the series of its iterated integrals. For a
//! single linear segment with increment `v` the level-`n` term is
//! `v^(x)n / n!`; longer paths are assembled with Chen's identity, which
//! turns concatenation of paths into the product of their series.

use crate::error::{Error, Result};
use crate::path::PiecewiseLinearPath;
use crate::tensor::{accumulate_product, tensor_product, TensorBlock, TruncatedTensorSeries};

/// Signature of one linear segment, truncated at `depth`.
///
/// A zero increment gives the identity series.
pub fn segment_signature(increment: &[f64], depth: usize) -> Result<TruncatedTensorSeries> {
    let dim = increment.len();
    let mut series = TruncatedTensorSeries::identity(dim, depth)?;
    if depth == 0 {
        return Ok(series);
    }
    let v = TensorBlock::vector(increment)?;
    let mut power = TensorBlock::scalar(dim, 1.0);
    for n in 1..=depth {
        let mut next = tensor_product(&power, &v)?;
        next.scale(1.0 / n as f64);
        *series.level_mut(n) = next.clone();
        power = next;
    }
    Ok(series)
}

/// Chen product of two series: level `n` of the result is
/// `sum_k a_k (x) b_(n-k)`. Both series must share dimension and depth.
pub fn chen_concat(
    a: &TruncatedTensorSeries,
    b: &TruncatedTensorSeries,
) -> Result<TruncatedTensorSeries> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if a.depth() != b.depth() {
        return Err(Error::DepthMismatch { expected: a.depth(), got: b.depth() });
    }
    let mut out = TruncatedTensorSeries::zeros(a.dim(), a.depth())?;
    for n in 0..=a.depth() {
        // Split the level across the two factors in every possible way.
        let block = out.level_mut(n);
        for k in 0..=n {
            accumulate_product(block, a.level(k), b.level(n - k), 1.0);
        }
    }
    Ok(out)
}

/// Signature of a whole polyline: the Chen product of its segment series.
pub fn path_signature(path: &PiecewiseLinearPath, depth: usize) -> Result<TruncatedTensorSeries> {
    let mut sig = segment_signature(&path.segment_increment(0), depth)?;
    for i in 1..path.segment_count() {
        let seg = segment_signature(&path.segment_increment(i), depth)?;
        sig = chen_concat(&sig, &seg)?;
    }
    Ok(sig)
}

/// Level `n` rescaled by `n! / length^n`.
///
/// For a path parametrised at unit speed this brings every level onto the
/// same scale: a straight segment has every normalised level of norm one,
/// and no path exceeds one.
pub fn normalised_level(
    sig: &TruncatedTensorSeries,
    n: usize,
    length: f64,
) -> Result<TensorBlock> {
    if length.is_nan() || length <= 0.0 {
        return Err(Error::NonPositiveLength(length));
    }
    let block = sig.try_level(n)?;
    let mut factor = 1.0;
    for k in 1..=n {
        factor *= k as f64 / length;
    }
    Ok(block.scaled(factor))
}

/// Signature of the reversed path: level `n` picks up a sign `(-1)^n` and
/// every word is read backwards. For a group-like series this is the
/// inverse under [`chen_concat`].
pub fn signature_inverse(sig: &TruncatedTensorSeries) -> Result<TruncatedTensorSeries> {
    let d = sig.dim();
    let mut out = TruncatedTensorSeries::zeros(d, sig.depth())?;
    for n in 0..=sig.depth() {
        let src = sig.level(n).coeffs();
        let dst = out.level_mut(n).coeffs_mut();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for (idx, &c) in src.iter().enumerate() {
            let mut rest = idx;
            let mut rev = 0usize;
            for _ in 0..n {
                rev = rev * d + rest % d;
                rest /= d;
            }
            dst[rev] = sign * c;
        }
    }
    Ok(out)
}
