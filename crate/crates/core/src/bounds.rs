//! Quantifying how well insertion works.
//!
//! The measured side: [`insertion_gap`] evaluates how far inserting the true
//! direction of travel lands from the next normalised level, and
//! [`gap_curve`] sweeps that over levels. The predicted side:
//! [`binomial_bound`] evaluates a closed-form upper bound for the gap when
//! the clock time sits inside a linear piece spanning `[s, t]` of the
//! arc-length clock, and [`lattice_decay`] gives the exact norm decay of a
//! right-angle corner. [`graded_development`] folds the signature through a
//! matrix representation whose operator norms witness lower bounds for
//! normalised level norms, with [`lower_bound_constant`] the matching decay
//! constant. [`length_estimate`] recovers the arc length itself from a
//! single raw level.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::insertion::{insertion_position, InsertionContext};
use crate::path::PiecewiseLinearPath;
use crate::signature::{normalised_level, path_signature};
use crate::tensor::{NormKind, TruncatedTensorSeries};
use nalgebra::DMatrix;

/// Binomial coefficient as a float, evaluated in log space once the row is
/// long enough for the multiplicative form to lose digits.
fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 50 {
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        c
    } else {
        // Compensated log-space summation.
        let mut sum = 0.0;
        let mut carry = 0.0;
        for i in 0..k {
            let term = ((n - i) as f64).ln() - ((i + 1) as f64).ln();
            let y = term - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        sum.exp()
    }
}

/// `sum_{k=from}^{n} C(n, k) q^k (1-q)^(n-k)`; zero when the range is empty.
fn binomial_tail(n: usize, from: usize, q: f64) -> f64 {
    let mut acc = 0.0;
    for k in from..=n {
        acc += binom(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
    }
    acc
}

/// Distance between the inserted true direction and the next normalised
/// level: `| insert_p(f(theta)) - sbar_(n+1) |` in the chosen norm, with
/// `p = floor(theta * (n + 2))` clamped to `1..=n+1`.
pub fn insertion_gap(
    path: &PiecewiseLinearPath,
    theta: f64,
    n: usize,
    kind: NormKind,
) -> Result<f64> {
    let curve = gap_curve(path, theta, n..=n, kind)?;
    Ok(curve.points[0].gap)
}

/// One measured gap, together with the level and position it was taken at.
#[derive(Clone, Copy, Debug)]
pub struct GapPoint {
    pub level: usize,
    pub position: usize,
    pub gap: f64,
}

/// Measured insertion gaps across a range of levels at a fixed clock time.
#[derive(Clone, Debug)]
pub struct GapCurve {
    pub theta: f64,
    pub kind: NormKind,
    pub points: Vec<GapPoint>,
}

/// Sweeps [`insertion_gap`] over `levels`, computing the signature once.
pub fn gap_curve(
    path: &PiecewiseLinearPath,
    theta: f64,
    levels: RangeInclusive<usize>,
    kind: NormKind,
) -> Result<GapCurve> {
    let (first, last) = (*levels.start(), *levels.end());
    if first < 1 || first > last {
        return Err(Error::InvalidConfig(format!(
            "level range {first}..={last} must be nonempty and start at 1 or above"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let sig = path_signature(path, last + 1)?;
    let len = path.length();
    let f = path.unit_derivative(theta)?;
    let mut points = Vec::with_capacity(last - first + 1);
    for n in first..=last {
        let sbar = normalised_level(&sig, n, len)?;
        let target = normalised_level(&sig, n + 1, len)?;
        let position = insertion_position(theta, n);
        let ctx = InsertionContext::new(sbar, position)?;
        let gap = ctx.insert(f.coords())?.sub(&target)?.norm(kind);
        points.push(GapPoint { level: n, position, gap });
    }
    Ok(GapCurve { theta, kind, points })
}

/// Closed-form upper bound for the L1 insertion gap at level `n`, position
/// `p`, when the clock time lies inside a linear piece covering `[s, t]` of
/// the arc-length clock.
///
/// The five terms bound, in order: the quadrature error of the letter count
/// inside the piece, and the normalised mass (at levels `n` and `n + 1`) of
/// words with too many letters before `s` or after `t`. The bound vanishes
/// when the whole path is one piece (`s = 0`, `t = 1`).
pub fn binomial_bound(s: f64, t: f64, n: usize, p: usize) -> Result<f64> {
    if !(s >= 0.0 && s < t && t <= 1.0) {
        return Err(Error::BadInterval { s, t });
    }
    if n < 1 {
        return Err(Error::LevelOutOfRange { level: n, depth: 1 });
    }
    if p == 0 || p > n + 1 {
        return Err(Error::PositionOutOfRange { position: p, max: n + 1 });
    }
    let span = t - s;
    let m = n + 1;
    let mut total = 0.0;
    for k in 0..=m {
        let weight = binom(m, k) * span.powi(k as i32) * (1.0 - span).powi((m - k) as i32);
        total += weight * (k as f64 / (m as f64 * span) - 1.0).abs();
    }
    total += binomial_tail(n, p, s);
    total += binomial_tail(n + 1, p, s);
    total += binomial_tail(n, n + 2 - p, 1.0 - t);
    total += binomial_tail(n + 1, n + 2 - p, 1.0 - t);
    Ok(total)
}

/// Exact norms of the normalised level `n` for the two-piece axis corner
/// with both legs of length one half.
#[derive(Clone, Copy, Debug)]
pub struct LatticeDecay {
    /// L1 norm; identically one at every level.
    pub l1: f64,
    /// L2 (Hilbert-Schmidt) norm; `sqrt(C(2n, n)) / 2^n`.
    pub hs: f64,
}

/// Norm decay of the right-angle corner path, level by level.
pub fn lattice_decay(n: usize) -> LatticeDecay {
    let half = 0.5f64.powi(n as i32);
    let mut l1 = 0.0;
    let mut squares = 0.0;
    for k in 0..=n {
        let c = binom(n, k);
        l1 += c;
        squares += c * c;
    }
    LatticeDecay { l1: l1 * half, hs: squares.sqrt() * half }
}

/// The matrix `F(x)`: zero except for `x` along the last row and last
/// column. Powers of `F` alternate between stretching the span of `x` and
/// the final coordinate, which is what makes the development below keep
/// norm mass that commutative summaries lose.
pub fn hyperbolic_f(x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut m = DMatrix::zeros(d + 1, d + 1);
    for (i, &xi) in x.iter().enumerate() {
        m[(i, d)] = xi;
        m[(d, i)] = xi;
    }
    m
}

/// Level-by-level image of a path's signature under the matrix
/// representation generated by [`hyperbolic_f`].
#[derive(Clone, Debug)]
pub struct GradedDevelopment {
    matrices: Vec<DMatrix<f64>>,
    length: f64,
}

impl GradedDevelopment {
    pub fn depth(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Image of signature level `n`; level 0 is the identity.
    pub fn matrix(&self, n: usize) -> Result<&DMatrix<f64>> {
        self.matrices
            .get(n)
            .ok_or(Error::LevelOutOfRange { level: n, depth: self.depth() })
    }

    /// `n! length^-n` times the operator norm of level `n`: a lower bound
    /// for the normalised level-`n` norm of the signature in any of the
    /// block norms.
    pub fn witness(&self, n: usize) -> Result<f64> {
        let m = self.matrix(n)?;
        let op = m
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        let mut factor = 1.0;
        for k in 1..=n {
            factor *= k as f64 / self.length;
        }
        Ok(factor * op)
    }
}

/// Develops the path into matrix levels: each segment contributes powers
/// `F(increment)^k / k!` and segments combine by the same convolution that
/// concatenates signatures.
pub fn graded_development(path: &PiecewiseLinearPath, depth: usize) -> Result<GradedDevelopment> {
    let side = path.dim() + 1;
    let identity = DMatrix::identity(side, side);
    let mut levels: Vec<DMatrix<f64>> = Vec::with_capacity(depth + 1);
    levels.push(identity.clone());
    levels.extend(std::iter::repeat_with(|| DMatrix::zeros(side, side)).take(depth));

    for i in 0..path.segment_count() {
        let f = hyperbolic_f(&path.segment_increment(i));
        let mut seg_levels: Vec<DMatrix<f64>> = Vec::with_capacity(depth + 1);
        seg_levels.push(identity.clone());
        for k in 1..=depth {
            let next = (&seg_levels[k - 1] * &f) / k as f64;
            seg_levels.push(next);
        }
        let mut combined: Vec<DMatrix<f64>> = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let mut acc = DMatrix::zeros(side, side);
            for k in 0..=n {
                acc += &levels[k] * &seg_levels[n - k];
            }
            combined.push(acc);
        }
        levels = combined;
    }
    Ok(GradedDevelopment { matrices: levels, length: path.length() })
}

/// Decay constant `c * exp(-(pieces - 1) * K)` with
/// `K = log(2 / (1 - cos|omega|))`, where `2 * omega` is the smallest angle
/// between adjacent edges of the path and `pieces` its segment count.
///
/// Together with a development witness this lower-bounds how fast the
/// normalised levels of a piecewise linear path can shrink.
pub fn lower_bound_constant(pieces: usize, omega: f64, c: f64) -> Result<f64> {
    if pieces < 1 {
        return Err(Error::InvalidConfig(format!(
            "piece count must be at least 1, got {pieces}"
        )));
    }
    if !c.is_finite() || !(0.0 < c && c < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "constant c must lie strictly between 0 and 1, got {c}"
        )));
    }
    if !omega.is_finite() {
        return Err(Error::InvalidConfig(format!("angle must be finite, got {omega}")));
    }
    let gap = 1.0 - omega.abs().cos();
    if gap <= 0.0 {
        return Err(Error::ZeroAngle);
    }
    let k = (2.0 / gap).ln();
    Ok(c * (-((pieces - 1) as f64) * k).exp())
}

/// Estimates the arc length from raw level `n`: `(n! |level n|)^(1/n)`.
///
/// Exact for straight segments and increasingly accurate for smooth paths
/// as `n` grows.
pub fn length_estimate(sig: &TruncatedTensorSeries, n: usize, kind: NormKind) -> Result<f64> {
    if n < 1 {
        return Err(Error::LevelOutOfRange { level: n, depth: 1 });
    }
    let norm = sig.try_level(n)?.norm(kind);
    if norm <= 0.0 {
        return Err(Error::ZeroLevel { level: n });
    }
    let mut log_fact = 0.0;
    for k in 1..=n {
        log_fact += (k as f64).ln();
    }
    Ok(((log_fact + norm.ln()) / n as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::segment_signature;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn corner_path() -> PiecewiseLinearPath {
        // Up two thirds, then right one third; total length one.
        PiecewiseLinearPath::new(vec![
            vec![0.0, 0.0],
            vec![0.0, 2.0 / 3.0],
            vec![1.0 / 3.0, 2.0 / 3.0],
        ])
        .unwrap()
    }

    #[test]
    fn straight_segments_have_no_gap() {
        let p = PiecewiseLinearPath::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        for n in 1..=6 {
            for kind in [NormKind::L1, NormKind::L2] {
                for theta in [0.1, 0.5, 0.9] {
                    assert!(insertion_gap(&p, theta, n, kind).unwrap() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn gap_positions_follow_the_clock() {
        let curve = gap_curve(&corner_path(), 0.5, 2..=6, NormKind::L1).unwrap();
        for point in &curve.points {
            assert_eq!(point.position, insertion_position(0.5, point.level));
        }
        assert_eq!(curve.points.len(), 5);
    }

    #[test]
    fn gap_rejects_boundary_clock_times() {
        let p = corner_path();
        assert!(matches!(
            insertion_gap(&p, 0.0, 3, NormKind::L1),
            Err(Error::ThetaOutOfRange(_))
        ));
        assert!(matches!(
            insertion_gap(&p, 1.0, 3, NormKind::L1),
            Err(Error::ThetaOutOfRange(_))
        ));
    }

    #[test]
    fn bound_vanishes_when_the_piece_is_the_whole_path() {
        for n in 1..=8 {
            for p in 1..=n + 1 {
                assert_eq!(binomial_bound(0.0, 1.0, n, p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn bound_matches_the_hand_computed_golden() {
        // s = 0, t = 2/3, n = 4, p = 3 sums to exactly 142/243.
        let v = binomial_bound(0.0, 2.0 / 3.0, 4, 3).unwrap();
        assert_close(v, 142.0 / 243.0, 1e-15);
    }

    #[test]
    fn bound_validates_its_interval() {
        assert!(matches!(binomial_bound(0.5, 0.5, 3, 1), Err(Error::BadInterval { .. })));
        assert!(matches!(binomial_bound(-0.1, 0.5, 3, 1), Err(Error::BadInterval { .. })));
        assert!(matches!(binomial_bound(0.0, 1.1, 3, 1), Err(Error::BadInterval { .. })));
        assert!(matches!(
            binomial_bound(0.0, 0.5, 3, 5),
            Err(Error::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn binomials_stay_accurate_in_log_space() {
        // Row 60 is computed through logs; compare against u128 arithmetic.
        let exact = |n: u128, k: u128| -> f64 {
            let mut c: u128 = 1;
            for i in 0..k {
                c = c * (n - i) / (i + 1);
            }
            c as f64
        };
        for k in [0usize, 1, 7, 30, 60] {
            let want = exact(60, k as u128);
            assert_close(binom(60, k), want, 1e-9 * want.max(1.0));
        }
    }

    #[test]
    fn lattice_norms_match_their_closed_forms() {
        let first = lattice_decay(1);
        assert_eq!(first.l1, 1.0);
        assert_close(first.hs, 0.5f64.sqrt(), 1e-16);
        for n in 1..=20 {
            let decay = lattice_decay(n);
            assert_close(decay.l1, 1.0, 1e-12);
            let reference = binom(2 * n, n).sqrt() * 0.5f64.powi(n as i32);
            assert_close(decay.hs, reference, 1e-12);
        }
    }

    #[test]
    fn lattice_closed_forms_match_the_actual_corner_signature() {
        let p = PiecewiseLinearPath::new(vec![
            vec![0.0, 0.0],
            vec![0.0, 0.5],
            vec![0.5, 0.5],
        ])
        .unwrap();
        let sig = path_signature(&p, 8).unwrap();
        for n in 1..=8 {
            let sbar = normalised_level(&sig, n, 1.0).unwrap();
            let decay = lattice_decay(n);
            assert_close(sbar.norm(NormKind::L1), decay.l1, 1e-12);
            assert_close(sbar.norm(NormKind::L2), decay.hs, 1e-12);
        }
    }

    #[test]
    fn f_of_a_basis_vector_squares_to_a_projection() {
        let f = hyperbolic_f(&[1.0, 0.0]);
        let f2 = &f * &f;
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0]));
        assert_eq!(f2, expected);
    }

    #[test]
    fn development_of_a_straight_segment_witnesses_one() {
        let p = PiecewiseLinearPath::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let dev = graded_development(&p, 12).unwrap();
        assert_eq!(dev.matrix(0).unwrap(), &DMatrix::identity(3, 3));
        for n in 0..=12 {
            assert_close(dev.witness(n).unwrap(), 1.0, 1e-10);
        }
    }

    #[test]
    fn development_level_two_matches_the_expanded_signature_image() {
        // Brute force: image of level 2 is sum_w S2[w] F(e_w1) F(e_w2).
        let p = corner_path();
        let sig = path_signature(&p, 2).unwrap();
        let level2 = sig.level(2);
        let d = 2;
        let mut expected = DMatrix::zeros(d + 1, d + 1);
        for i in 0..d {
            for j in 0..d {
                let mut e_i = vec![0.0; d];
                e_i[i] = 1.0;
                let mut e_j = vec![0.0; d];
                e_j[j] = 1.0;
                let coeff = level2.coeffs()[i * d + j];
                expected += hyperbolic_f(&e_i) * hyperbolic_f(&e_j) * coeff;
            }
        }
        let dev = graded_development(&p, 2).unwrap();
        let got = dev.matrix(2).unwrap();
        for (a, b) in got.iter().zip(expected.iter()) {
            assert_close(*a, *b, 1e-12);
        }
    }

    #[test]
    fn witness_never_exceeds_the_normalised_l1_norm() {
        let p = corner_path();
        let depth = 8;
        let dev = graded_development(&p, depth).unwrap();
        let sig = path_signature(&p, depth).unwrap();
        for n in 1..=depth {
            let upper = normalised_level(&sig, n, p.length()).unwrap().norm(NormKind::L1);
            assert!(dev.witness(n).unwrap() <= upper + 1e-9);
        }
    }

    #[test]
    fn decay_constant_matches_a_hand_computed_case() {
        let v = lower_bound_constant(2, std::f64::consts::FRAC_PI_4, 0.5).unwrap();
        // 0.5 * (1 - cos(pi/4)) / 2
        assert_close(v, 0.25 * (1.0 - 0.5f64.sqrt()), 1e-15);
        assert_close(v, 0.07322, 5e-6);
        let single = lower_bound_constant(1, 0.3, 0.25).unwrap();
        assert_eq!(single, 0.25);
    }

    #[test]
    fn decay_constant_rejects_flat_angles_and_bad_parameters() {
        assert!(matches!(lower_bound_constant(2, 0.0, 0.5), Err(Error::ZeroAngle)));
        assert!(matches!(
            lower_bound_constant(2, 2.0 * std::f64::consts::PI, 0.5),
            Err(Error::ZeroAngle)
        ));
        assert!(lower_bound_constant(0, 0.5, 0.5).is_err());
        assert!(lower_bound_constant(2, 0.5, 1.5).is_err());
        assert!(lower_bound_constant(2, 0.5, 0.0).is_err());
    }

    #[test]
    fn straight_segment_lengths_are_estimated_exactly() {
        for scale in [0.5, 1.0, 2.0] {
            let sig = segment_signature(&[0.6 * scale, 0.8 * scale], 10).unwrap();
            for n in 1..=10 {
                for kind in [NormKind::L2, NormKind::L1, NormKind::Linf] {
                    let est = length_estimate(&sig, n, kind).unwrap();
                    if kind == NormKind::L2 {
                        assert_close(est, scale, 1e-12);
                    } else {
                        assert!(est.is_finite() && est > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_levels_cannot_carry_a_length() {
        let sig = TruncatedTensorSeries::identity(2, 3).unwrap();
        assert!(matches!(
            length_estimate(&sig, 2, NormKind::L2),
            Err(Error::ZeroLevel { level: 2 })
        ));
    }

    #[test]
    fn corner_gap_is_bounded_by_the_binomial_bound() {
        // theta = 1/2 sits inside the first piece, which spans [0, 2/3] of
        // the clock.
        let p = corner_path();
        for n in [2usize, 4, 6] {
            let gap = insertion_gap(&p, 0.5, n, NormKind::L1).unwrap();
            let bound = binomial_bound(0.0, 2.0 / 3.0, n, insertion_position(0.5, n)).unwrap();
            assert!(
                gap <= bound + 1e-12,
                "level {n}: gap {gap} exceeds bound {bound}"
            );
        }
    }

    #[test]
    fn developments_can_be_queried_only_up_to_depth() {
        let dev = graded_development(&corner_path(), 3).unwrap();
        assert!(dev.matrix(4).is_err());
        assert!(dev.witness(4).is_err());
    }
}
