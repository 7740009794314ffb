//! Cross-checks against independently computed answers.
//!
//! Each test here recomputes a library result by an unrelated route:
//! rational arithmetic over closed-form coefficients of a hand-picked
//! path, or exhaustive search over a dense grid. None of them reuse the
//! floating point kernels under test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use pathsig::bounds::{binomial_bound, insertion_gap};
use pathsig::insertion::{insertion_position, InsertionContext};
use pathsig::signature::{normalised_level, path_signature};
use pathsig::tensor::NormKind;
use pathsig::PiecewiseLinearPath;
use std::collections::BTreeMap;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn big_binom(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn pow_rat(base: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

/// Mass of words with at least `from` marked letters out of `n`, each
/// marked independently with probability `q`; exact rational arithmetic.
fn exact_tail(n: usize, from: usize, q: &BigRational) -> BigRational {
    let one = BigRational::one();
    let mut acc = BigRational::zero();
    for k in from..=n {
        acc += BigRational::from(big_binom(n, k))
            * pow_rat(q, k)
            * pow_rat(&(one.clone() - q), n - k);
    }
    acc
}

fn exact_binomial_bound(
    s: &BigRational,
    t: &BigRational,
    n: usize,
    p: usize,
) -> BigRational {
    let one = BigRational::one();
    let u = t - s;
    let mut total = BigRational::zero();
    for k in 0..=n + 1 {
        let weight = BigRational::from(big_binom(n + 1, k))
            * pow_rat(&u, k)
            * pow_rat(&(one.clone() - u.clone()), n + 1 - k);
        let ratio = rat(k as i64, 1) / (rat(n as i64 + 1, 1) * u.clone()) - one.clone();
        total += weight * ratio.abs();
    }
    total += exact_tail(n, p, s);
    total += exact_tail(n, n + 2 - p, &(one.clone() - t));
    total += exact_tail(n + 1, p, s);
    total += exact_tail(n + 1, n + 2 - p, &(one - t));
    total
}

#[test]
fn binomial_bound_matches_exact_rationals() {
    let golden = exact_binomial_bound(&rat(0, 1), &rat(2, 3), 4, 3);
    assert_eq!(golden, rat(142, 243));
    let v = binomial_bound(0.0, 2.0 / 3.0, 4, 3).unwrap();
    assert!((v - golden.to_f64().unwrap()).abs() <= 1e-12);

    let s_values = [rat(0, 1), rat(1, 10), rat(1, 4)];
    let t_values = [rat(1, 2), rat(2, 3), rat(9, 10), rat(1, 1)];
    for s in &s_values {
        for t in &t_values {
            if s >= t {
                continue;
            }
            for n in 1..=6 {
                for p in 1..=n + 1 {
                    let exact = exact_binomial_bound(s, t, n, p).to_f64().unwrap();
                    let float = binomial_bound(
                        s.to_f64().unwrap(),
                        t.to_f64().unwrap(),
                        n,
                        p,
                    )
                    .unwrap();
                    assert!(
                        (float - exact).abs() <= 5e-12,
                        "s={s} t={t} n={n} p={p}: {float} vs {exact}"
                    );
                }
            }
        }
    }
}

/// Up two thirds, then right one third; unit length overall.
fn corner_path() -> PiecewiseLinearPath {
    PiecewiseLinearPath::new(vec![
        vec![0.0, 0.0],
        vec![0.0, 2.0 / 3.0],
        vec![1.0 / 3.0, 2.0 / 3.0],
    ])
    .unwrap()
}

/// Normalised level `n` of the corner path as exact rationals, keyed by
/// letter words. Only words of the form `2^k 1^(n-k)` carry mass, with
/// coefficient `C(n, k) (2/3)^k (1/3)^(n-k)`.
fn corner_level_exact(n: usize) -> BTreeMap<Vec<u8>, BigRational> {
    let mut level = BTreeMap::new();
    for k in 0..=n {
        let mut word = vec![2u8; k];
        word.extend(std::iter::repeat_n(1u8, n - k));
        let coeff = BigRational::from(big_binom(n, k))
            * pow_rat(&rat(2, 3), k)
            * pow_rat(&rat(1, 3), n - k);
        level.insert(word, coeff);
    }
    level
}

/// The L1 insertion gap of the corner path at clock time `theta`, computed
/// entirely in rationals: insert the true letter into every word of level
/// `n` and take the coefficient-wise distance to level `n + 1`.
fn corner_gap_exact(theta: &BigRational, n: usize) -> BigRational {
    let letter: u8 = if theta < &rat(2, 3) { 2 } else { 1 };
    let scaled = theta * rat(n as i64 + 2, 1);
    let raw = scaled.floor().to_integer();
    let p = raw.clamp(BigInt::one(), BigInt::from(n + 1)).to_usize().unwrap();

    let mut inserted: BTreeMap<Vec<u8>, BigRational> = BTreeMap::new();
    for (word, coeff) in corner_level_exact(n) {
        let mut longer = word;
        longer.insert(p - 1, letter);
        *inserted.entry(longer).or_insert_with(BigRational::zero) += coeff;
    }
    let target = corner_level_exact(n + 1);

    let mut gap = BigRational::zero();
    let words: std::collections::BTreeSet<_> =
        inserted.keys().chain(target.keys()).cloned().collect();
    for word in words {
        let a = inserted.get(&word).cloned().unwrap_or_else(BigRational::zero);
        let b = target.get(&word).cloned().unwrap_or_else(BigRational::zero);
        gap += (a - b).abs();
    }
    gap
}

#[test]
fn corner_path_gaps_match_exact_rationals() {
    let path = corner_path();
    assert_eq!(corner_gap_exact(&rat(1, 2), 2), rat(14, 27));
    for (theta_exact, theta_float) in [(rat(1, 2), 0.5), (rat(4, 5), 0.8)] {
        for n in 2..=6 {
            let exact = corner_gap_exact(&theta_exact, n).to_f64().unwrap();
            let float = insertion_gap(&path, theta_float, n, NormKind::L1).unwrap();
            assert!(
                (float - exact).abs() <= 1e-12,
                "theta={theta_float} n={n}: {float} vs {exact}"
            );
        }
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}

#[test]
fn circle_grid_search_agrees_with_the_closed_form_direction() {
    let path = corner_path();
    let sig = path_signature(&path, 5).unwrap();
    let sbar4 = normalised_level(&sig, 4, path.length()).unwrap();
    let target = normalised_level(&sig, 5, path.length()).unwrap();
    let position = insertion_position(0.5, 4);
    let ctx = InsertionContext::new(sbar4, position).unwrap();
    let solution = ctx.solve(&target).unwrap();

    const GRID: usize = 1_000_000;
    let step = std::f64::consts::TAU / GRID as f64;
    let mut best_residual = f64::INFINITY;
    let mut best_angle = 0.0;
    for i in 0..GRID {
        let phi = i as f64 * step;
        let x = [phi.cos(), phi.sin()];
        let residual = ctx
            .insert(&x)
            .unwrap()
            .sub(&target)
            .unwrap()
            .norm(NormKind::L2);
        if residual < best_residual {
            best_residual = residual;
            best_angle = phi;
        }
    }

    let coords = solution.direction.coords();
    let solver_angle = coords[1].atan2(coords[0]);
    assert!(
        angle_distance(solver_angle, best_angle) <= 0.5 * step + 1e-9,
        "solver angle {solver_angle} vs grid angle {best_angle}"
    );
    assert!(solution.residual <= best_residual + 1e-12);

    // Summing level-4 times level-5 coefficients over inserted words by
    // hand gives the unnormalised optimum (1041, 4992) / 3^9.
    let hand_angle = 4992f64.atan2(1041.0);
    assert!(angle_distance(solver_angle, hand_angle) <= 1e-12);
    // The true derivative halfway along is straight up; the least squares
    // direction leans rightwards because level 4 already mixes in the
    // second piece. The lean stays well under the measured gap scale.
    assert!(angle_distance(best_angle, std::f64::consts::FRAC_PI_2) < 0.25);
}
