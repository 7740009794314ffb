//! Turning a signature back into a polyline.
//!
//! The pipeline samples the arc-length clock at midpoints
//! `theta_i = (i + 1/2) / m`, recovers a unit direction at each sample by
//! solving the insertion problem between levels `n` and `n + 1`, optionally
//! smooths the directions, and integrates them into a polyline from the
//! origin. When the true speed of the source path is unknown the length is
//! estimated from the signature itself; the estimated directions do not
//! depend on that estimate, only the overall scale of the output does.

use crate::bounds::length_estimate;
use crate::error::{Error, Result};
use crate::insertion::{insertion_position, InsertionContext};
use crate::path::UnitVector;
use crate::signature::normalised_level;
use crate::tensor::{NormKind, TruncatedTensorSeries};

/// How to obtain the path length used for normalisation and integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LengthMode {
    /// Use a known length.
    Given(f64),
    /// Estimate the length from the configured level with [`length_estimate`].
    Estimated(NormKind),
}

/// Which part of the clock the output polyline spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalMode {
    /// `[1/(n+2), (n+1)/(n+2)]`: drops the clock margins where the
    /// insertion position saturates and estimates degrade.
    Inner,
    /// The whole clock `[0, 1]`.
    Full,
}

/// Optional postprocessing of the estimated directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothing {
    None,
    /// Centred moving average over an odd window, renormalised to unit
    /// length afterwards. The window shrinks near the ends.
    MovingAverage(usize),
}

/// Parameters of a reconstruction run.
#[derive(Clone, Copy, Debug)]
pub struct ReconstructionConfig {
    /// Signature level the directions are solved on; the signature must
    /// also carry level `level + 1`.
    pub level: usize,
    /// Number of clock samples.
    pub samples: usize,
    pub length_mode: LengthMode,
    pub interval: IntervalMode,
    pub smoothing: Smoothing,
}

impl ReconstructionConfig {
    /// Defaults: estimated length via the Euclidean norm, inner interval,
    /// no smoothing.
    pub fn new(level: usize, samples: usize) -> Self {
        Self {
            level,
            samples,
            length_mode: LengthMode::Estimated(NormKind::L2),
            interval: IntervalMode::Inner,
            smoothing: Smoothing::None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.level < 1 {
            return Err(Error::InvalidConfig(
                "reconstruction level must be at least 1".into(),
            ));
        }
        if self.samples < 2 {
            return Err(Error::InvalidConfig(
                "reconstruction needs at least two samples".into(),
            ));
        }
        if let LengthMode::Given(l) = self.length_mode {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::NonPositiveLength(l));
            }
        }
        if let Smoothing::MovingAverage(w) = self.smoothing {
            if w == 0 || w % 2 == 0 {
                return Err(Error::InvalidConfig(format!(
                    "smoothing window must be odd, got {w}"
                )));
            }
            if w > self.samples {
                return Err(Error::InvalidConfig(format!(
                    "smoothing window {w} exceeds the {} samples",
                    self.samples
                )));
            }
        }
        Ok(())
    }

    /// Fraction of the clock the output spans.
    fn interval_span(&self) -> f64 {
        match self.interval {
            IntervalMode::Full => 1.0,
            IntervalMode::Inner => self.level as f64 / (self.level + 2) as f64,
        }
    }
}

/// Per-sample direction estimates.
#[derive(Clone, Debug)]
pub struct DerivativeEstimates {
    /// Midpoint clock times `(i + 1/2) / m`.
    pub thetas: Vec<f64>,
    pub directions: Vec<UnitVector>,
    /// Euclidean distance between the best insertion image and the target
    /// level, per sample.
    pub residuals: Vec<f64>,
    /// Samples where the minimiser was not unique; their direction is
    /// carried over from the nearest resolved sample rather than solved.
    pub ambiguous: Vec<bool>,
    /// Length used for normalisation (given or estimated).
    pub length: f64,
}

/// Solves the insertion problem at every clock sample.
pub fn estimate_derivatives(
    sig: &TruncatedTensorSeries,
    config: &ReconstructionConfig,
) -> Result<DerivativeEstimates> {
    config.validate()?;
    let n = config.level;
    if sig.depth() < n + 1 {
        return Err(Error::LevelOutOfRange { level: n + 1, depth: sig.depth() });
    }
    let length = match config.length_mode {
        LengthMode::Given(l) => l,
        LengthMode::Estimated(kind) => length_estimate(sig, n, kind)?,
    };
    let sbar = normalised_level(sig, n, length)?;
    let target = normalised_level(sig, n + 1, length)?;

    let m = config.samples;
    let mut contexts: Vec<Option<InsertionContext>> = vec![None; n + 2];
    let mut thetas = Vec::with_capacity(m);
    let mut solved: Vec<Option<UnitVector>> = Vec::with_capacity(m);
    let mut residuals = vec![0.0; m];
    let mut ambiguous = vec![false; m];

    for i in 0..m {
        let theta = (i as f64 + 0.5) / m as f64;
        thetas.push(theta);
        let position = insertion_position(theta, n);
        if contexts[position].is_none() {
            contexts[position] = Some(InsertionContext::new(sbar.clone(), position)?);
        }
        let ctx = contexts[position].as_ref().unwrap();
        match ctx.solve(&target) {
            Ok(sol) => {
                residuals[i] = sol.residual;
                solved.push(Some(sol.direction));
            }
            Err(Error::AmbiguousMinimum) => {
                ambiguous[i] = true;
                solved.push(None);
            }
            Err(e) => return Err(e),
        }
    }

    // Ambiguous samples borrow the nearest resolved direction, preferring
    // the one before them; leading ones take the first resolved direction.
    // Their residual is still measured honestly below.
    let first_resolved = solved
        .iter()
        .flatten()
        .next()
        .cloned()
        .ok_or(Error::AmbiguousMinimum)?;
    let mut directions: Vec<UnitVector> = Vec::with_capacity(m);
    let mut carry = first_resolved;
    for slot in &solved {
        if let Some(d) = slot {
            carry = d.clone();
        }
        directions.push(carry.clone());
    }
    for i in 0..m {
        if ambiguous[i] {
            let position = insertion_position(thetas[i], n);
            let ctx = contexts[position].as_ref().unwrap();
            residuals[i] = ctx.residual(&directions[i], &target)?;
        }
    }

    Ok(DerivativeEstimates { thetas, directions, residuals, ambiguous, length })
}

/// Integrates unit directions into a polyline from the origin with step
/// `interval_span * length / m`.
pub fn integrate_derivatives(
    directions: &[UnitVector],
    config: &ReconstructionConfig,
    length: f64,
) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    if directions.len() != config.samples {
        return Err(Error::InvalidConfig(format!(
            "expected {} directions, got {}",
            config.samples,
            directions.len()
        )));
    }
    if length.is_nan() || length <= 0.0 {
        return Err(Error::NonPositiveLength(length));
    }
    let dim = directions[0].dim();
    let h = config.interval_span() * length / config.samples as f64;
    let mut vertices = Vec::with_capacity(config.samples + 1);
    vertices.push(vec![0.0; dim]);
    for dir in directions {
        if dir.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: dir.dim() });
        }
        let prev = vertices.last().unwrap();
        let next: Vec<f64> = prev
            .iter()
            .zip(dir.coords())
            .map(|(v, d)| v + h * d)
            .collect();
        vertices.push(next);
    }
    Ok(vertices)
}

/// A reconstructed polyline together with the estimates it came from.
#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub thetas: Vec<f64>,
    /// Directions that were integrated (after smoothing, if any); all unit
    /// length.
    pub derivatives: Vec<UnitVector>,
    /// Per-sample solver residuals, before smoothing.
    pub residuals: Vec<f64>,
    /// Flags for samples whose minimiser was not unique.
    pub ambiguous: Vec<bool>,
    /// `samples + 1` points starting at the origin.
    pub vertices: Vec<Vec<f64>>,
    pub length_used: f64,
}

/// Full pipeline: estimate directions, smooth, integrate.
pub fn reconstruct_path(
    sig: &TruncatedTensorSeries,
    config: &ReconstructionConfig,
) -> Result<ReconstructionResult> {
    let estimates = estimate_derivatives(sig, config)?;
    let derivatives = match config.smoothing {
        Smoothing::None => estimates.directions.clone(),
        Smoothing::MovingAverage(window) => smooth_directions(&estimates.directions, window),
    };
    let vertices = integrate_derivatives(&derivatives, config, estimates.length)?;
    Ok(ReconstructionResult {
        thetas: estimates.thetas,
        derivatives,
        residuals: estimates.residuals,
        ambiguous: estimates.ambiguous,
        vertices,
        length_used: estimates.length,
    })
}

/// Centred moving average with edge shrinkage, renormalised to unit length.
/// A window whose average cancels to (numerically) zero keeps the original
/// direction instead of amplifying noise.
fn smooth_directions(directions: &[UnitVector], window: usize) -> Vec<UnitVector> {
    let half = window / 2;
    let m = directions.len();
    let dim = directions[0].dim();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(m - 1);
        let mut mean = vec![0.0; dim];
        for d in &directions[lo..=hi] {
            for (mc, dc) in mean.iter_mut().zip(d.coords()) {
                *mc += dc;
            }
        }
        let count = (hi - lo + 1) as f64;
        for mc in &mut mean {
            *mc /= count;
        }
        match UnitVector::from_unnormalised(&mean) {
            Ok(u) if crate::path::euclidean_norm(&mean) > 1e-12 => out.push(u),
            _ => out.push(directions[i].clone()),
        }
    }
    out
}
