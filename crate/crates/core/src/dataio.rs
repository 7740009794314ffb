//! Parsing point lists and pen trajectories, and signature files on disk.
//!
//! Two input formats: a plain CSV of points (one `d`-dimensional point per
//! line) and the pen-digit trajectory format of 16 integer coordinates plus
//! a class label per line. One output format: a line-oriented signature
//! file that round-trips every finite `f64` exactly, because coefficients
//! are written with shortest round-trip formatting.

use crate::error::{Error, Result};
use crate::path::PiecewiseLinearPath;
use crate::tensor::{TensorBlock, TruncatedTensorSeries};
use std::fmt::Write as _;

/// Strips a `#` comment and surrounding whitespace; `None` for blank lines.
fn significant(line: &str) -> Option<&str> {
    let code = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let code = code.trim();
    (!code.is_empty()).then_some(code)
}

/// Parses one point per line, `d` comma-separated decimals each, into a
/// path. `#` starts a comment; blank lines are skipped. Every row must have
/// the same width, numbers must be finite, and at least two distinct points
/// must remain.
pub fn parse_points_csv(text: &str) -> Result<PiecewiseLinearPath> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let Some(code) = significant(raw) else { continue };
        let fields: Vec<&str> = code.split(',').collect();
        if let Some(expected) = width {
            if fields.len() != expected {
                return Err(Error::WrongFieldCount { line, expected, got: fields.len() });
            }
        } else {
            width = Some(fields.len());
        }
        let mut row = Vec::with_capacity(fields.len());
        for (column, field) in fields.iter().enumerate() {
            let text = field.trim();
            let value: f64 = text.parse().map_err(|_| Error::BadNumber {
                line,
                column: column + 1,
                text: text.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::BadNumber {
                    line,
                    column: column + 1,
                    text: text.to_string(),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    PiecewiseLinearPath::new(rows)
}

/// One pen trajectory: eight planar points and an optional class label.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub points: Vec<[f64; 2]>,
    pub label: Option<u8>,
}

impl TrajectorySample {
    /// The trajectory as a path, ready for signatures.
    pub fn to_path(&self) -> Result<PiecewiseLinearPath> {
        PiecewiseLinearPath::new(self.points.iter().map(|p| p.to_vec()).collect())
    }
}

/// Parses pen-digit lines: 17 comma-separated integers each, read as eight
/// `(x, y)` points followed by a digit label. Coordinates are kept raw.
pub fn parse_pendigits(text: &str) -> Result<Vec<TrajectorySample>> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let Some(code) = significant(raw) else { continue };
        let fields: Vec<&str> = code.split(',').collect();
        if fields.len() != 17 {
            return Err(Error::WrongFieldCount { line, expected: 17, got: fields.len() });
        }
        let mut values = Vec::with_capacity(17);
        for (column, field) in fields.iter().enumerate() {
            let text = field.trim();
            let value: i64 = text.parse().map_err(|_| Error::BadNumber {
                line,
                column: column + 1,
                text: text.to_string(),
            })?;
            values.push(value);
        }
        let label = u8::try_from(values[16]).map_err(|_| Error::BadNumber {
            line,
            column: 17,
            text: fields[16].trim().to_string(),
        })?;
        let points = (0..8)
            .map(|i| [values[2 * i] as f64, values[2 * i + 1] as f64])
            .collect();
        samples.push(TrajectorySample { points, label: Some(label) });
    }
    Ok(samples)
}

/// Translates the bounding box corner to the origin and scales both axes
/// jointly so the larger extent becomes one. Aspect ratio is preserved and
/// the operation is idempotent.
pub fn normalize_unit_box(sample: &TrajectorySample) -> Result<TrajectorySample> {
    let first = sample.points.first().ok_or(Error::AllPointsEqual)?;
    let (mut min_x, mut min_y) = (first[0], first[1]);
    let (mut max_x, mut max_y) = (first[0], first[1]);
    for p in &sample.points {
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    let extent = (max_x - min_x).max(max_y - min_y);
    if extent == 0.0 {
        return Err(Error::AllPointsEqual);
    }
    let points = sample
        .points
        .iter()
        .map(|p| [(p[0] - min_x) / extent, (p[1] - min_y) / extent])
        .collect();
    Ok(TrajectorySample { points, label: sample.label })
}

/// Resamples a path at `k >= 2` equally spaced arc-length fractions.
/// The first and last vertices are preserved exactly.
pub fn resample_unit_speed(path: &PiecewiseLinearPath, k: usize) -> Result<PiecewiseLinearPath> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "resampling needs at least two vertices, got {k}"
        )));
    }
    let mut vertices = Vec::with_capacity(k);
    vertices.push(path.vertices().first().unwrap().clone());
    for j in 1..k - 1 {
        let theta = j as f64 / (k - 1) as f64;
        vertices.push(path.point_at(theta)?);
    }
    vertices.push(path.vertices().last().unwrap().clone());
    PiecewiseLinearPath::new(vertices)
}

const SIGNATURE_VERSION: &str = "1";

/// Renders a series in the signature file format:
///
/// ```text
/// version=1
/// dimension=2
/// depth=2
/// level 0: 1.0
/// level 1: 4.0 0.0
/// level 2: 8.0 -2.0 2.0 0.0
/// ```
///
/// Coefficients use shortest round-trip decimal form, so reading the text
/// back reproduces every bit. Non-finite coefficients are refused.
pub fn write_signature(sig: &TruncatedTensorSeries) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "version={SIGNATURE_VERSION}");
    let _ = writeln!(out, "dimension={}", sig.dim());
    let _ = writeln!(out, "depth={}", sig.depth());
    for n in 0..=sig.depth() {
        let _ = write!(out, "level {n}:");
        for &c in sig.level(n).coeffs() {
            if !c.is_finite() {
                return Err(Error::NonFinite { level: n });
            }
            let _ = write!(out, " {c:?}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses the format written by [`write_signature`]. Rejects unknown
/// versions, level lines whose coefficient count does not match the header,
/// and non-finite coefficients.
pub fn read_signature(text: &str) -> Result<TruncatedTensorSeries> {
    let mut lines = text.lines().enumerate().filter_map(|(idx, raw)| {
        significant(raw).map(|code| (idx + 1, code))
    });

    let mut header = |key: &str| -> Result<String> {
        let (_, code) = lines
            .next()
            .ok_or_else(|| Error::MalformedSignature(format!("missing {key} line")))?;
        let (found, value) = code
            .split_once('=')
            .ok_or_else(|| Error::MalformedSignature(format!("expected {key}=...")))?;
        if found.trim() != key {
            return Err(Error::MalformedSignature(format!(
                "expected {key}=..., found {found}"
            )));
        }
        Ok(value.trim().to_string())
    };

    let version = header("version")?;
    if version != SIGNATURE_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim: usize = header("dimension")?
        .parse()
        .map_err(|_| Error::MalformedSignature("dimension is not a number".into()))?;
    let depth: usize = header("depth")?
        .parse()
        .map_err(|_| Error::MalformedSignature("depth is not a number".into()))?;
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }

    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let (line, code) = lines
            .next()
            .ok_or_else(|| Error::MalformedSignature(format!("missing level {n}")))?;
        let (head, rest) = code
            .split_once(':')
            .ok_or_else(|| Error::MalformedSignature(format!("line {line}: expected level {n}:")))?;
        let labelled: usize = head
            .trim()
            .strip_prefix("level")
            .map(str::trim)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::MalformedSignature(format!("line {line}: expected level {n}:")))?;
        if labelled != n {
            return Err(Error::MalformedSignature(format!(
                "line {line}: expected level {n}, found level {labelled}"
            )));
        }
        let mut coeffs = Vec::new();
        for field in rest.split_whitespace() {
            let value: f64 = field.parse().map_err(|_| Error::BadNumber {
                line,
                column: coeffs.len() + 1,
                text: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite { level: n });
            }
            coeffs.push(value);
        }
        let block = TensorBlock::from_coeffs(dim, n, coeffs).map_err(|e| match e {
            Error::BlockSizeMismatch { expected, got } => {
                Error::LevelSizeMismatch { level: n, expected, got }
            }
            other => other,
        })?;
        levels.push(block);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::MalformedSignature(format!(
            "line {line}: unexpected content after the last level"
        )));
    }
    TruncatedTensorSeries::from_levels(levels)
}
