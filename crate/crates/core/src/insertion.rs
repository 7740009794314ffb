//! Recovering directions of travel from consecutive signature levels.
//!
//! Fix a normalised level-`n` block `sbar` and a letter position `p`. The
//! insertion map sends a vector `x` to the level-`(n+1)` block whose
//! coefficient at a word `w` is `sbar[w with letter p removed] * x[w_p]`.
//! It is linear in `x` and scales every norm by `|sbar|`; in the Euclidean
//! case its matrix `A` satisfies `A^T A = |sbar|_2^2 * I`, so all its
//! singular values coincide. That structure makes the constrained least
//! squares problem `min_{|x|=1} |A x - b|` solvable in closed form: the
//! minimiser is the normalised contraction `A^T b`.
//!
//! For a path that travels at constant speed in direction `f(theta)` around
//! clock time `theta`, inserting `f(theta)` at position
//! `floor(theta * (n + 2))` approximately reproduces the next normalised
//! level, so the minimiser recovers `f(theta)` from the signature alone.

use crate::error::{Error, Result};
use crate::path::UnitVector;
use crate::tensor::{tensor_product, NormKind, TensorBlock};
use nalgebra::{DMatrix, DVector};

/// Below this Euclidean norm a level block counts as zero and insertion
/// problems on it are refused.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// The minimiser is reported as ambiguous when the contraction norm falls
/// under this fraction of the target norm.
pub const AMBIGUOUS_TOL: f64 = 1e-12;

/// Largest entry count the explicit matrix form may materialise.
pub const MATRIX_ENTRY_LIMIT: u128 = 1 << 24;

/// Singular values below this fraction of the largest one are treated as
/// zero when ranking and solving the two-piece system.
const RANK_TOL: f64 = 1e-10;

/// Letter position used when inverting at clock time `theta` on level `n`:
/// `floor(theta * (n + 2))`, clamped into the valid range `1..=n+1`.
pub fn insertion_position(theta: f64, n: usize) -> usize {
    let raw = (theta * (n + 2) as f64).floor() as i64;
    raw.clamp(1, n as i64 + 1) as usize
}

/// A fixed level block and letter position, ready to insert vectors into.
#[derive(Clone, Debug)]
pub struct InsertionContext {
    sbar: TensorBlock,
    position: usize,
    lambda: f64,
    /// Stride of the letters to the right of the insertion point:
    /// `d^(n + 1 - p)`.
    low: usize,
}

impl InsertionContext {
    /// Wraps a level-`n` block (`n >= 1`) and a position in `1..=n+1`.
    pub fn new(sbar: TensorBlock, position: usize) -> Result<Self> {
        let n = sbar.level();
        if n < 1 {
            return Err(Error::LevelOutOfRange { level: n, depth: 1 });
        }
        if position == 0 || position > n + 1 {
            return Err(Error::PositionOutOfRange { position, max: n + 1 });
        }
        let low = sbar.dim().pow((n + 1 - position) as u32);
        let lambda = sbar.norm(NormKind::L2);
        Ok(Self { sbar, position, lambda, low })
    }

    pub fn dim(&self) -> usize {
        self.sbar.dim()
    }

    /// Level of the wrapped block.
    pub fn level(&self) -> usize {
        self.sbar.level()
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn block(&self) -> &TensorBlock {
        &self.sbar
    }

    /// Euclidean norm of the wrapped block; every singular value of the
    /// insertion matrix equals it.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Inserts `x` at the stored position: the output coefficient at word
    /// `w` is `sbar[w minus letter p] * x[w_p]`.
    pub fn insert(&self, x: &[f64]) -> Result<TensorBlock> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        let mut out = TensorBlock::zeros(d, self.level() + 1)?;
        let low = self.low;
        let coeffs = out.coeffs_mut();
        for (r, &s) in self.sbar.coeffs().iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let base = (r / low) * (low * d) + r % low;
            for (j, &xj) in x.iter().enumerate() {
                coeffs[base + j * low] = s * xj;
            }
        }
        Ok(out)
    }

    /// Adjoint of [`InsertionContext::insert`]: sums `sbar[w minus p] *
    /// target[w]` over all words whose letter at `p` is `j`, for each `j`.
    pub fn contract_at(&self, target: &TensorBlock) -> Result<Vec<f64>> {
        self.check_target(target)?;
        let d = self.dim();
        let low = self.low;
        let mut c = vec![0.0; d];
        let t = target.coeffs();
        for (r, &s) in self.sbar.coeffs().iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let base = (r / low) * (low * d) + r % low;
            for (j, cj) in c.iter_mut().enumerate() {
                *cj += s * t[base + j * low];
            }
        }
        Ok(c)
    }

    /// Unit vector minimising `|insert(x) - target|_2`, found through the
    /// normalised contraction.
    ///
    /// Fails with [`Error::DegenerateSignature`] when the wrapped block is
    /// numerically zero and with [`Error::AmbiguousMinimum`] when the
    /// contraction vanishes, because then every unit vector attains the
    /// same value and no single answer is meaningful.
    pub fn solve(&self, target: &TensorBlock) -> Result<InsertionSolution> {
        if self.lambda <= DEGENERATE_TOL {
            return Err(Error::DegenerateSignature);
        }
        let c = self.contract_at(target)?;
        let c_norm = crate::path::euclidean_norm(&c);
        if c_norm <= AMBIGUOUS_TOL * target.norm(NormKind::L2) {
            return Err(Error::AmbiguousMinimum);
        }
        let direction = UnitVector::from_unnormalised(&c)?;
        let residual = self.residual(&direction, target)?;
        Ok(InsertionSolution { direction, residual })
    }

    /// Same minimiser as [`InsertionContext::solve`], computed through an
    /// explicit singular value decomposition of the insertion matrix.
    ///
    /// Slower and memory-bound, kept as an independent cross-check of the
    /// contraction shortcut. Refuses to materialise matrices above
    /// [`MATRIX_ENTRY_LIMIT`] entries.
    pub fn solve_svd(&self, target: &TensorBlock) -> Result<InsertionSolution> {
        self.check_target(target)?;
        if self.lambda <= DEGENERATE_TOL {
            return Err(Error::DegenerateSignature);
        }
        let a = self.matrix()?;
        let b = DVector::from_column_slice(target.coeffs());
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, self.lambda * RANK_TOL)
            .expect("solve_svd: SVD factors were requested");
        // The unconstrained least squares solution points at the sphere
        // minimiser because all singular values agree; |x| * lambda^2
        // equals the contraction norm used by the shortcut's tie check.
        if x.norm() * self.lambda * self.lambda <= AMBIGUOUS_TOL * target.norm(NormKind::L2) {
            return Err(Error::AmbiguousMinimum);
        }
        let direction = UnitVector::from_unnormalised(x.as_slice())?;
        let residual = self.residual(&direction, target)?;
        Ok(InsertionSolution { direction, residual })
    }

    /// Dense matrix of the insertion map, one column per letter.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let rows = self.sbar.len() * d;
        let entries = rows as u128 * d as u128;
        if entries > MATRIX_ENTRY_LIMIT {
            return Err(Error::MatrixTooLarge { entries, limit: MATRIX_ENTRY_LIMIT });
        }
        let mut a = DMatrix::zeros(rows, d);
        let low = self.low;
        for (r, &s) in self.sbar.coeffs().iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let base = (r / low) * (low * d) + r % low;
            for j in 0..d {
                a[(base + j * low, j)] = s;
            }
        }
        Ok(a)
    }

    /// Euclidean distance between `insert(x)` and the target.
    pub fn residual(&self, x: &UnitVector, target: &TensorBlock) -> Result<f64> {
        let image = self.insert(x.coords())?;
        Ok(image.sub(target)?.norm(NormKind::L2))
    }

    fn check_target(&self, target: &TensorBlock) -> Result<()> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: target.dim() });
        }
        if target.level() != self.level() + 1 {
            return Err(Error::LevelOutOfRange {
                level: target.level(),
                depth: self.level() + 1,
            });
        }
        Ok(())
    }
}

/// Result of a constrained insertion solve.
#[derive(Clone, Debug)]
pub struct InsertionSolution {
    pub direction: UnitVector,
    /// Euclidean distance from the best insertion image to the target.
    pub residual: f64,
}

/// Both increments of a two-piece path recovered from two consecutive raw
/// signature levels.
#[derive(Clone, Debug)]
pub struct TwoPieceSolution {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Euclidean norm of `a (x) S_n + S_n (x) b - (n + 1) S_(n+1)` at the
    /// reported solution.
    pub residual: f64,
    /// Set when the system does not pin the increments down uniquely; the
    /// reported pair is then the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Solves `a (x) S_n + S_n (x) b = (n + 1) S_(n+1)` for the increments of a
/// two-piece path, in the least squares sense.
///
/// `level_n` and `level_next` are consecutive raw (unnormalised) signature
/// levels. For a genuine two-piece path the relation holds exactly and the
/// recovery is exact; when the two pieces are collinear the system drops
/// rank and the minimum-norm representative is returned with
/// `rank_deficient` set.
pub fn solve_two_piece(
    level_n: &TensorBlock,
    level_next: &TensorBlock,
) -> Result<TwoPieceSolution> {
    let d = level_n.dim();
    let n = level_n.level();
    if n < 1 {
        return Err(Error::LevelOutOfRange { level: n, depth: 1 });
    }
    if level_next.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: level_next.dim() });
    }
    if level_next.level() != n + 1 {
        return Err(Error::LevelOutOfRange { level: level_next.level(), depth: n + 1 });
    }
    let rows = level_next.len();
    let entries = rows as u128 * 2 * d as u128;
    if entries > MATRIX_ENTRY_LIMIT {
        return Err(Error::MatrixTooLarge { entries, limit: MATRIX_ENTRY_LIMIT });
    }

    let dn = level_n.len();
    let mut a_mat = DMatrix::zeros(rows, 2 * d);
    for (r, &s) in level_n.coeffs().iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        for j in 0..d {
            // Column j: prepend letter j (the first piece's increment).
            a_mat[(j * dn + r, j)] = s;
            // Column d + j: append letter j (the second piece's increment).
            a_mat[(r * d + j, d + j)] = s;
        }
    }
    let rhs = DVector::from_iterator(
        rows,
        level_next.coeffs().iter().map(|&c| (n + 1) as f64 * c),
    );

    let svd = a_mat.svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let (solution, rank_deficient) = if sigma_max == 0.0 {
        (DVector::zeros(2 * d), true)
    } else {
        let eps = sigma_max * RANK_TOL;
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let z = svd
            .solve(&rhs, eps)
            .expect("solve_two_piece: SVD factors were requested");
        (z, rank < 2 * d)
    };
    let a: Vec<f64> = solution.as_slice()[..d].to_vec();
    let b: Vec<f64> = solution.as_slice()[d..].to_vec();

    // Measure the residual through the tensor relation itself rather than
    // the matrix, so matrix assembly stays cross-checked.
    let mut image = tensor_product(&TensorBlock::vector(&a)?, level_n)?;
    image.add_scaled(&tensor_product(level_n, &TensorBlock::vector(&b)?)?, 1.0)?;
    image.add_scaled(level_next, -((n + 1) as f64))?;
    let residual = image.norm(NormKind::L2);

    Ok(TwoPieceSolution { a, b, residual, rank_deficient })
}
