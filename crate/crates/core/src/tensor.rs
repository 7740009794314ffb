//! Dense truncated tensor algebra over `R^d`.
//!
//! A level-`n` block stores the `d^n` coefficients of an order-`n` tensor,
//! indexed by words over the alphabet `{1, ..., d}`. The word
//! `(i_1, ..., i_n)` sits at flat index `sum_k (i_k - 1) * d^(n-k)`, most
//! significant letter first, so concatenating words multiplies indices the
//! same way digits concatenate in base `d`. A truncated series holds one
//! block per level `0..=N`.

use crate::error::{Error, Result};

/// Largest number of coefficients a single block may hold (1 GiB of `f64`).
const MAX_BLOCK_LEN: usize = 1 << 27;

/// Norms on level blocks.
///
/// All three are invariant under reindexing the word positions and scale
/// multiplicatively under [`tensor_product`], which is what the insertion
/// machinery relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Sum of absolute coefficients.
    L1,
    /// Euclidean (Hilbert-Schmidt) norm of the coefficients.
    L2,
    /// Largest absolute coefficient.
    Linf,
}

/// Number of words of length `level` over `dim` letters, i.e. `dim^level`.
pub(crate) fn block_len(dim: usize, level: usize) -> Result<usize> {
    let level_u32 =
        u32::try_from(level).map_err(|_| Error::BlockTooLarge { dim, level })?;
    match dim.checked_pow(level_u32) {
        Some(len) if len <= MAX_BLOCK_LEN => Ok(len),
        _ => Err(Error::BlockTooLarge { dim, level }),
    }
}

/// One homogeneous level of a tensor series: `dim^level` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorBlock {
    dim: usize,
    level: usize,
    coeffs: Vec<f64>,
}

impl TensorBlock {
    /// Zero block of the given shape.
    pub fn zeros(dim: usize, level: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let len = block_len(dim, level)?;
        Ok(Self { dim, level, coeffs: vec![0.0; len] })
    }

    /// Block built from an explicit coefficient vector.
    pub fn from_coeffs(dim: usize, level: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let len = block_len(dim, level)?;
        if coeffs.len() != len {
            return Err(Error::BlockSizeMismatch { expected: len, got: coeffs.len() });
        }
        Ok(Self { dim, level, coeffs })
    }

    /// Level-0 block holding a single scalar.
    pub fn scalar(dim: usize, value: f64) -> Self {
        Self { dim, level: 0, coeffs: vec![value] }
    }

    /// Level-1 basis vector `e_letter`, letters counted from 1.
    pub fn basis(dim: usize, letter: usize) -> Result<Self> {
        if letter == 0 || letter > dim {
            return Err(Error::LetterOutOfRange { letter, dim });
        }
        let mut block = Self::zeros(dim, 1)?;
        block.coeffs[letter - 1] = 1.0;
        Ok(block)
    }

    /// Level-1 block with the given coordinates.
    pub fn vector(coords: &[f64]) -> Result<Self> {
        Self::from_coeffs(coords.len(), 1, coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Flat index of a word given by its 1-based letters.
    pub fn word_index(&self, word: &[usize]) -> Result<usize> {
        if word.len() != self.level {
            return Err(Error::LevelOutOfRange { level: word.len(), depth: self.level });
        }
        let mut idx = 0usize;
        for &letter in word {
            if letter == 0 || letter > self.dim {
                return Err(Error::LetterOutOfRange { letter, dim: self.dim });
            }
            idx = idx * self.dim + (letter - 1);
        }
        Ok(idx)
    }

    /// Coefficient of the word with the given 1-based letters.
    pub fn get(&self, word: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.word_index(word)?])
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// Returns a copy scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// Coefficient-wise difference, checked for matching shape.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { dim: self.dim, level: self.level, coeffs })
    }

    /// Adds `factor * other` in place, checked for matching shape.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.level != other.level {
            return Err(Error::LevelOutOfRange { level: other.level, depth: self.level });
        }
        Ok(())
    }

    /// Norm of the coefficient vector.
    ///
    /// Accumulation runs over the coefficients in sorted order, so the result
    /// is a function of the coefficient multiset alone: reindexing a block
    /// (axis permutation, word reversal) leaves every norm bit-identical.
    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Linf => self.coeffs.iter().fold(0.0, |m, c| f64::max(m, c.abs())),
            NormKind::L1 => sorted_sum(self.coeffs.iter().map(|c| c.abs())),
            NormKind::L2 => sorted_sum(self.coeffs.iter().map(|c| c * c)).sqrt(),
        }
    }

    /// Euclidean inner product with a block of the same shape.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }
}

fn sorted_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

/// Kronecker product of two blocks over the same alphabet: the coefficient
/// of the concatenated word `wv` is `a[w] * b[v]`.
pub fn tensor_product(a: &TensorBlock, b: &TensorBlock) -> Result<TensorBlock> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let mut out = TensorBlock::zeros(a.dim, a.level + b.level)?;
    accumulate_product(&mut out, a, b, 1.0);
    Ok(out)
}

/// `out += factor * (a tensor b)`, assuming `out` already has the product
/// shape. Shared by [`tensor_product`] and the Chen concatenation loop.
pub(crate) fn accumulate_product(out: &mut TensorBlock, a: &TensorBlock, b: &TensorBlock, factor: f64) {
    debug_assert_eq!(out.dim, a.dim);
    debug_assert_eq!(out.level, a.level + b.level);
    let nb = b.coeffs.len();
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let row = &mut out.coeffs[i * nb..(i + 1) * nb];
        let fa = factor * ai;
        for (o, &bj) in row.iter_mut().zip(&b.coeffs) {
            *o += fa * bj;
        }
    }
}

/// Norm of a single block; thin wrapper kept as a free function because the
/// insertion and bounds code reads better with it.
pub fn level_norm(block: &TensorBlock, kind: NormKind) -> f64 {
    block.norm(kind)
}

/// Levels `0..=depth` of a tensor series, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTensorSeries {
    dim: usize,
    depth: usize,
    levels: Vec<TensorBlock>,
}

impl TruncatedTensorSeries {
    /// The series with level-0 scalar 1 and every other level zero; the
    /// identity for Chen concatenation.
    pub fn identity(dim: usize, depth: usize) -> Result<Self> {
        let mut s = Self::zeros(dim, depth)?;
        s.levels[0].coeffs[0] = 1.0;
        Ok(s)
    }

    /// All-zero series.
    pub fn zeros(dim: usize, depth: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let levels = (0..=depth)
            .map(|n| TensorBlock::zeros(dim, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, depth, levels })
    }

    /// Builds a series from blocks for levels `0, 1, ..., N` in order.
    pub fn from_levels(levels: Vec<TensorBlock>) -> Result<Self> {
        let first = levels.first().ok_or(Error::DegeneratePath)?;
        let dim = first.dim;
        for (n, block) in levels.iter().enumerate() {
            if block.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: block.dim });
            }
            if block.level != n {
                return Err(Error::LevelOutOfRange { level: block.level, depth: n });
            }
        }
        let depth = levels.len() - 1;
        Ok(Self { dim, depth, levels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Borrow the level-`n` block. Panics if `n > depth`; use
    /// [`TruncatedTensorSeries::try_level`] for user-supplied levels.
    pub fn level(&self, n: usize) -> &TensorBlock {
        &self.levels[n]
    }

    pub fn try_level(&self, n: usize) -> Result<&TensorBlock> {
        self.levels
            .get(n)
            .ok_or(Error::LevelOutOfRange { level: n, depth: self.depth })
    }

    pub fn level_mut(&mut self, n: usize) -> &mut TensorBlock {
        &mut self.levels[n]
    }

    /// True when the level-0 scalar is exactly 1, as it is for every
    /// signature and for products and inverses of signatures.
    pub fn is_group_like(&self) -> bool {
        self.levels[0].coeffs[0] == 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(dim: usize, level: usize, coeffs: &[f64]) -> TensorBlock {
        TensorBlock::from_coeffs(dim, level, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn word_index_is_base_d_most_significant_first() {
        let b = TensorBlock::zeros(3, 3).unwrap();
        assert_eq!(b.word_index(&[1, 1, 1]).unwrap(), 0);
        assert_eq!(b.word_index(&[1, 1, 2]).unwrap(), 1);
        assert_eq!(b.word_index(&[1, 2, 1]).unwrap(), 3);
        assert_eq!(b.word_index(&[3, 3, 3]).unwrap(), 26);
        assert!(b.word_index(&[0, 1, 1]).is_err());
        assert!(b.word_index(&[1, 1]).is_err());
    }

    #[test]
    fn product_of_basis_vectors_lands_on_the_concatenated_word() {
        let e1 = TensorBlock::basis(2, 1).unwrap();
        let e2 = TensorBlock::basis(2, 2).unwrap();
        let p = tensor_product(&e1, &e2).unwrap();
        assert_eq!(p.level(), 2);
        let mut expected = vec![0.0; 4];
        expected[p.word_index(&[1, 2]).unwrap()] = 1.0;
        assert_eq!(p.coeffs(), expected.as_slice());
    }

    #[test]
    fn product_against_scalar_one_is_the_identity() {
        let one = TensorBlock::scalar(2, 1.0);
        let v = block(2, 1, &[3.0, -4.0]);
        assert_eq!(tensor_product(&one, &v).unwrap().coeffs(), v.coeffs());
        assert_eq!(tensor_product(&v, &one).unwrap().coeffs(), v.coeffs());
    }

    #[test]
    fn product_of_two_vectors_matches_the_outer_product() {
        let a = block(2, 1, &[1.0, 2.0]);
        let b = block(2, 1, &[1.0, 2.0]);
        let p = tensor_product(&a, &b).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 2.0, 2.0, 4.0]);
    }

    #[test]
    fn product_rejects_mismatched_alphabets() {
        let a = TensorBlock::basis(2, 1).unwrap();
        let b = TensorBlock::basis(3, 1).unwrap();
        assert!(matches!(
            tensor_product(&a, &b),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn norms_of_a_small_block() {
        let b = block(2, 1, &[3.0, -4.0]);
        assert_eq!(b.norm(NormKind::L1), 7.0);
        assert_eq!(b.norm(NormKind::L2), 5.0);
        assert_eq!(b.norm(NormKind::Linf), 4.0);
    }

    #[test]
    fn norm_of_the_zero_block_is_zero() {
        let b = TensorBlock::zeros(3, 2).unwrap();
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            assert_eq!(b.norm(kind), 0.0);
        }
    }

    #[test]
    fn norms_are_exactly_invariant_under_axis_permutation() {
        // Transpose a level-2 block; the coefficient multiset is unchanged,
        // and sorted accumulation makes the norms bit-identical.
        let d = 3;
        let coeffs: Vec<f64> = (0..9).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let b = block(d, 2, &coeffs);
        let mut transposed = vec![0.0; 9];
        for i in 0..d {
            for j in 0..d {
                transposed[j * d + i] = coeffs[i * d + j];
            }
        }
        let bt = block(d, 2, &transposed);
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            assert_eq!(b.norm(kind), bt.norm(kind));
        }
    }

    #[test]
    fn series_identity_is_group_like() {
        let s = TruncatedTensorSeries::identity(2, 3).unwrap();
        assert!(s.is_group_like());
        assert_eq!(s.level(0).coeffs(), &[1.0]);
        assert_eq!(s.level(3).coeffs(), &[0.0; 8]);
        assert!(s.try_level(4).is_err());
    }

    #[test]
    fn oversized_blocks_are_rejected_not_allocated() {
        assert!(matches!(
            TensorBlock::zeros(10, 30),
            Err(Error::BlockTooLarge { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn coeff() -> impl Strategy<Value = f64> {
            // Modest magnitudes keep products well inside f64 range.
            (-8.0..8.0f64).prop_map(|x| (x * 64.0).round() / 64.0)
        }

        fn block_strategy(dim: usize, level: usize) -> impl Strategy<Value = TensorBlock> {
            let len = dim.pow(level as u32);
            proptest::collection::vec(coeff(), len)
                .prop_map(move |c| TensorBlock::from_coeffs(dim, level, c).unwrap())
        }

        proptest! {
            #[test]
            fn norm_is_multiplicative_under_tensor_product(
                a in block_strategy(2, 2),
                b in block_strategy(2, 3),
            ) {
                let p = tensor_product(&a, &b).unwrap();
                for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
                    let lhs = p.norm(kind);
                    let rhs = a.norm(kind) * b.norm(kind);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
                }
            }

            #[test]
            fn product_is_bilinear(
                a in block_strategy(2, 1),
                b in block_strategy(2, 1),
                c in block_strategy(2, 2),
                alpha in -4.0..4.0f64,
            ) {
                // (a + alpha b) (x) c == a (x) c + alpha (b (x) c)
                let mut lhs_in = a.clone();
                lhs_in.add_scaled(&b, alpha).unwrap();
                let lhs = tensor_product(&lhs_in, &c).unwrap();
                let mut rhs = tensor_product(&a, &c).unwrap();
                rhs.add_scaled(&tensor_product(&b, &c).unwrap(), alpha).unwrap();
                for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                    prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
                }
            }

            #[test]
            fn product_is_associative(
                a in block_strategy(2, 1),
                b in block_strategy(2, 1),
                c in block_strategy(2, 1),
            ) {
                let lhs = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
                let rhs = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
                for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                    prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
                }
            }

            #[test]
            fn norms_survive_word_reversal_exactly(b in block_strategy(2, 3)) {
                // Reversing every word permutes the coefficients.
                let d = 2usize;
                let n = 3u32;
                let len = d.pow(n);
                let mut reversed = vec![0.0; len];
                for idx in 0..len {
                    let mut rest = idx;
                    let mut rev = 0usize;
                    for _ in 0..n {
                        rev = rev * d + rest % d;
                        rest /= d;
                    }
                    reversed[rev] = b.coeffs()[idx];
                }
                let br = TensorBlock::from_coeffs(d, n as usize, reversed).unwrap();
                for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
                    prop_assert_eq!(b.norm(kind), br.norm(kind));
                }
            }
        }
    }
}
