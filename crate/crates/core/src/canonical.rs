//! Rank-R canonical (CP) tensors on three grid axes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{nearest_on_axes, Axis, BoundingBox, Index3, Point3};

/// `Σ_k ξ_k · p_k⁽¹⁾ ⊗ p_k⁽²⁾ ⊗ p_k⁽³⁾`.
///
/// Factor matrices are stored row-major (`len × rank`) so that a point
/// evaluation touches three contiguous rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTensor3 {
    axes: [Axis; 3],
    rank: usize,
    factors: [Vec<f64>; 3],
    weights: Vec<f64>,
}

impl CanonicalTensor3 {
    pub fn zero(axes: [Axis; 3]) -> Self {
        Self {
            axes,
            rank: 0,
            factors: [Vec::new(), Vec::new(), Vec::new()],
            weights: Vec::new(),
        }
    }

    /// Builds a tensor from row-major factor matrices.
    pub fn from_rows(axes: [Axis; 3], factors: [Vec<f64>; 3], weights: Vec<f64>) -> Result<Self> {
        let rank = weights.len();
        for d in 0..3 {
            if factors[d].len() != axes[d].len * rank {
                return Err(Error::InvalidArgument(format!(
                    "factor {d} has {} entries, expected {}×{rank}",
                    factors[d].len(),
                    axes[d].len
                )));
            }
        }
        Ok(Self {
            axes,
            rank,
            factors,
            weights,
        })
    }

    /// Builds a tensor from factor columns, `columns[d][k]` being `p_k⁽ᵈ⁾`.
    pub fn from_columns(axes: [Axis; 3], columns: [Vec<Vec<f64>>; 3], weights: Vec<f64>) -> Result<Self> {
        let rank = weights.len();
        let mut factors: [Vec<f64>; 3] = Default::default();
        for d in 0..3 {
            let len = axes[d].len;
            if columns[d].len() != rank || columns[d].iter().any(|c| c.len() != len) {
                return Err(Error::InvalidArgument(format!(
                    "mode {d} needs {rank} columns of length {len}"
                )));
            }
            let mut f = vec![0.0; len * rank];
            for (k, col) in columns[d].iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    f[i * rank + k] = *v;
                }
            }
            factors[d] = f;
        }
        Self::from_rows(axes, factors, weights)
    }

    /// Builds a tensor from column-major `len × rank` matrices.
    pub(crate) fn from_matrices(axes: [Axis; 3], mats: [&DMatrix<f64>; 3], weights: Vec<f64>) -> Self {
        let rank = weights.len();
        let factors = mats.map(|m| {
            debug_assert_eq!(m.ncols(), rank);
            m.transpose().as_slice().to_vec()
        });
        Self {
            axes,
            rank,
            factors,
            weights,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn axes(&self) -> &[Axis; 3] {
        &self.axes
    }

    pub fn shape(&self) -> Index3 {
        [self.axes[0].len, self.axes[1].len, self.axes[2].len]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row-major factor matrix of mode `d`.
    pub fn factor(&self, d: usize) -> &[f64] {
        &self.factors[d]
    }

    pub fn row(&self, d: usize, i: usize) -> &[f64] {
        &self.factors[d][i * self.rank..(i + 1) * self.rank]
    }

    pub fn column(&self, d: usize, k: usize) -> Vec<f64> {
        (0..self.axes[d].len)
            .map(|i| self.factors[d][i * self.rank + k])
            .collect()
    }

    /// Column-major `len × rank` copy of the mode-`d` factor.
    pub(crate) fn mode_matrix(&self, d: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.axes[d].len, self.rank, &self.factors[d])
    }

    pub(crate) fn in_bounds(&self, idx: &Index3) -> bool {
        (0..3).all(|d| idx[d] < self.axes[d].len)
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, idx: &Index3) -> f64 {
        let r = self.rank;
        let a = &self.factors[0][idx[0] * r..idx[0] * r + r];
        let b = &self.factors[1][idx[1] * r..idx[1] * r + r];
        let c = &self.factors[2][idx[2] * r..idx[2] * r + r];
        let mut s = 0.0;
        for k in 0..r {
            s += self.weights[k] * a[k] * b[k] * c[k];
        }
        s
    }

    pub fn eval_at_index(&self, idx: Index3) -> Result<f64> {
        if !self.in_bounds(&idx) {
            return Err(Error::InvalidArgument(format!(
                "index {idx:?} outside tensor shape {:?}",
                self.shape()
            )));
        }
        Ok(self.eval_unchecked(&idx))
    }

    pub fn nearest_index(&self, x: &Point3) -> Result<Index3> {
        nearest_on_axes(&self.axes, x)
    }

    /// Value at the node nearest to `x`.
    pub fn eval_at_point(&self, x: &Point3) -> Result<f64> {
        let idx = self.nearest_index(x)?;
        Ok(self.eval_unchecked(&idx))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.axes == other.axes
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::InvalidArgument(
                "cannot add tensors defined on different grids".into(),
            ));
        }
        let rank = self.rank + other.rank;
        let factors = std::array::from_fn(|d| {
            let len = self.axes[d].len;
            let mut f = Vec::with_capacity(len * rank);
            for i in 0..len {
                f.extend_from_slice(self.row(d, i));
                f.extend_from_slice(other.row(d, i));
            }
            f
        });
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Ok(Self {
            axes: self.axes,
            rank,
            factors,
            weights,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= c);
        out
    }

    /// Sub-tensor made of the listed terms, in the given order.
    pub fn select_terms(&self, terms: &[usize]) -> Self {
        let rank = terms.len();
        let factors = std::array::from_fn(|d| {
            let mut f = Vec::with_capacity(self.axes[d].len * rank);
            for i in 0..self.axes[d].len {
                let row = self.row(d, i);
                f.extend(terms.iter().map(|&k| row[k]));
            }
            f
        });
        Self {
            axes: self.axes,
            rank,
            factors,
            weights: terms.iter().map(|&k| self.weights[k]).collect(),
        }
    }

    /// Exact restriction to a box of cells (no recompression).
    pub fn slice(&self, bx: &BoundingBox) -> Result<Self> {
        for d in 0..3 {
            if bx.upper[d] > self.axes[d].len || bx.upper[d] <= bx.lower[d] {
                return Err(Error::InvalidArgument(format!(
                    "box {:?}..{:?} does not fit shape {:?}",
                    bx.lower,
                    bx.upper,
                    self.shape()
                )));
            }
        }
        let r = self.rank;
        let axes = std::array::from_fn(|d| self.axes[d].slice(bx.lower[d], bx.upper[d]));
        let factors = std::array::from_fn(|d| self.factors[d][bx.lower[d] * r..bx.upper[d] * r].to_vec());
        Ok(Self {
            axes,
            rank: r,
            factors,
            weights: self.weights.clone(),
        })
    }

    /// Gram matrix `⟨p_k⁽ᵈ⁾, p_k'⁽ᵈ⁾⟩` of mode `d`.
    pub fn gram(&self, d: usize) -> DMatrix<f64> {
        let m = DMatrix::from_column_slice(self.rank, self.axes[d].len, &self.factors[d]);
        &m * m.transpose()
    }

    /// Frobenius norm through the Gram identity; never forms the dense array.
    pub fn frobenius_norm(&self) -> f64 {
        if self.rank == 0 {
            return 0.0;
        }
        let mut h = self.gram(0);
        h.component_mul_assign(&self.gram(1));
        h.component_mul_assign(&self.gram(2));
        let w = DVector::from_column_slice(&self.weights);
        w.dot(&(&h * &w)).max(0.0).sqrt()
    }

    /// Dense values in `i₁`-major order. Intended for small grids only.
    pub fn materialize(&self) -> Vec<f64> {
        let [n1, n2, n3] = self.shape();
        let mut out = Vec::with_capacity(n1 * n2 * n3);
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    out.push(self.eval_unchecked(&[i, j, k]));
                }
            }
        }
        out
    }

    /// Number of stored floating-point values.
    pub fn storage_len(&self) -> usize {
        self.factors.iter().map(Vec::len).sum::<usize>() + self.weights.len()
    }
}
