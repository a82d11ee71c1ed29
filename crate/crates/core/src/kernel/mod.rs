//! Reference tensor of the Newton kernel `1/‖x‖` and its range separation.

mod cache;
mod quadrature;

pub use cache::{cache_file_name, load_kernel, load_or_build_kernel, save_kernel};
pub use quadrature::{build_quadrature, build_quadrature_with, QuadratureRule, DEFAULT_CQ};

use crate::canonical::CanonicalTensor3;
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid3D};
use crate::par::Exec;

pub const DEFAULT_EPS_SPLIT: f64 = 1e-4;

/// Exact integrals `∫_{cell i} exp(−t² x²) dx` over the cells of `axis`.
pub fn project_gaussian_axis(t: f64, axis: &Axis) -> Vec<f64> {
    (0..axis.len)
        .map(|i| {
            let lo = axis.lower + i as f64 * axis.h;
            cell_integral(t, lo, lo + axis.h)
        })
        .collect()
}

pub(crate) fn cell_integral(t: f64, lo: f64, hi: f64) -> f64 {
    if t == 0.0 {
        return hi - lo;
    }
    let c = std::f64::consts::PI.sqrt() / (2.0 * t);
    if lo >= 0.0 {
        c * (libm::erfc(t * lo) - libm::erfc(t * hi))
    } else if hi <= 0.0 {
        c * (libm::erfc(-t * hi) - libm::erfc(-t * lo))
    } else {
        c * (libm::erf(t * hi) - libm::erf(t * lo))
    }
}

/// Cell averages of `exp(−t²x²)` on an axis, mirrored so that the vector is
/// exactly symmetric about the axis center.
fn averaged_column(t: f64, axis: &Axis) -> Vec<f64> {
    let n = axis.len;
    let mut col = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let lo = axis.lower + i as f64 * axis.h;
        let v = cell_integral(t, lo, lo + axis.h) / axis.h;
        col[i] = v;
        col[n - 1 - i] = v;
    }
    col
}

/// Axis of the reference tensor serving `grid`: `2n − 1` cells of width `h`
/// centered on the origin, so that node `n − 1` sits at 0 and every shift by
/// a difference of computational nodes is an integer index offset.
pub fn reference_axis(grid: &Grid3D) -> Axis {
    let n = grid.n;
    Axis {
        lower: -(n as f64 - 0.5) * grid.h,
        h: grid.h,
        len: 2 * n - 1,
    }
}

/// Canonical tensor of the cell-averaged Newton kernel on the doubled grid,
/// with a partition of its terms into short- and long-range parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceKernel {
    grid: Grid3D,
    tensor: CanonicalTensor3,
    rule: QuadratureRule,
    long: Vec<usize>,
    short: Vec<usize>,
    sigma: f64,
    eps_split: f64,
}

/// Builds the kernel serving the computational grid `grid`; the tensor
/// itself lives on `reference_axis(grid)` along every axis.
pub fn build_reference_kernel(grid: &Grid3D, k: usize, sigma: f64, eps_split: f64) -> Result<ReferenceKernel> {
    build_reference_kernel_with(grid, k, sigma, eps_split, Exec::default())
}

pub fn build_reference_kernel_with(
    grid: &Grid3D,
    k: usize,
    sigma: f64,
    eps_split: f64,
    exec: Exec,
) -> Result<ReferenceKernel> {
    if !(sigma >= grid.h) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} is below the mesh size {}",
            grid.h
        )));
    }
    if !(eps_split > 0.0 && eps_split < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_split must lie in (0, 1), got {eps_split}"
        )));
    }
    let rule = build_quadrature(k, grid.h, 2.0 * grid.half_width)?;
    let axis = reference_axis(grid);
    let cols: Vec<Vec<f64>> = exec.map(rule.len(), |j| averaged_column(rule.nodes[j], &axis));
    let tensor = CanonicalTensor3::from_columns(
        [axis; 3],
        [cols.clone(), cols.clone(), cols],
        rule.weights.clone(),
    )?;
    let (long, short) = split_indices(&rule.nodes, sigma, eps_split);
    Ok(ReferenceKernel {
        grid: *grid,
        tensor,
        rule,
        long,
        short,
        sigma,
        eps_split,
    })
}

/// Term `k` is short-range iff `sqrt(ln(1/eps))/t_k < σ`.
pub fn split_indices(nodes: &[f64], sigma: f64, eps_split: f64) -> (Vec<usize>, Vec<usize>) {
    let reach = (1.0 / eps_split).ln().sqrt();
    let (short, long): (Vec<usize>, Vec<usize>) =
        (0..nodes.len()).partition(|&k| nodes[k] > 0.0 && reach / nodes[k] < sigma);
    (long, short)
}

impl ReferenceKernel {
    pub(crate) fn from_parts(
        grid: Grid3D,
        tensor: CanonicalTensor3,
        rule: QuadratureRule,
        long: Vec<usize>,
        sigma: f64,
        eps_split: f64,
    ) -> Self {
        let short = (0..rule.len()).filter(|k| !long.contains(k)).collect();
        Self {
            grid,
            tensor,
            rule,
            long,
            short,
            sigma,
            eps_split,
        }
    }

    /// Same kernel with the `r_l` widest terms declared long-range.
    pub fn with_long_rank(&self, r_l: usize) -> Result<Self> {
        if r_l == 0 || r_l > self.rank() {
            return Err(Error::InvalidArgument(format!(
                "long rank {r_l} outside 1..={}",
                self.rank()
            )));
        }
        let mut out = self.clone();
        out.long = (0..r_l).collect();
        out.short = (r_l..self.rank()).collect();
        Ok(out)
    }

    /// Computational grid the kernel serves.
    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    pub fn tensor(&self) -> &CanonicalTensor3 {
        &self.tensor
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn rank(&self) -> usize {
        self.rule.len()
    }

    pub fn long_indices(&self) -> &[usize] {
        &self.long
    }

    pub fn short_indices(&self) -> &[usize] {
        &self.short
    }

    pub fn long_rank(&self) -> usize {
        self.long.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eps_split(&self) -> f64 {
        self.eps_split
    }

    /// `P_{R_l}` on the doubled grid.
    pub fn long_range_subtensor(&self) -> CanonicalTensor3 {
        self.tensor.select_terms(&self.long)
    }

    pub fn short_range_subtensor(&self) -> CanonicalTensor3 {
        self.tensor.select_terms(&self.short)
    }

    /// Index of the kernel center (the origin) on the reference axes.
    pub fn center_index(&self) -> usize {
        self.grid.n - 1
    }

    /// Reference-grid index that lands on target node `j` for a source
    /// snapped to node `i` of the computational grid.
    #[inline]
    pub fn shifted_index(&self, j: usize, i: usize) -> usize {
        j + self.grid.n - 1 - i
    }

    /// Value of the long-range part at the kernel center.
    pub fn long_center_value(&self) -> f64 {
        let c = self.center_index();
        let t = &self.tensor;
        self.long
            .iter()
            .map(|&k| {
                let r = t.rank();
                let f = |d: usize| t.factor(d)[c * r + k];
                t.weights()[k] * f(0) * f(1) * f(2)
            })
            .sum()
    }

    pub fn same_build(&self, other: &Self) -> bool {
        self.grid == other.grid && self.rule.nodes == other.rule.nodes && self.long == other.long
    }
}
