//! Cell-centered Cartesian grids.
//!
//! Indices are zero-based throughout: node `i` of an axis sits at the center
//! of cell `i`, i.e. at `lower + (i + 1/2)·h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];
pub type Index3 = [usize; 3];

/// One axis of a (possibly restricted) cell-centered grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    /// Left edge of cell 0.
    pub lower: f64,
    pub h: f64,
    pub len: usize,
}

impl Axis {
    pub fn node(&self, i: usize) -> f64 {
        self.lower + (i as f64 + 0.5) * self.h
    }

    pub fn upper(&self) -> f64 {
        self.lower + self.len as f64 * self.h
    }

    /// Closest node to `x`, ties going to the lower index.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        if !(x >= self.lower && x <= self.upper()) {
            return None;
        }
        let t = (x - self.lower) / self.h;
        let i = (t - 1.0).ceil();
        Some(i.clamp(0.0, (self.len - 1) as f64) as usize)
    }

    /// Sub-axis made of cells `lo..hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> Axis {
        Axis {
            lower: self.lower + lo as f64 * self.h,
            h: self.h,
            len: hi - lo,
        }
    }

    /// Offset of this axis inside `parent`, if it is an aligned sub-range.
    pub fn offset_in(&self, parent: &Axis) -> Option<usize> {
        if self.h != parent.h {
            return None;
        }
        let off = ((self.lower - parent.lower) / self.h).round();
        if off < 0.0 || (parent.lower + off * self.h - self.lower).abs() > 1e-9 * self.h {
            return None;
        }
        let off = off as usize;
        (off + self.len <= parent.len).then_some(off)
    }
}

/// Uniform `n × n × n` cell-centered grid on the cube `[-b, b]³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
}

pub fn make_grid(half_width: f64, n: usize) -> Result<Grid3D> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "box half-width must be positive, got {half_width}"
        )));
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "points per axis must be even and at least 2, got {n}"
        )));
    }
    Ok(Grid3D {
        half_width,
        n,
        h: 2.0 * half_width / n as f64,
    })
}

impl Grid3D {
    pub fn axis(&self) -> Axis {
        Axis {
            lower: -self.half_width,
            h: self.h,
            len: self.n,
        }
    }

    pub fn axes(&self) -> [Axis; 3] {
        [self.axis(); 3]
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let ax = self.axis();
        (0..self.n).map(|i| ax.node(i)).collect()
    }

    pub fn node(&self, idx: Index3) -> Point3 {
        let ax = self.axis();
        [ax.node(idx[0]), ax.node(idx[1]), ax.node(idx[2])]
    }

    /// Node index used as the kernel center, `n/2` in one-based counting.
    pub fn center_index(&self) -> usize {
        self.n / 2 - 1
    }

    pub fn contains(&self, x: &Point3) -> bool {
        x.iter()
            .all(|c| *c >= -self.half_width && *c <= self.half_width)
    }

    pub fn nearest_grid_index(&self, x: &Point3) -> Result<Index3> {
        nearest_on_axes(&self.axes(), x)
    }
}

pub fn nearest_grid_index(x: &Point3, grid: &Grid3D) -> Result<Index3> {
    grid.nearest_grid_index(x)
}

pub(crate) fn nearest_on_axes(axes: &[Axis; 3], x: &Point3) -> Result<Index3> {
    let mut idx = [0; 3];
    for d in 0..3 {
        idx[d] = axes[d].nearest(x[d]).ok_or_else(|| {
            Error::OutOfDomain(format!(
                "point ({}, {}, {}) lies outside [{}, {}] on axis {d}",
                x[0],
                x[1],
                x[2],
                axes[d].lower,
                axes[d].upper()
            ))
        })?;
    }
    Ok(idx)
}

/// Box of grid cells `lower[d]..upper[d]` (upper exclusive) on a parent grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: Index3,
    pub upper: Index3,
}

impl BoundingBox {
    pub fn new(lower: Index3, upper: Index3) -> Result<Self> {
        if (0..3).any(|d| upper[d] <= lower[d]) {
            return Err(Error::InvalidArgument(format!(
                "bounding box {lower:?}..{upper:?} is empty"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Smallest box of `grid` cells covering the physical box `lo..hi`.
    pub fn covering(grid: &Grid3D, lo: Point3, hi: Point3) -> Result<Self> {
        let a = grid.nearest_grid_index(&lo)?;
        let b = grid.nearest_grid_index(&hi)?;
        Self::new(a, [b[0] + 1, b[1] + 1, b[2] + 1])
    }

    pub fn shape(&self) -> Index3 {
        [
            self.upper[0] - self.lower[0],
            self.upper[1] - self.lower[1],
            self.upper[2] - self.lower[2],
        ]
    }
}

pub(crate) fn dist2(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub(crate) fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: &Point3, b: &Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: &Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}
