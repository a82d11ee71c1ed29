//! Point charges and a uniform-cell spatial index over them.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dist2, Point3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleSystem {
    centers: Vec<Point3>,
    charges: Vec<f64>,
}

impl ParticleSystem {
    pub fn new(centers: Vec<Point3>, charges: Vec<f64>) -> Result<Self> {
        if centers.len() != charges.len() {
            return Err(Error::InvalidArgument(format!(
                "{} centers but {} charges",
                centers.len(),
                charges.len()
            )));
        }
        if centers.is_empty() {
            return Err(Error::EmptyInput);
        }
        if centers.iter().flatten().chain(&charges).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate or charge".into()));
        }
        Ok(Self { centers, charges })
    }

    /// Skips validation; callers guarantee matching, finite inputs.
    pub(crate) fn from_raw(centers: Vec<Point3>, charges: Vec<f64>) -> Self {
        Self { centers, charges }
    }

    /// System with no particles, for vacuous cases.
    pub fn empty() -> Self {
        Self {
            centers: Vec::new(),
            charges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Point3] {
        &self.centers
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn total_charge(&self) -> f64 {
        self.charges.iter().sum()
    }

    pub fn with_charges(&self, charges: Vec<f64>) -> Result<Self> {
        Self::new(self.centers.clone(), charges)
    }

    pub fn scaled_charges(&self, c: f64) -> Self {
        Self {
            centers: self.centers.clone(),
            charges: self.charges.iter().map(|q| q * c).collect(),
        }
    }

    pub fn translated(&self, v: Point3) -> Self {
        Self {
            centers: self
                .centers
                .iter()
                .map(|x| [x[0] + v[0], x[1] + v[1], x[2] + v[2]])
                .collect(),
            charges: self.charges.clone(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut centers = self.centers.clone();
        centers.extend_from_slice(&other.centers);
        let mut charges = self.charges.clone();
        charges.extend_from_slice(&other.charges);
        Self { centers, charges }
    }

    /// Particles `range` of this system.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            centers: idx.iter().map(|&i| self.centers[i]).collect(),
            charges: idx.iter().map(|&i| self.charges[i]).collect(),
        }
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(dist2(&self.centers[i], &self.centers[j]));
            }
        }
        best.sqrt()
    }

    pub fn is_separable(&self, sigma: f64) -> bool {
        self.min_pairwise_distance() >= sigma
    }
}

/// Buckets of particle indices on a uniform lattice of cubes.
#[derive(Clone, Debug)]
pub struct CellList {
    size: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
    points: Vec<Point3>,
}

impl CellList {
    pub fn new(points: &[Point3], size: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, size)).or_default().push(i);
        }
        Self {
            size,
            cells,
            points: points.to_vec(),
        }
    }

    fn key(p: &Point3, size: f64) -> [i64; 3] {
        [
            (p[0] / size).floor() as i64,
            (p[1] / size).floor() as i64,
            (p[2] / size).floor() as i64,
        ]
    }

    /// Calls `f(i, d²)` for every point within distance `r` of `x`.
    pub fn for_each_within(&self, x: &Point3, r: f64, mut f: impl FnMut(usize, f64)) {
        let reach = (r / self.size).ceil() as i64;
        let c = Self::key(x, self.size);
        let r2 = r * r;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    if let Some(v) = self.cells.get(&[c[0] + i, c[1] + j, c[2] + k]) {
                        for &p in v {
                            let d2 = dist2(x, &self.points[p]);
                            if d2 <= r2 {
                                f(p, d2);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Whether some point lies strictly closer than `r` to `x`.
    pub fn any_closer_than(&self, x: &Point3, r: f64) -> bool {
        let mut hit = false;
        let r2 = r * r;
        self.for_each_within(x, r, |_, d2| hit |= d2 < r2);
        hit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(matches!(
            ParticleSystem::new(vec![], vec![]),
            Err(Error::EmptyInput)
        ));
        assert!(ParticleSystem::new(vec![[0.0; 3]], vec![1.0, 2.0]).is_err());
        let ps = ParticleSystem::new(vec![[0.0; 3], [3.0, 4.0, 0.0]], vec![1.0, -1.0]).unwrap();
        assert_eq!(ps.min_pairwise_distance(), 5.0);
        assert!(ps.is_separable(5.0));
        assert!(!ps.is_separable(5.000001));
    }

    #[test]
    fn cell_list_matches_brute_force() {
        let pts: Vec<Point3> = (0..50)
            .map(|i| {
                let f = i as f64;
                [(f * 1.37).sin() * 5.0, (f * 0.71).cos() * 5.0, (f * 0.13).sin()]
            })
            .collect();
        let cl = CellList::new(&pts, 1.0);
        let x = [0.3, -0.2, 0.1];
        let mut got = Vec::new();
        cl.for_each_within(&x, 2.5, |i, _| got.push(i));
        got.sort();
        let want: Vec<usize> = (0..pts.len()).filter(|&i| dist2(&x, &pts[i]) <= 6.25).collect();
        assert_eq!(got, want);
    }
}
