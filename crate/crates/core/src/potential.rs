//! Assembly of the collective potential of a particle system.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalTensor3;
use crate::error::{Error, Result};
use crate::grid::{BoundingBox, Grid3D, Index3, Point3};
use crate::kernel::ReferenceKernel;
use crate::par::Exec;
use crate::particles::{CellList, ParticleSystem};
use crate::tucker::{reduce_rank, reduce_rank_fitted, CompressionReport};

pub const DEFAULT_BATCH: usize = 32;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub particles: usize,
    pub long_rank_per_particle: usize,
    pub rounds: usize,
    pub final_rank: usize,
    /// Largest rank seen before a compression round.
    pub peak_rank: usize,
    /// Sum of the certified absolute errors of all rounds.
    pub abs_error: f64,
    /// `abs_error` over a lower bound of the final norm.
    pub rel_error: f64,
    pub elapsed: Duration,
}

impl AssemblyReport {
    pub fn uncompressed_rank(&self) -> usize {
        self.particles * self.long_rank_per_particle
    }
}

fn check_inputs(rk: &ReferenceKernel, ps: &ParticleSystem, grid: &Grid3D) -> Result<Vec<Index3>> {
    if rk.grid() != grid {
        return Err(Error::InvalidArgument(
            "reference kernel was built for a different grid".into(),
        ));
    }
    ps.centers().iter().map(|x| grid.nearest_grid_index(x)).collect()
}

/// Shifted and windowed long-range columns for a run of particles, as
/// column-major `n × (count·R_l)` matrices plus the term weights.
fn shifted_terms(
    rk: &ReferenceKernel,
    idx: &[Index3],
    charges: &[f64],
    exec: Exec,
) -> ([DMatrix<f64>; 3], Vec<f64>) {
    let n = rk.grid().n;
    let long = rk.long_indices();
    let rl = long.len();
    let reference = rk.tensor();
    let r = reference.rank();
    let width = idx.len() * rl;
    let mut mats: [DMatrix<f64>; 3] = std::array::from_fn(|_| DMatrix::zeros(n, width));
    for (d, m) in mats.iter_mut().enumerate() {
        let f = reference.factor(d);
        exec.for_each_chunk(m.as_mut_slice(), n * rl, |p, block| {
            let i = idx[p][d];
            for (c, &k) in long.iter().enumerate() {
                let col = &mut block[c * n..(c + 1) * n];
                for (j, v) in col.iter_mut().enumerate() {
                    *v = f[rk.shifted_index(j, i) * r + k];
                }
            }
        });
    }
    let w = charges
        .iter()
        .flat_map(|z| long.iter().map(move |&k| z * reference.weights()[k]))
        .collect();
    (mats, w)
}

/// Sum of the shifted long-range terms of every particle, without compression.
pub fn assemble_long_range_uncompressed(
    rk: &ReferenceKernel,
    ps: &ParticleSystem,
    grid: &Grid3D,
) -> Result<CanonicalTensor3> {
    let idx = check_inputs(rk, ps, grid)?;
    let (m, w) = shifted_terms(rk, &idx, ps.charges(), Exec::default());
    Ok(CanonicalTensor3::from_matrices(grid.axes(), [&m[0], &m[1], &m[2]], w))
}

pub fn assemble_long_range(
    rk: &ReferenceKernel,
    ps: &ParticleSystem,
    grid: &Grid3D,
    eps: f64,
    batch: usize,
) -> Result<(CanonicalTensor3, AssemblyReport)> {
    assemble_long_range_with(rk, ps, grid, eps, batch, Exec::default())
}

/// Add-and-compress assembly: every `batch` particles the running sum is
/// reduced with tolerance `eps / rounds`.
pub fn assemble_long_range_with(
    rk: &ReferenceKernel,
    ps: &ParticleSystem,
    grid: &Grid3D,
    eps: f64,
    batch: usize,
    exec: Exec,
) -> Result<(CanonicalTensor3, AssemblyReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {eps}")));
    }
    if batch == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    let start = Instant::now();
    let idx = check_inputs(rk, ps, grid)?;
    let rounds = ps.len().div_ceil(batch);
    let eps_round = eps / rounds as f64;
    let mut acc = CanonicalTensor3::zero(grid.axes());
    let mut abs_error = 0.0;
    let mut peak = 0;
    let mut last: Option<CompressionReport> = None;
    for (b, chunk) in idx.chunks(batch).enumerate() {
        let charges = &ps.charges()[b * batch..b * batch + chunk.len()];
        let (m, w) = shifted_terms(rk, chunk, charges, exec);
        let terms = CanonicalTensor3::from_matrices(grid.axes(), [&m[0], &m[1], &m[2]], w);
        acc = acc.add(&terms)?;
        peak = peak.max(acc.rank());
        if acc.weights().iter().all(|w| *w == 0.0) {
            acc = CanonicalTensor3::zero(grid.axes());
            continue;
        }
        let (c, rep) = reduce_rank(&acc, eps_round)?;
        abs_error += rep.abs_error;
        acc = c;
        last = Some(rep);
    }
    let norm_lower = last.map_or(0.0, |r| (r.input_norm - r.abs_error).max(0.0));
    let report = AssemblyReport {
        particles: ps.len(),
        long_rank_per_particle: rk.long_rank(),
        rounds,
        final_rank: acc.rank(),
        peak_rank: peak,
        abs_error,
        rel_error: if norm_lower > 0.0 { abs_error / norm_lower } else { 0.0 },
        elapsed: start.elapsed(),
    };
    Ok((acc, report))
}

/// Short-range reference terms restricted to a window of `±w` nodes.
#[derive(Clone, Debug)]
struct ShortCarrier {
    weights: Vec<f64>,
    /// `cols[k][o + w]` for offsets `o ∈ [−w, w]`, identical on all axes.
    cols: Vec<Vec<f64>>,
    w: usize,
}

impl ShortCarrier {
    fn new(rk: &ReferenceKernel) -> Self {
        let h = rk.grid().h;
        let w = ((rk.sigma() / h).ceil() as usize + 1).min(rk.grid().n - 1);
        let t = rk.tensor();
        let c = rk.center_index();
        let cols = rk
            .short_indices()
            .iter()
            .map(|&k| {
                (0..=2 * w)
                    .map(|o| t.factor(0)[(c + o - w) * t.rank() + k])
                    .collect()
            })
            .collect();
        Self {
            weights: rk.short_indices().iter().map(|&k| t.weights()[k]).collect(),
            cols,
            w,
        }
    }

    fn value(&self, offset: [i64; 3]) -> f64 {
        let w = self.w as i64;
        if offset.iter().any(|o| o.abs() > w) {
            return 0.0;
        }
        let o = offset.map(|o| (o + w) as usize);
        self.weights
            .iter()
            .zip(&self.cols)
            .map(|(a, col)| a * col[o[0]] * col[o[1]] * col[o[2]])
            .sum()
    }

    fn storage_len(&self) -> usize {
        3 * self.cols.iter().map(Vec::len).sum::<usize>() + self.weights.len()
    }
}

/// Range-separated potential: compressed long-range tensor on the grid plus
/// the particle-anchored short-range part.
#[derive(Clone, Debug)]
pub struct RSPotential {
    long: CanonicalTensor3,
    grid: Grid3D,
    sigma: f64,
    particles: ParticleSystem,
    snapped: Vec<Index3>,
    short: ShortCarrier,
    cells: CellList,
    long_center: f64,
    report: AssemblyReport,
}

pub fn assemble_rs_potential(
    rk: &ReferenceKernel,
    ps: &ParticleSystem,
    grid: &Grid3D,
    eps: f64,
    batch: usize,
) -> Result<RSPotential> {
    assemble_rs_potential_with(rk, ps, grid, eps, batch, Exec::default())
}

pub fn assemble_rs_potential_with(
    rk: &ReferenceKernel,
    ps: &ParticleSystem,
    grid: &Grid3D,
    eps: f64,
    batch: usize,
    exec: Exec,
) -> Result<RSPotential> {
    let (long, report) = assemble_long_range_with(rk, ps, grid, eps, batch, exec)?;
    RSPotential::from_long_part(rk, ps, long, report)
}

impl RSPotential {
    /// Wraps an already assembled long-range tensor of `ps`.
    pub fn from_long_part(
        rk: &ReferenceKernel,
        ps: &ParticleSystem,
        long: CanonicalTensor3,
        report: AssemblyReport,
    ) -> Result<Self> {
        let grid = *rk.grid();
        if long.axes() != &grid.axes() {
            return Err(Error::InvalidArgument("long-range tensor is not on the kernel grid".into()));
        }
        let snapped = ps
            .centers()
            .iter()
            .map(|x| grid.nearest_grid_index(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            long,
            grid,
            sigma: rk.sigma(),
            particles: ps.clone(),
            snapped,
            short: ShortCarrier::new(rk),
            cells: CellList::new(ps.centers(), rk.sigma().max(grid.h)),
            long_center: rk.long_center_value(),
            report,
        })
    }

    pub fn long_part(&self) -> &CanonicalTensor3 {
        &self.long
    }

    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn particles(&self) -> &ParticleSystem {
        &self.particles
    }

    pub fn report(&self) -> &AssemblyReport {
        &self.report
    }

    pub fn rank(&self) -> usize {
        self.long.rank()
    }

    /// Long-range reference value at the kernel center (self-interaction).
    pub fn long_center_value(&self) -> f64 {
        self.long_center
    }

    /// Grid nodes the particles were snapped to, i.e. where the shifted
    /// kernels are centered.
    pub fn effective_centers(&self) -> Vec<Point3> {
        self.snapped.iter().map(|i| self.grid.node(*i)).collect()
    }

    pub fn snapped_indices(&self) -> &[Index3] {
        &self.snapped
    }

    /// Whether `x` is at least σ away from every particle.
    pub fn is_separated(&self, x: &Point3) -> bool {
        !self.cells.any_closer_than(x, self.sigma)
    }

    pub fn eval_long(&self, idx: Index3) -> Result<f64> {
        self.long.eval_at_index(idx)
    }

    pub fn eval_short(&self, idx: Index3) -> Result<f64> {
        if !self.long.in_bounds(&idx) {
            return Err(Error::InvalidArgument(format!("index {idx:?} outside the grid")));
        }
        let x = self.grid.node(idx);
        let reach = (self.short.w as f64 + 1.0) * self.grid.h * 3f64.sqrt();
        let mut s = 0.0;
        self.cells.for_each_within(&x, reach, |p, _| {
            let i = self.snapped[p];
            let off = [
                idx[0] as i64 - i[0] as i64,
                idx[1] as i64 - i[1] as i64,
                idx[2] as i64 - i[2] as i64,
            ];
            s += self.particles.charges()[p] * self.short.value(off);
        });
        Ok(s)
    }

    /// Full range-separated value at a grid node.
    pub fn eval(&self, idx: Index3) -> Result<f64> {
        Ok(self.eval_long(idx)? + self.eval_short(idx)?)
    }

    pub fn eval_at_point(&self, x: &Point3) -> Result<f64> {
        self.eval(self.grid.nearest_grid_index(x)?)
    }

    /// Stored floating-point values: long factors, particle data, short window.
    pub fn storage_len(&self) -> usize {
        self.long.storage_len() + 4 * self.particles.len() + self.short.storage_len()
    }

    /// The bound `d·R·n + (d+1)·N + d·n_σ·R_s`, with `n_σ` the window length.
    pub fn storage_bound(&self) -> usize {
        let rs = self.short.weights.len();
        let n_sigma = 2 * self.short.w + 1;
        3 * self.long.rank() * self.grid.n + self.long.rank() + 4 * self.particles.len() + 3 * n_sigma * rs + rs
    }
}

/// Exact slice to `bx`, then recompression with `eps`. The sliced tensor
/// is small, so its canonical rank is minimized by least-squares fitting.
pub fn restrict_to_box(
    t: &CanonicalTensor3,
    bx: &BoundingBox,
    eps: f64,
) -> Result<(CanonicalTensor3, Option<CompressionReport>)> {
    let sliced = t.slice(bx)?;
    if sliced.rank() == 0 || sliced.weights().iter().all(|w| *w == 0.0) {
        return Ok((sliced, None));
    }
    let (c, rep) = reduce_rank_fitted(&sliced, eps)?;
    Ok((c, Some(rep)))
}

pub fn eval_potential_at_points(t: &CanonicalTensor3, points: &[Point3]) -> Result<Vec<f64>> {
    points
        .iter()
        .enumerate()
        .map(|(p, x)| {
            t.eval_at_point(x).map_err(|e| match e {
                Error::OutOfDomain(m) => Error::OutOfDomain(format!("point #{p}: {m}")),
                other => other,
            })
        })
        .collect()
}
