//! Synthetic fixtures and the convergence and rank studies.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{direct_total_energy, tensor_total_energy};
use crate::error::{Error, Result};
use crate::grid::{dist2, make_grid, BoundingBox, Grid3D, Point3};
use crate::kernel::{build_quadrature, build_reference_kernel, ReferenceKernel, DEFAULT_EPS_SPLIT};
use crate::particles::ParticleSystem;
use crate::potential::{assemble_long_range, assemble_rs_potential, restrict_to_box};
use crate::tucker::reduce_rank_fitted;

/// Smallest `K ≤ k_max` whose quadrature meets `tol` on the kernel's
/// validation interval for `grid`.
pub fn choose_k(grid: &Grid3D, tol: f64, k_max: usize) -> Result<usize> {
    for k in 1..=k_max {
        if let Ok(rule) = build_quadrature(k, grid.h, 2.0 * grid.half_width) {
            if rule.measured_error <= tol {
                return Ok(k);
            }
        }
    }
    Err(Error::ConstructionFailure(format!(
        "no K ≤ {k_max} reaches quadrature error {tol:e} on n = {}",
        grid.n
    )))
}

/// Points with pairwise distance at least `spacing`, by rejection sampling
/// from `sample`.
fn rejection<R: Rng>(
    rng: &mut R,
    count: usize,
    spacing: f64,
    mut sample: impl FnMut(&mut R) -> Point3,
) -> Result<Vec<Point3>> {
    let s2 = spacing * spacing;
    let mut pts: Vec<Point3> = Vec::with_capacity(count);
    let mut tries = 0usize;
    while pts.len() < count {
        tries += 1;
        if tries > 10_000 * count.max(1) {
            return Err(Error::ConstructionFailure(format!(
                "could not place {count} points at spacing {spacing}"
            )));
        }
        let p = sample(rng);
        if pts.iter().all(|q| dist2(&p, q) >= s2) {
            pts.push(p);
        }
    }
    Ok(pts)
}

fn uniform_charges<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Flat cluster in the plane `z = 0`: `count` particles at spacing ≥ 2σ on a
/// square of side `3σ√count`, charges uniform in [−1, 1].
pub fn flat_cluster(count: usize, sigma: f64, seed: u64) -> Result<ParticleSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 1.5 * sigma * (count as f64).sqrt();
    let pts = rejection(&mut rng, count, 2.0 * sigma, |r| {
        [r.gen_range(-half..half), r.gen_range(-half..half), 0.0]
    })?;
    let q = uniform_charges(&mut rng, count);
    ParticleSystem::new(pts, q)
}

/// Random protein-like ball of `m` atoms plus a compact ligand of `l` atoms
/// placed outside it, all at mutual distance ≥ σ, charges uniform in
/// [−1, 1]. The closest protein–ligand distance lies in [σ, 3σ].
pub fn random_binding_system(m: usize, l: usize, sigma: f64, seed: u64) -> Result<(ParticleSystem, ParticleSystem)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Packing fraction around 0.3 for spheres of diameter σ.
    let radius = 0.62 * sigma * (m as f64 / 0.3).cbrt();
    let in_ball = |r: &mut ChaCha8Rng, rad: f64| loop {
        let p = [
            r.gen_range(-rad..rad),
            r.gen_range(-rad..rad),
            r.gen_range(-rad..rad),
        ];
        if p.iter().map(|c| c * c).sum::<f64>() <= rad * rad {
            return p;
        }
    };
    let protein = rejection(&mut rng, m, sigma, |r| in_ball(r, radius))?;
    let lig_rad = sigma * (l as f64).cbrt();
    let ligand = rejection(&mut rng, l, sigma, |r| in_ball(r, lig_rad))?;
    let mut dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let dn = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
    dir.iter_mut().for_each(|c| *c /= dn);
    let gap = sigma * rng.gen_range(1.0..3.0);
    // Slide the ligand in from far away until its closest atom is `gap` away.
    let closest = |t: f64| {
        ligand
            .iter()
            .flat_map(|a| {
                let b = [a[0] + t * dir[0], a[1] + t * dir[1], a[2] + t * dir[2]];
                protein.iter().map(move |p| dist2(&b, p))
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    };
    let (mut lo, mut hi) = (0.0, radius + lig_rad + 4.0 * sigma);
    if closest(lo) >= gap {
        hi = lo;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if closest(mid) >= gap {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let ligand: Vec<Point3> = ligand
        .iter()
        .map(|a| [a[0] + hi * dir[0], a[1] + hi * dir[1], a[2] + hi * dir[2]])
        .collect();
    let qm = uniform_charges(&mut rng, m);
    let ql = uniform_charges(&mut rng, l);
    Ok((ParticleSystem::new(protein, qm)?, ParticleSystem::new(ligand, ql)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub half_width: f64,
    pub grids: Vec<usize>,
    /// Target quadrature error used to pick K per grid.
    pub quadrature_tol: f64,
    pub sigma: f64,
    pub eps: f64,
    pub charges: [f64; 2],
    pub positions: [Point3; 2],
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            half_width: 20.0,
            grids: vec![128, 256, 512, 1024],
            quadrature_tol: 1e-5,
            sigma: 1.0,
            eps: 1e-8,
            charges: [1.0, -1.0],
            positions: [[-1.5, 0.0, 0.0], [1.5, 0.0, 0.0]],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub initial_rank: usize,
    pub energy: f64,
    pub oracle: f64,
    pub error: f64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `error[i] / error[i + 1]`.
    pub ratios: Vec<f64>,
}

impl ConvergenceTable {
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        self.ratios.iter().all(|r| (lo..=hi).contains(r))
    }
}

pub fn bench_convergence(cfg: &ConvergenceConfig) -> Result<ConvergenceTable> {
    let ps = ParticleSystem::new(cfg.positions.to_vec(), cfg.charges.to_vec())?;
    let oracle = direct_total_energy(&ps)?.value;
    let mut rows = Vec::new();
    for &n in &cfg.grids {
        let start = Instant::now();
        let grid = make_grid(cfg.half_width, n)?;
        let k = choose_k(&grid, cfg.quadrature_tol, 60)?;
        let rk = build_reference_kernel(&grid, k, cfg.sigma, DEFAULT_EPS_SPLIT)?;
        let rs = assemble_rs_potential(&rk, &ps, &grid, cfg.eps, 32)?;
        let e = tensor_total_energy(&rs, &ps, &rk)?.value;
        rows.push(ConvergenceRow {
            n,
            k,
            initial_rank: rk.rank(),
            energy: e,
            oracle,
            error: (e - oracle).abs(),
            elapsed: start.elapsed(),
        });
    }
    let ratios = rows.windows(2).map(|w| w[0].error / w[1].error).collect();
    Ok(ConvergenceTable { rows, ratios })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankConfig {
    pub sizes: Vec<usize>,
    pub half_width: f64,
    pub n: usize,
    pub k: usize,
    pub sigma: f64,
    pub eps: f64,
    pub batch: usize,
    pub seed: u64,
    /// Ligand box, given by two opposite corners in bohr.
    pub ligand_box: [Point3; 2],
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            sizes: vec![16, 64, 100, 256],
            half_width: 32.0,
            n: 256,
            k: 10,
            sigma: 1.0,
            eps: 1e-2,
            batch: 16,
            seed: 7,
            ligand_box: [[-4.0, -4.0, 2.0], [4.0, 4.0, 10.0]],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankRow {
    pub particles: usize,
    pub uncompressed: usize,
    pub compressed: usize,
    pub restricted: usize,
    pub rel_error: f64,
    pub elapsed: Duration,
}

pub fn bench_ranks(cfg: &RankConfig) -> Result<Vec<RankRow>> {
    let grid = make_grid(cfg.half_width, cfg.n)?;
    let rk = build_reference_kernel(&grid, cfg.k, cfg.sigma, DEFAULT_EPS_SPLIT)?;
    rank_study(&rk, cfg)
}

/// Rank study on a given kernel, e.g. one with a fixed long rank.
pub fn rank_study(rk: &ReferenceKernel, cfg: &RankConfig) -> Result<Vec<RankRow>> {
    let grid = *rk.grid();
    let bx = BoundingBox::covering(&grid, cfg.ligand_box[0], cfg.ligand_box[1])?;
    cfg.sizes
        .iter()
        .map(|&size| {
            let start = Instant::now();
            let ps = flat_cluster(size, cfg.sigma, cfg.seed)?;
            // Half the tolerance for add-and-compress, half for the final fit.
            let (t, rep) = assemble_long_range(rk, &ps, &grid, 0.5 * cfg.eps, cfg.batch)?;
            let (t, fit) = reduce_rank_fitted(&t, 0.5 * cfg.eps)?;
            let (r, _) = restrict_to_box(&t, &bx, cfg.eps)?;
            Ok(RankRow {
                particles: size,
                uncompressed: rep.uncompressed_rank(),
                compressed: t.rank(),
                restricted: r.rank(),
                rel_error: rep.rel_error + fit.relative_error(),
                elapsed: start.elapsed(),
            })
        })
        .collect()
}
