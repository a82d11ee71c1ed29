//! Rigid posing of a ligand against a protein: pose transforms, the van der
//! Waals constraint, rotation scans of the binding energy and the blind
//! search for its minima.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::energy::{direct_binding_energy_with, plie_binding_energy};
use crate::error::{Error, Result};
use crate::forces::Dimension;
use crate::grid::{add, dist2, dot, make_grid, norm, scale, sub, Point3};
use crate::kernel::{build_reference_kernel, load_or_build_kernel, ReferenceKernel, DEFAULT_EPS_SPLIT};
use crate::par::Exec;
use crate::particles::{CellList, ParticleSystem};
use crate::potential::{assemble_rs_potential_with, RSPotential, DEFAULT_BATCH};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Rotation {
    /// Angle about the vertical axis.
    Planar { phi: f64 },
    /// `R_z(α)·R_y(β)`.
    Spatial { alpha: f64, beta: f64 },
}

impl Rotation {
    pub fn is_identity(&self) -> bool {
        match *self {
            Rotation::Planar { phi } => phi == 0.0,
            Rotation::Spatial { alpha, beta } => alpha == 0.0 && beta == 0.0,
        }
    }

    pub fn apply(&self, v: &Point3) -> Point3 {
        match *self {
            Rotation::Planar { phi } => rot_z(phi, v),
            Rotation::Spatial { alpha, beta } => rot_z(alpha, &rot_y(beta, v)),
        }
    }
}

fn rot_z(a: f64, v: &Point3) -> Point3 {
    let (s, c) = a.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

fn rot_y(a: f64, v: &Point3) -> Point3 {
    let (s, c) = a.sin_cos();
    [c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]]
}

/// Rotation about the ligand's geometric center followed by a translation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseTransform {
    pub rotation: Rotation,
    pub translation: [f64; 3],
}

impl PoseTransform {
    pub fn identity(dim: Dimension) -> Self {
        let rotation = match dim {
            Dimension::Planar => Rotation::Planar { phi: 0.0 },
            Dimension::Spatial => Rotation::Spatial { alpha: 0.0, beta: 0.0 },
        };
        Self {
            rotation,
            translation: [0.0; 3],
        }
    }

    pub fn translation(v: [f64; 3]) -> Self {
        Self {
            translation: v,
            ..Self::identity(Dimension::Planar)
        }
    }
}

pub fn geometric_center(ps: &ParticleSystem) -> Point3 {
    let n = ps.len() as f64;
    let s = ps.centers().iter().fold([0.0; 3], |acc, c| add(&acc, c));
    scale(&s, 1.0 / n)
}

pub fn apply_pose(l: &ParticleSystem, pose: &PoseTransform) -> ParticleSystem {
    let mut centers = l.centers().to_vec();
    if !pose.rotation.is_identity() {
        let c = geometric_center(l);
        for x in &mut centers {
            *x = add(&c, &pose.rotation.apply(&sub(x, &c)));
        }
    }
    if pose.translation != [0.0; 3] {
        for x in &mut centers {
            *x = add(x, &pose.translation);
        }
    }
    ParticleSystem::from_raw(centers, l.charges().to_vec())
}

/// Whether every protein–ligand distance is at least `sigma`.
pub fn vdw_feasible(m: &ParticleSystem, l: &ParticleSystem, sigma: f64) -> bool {
    let s2 = sigma * sigma;
    l.centers()
        .iter()
        .all(|x| m.centers().iter().all(|y| dist2(x, y) >= s2))
}

/// Protein atoms bucketed for repeated constraint checks.
struct Contacts<'a> {
    protein: &'a ParticleSystem,
    cells: CellList,
    sigma: f64,
}

impl<'a> Contacts<'a> {
    fn new(protein: &'a ParticleSystem, sigma: f64) -> Self {
        Self {
            protein,
            cells: CellList::new(protein.centers(), (sigma * (1.0 + 1e-9)).max(1e-9)),
            sigma,
        }
    }

    fn feasible(&self, l: &ParticleSystem) -> bool {
        self.clear_by(l, self.sigma)
    }

    fn clear_by(&self, l: &ParticleSystem, r: f64) -> bool {
        l.centers().iter().all(|x| !self.cells.any_closer_than(x, r))
    }

    /// Largest `t ≥ 0` such that moving `l` by `t·d` keeps every pair at
    /// distance at least σ along the whole path, or `None` if no contact.
    fn contact_time(&self, l: &ParticleSystem, d: &[f64; 3]) -> Option<f64> {
        let s2 = self.sigma * self.sigma;
        let mut best: Option<f64> = None;
        for x in l.centers() {
            for y in self.protein.centers() {
                let p = sub(x, y);
                let b = dot(&p, d);
                let c = dot(&p, &p) - s2;
                let disc = b * b - c;
                if disc <= 0.0 {
                    continue;
                }
                let r = disc.sqrt();
                let (t1, t2) = (-b - r, -b + r);
                if t2 <= 0.0 {
                    continue;
                }
                let t1 = t1.max(0.0);
                best = Some(best.map_or(t1, |v: f64| v.min(t1)));
            }
        }
        best
    }
}

fn approach(contacts: &Contacts, l: &ParticleSystem, target: &Point3, step: f64) -> Result<PoseTransform> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !contacts.feasible(l) {
        return Err(Error::InfeasibleStart(
            "the ligand overlaps the protein in its starting pose".into(),
        ));
    }
    let xl = geometric_center(l);
    let gap = sub(target, &xl);
    let dist = norm(&gap);
    if dist == 0.0 {
        return Err(Error::UndefinedDirection(
            "ligand and protein centers coincide".into(),
        ));
    }
    let d = scale(&gap, 1.0 / dist);
    let limit = contacts.contact_time(l, &d).map_or(dist, |t| t.min(dist));
    let mut k = (limit / step).floor() as i64;
    while k > 0 {
        let v = scale(&d, k as f64 * step);
        // A relative margin keeps the stop feasible after the caller
        // recomposes the pose with rotations.
        if contacts.clear_by(&apply_pose(l, &PoseTransform::translation(v)), contacts.sigma * (1.0 + 1e-12)) {
            break;
        }
        k -= 1;
    }
    Ok(PoseTransform::translation(scale(&d, k.max(0) as f64 * step)))
}

/// Moves the ligand toward the protein center in increments of `step` and
/// returns the last translation that keeps the van der Waals constraint.
pub fn approach_along_line(m: &ParticleSystem, l: &ParticleSystem, sigma: f64, step: f64) -> Result<PoseTransform> {
    approach(&Contacts::new(m, sigma), l, &geometric_center(m), step)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub m_p: usize,
    pub m_l: usize,
    pub sigma: f64,
    pub mode: Dimension,
    /// Approach step; the grid mesh when `None`.
    pub step: Option<f64>,
}

impl ScanParams {
    pub fn planar(m_p: usize, m_l: usize, sigma: f64) -> Self {
        Self {
            m_p,
            m_l,
            sigma,
            mode: Dimension::Planar,
            step: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m_p == 0 || self.m_l == 0 {
            return Err(Error::InvalidArgument("m_P and m_L must be at least 1".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeEntry {
    pub ip: usize,
    pub il: usize,
    pub phi_p: f64,
    pub phi_l: f64,
    pub feasible: bool,
    /// Present exactly when `feasible`.
    pub energy: Option<f64>,
    pub pose: PoseTransform,
    /// Ligand geometric center in this pose.
    pub center: Point3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLandscape {
    pub m_p: usize,
    pub m_l: usize,
    pub mode: Dimension,
    pub rank: usize,
    /// Row-major in `(ip, il)`.
    pub entries: Vec<LandscapeEntry>,
}

impl EnergyLandscape {
    pub fn get(&self, ip: usize, il: usize) -> &LandscapeEntry {
        &self.entries[ip * self.m_l + il]
    }

    pub fn feasible_count(&self) -> usize {
        self.entries.iter().filter(|e| e.feasible).count()
    }

    /// Feasible entry of lowest energy, ties to the smaller indices.
    pub fn argmin(&self) -> Option<&LandscapeEntry> {
        self.entries
            .iter()
            .filter_map(|e| e.energy.map(|v| (v, e)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, e)| e)
    }
}

/// Unit vectors spread quasi-uniformly over the sphere.
fn fibonacci_sphere(m: usize) -> Vec<([f64; 3], f64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = (golden * i as f64).rem_euclid(2.0 * PI);
            ([r * th.cos(), r * th.sin(), z], th)
        })
        .collect()
}

/// Self-rotation of the `j`-th of `m` orientations.
fn self_rotation(mode: Dimension, j: usize, m: usize) -> (Rotation, f64) {
    let a = 2.0 * PI * j as f64 / m as f64;
    match mode {
        Dimension::Planar => (Rotation::Planar { phi: a }, a),
        Dimension::Spatial => {
            let beta = (1.0 - 2.0 * (j as f64 + 0.5) / m as f64).acos();
            (Rotation::Spatial { alpha: a, beta }, a)
        }
    }
}

pub fn scan_rotations(rs: &RSPotential, l: &ParticleSystem, params: &ScanParams) -> Result<EnergyLandscape> {
    scan_rotations_with(rs, l, params, Exec::default())
}

pub fn scan_rotations_with(
    rs: &RSPotential,
    l: &ParticleSystem,
    params: &ScanParams,
    exec: Exec,
) -> Result<EnergyLandscape> {
    let step = params.step.unwrap_or(rs.grid().h);
    let energy = |lig: &ParticleSystem| plie_binding_energy(rs, lig).ok().map(|r| r.value);
    scan_core(rs.particles(), l, params, step, rs.rank(), &energy, exec)
}

/// The same scan with energies from the direct pairwise sum; `rank` is 0.
pub fn scan_rotations_direct(
    m: &ParticleSystem,
    l: &ParticleSystem,
    params: &ScanParams,
    step: f64,
) -> Result<EnergyLandscape> {
    let energy = |lig: &ParticleSystem| direct_binding_energy_with(m, lig, Exec::Sequential).ok().map(|r| r.value);
    scan_core(m, l, params, step, 0, &energy, Exec::default())
}

fn scan_core(
    m: &ParticleSystem,
    l: &ParticleSystem,
    params: &ScanParams,
    step: f64,
    rank: usize,
    energy_of: &(dyn Fn(&ParticleSystem) -> Option<f64> + Sync),
    exec: Exec,
) -> Result<EnergyLandscape> {
    params.validate()?;
    let contacts = Contacts::new(m, params.sigma);
    let xp = geometric_center(m);
    let xl = geometric_center(l);
    let arm = sub(&xl, &xp);
    let sphere = match params.mode {
        Dimension::Planar => Vec::new(),
        Dimension::Spatial => fibonacci_sphere(params.m_p),
    };
    let rows = exec.map(params.m_p, |ip| {
        // Ligand moved to the ip-th angular position, still in its start pose.
        let (placed, base_rot, phi_p, target) = match params.mode {
            Dimension::Planar => {
                let phi = 2.0 * PI * ip as f64 / params.m_p as f64;
                let rot = Rotation::Planar { phi };
                let shift = sub(&add(&xp, &rot_z(phi, &arm)), &xl);
                let pose = PoseTransform {
                    rotation: rot,
                    translation: shift,
                };
                // Approach within the ligand's altitude plane.
                let target = [xp[0], xp[1], xl[2]];
                (apply_pose(l, &pose), phi, phi, target)
            }
            Dimension::Spatial => {
                let (dir, th) = sphere[ip];
                let shift = sub(&add(&xp, &scale(&dir, norm(&arm))), &xl);
                (apply_pose(l, &PoseTransform::translation(shift)), 0.0, th, xp)
            }
        };
        let moved = approach(&contacts, &placed, &target, step);
        (0..params.m_l)
            .map(|il| {
                let (rot, phi_l) = self_rotation(params.mode, il, params.m_l);
                let rotation = match (params.mode, rot) {
                    (Dimension::Planar, Rotation::Planar { phi }) => Rotation::Planar { phi: base_rot + phi },
                    _ => rot,
                };
                let fallback_center = geometric_center(&placed);
                let Ok(t) = &moved else {
                    return LandscapeEntry {
                        ip,
                        il,
                        phi_p,
                        phi_l,
                        feasible: false,
                        energy: None,
                        pose: PoseTransform {
                            rotation,
                            translation: sub(&fallback_center, &xl),
                        },
                        center: fallback_center,
                    };
                };
                let center = add(&fallback_center, &t.translation);
                let pose = PoseTransform {
                    rotation,
                    translation: sub(&center, &xl),
                };
                let lig = apply_pose(l, &pose);
                let energy = if contacts.feasible(&lig) { energy_of(&lig) } else { None };
                LandscapeEntry {
                    ip,
                    il,
                    phi_p,
                    phi_l,
                    feasible: energy.is_some(),
                    energy,
                    pose,
                    center,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(EnergyLandscape {
        m_p: params.m_p,
        m_l: params.m_l,
        mode: params.mode,
        rank,
        entries: rows.into_iter().flatten().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub ip: usize,
    pub il: usize,
    pub pose: PoseTransform,
    pub energy: f64,
    pub center: Point3,
    pub rank_used: usize,
}

/// Feasible entries not exceeding any feasible neighbor on the periodic
/// `(ip, il)` lattice, lowest energy first, at most `k` of them.
pub fn find_minima(landscape: &EnergyLandscape, k: usize) -> Result<Vec<Minimum>> {
    if landscape.feasible_count() == 0 {
        return Err(Error::EmptyLandscape);
    }
    let (mp, ml) = (landscape.m_p as isize, landscape.m_l as isize);
    let mut out: Vec<Minimum> = landscape
        .entries
        .iter()
        .filter_map(|e| {
            let v = e.energy?;
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let i = (e.ip as isize + di).rem_euclid(mp) as usize;
                    let j = (e.il as isize + dj).rem_euclid(ml) as usize;
                    if let Some(w) = landscape.get(i, j).energy {
                        if w < v {
                            return None;
                        }
                    }
                }
            }
            Some(Minimum {
                ip: e.ip,
                il: e.il,
                pose: e.pose,
                energy: v,
                center: e.center,
                rank_used: landscape.rank,
            })
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then((a.ip, a.il).cmp(&(b.ip, b.il))));
    out.truncate(k);
    Ok(out)
}

/// Tensor settings of the precompute step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorConfig {
    pub n: usize,
    pub half_width: f64,
    pub k: usize,
    /// Range-separation length of the kernel.
    pub sigma: f64,
    pub eps_split: f64,
    pub eps: f64,
    pub batch: usize,
    /// Overrides the split with this many widest terms.
    pub long_rank: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for TensorConfig {
    fn default() -> Self {
        Self {
            n: 512,
            half_width: 20.0,
            k: 30,
            sigma: 1.0,
            eps_split: DEFAULT_EPS_SPLIT,
            eps: 1e-6,
            batch: DEFAULT_BATCH,
            long_rank: None,
            cache_dir: None,
        }
    }
}

impl TensorConfig {
    pub fn kernel(&self) -> Result<ReferenceKernel> {
        let grid = make_grid(self.half_width, self.n)?;
        let rk = match &self.cache_dir {
            Some(dir) => load_or_build_kernel(dir, &grid, self.k, self.sigma, self.eps_split)?.0,
            None => build_reference_kernel(&grid, self.k, self.sigma, self.eps_split)?,
        };
        match self.long_rank {
            Some(r) => rk.with_long_rank(r),
            None => Ok(rk),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub kernel: Duration,
    pub assembly: Duration,
    pub scan: Duration,
    pub minima: Duration,
}

#[derive(Clone, Debug)]
pub struct DockedPose {
    pub minimum: Minimum,
    pub ligand: ParticleSystem,
}

#[derive(Clone, Debug)]
pub struct PpiemResult {
    pub poses: Vec<DockedPose>,
    pub landscape: EnergyLandscape,
    pub timings: StageTimings,
    pub final_rank: usize,
}

/// Blind search for the binding poses of `l` around `m`.
pub fn ppiem_search(
    m: &ParticleSystem,
    l: &ParticleSystem,
    params: &ScanParams,
    config: &TensorConfig,
    max_minima: usize,
) -> Result<PpiemResult> {
    params.validate()?;
    let t = Instant::now();
    let rk = config.kernel()?;
    let kernel = t.elapsed();
    let t = Instant::now();
    let rs = assemble_rs_potential_with(&rk, m, rk.grid(), config.eps, config.batch, Exec::default())?;
    let assembly = t.elapsed();
    let mut out = ppiem_search_assembled(&rs, l, params, max_minima)?;
    out.timings.kernel = kernel;
    out.timings.assembly = assembly;
    Ok(out)
}

/// Search on an already assembled protein potential.
pub fn ppiem_search_assembled(
    rs: &RSPotential,
    l: &ParticleSystem,
    params: &ScanParams,
    max_minima: usize,
) -> Result<PpiemResult> {
    let t = Instant::now();
    let landscape = scan_rotations(rs, l, params)?;
    let scan = t.elapsed();
    let t = Instant::now();
    let minima = find_minima(&landscape, max_minima)?;
    let poses = minima
        .into_iter()
        .map(|minimum| DockedPose {
            ligand: apply_pose(l, &minimum.pose),
            minimum,
        })
        .collect();
    Ok(PpiemResult {
        poses,
        landscape,
        timings: StageTimings {
            scan,
            minima: t.elapsed(),
            ..StageTimings::default()
        },
        final_rank: rs.rank(),
    })
}
