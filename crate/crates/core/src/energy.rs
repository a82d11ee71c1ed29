//! Total and binding electrostatic energies, by direct summation and from the
//! long-range tensor.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalTensor3;
use crate::error::{Error, Result};
use crate::grid::dist2;
use crate::kernel::ReferenceKernel;
use crate::par::Exec;
use crate::particles::ParticleSystem;
use crate::potential::RSPotential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Tensor,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Hartree.
    pub value: f64,
    pub method: Method,
    pub grid_n: Option<usize>,
    pub rank: Option<usize>,
    pub elapsed: Duration,
}

impl EnergyReport {
    fn direct(value: f64, start: Instant) -> Self {
        Self {
            value,
            method: Method::Direct,
            grid_n: None,
            rank: None,
            elapsed: start.elapsed(),
        }
    }

    fn tensor(value: f64, n: usize, rank: usize, start: Instant) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite energy {value}")));
        }
        Ok(Self {
            value,
            method: Method::Tensor,
            grid_n: Some(n),
            rank: Some(rank),
            elapsed: start.elapsed(),
        })
    }
}

/// Sum over `j` of `z_j Σ_k z_k / ‖x_j − y_k‖`, skipping `k = j` when `skip_self`.
fn coulomb_sum(a: &ParticleSystem, b: &ParticleSystem, skip_self: bool, exec: Exec) -> Result<f64> {
    let rows = exec.map(a.len(), |j| {
        let x = &a.centers()[j];
        let mut s = 0.0;
        for (k, (y, z)) in b.centers().iter().zip(b.charges()).enumerate() {
            if skip_self && k == j {
                continue;
            }
            let d2 = dist2(x, y);
            if d2 == 0.0 {
                return Err(Error::SingularConfiguration(format!(
                    "particles {j} and {k} share the position ({}, {}, {})",
                    x[0], x[1], x[2]
                )));
            }
            s += z / d2.sqrt();
        }
        Ok(a.charges()[j] * s)
    });
    rows.into_iter().sum()
}

pub fn direct_total_energy(ps: &ParticleSystem) -> Result<EnergyReport> {
    direct_total_energy_with(ps, Exec::default())
}

pub fn direct_total_energy_with(ps: &ParticleSystem, exec: Exec) -> Result<EnergyReport> {
    let start = Instant::now();
    let e = 0.5 * coulomb_sum(ps, ps, true, exec)?;
    Ok(EnergyReport::direct(e, start))
}

pub fn direct_binding_energy(m: &ParticleSystem, l: &ParticleSystem) -> Result<EnergyReport> {
    direct_binding_energy_with(m, l, Exec::default())
}

pub fn direct_binding_energy_with(m: &ParticleSystem, l: &ParticleSystem, exec: Exec) -> Result<EnergyReport> {
    let start = Instant::now();
    let e = coulomb_sum(m, l, false, exec)?;
    Ok(EnergyReport::direct(e, start))
}

/// Total energy from the long-range part only: at each particle the
/// long-range potential minus the particle's own long-range contribution.
pub fn tensor_total_energy(rs: &RSPotential, ps: &ParticleSystem, rk: &ReferenceKernel) -> Result<EnergyReport> {
    let start = Instant::now();
    if rk.grid() != rs.grid() {
        return Err(Error::InvalidArgument("kernel and potential use different grids".into()));
    }
    if rk.sigma() != rs.sigma() {
        return Err(Error::InvalidArgument("kernel and potential use different splits".into()));
    }
    if ps.centers() != rs.particles().centers() || ps.charges() != rs.particles().charges() {
        return Err(Error::InvalidArgument(
            "potential was not assembled from this particle system".into(),
        ));
    }
    let c = rk.long_center_value();
    let t = rs.long_part();
    let mut e = 0.0;
    for (idx, z) in rs.snapped_indices().iter().zip(ps.charges()) {
        e += z * (t.eval_unchecked(idx) - z * c);
    }
    EnergyReport::tensor(0.5 * e, rs.grid().n, t.rank(), start)
}

/// `Σ_ℓ z_ℓ T(x_ℓ)` with every ligand center snapped to its nearest node.
/// No separation check is made.
pub fn ligand_weighted_sum(t: &CanonicalTensor3, l: &ParticleSystem) -> Result<f64> {
    let mut e = 0.0;
    for (x, z) in l.centers().iter().zip(l.charges()) {
        e += z * t.eval_at_point(x)?;
    }
    Ok(e)
}

fn check_separation(rs: &RSPotential, l: &ParticleSystem) -> Result<()> {
    for (i, x) in l.centers().iter().enumerate() {
        if !rs.is_separated(x) {
            return Err(Error::InfeasibleConfiguration(format!(
                "ligand atom {i} is closer than sigma = {} to a protein atom",
                rs.sigma()
            )));
        }
    }
    Ok(())
}

/// Binding energy of ligand `l` in the long-range field of the protein that
/// `rs` was assembled from.
pub fn plie_binding_energy(rs: &RSPotential, l: &ParticleSystem) -> Result<EnergyReport> {
    let start = Instant::now();
    check_separation(rs, l)?;
    let e = ligand_weighted_sum(rs.long_part(), l)?;
    EnergyReport::tensor(e, rs.grid().n, rs.rank(), start)
}

pub fn multi_protein_binding_energy(rss: &[RSPotential], l: &ParticleSystem) -> Result<EnergyReport> {
    let start = Instant::now();
    let Some(first) = rss.first() else {
        return EnergyReport::tensor(0.0, 0, 0, start);
    };
    if rss.iter().any(|r| r.grid() != first.grid()) {
        return Err(Error::InvalidArgument("proteins are assembled on different grids".into()));
    }
    let mut e = 0.0;
    for rs in rss {
        check_separation(rs, l)?;
        e += ligand_weighted_sum(rs.long_part(), l)?;
    }
    let rank = rss.iter().map(RSPotential::rank).sum();
    EnergyReport::tensor(e, first.grid().n, rank, start)
}
