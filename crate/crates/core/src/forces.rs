//! Forces on ligand atoms from the long-range potential and their rigid-body
//! resultants.

use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalTensor3;
use crate::error::{Error, Result};
use crate::grid::{add, cross, dot, norm, scale, sub, Index3, Point3};
use crate::particles::ParticleSystem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceVector {
    /// Hartree per bohr.
    pub components: [f64; 3],
    pub anchor: Point3,
}

impl ForceVector {
    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FdScheme {
    Backward,
    #[default]
    Central,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    /// Rotations about the vertical axis only; one tangential vector.
    #[default]
    Planar,
    /// Full rotations; two tangential vectors.
    Spatial,
}

fn neighbor(t: &CanonicalTensor3, idx: Index3, d: usize, step: isize) -> Result<f64> {
    let j = idx[d] as isize + step;
    if j < 0 || j as usize >= t.shape()[d] {
        return Err(Error::OutOfDomain(format!(
            "finite-difference neighbor of node {idx:?} along axis {d} leaves the grid"
        )));
    }
    let mut k = idx;
    k[d] = j as usize;
    Ok(t.eval_unchecked(&k))
}

/// Force `−z ∇T` on a charge `z` at `x`, by differences of `T` on the nodes
/// adjacent to the one `x` snaps to.
pub fn fd_force_on_particle(t: &CanonicalTensor3, x: &Point3, z: f64, scheme: FdScheme) -> Result<ForceVector> {
    let idx = t.nearest_index(x)?;
    let h: [f64; 3] = std::array::from_fn(|d| t.axes()[d].h);
    let mut f = [0.0; 3];
    if z != 0.0 {
        let center = t.eval_unchecked(&idx);
        for d in 0..3 {
            f[d] = match scheme {
                FdScheme::Backward => -z * (center - neighbor(t, idx, d, -1)?) / h[d],
                FdScheme::Central => {
                    -z * (neighbor(t, idx, d, 1)? - neighbor(t, idx, d, -1)?) / (2.0 * h[d])
                }
            };
        }
    }
    Ok(ForceVector {
        components: f,
        anchor: *x,
    })
}

/// Forces on every atom of `l`.
pub fn fd_forces(t: &CanonicalTensor3, l: &ParticleSystem, scheme: FdScheme) -> Result<Vec<ForceVector>> {
    l.centers()
        .iter()
        .zip(l.charges())
        .map(|(x, z)| fd_force_on_particle(t, x, *z, scheme))
        .collect()
}

/// Coulomb force of the charges of `m` on a charge `z` at `x`.
pub fn direct_force_on_particle(m: &ParticleSystem, x: &Point3, z: f64) -> Result<ForceVector> {
    let mut f = [0.0; 3];
    for (i, (y, q)) in m.centers().iter().zip(m.charges()).enumerate() {
        let r = sub(x, y);
        let d = norm(&r);
        if d == 0.0 {
            return Err(Error::SingularConfiguration(format!(
                "probe coincides with particle {i}"
            )));
        }
        f = add(&f, &scale(&r, q / (d * d * d)));
    }
    Ok(ForceVector {
        components: scale(&f, z),
        anchor: *x,
    })
}

/// Collective force on a rigid cluster split into translation and rotation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidForce {
    /// Sum of the radial parts, anchored at the cluster center.
    pub translational: ForceVector,
    /// Tangential forces at radius `r0` whose moment about the center is the
    /// total torque.
    pub tangential: Vec<ForceVector>,
    pub radial_parts: Vec<[f64; 3]>,
    pub tangential_parts: Vec<[f64; 3]>,
    /// `Σ (x_ℓ − x0) × F_ℓ`.
    pub torque: [f64; 3],
    pub r0: f64,
}

/// Mean distance of `centers` from `x0`.
pub fn mean_radius(centers: &[Point3], x0: &Point3) -> f64 {
    centers.iter().map(|c| norm(&sub(c, x0))).sum::<f64>() / centers.len() as f64
}

fn unit(v: &[f64; 3]) -> Option<[f64; 3]> {
    let n = norm(v);
    (n > 0.0).then(|| scale(v, 1.0 / n))
}

/// Some unit vector orthogonal to `a`, preferring the direction of `hint`.
fn orthogonal_unit(a: &[f64; 3], hint: &[f64; 3]) -> [f64; 3] {
    let Some(an) = unit(a) else {
        return unit(hint).unwrap_or([1.0, 0.0, 0.0]);
    };
    let project = |v: &[f64; 3]| sub(v, &scale(&an, dot(v, &an)));
    let candidates = [*hint, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    candidates
        .iter()
        .map(project)
        .max_by(|u, v| norm(u).total_cmp(&norm(v)))
        .and_then(|v| unit(&v))
        .expect("some axis is not parallel to a")
}

pub fn rigid_resultants(
    forces: &[ForceVector],
    centers: &[Point3],
    x0: &Point3,
    r0: f64,
    dim: Dimension,
) -> Result<RigidForce> {
    if forces.len() != centers.len() {
        return Err(Error::InvalidArgument(format!(
            "{} forces for {} centers",
            forces.len(),
            centers.len()
        )));
    }
    if forces.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidArgument(format!("reference radius must be positive, got {r0}")));
    }
    let mut radial_parts = Vec::with_capacity(forces.len());
    let mut tangential_parts = Vec::with_capacity(forces.len());
    let mut total = [0.0; 3];
    let mut torque = [0.0; 3];
    let mut first_dir = None;
    for (i, (f, c)) in forces.iter().zip(centers).enumerate() {
        let arm = sub(c, x0);
        let v = unit(&arm).ok_or_else(|| {
            Error::UndefinedDirection(format!("atom {i} sits at the rotation center"))
        })?;
        first_dir.get_or_insert(v);
        let radial = scale(&v, dot(&f.components, &v));
        let tangential = sub(&f.components, &radial);
        total = add(&total, &radial);
        torque = add(&torque, &cross(&arm, &f.components));
        radial_parts.push(radial);
        tangential_parts.push(tangential);
    }
    let e1 = orthogonal_unit(&torque, &first_dir.unwrap_or([1.0, 0.0, 0.0]));
    let tangential = match dim {
        Dimension::Planar => vec![ForceVector {
            components: scale(&cross(&torque, &e1), 1.0 / r0),
            anchor: add(x0, &scale(&e1, r0)),
        }],
        Dimension::Spatial => {
            let e2 = unit(&torque).map_or_else(|| orthogonal_unit(&e1, &[0.0, 0.0, 1.0]), |t| cross(&t, &e1));
            let half = scale(&torque, 0.5);
            [e1, e2]
                .iter()
                .map(|e| ForceVector {
                    components: scale(&cross(&half, e), 1.0 / r0),
                    anchor: add(x0, &scale(e, r0)),
                })
                .collect()
        }
    };
    Ok(RigidForce {
        translational: ForceVector {
            components: total,
            anchor: *x0,
        },
        tangential,
        radial_parts,
        tangential_parts,
        torque,
        r0,
    })
}

/// Moment of the tangential resultant about `x0`.
pub fn resultant_torque(rf: &RigidForce, x0: &Point3) -> [f64; 3] {
    rf.tangential.iter().fold([0.0; 3], |acc, f| {
        add(&acc, &cross(&sub(&f.anchor, x0), &f.components))
    })
}
