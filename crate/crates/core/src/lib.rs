//! Range-separated tensor electrostatics for rigid protein–ligand posing.
//!
//! The long-range Coulomb potential of a particle cluster is held as a
//! low-rank canonical tensor on a Cartesian grid, so that binding energies
//! and forces on a ligand cost `O(R·L)` regardless of the protein size.

pub mod canonical;
mod cp_fit;
pub mod docking;
pub mod energy;
pub mod error;
pub mod forces;
pub mod grid;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod par;
pub mod particles;
pub mod potential;
pub mod tucker;

pub use canonical::CanonicalTensor3;
pub use error::{Error, Result};
pub use grid::{make_grid, nearest_grid_index, BoundingBox, Grid3D, Index3, Point3};
pub use par::Exec;
pub use tucker::{
    reduce_rank, reduce_rank_fitted, reduce_rank_to, rhosvd_tucker, tucker_to_canonical, CompressionReport, Tolerance,
    TuckerTensor3,
};
