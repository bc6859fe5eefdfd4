//! Discrete X-ray transform on `ℤ^d` and its exact inversions.
//!
//! Every lattice point `z` of a ball is paired with one lattice line `γ_z`
//! through it. The data `{P f(γ_z)}` has exactly as many entries as unknowns
//! and determines `f` by sweeping shells from the outside in.

pub mod continuum;
pub mod counting;
pub mod error;
pub mod lattice;
pub mod radius;
pub mod rays;
pub mod recon;
pub mod sieve;
pub mod transform;

pub use error::{Error, Result};
pub use lattice::{primitive, Direction, LatticePoint};
pub use radius::{Radius, Rational};
pub use rays::{gamma_z, gamma_z_plane, Plane, Ray, RayKey};
pub use recon::{recon_shells, recon_shells_weighted, ReconPlan};
pub use transform::{FamilyDescriptor, GridFunction, Sinogram, WeightModel};
