//! Voxel combustion simulation and spectral fire rendering.
//!
//! The gas phase ([`fire`]) evolves velocity and a reaction coordinate on a
//! cell-centered grid; the solid phase ([`charring`]) conducts heat and
//! accumulates char on occupied cells; [`render`] composites blackbody fire,
//! smoke, char darkening and fire light over per-view background buffers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod charring;
pub mod fire;
pub mod grid;
pub mod io;
pub mod material;
pub mod occupancy;
pub mod render;
pub mod scene;
pub mod sim;
pub mod spectral;
