//! Directions of Diophantine approximates and of lattice points in thinning
//! regions.
//!
//! The crate is organised bottom-up:
//!
//! * [`contfrac`]: exact continued fractions, convergents, circle rotations.
//! * [`sphere`]: direction sets on `S^{d-1}` with exact normalized volumes.
//! * [`lattice`]: unimodular lattices, the regions `P_T` and `R_{eps,T}`, the
//!   diagonal flow `g_t`, and lattice-point counting.
//! * [`siegel`]: Siegel transforms, Haar-random rotations and Monte Carlo
//!   spherical averages.
//! * [`experiments`]: end-to-end reproductions with JSON/CSV reports.
//! * [`config`], [`runner`] and [`acceptance`]: the reproducible front end used
//!   by the `spiraling` binary.

pub mod acceptance;
pub mod bigint_serde;
pub mod config;
pub mod contfrac;
pub mod experiments;
pub mod lattice;
pub mod runner;
pub mod siegel;
pub mod sphere;

pub use contfrac::{CFNumber, RationalInterval};
pub use lattice::{CountResult, Lattice, RegionKind, RegionSpec};
pub use sphere::{DirectionSet, Norm, UnitVector};
