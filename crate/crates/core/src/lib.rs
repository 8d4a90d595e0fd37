// Negated comparisons like !(b > 0.0) are load-bearing: they reject NaN,
// which b <= 0.0 would wave through. Index loops over fixed 3x3 element
// matrices stay as written.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

//! Piecewise-linear finite elements for second-order elliptic problems whose
//! diffusion coefficient jumps across an internal interface.
//!
//! The crate covers the full pipeline at desk scale:
//!
//! - [`geometry`]: planar primitives and interface-curve predicates,
//! - [`meshgen`]: interface-fitted, quasi-uniform triangulations (plus a
//!   deliberately unfitted grid as a negative control),
//! - [`fem`]: P1 assembly of the weak form with per-quadrature-point
//!   coefficient branching, Dirichlet elimination, nodal interpolation,
//! - [`solver`]: diagonally preconditioned conjugate gradients,
//! - [`problems`]: manufactured exact solutions with flux-continuous jumps,
//! - [`analysis`]: split error norms, rate fitting with and without the
//!   logarithmic correction,
//! - [`study`]: the batch driver behind the `ifem` binary.

pub mod analysis;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh_io;
pub mod meshgen;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod study;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, InterfaceCurve, Point2, RegionId, Side};
pub use meshgen::{Mesh, MeshQualityReport, TriClass, VertexMarker};
