//! Elliptical tube representation (ETRep).
//!
//! A discrete elliptical tube is stored as a chain of cross-sections, each
//! expressed in its parent's frame, which makes the representation
//! invariant to rigid motions. The crate provides
//!
//! - [`geometry`]: rotations, quaternions, slerp and rotation means;
//! - [`model`]: cross-sections, the relative curvature condition (RCC),
//!   forward kinematics and ℓ1 size normalization;
//! - [`shape_space`]: the skeletal map into a convex Euclidean space and
//!   the intrinsic / non-intrinsic paths, distances and means built on it;
//! - [`stats`]: DiProPerm and per-feature permutation tests with
//!   Benjamini–Hochberg adjustment;
//! - [`simulation`]: random valid populations around a reference tube;
//! - [`io`]: JSON documents, feature CSVs and OBJ boundary meshes.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod io;
pub mod model;
pub mod rng;
pub mod shape_space;
pub mod simulation;
pub mod stats;

pub use error::{Error, Result};
pub use model::{CrossSection, ETRep, GlobalTube, ValidityReport};
