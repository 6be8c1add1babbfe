//! Polygonal scaled boundary finite element solver for two-dimensional Darcy
//! seepage, steady and transient.
//!
//! The pipeline is: build or read a [`mesh::PolygonMesh`], describe the problem
//! as a [`model::SeepageModel`], form one [`sbfem::SElementOperator`] per
//! polygon, assemble and solve with [`solver`], then sample or export the
//! result with [`recovery`].

pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod model;
pub mod recovery;
pub mod sbfem;
pub mod solver;
pub mod verification;

pub use error::{Error, Result};
