//! B-Rep distance functions.
//!
//! A solid with labeled faces is stored as one signed distance field plus
//! one unsigned distance field per face. Marching Cubes extracts the zero
//! level set; the per-vertex minimal face then partitions it, and a
//! per-triangle three-way rule recovers B-Rep edges and vertices.

pub mod brep;
pub mod csg;
pub mod encode;
pub mod error;
pub mod grid;
pub mod io;
pub mod mct;
pub mod metrics;
pub mod mesh;
pub mod pipeline;
pub mod postproc;
pub mod synth;

pub use error::{Error, Result};

pub type Point = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
