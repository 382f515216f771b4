//! Synthetic inputs: analytic solids and randomized BR-DF fields.

pub mod fuzz;
pub mod shapes;
