//! Counterexample search for conjectured upper bounds on the Laplacian
//! spectral radius of graphs.

pub mod bounds;
pub mod canon;
pub mod enumerate;
pub mod env;
pub mod error;
pub mod graph;
pub mod graph6;
pub mod linalg;
pub mod policy;
pub mod search;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{generate_star, generate_windmill, DegreeProfile, Graph};
