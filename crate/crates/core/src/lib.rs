//! Simulation of debris-perturbed terahertz inter-satellite links and
//! onboard debris sensing from channel-state statistics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod experiments;
pub mod link;
pub mod material;
pub mod mimo;
pub mod propagation;
pub mod rng;
pub mod scene;
pub mod sensing;

pub use error::{Error, Result};
pub use material::{Breakpoints, MaterialProperties};
pub use propagation::{ComplexGain, Polarization};
pub use scene::{DebrisClass, DebrisObject, DebrisScene, LinkGeometry, Mechanism, PathGeometry, SceneConfig};
