pub mod cg;
pub mod error;
pub mod fracops;
pub mod energy;
pub mod grid;
pub mod io;
pub mod mpa;
pub mod par;
pub mod problem;
pub mod sampling;
pub mod spaces;
pub mod verify;
pub mod special;

pub use error::{Error, Hypothesis, Result};
pub use grid::{forward_transform, inverse_transform, Grid, RealField, SpectralField};
