pub mod error;
pub mod logspace;
pub mod poly;
pub mod rng;
pub mod rv;

pub use error::{Error, Result};
pub use poly::{PoweredHyperedge, PoweredPolynomial};
pub use rv::Distribution;
pub mod moments;
pub mod smoothness;
pub mod tailbounds;
pub mod census;
pub mod lowerbounds;
pub mod mc;
