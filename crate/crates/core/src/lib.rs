//! Root barriers for the Skorokhod embedding problem of Markov processes.
//!
//! The barrier is read off the contact set of the réduite of the obstacle
//! `μÛ 1_{t≤0} + νÛ 1_{t>0}`, computed by the dynamic-programming recursion
//! `f(t + dt) = max(P̂_dt f(t), νÛ)`, and checked by simulating hitting times.

pub mod barrier;
pub mod bm2d;
pub mod densities;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod grid;
pub mod heisenberg;
pub mod measure;
pub mod pathsim;
pub mod potential;
pub mod process;
pub mod reduite;
pub mod special;

pub use error::{Error, Result};
pub use grid::{GridFn, GridSpec1D};
pub use measure::Measure;
pub use process::{ProcessSpec, RateFunction};
