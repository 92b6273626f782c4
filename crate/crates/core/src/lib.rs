//! Phase transitions of block-sparse signal recovery.
//!
//! The crate bundles the pieces needed to predict and measure when block
//! (group) sparse vectors can be recovered from random Gaussian
//! measurements `y = A x`:
//!
//! * [`numerics`]: chi-square moments, quadrature and scalar solvers;
//! * [`model`]: block-sparse priors, instances and reproducible RNG streams;
//! * [`shrinkage`]: block soft thresholding, the spike-and-sphere Bayes rule
//!   and its hard-threshold limit;
//! * [`state_evolution`]: the scalar MSE recursion that tracks AMP;
//! * [`phase_transition`]: minimax MSE, the group-LASSO transition curve and
//!   its small-δ asymptotics, and the least-favorable prior analysis;
//! * [`amp`]: approximate message passing with block denoisers;
//! * [`experiments`]: Monte Carlo sweeps and empirical transition fits;
//! * [`cli`]: the `blocksparse` command-line front end.

pub mod amp;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numerics;
pub mod phase_transition;
pub mod shrinkage;
pub mod state_evolution;

pub use error::{Error, Result};
