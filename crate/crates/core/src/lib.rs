//! Deep collocation solver for Kirchhoff thin-plate bending.
//!
//! The transverse deflection `w(x, y)` is represented by a small dense `tanh`
//! network. Its value and all partial derivatives up to order four are carried
//! through the network as [`Jet`]s, which gives the biharmonic operator and the
//! boundary operators exactly. The mean-squared residuals of the plate equation
//! and the edge conditions at random collocation points form the loss, which is
//! minimized with L-BFGS followed by Adam when the line search stalls.

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod error;
pub mod jet;
pub mod loss;
pub mod network;
pub mod optim;
pub mod physics;
pub mod problem;
pub mod run;
pub mod sampling;
pub mod train;

pub use benchmarks::{relative_l2, BenchmarkCase};
pub use error::{Error, Result};
pub use jet::Jet;
pub use loss::{compute_loss, CollocationLoss, LossBreakdown, LossWeights, ResidualScaling};
pub use network::{Architecture, GradientVector, InitScheme, Parameters};
pub use physics::{BoundaryCondition, Material, PlateState};
pub use problem::{Domain, Load, PlateProblem};
pub use sampling::CollocationSet;
pub use train::{train, TrainConfig, TrainOutcome};
