//! Hybrid quantum-classical transfer learning on a desk-scale simulator.
//!
//! A pre-extracted feature vector is rescaled to angles, encoded by a
//! tensorial feature map, processed by a real-amplitudes or
//! strong-entangling layered circuit and read out through a softmax head.
//! The crate trains these models with parameter-shift gradients and measures
//! their local effective dimension from the Fisher information.
//!
//! Numeric code is generic over [`Real`] (`f32`, `f64`); the aliases below
//! fix the common `f64` instantiations.

pub mod ansatz;
pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod effdim;
pub mod error;
pub mod grad;
pub mod hybrid;
mod linalg;
pub mod scalar;
pub mod statevec;

pub use ansatz::{AnsatzSpec, CircuitProgram, EntanglerKind, Family, Instruction, ParamTensor};
pub use error::{QtlError, Result};
pub use scalar::Real;

pub type StateVector = statevec::StateVector<f64>;
pub type Gate2x2 = statevec::Gate2x2<f64>;
pub type Params = ansatz::ParamTensor<f64>;
pub type Dataset = data::Dataset<f64>;
pub type HybridModel = hybrid::HybridModel<f64>;
pub type FisherMatrix = effdim::FisherMatrix<f64>;
pub type GradientVector = grad::GradientVector<f64>;
pub type Checkpoint = checkpoint::Checkpoint<f64>;

pub type StateVector32 = statevec::StateVector<f32>;
pub type HybridModel32 = hybrid::HybridModel<f32>;
pub type Dataset32 = data::Dataset<f32>;
