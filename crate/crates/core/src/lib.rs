//! Discrete stochastic process models, their compilation to circuits, and
//! estimation of characteristic functions and expectations on a dense
//! statevector simulator.
//!
//! Register layout: index qubits `0..n`, the data qubit `n`, amplitude
//! estimation ancillas after that. Qubit 0 is the least significant bit.

pub mod ae;
pub mod applications;
pub mod charfn;
pub mod circuit;
pub mod error;
pub mod fourier;
pub mod io;
pub mod model;
pub mod statevector;
pub mod stats;

pub use charfn::{CharFnEstimate, Method};
pub use circuit::{Circuit, MeasurementScheme};
pub use error::{Error, Result};
pub use model::{DspModel, LevelSpec, ModelKind};
pub use statevector::{Gate, Statevector};
