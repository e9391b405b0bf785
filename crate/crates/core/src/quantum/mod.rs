//! Statevector simulation of the variational quantum circuit and its
//! parameter-shift gradients.

pub mod reference;
mod statevector;
mod vqc;

pub use num_complex::Complex64;
pub use statevector::{Gate, StateVector};
pub use vqc::{apply_ansatz, encode, VqcModel, VqcTrace};
