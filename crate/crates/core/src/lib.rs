//! Classical ε-machines and optimal quantum models of the one-dimensional
//! nearest-neighbour Ising chain.
//!
//! The crate builds the two-state ε-machine of the chain from its transfer
//! matrix, evaluates the classical statistical complexity `C_mu` and the
//! quantum statistical complexity `C_q`, simulates the one-qubit sampling
//! circuit of the quantum model, and checks all of it against exact
//! Boltzmann enumeration of finite rings.
//!
//! ```
//! use spin_epsilon::{IsingParams, transition_matrix};
//! use spin_epsilon::classical::statistical_complexity;
//! use spin_epsilon::quantum::{build_quantum_model, quantum_statistical_complexity};
//!
//! let tm = transition_matrix(&IsingParams::new(1.0, 0.3, 2.0).unwrap());
//! let c_mu = statistical_complexity(&tm);
//! let c_q = quantum_statistical_complexity(&build_quantum_model(&tm));
//! assert!(c_q < c_mu);
//! ```

pub mod circuit;
pub mod classical;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod ising;
pub mod oracle;
pub mod quantum;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use ising::{transition_matrix, IsingParams, Spin, TransitionMatrix};
