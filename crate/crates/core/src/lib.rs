//! Statevector simulation with checked uncomputation, plus three algorithms
//! built on it: Dürr-Høyer minimum search, BHT-style collision detection and
//! uniform superposition preparation for arbitrary `M`.
//!
//! ```
//! use safeq::{amplify, Machine, Oracle};
//!
//! let mut m = Machine::new(2, 7).unwrap();
//! let oracle = Oracle::new(2, |x| x == 3);
//! assert_eq!(amplify::grover(&mut m, &oracle, 1).unwrap(), 3);
//! ```

pub mod amplify;
pub mod cli;
pub mod collision;
pub mod error;
pub mod minima;
pub mod sim;
pub mod uncompute;
pub mod unifsup;

pub use amplify::{Oracle, OracleMode};
pub use collision::{CollisionFn, CollisionInstance, SubsetTables};
pub use error::{Error, Result};
pub use sim::{Complex, Gate, Machine, Qubit, Register, StateVector, MAX_QUBITS};
pub use uncompute::Expected;
