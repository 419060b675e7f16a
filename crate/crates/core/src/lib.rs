//! Multi-qubit controlled-phase gates from a strongly coupled four-level
//! qudit network with resonator modes, enforced by the quantum Zeno effect.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod hilbert;
pub mod model;
pub mod operator;
pub mod units;
pub mod zeno;

pub use error::{Error, Result};
pub use hilbert::{BasisState, QuditLevel, SubspaceBasis, SystemLayout};
pub use operator::OperatorMatrix;
