//! Logical randomized compiling for qudit stabilizer codes, with a dense
//! channel simulator used to check the compiled circuits.

pub mod channel;
pub mod circuit;
pub mod code;
pub mod compiler;
pub mod error;
pub mod linalg;
pub mod verifier;
pub mod weyl;

pub use error::{LrcError, Result};
pub use weyl::{chi, RootPhase, WeylOperator};
