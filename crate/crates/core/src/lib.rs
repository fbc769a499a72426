pub mod algebra;
pub mod bundle;
pub mod cone;
pub mod contact;
pub mod error;
pub mod jet;
pub mod kernel;
pub mod linalg;
pub mod models;
pub mod sampling;
pub mod triple;
pub mod verifier;

pub use error::{GeomError, Result};
