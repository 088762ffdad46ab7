pub mod channels;
pub mod classifiers;
pub mod entropy;
pub mod error;
pub mod fidelity;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod states;
pub mod theorems;

pub use error::{Error, Result};
