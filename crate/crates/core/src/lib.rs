pub mod blowup;
pub mod decay;
pub mod energetics;
pub mod error;
pub mod grid;
pub mod history;
pub mod integrator;
pub mod kernel;
pub mod oracle;
pub mod roots;
pub mod runner;
pub mod verify;
pub mod wellconst;

pub use error::{Error, Result};
