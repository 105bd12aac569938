pub mod bounds;
pub mod error;
pub mod harness;
pub mod lp;
pub mod models;
pub mod recovery;
pub mod sketch;
pub mod sparsify;
pub mod verify;

pub use error::{Error, Result};
