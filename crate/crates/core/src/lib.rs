pub mod assembly;
pub mod bounds;
pub mod eigensolve;
pub mod error;
pub mod exact1d;
pub mod geometry;
pub mod mixed_dn;
pub mod robin;
pub mod sparse;

pub use error::{Error, Result};
