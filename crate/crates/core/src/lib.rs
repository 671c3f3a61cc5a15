pub mod error;
pub mod gf;

pub use error::{Error, Result};
pub mod ring_a;
pub mod useries;
pub mod exec;
pub mod index;
pub mod powersums;
pub mod shuffle;
pub mod chen;
pub mod acceptance;
pub mod linalg;
pub mod relations;
pub mod motive;
