pub mod bergman;
pub mod error;
mod fft;
pub mod geometry;
pub mod groups;
pub mod harmonic;
pub mod integrate;
pub mod special;
pub mod spectrum;
pub mod symbols;

pub use error::{Error, Result};
