//! Profile-image trait estimation toolkit.
pub mod analysis;
pub mod cli;
pub mod error;
pub mod imagefeat;
pub mod io;
pub mod pipeline;
pub mod reliability;
pub mod stats;
pub mod svr;
pub mod synth;

pub use error::{Error, Result};
