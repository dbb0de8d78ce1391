#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod families;
pub mod numkit;
pub mod operators;
pub mod recovery;
pub mod sampling;

pub use error::{GopError, Result};
