#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod ad;
pub mod classify;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod geometry;
pub mod sample;
pub mod tensor;
pub mod zoo;

pub use error::{Error, Result};
