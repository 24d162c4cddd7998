//! Truncated Witt vectors, truncated displays and truncated Dieudonne modules
//! over finite F_p-algebras, with exact classification over finite fields.

pub mod cli;
pub mod dieudonne;
pub mod display;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod moduli;
pub mod ring;
pub mod selftest;
pub mod witt;

pub use error::{Error, Result};
