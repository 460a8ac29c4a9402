//! SLH network algebra, a component catalog for an autonomous quantum
//! memory cell, and Lindblad integration of the assembled network.

pub mod components;
pub mod error;
pub mod lindblad;
pub mod network;
pub mod opalg;
pub mod slh;
pub mod verify;

pub use error::{Error, Result};
