//! Exact Fock-space simulation of heralded linear-optical circuits, with the
//! fixed-gate, tunable-gate and multi-signal photonic quantum routers built
//! on top of it.

pub mod analytics;
pub mod circuit;
pub mod elements;
pub mod error;
pub mod fock;
pub mod format;
pub mod gates;
pub mod router;
pub mod verify;

pub use error::{Error, Result};
