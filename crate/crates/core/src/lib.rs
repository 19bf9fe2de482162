//! Exact symbolic engine for BL-infinity and IBL-infinity algebras.
//!
//! Elements live in `EV`, the reduced symmetric algebra on words in a
//! graded vector space. Structures, morphisms, pointed maps and
//! augmentations are given by components on words and extended to `EV` by
//! the gluing rules in [`assembler`].

pub mod assembler;
pub mod basis;
pub mod catalog;
pub mod error;
pub mod ibl;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod mc;
pub mod scalar;
pub mod space;
pub mod structures;

pub use error::{Error, Result};
