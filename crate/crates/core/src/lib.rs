//! Skill-space analytics over collections of skill-tagged documents.
//!
//! The pipeline runs presence matrix → RCA → effective use → skill
//! similarity Θ → weighted skill sets per group → skill-set similarity.
//! On top of that sit certification augmentation ([`augment`]) and impact
//! reporting ([`impact`]). Every numeric step has a loop-based twin in
//! [`oracle`]; [`engine::Engine`] switches between the two.

pub mod augment;
pub mod bench;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod impact;
pub mod matrix_io;
pub mod oracle;
pub mod rca;
pub mod simmatrix;
pub mod skillset;

pub use error::{Error, Result};

#[cfg(test)]
mod fixture_tests;
