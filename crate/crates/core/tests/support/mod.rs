//! Helpers shared by the integration suites.
#![allow(dead_code)]

pub mod equivalence;
pub mod gen;
pub mod goldens;
pub mod invariants;
pub mod oracle;
