//! Run orchestration, the HTTP/SSE API and the `cpcboard` command line.

pub mod api;
pub mod cli;
pub mod registry;

pub use registry::{Event, EventKind, Pacing, Registry, RegistryError, RunSummary};
