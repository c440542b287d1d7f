//! Configuration, field files and exports.

pub mod config;
pub mod export;
pub mod field;

pub use config::{ConfigMap, PositivityChoice, RunConfig};
pub use field::{FieldFile, Payload};
