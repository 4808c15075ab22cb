pub mod cli;
pub mod conditions;
pub mod config;
pub mod counterexample;
pub mod density;
pub mod energy;
pub mod error;
pub mod jet;
pub mod kernel;
pub mod levy;
pub mod logreal;
pub mod quad;
pub mod report;
pub mod transforms;
