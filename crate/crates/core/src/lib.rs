pub mod assets;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod preprocess;
pub mod seed;
pub mod synthetic;

pub use error::{Error, Result};
