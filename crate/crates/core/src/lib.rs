pub mod analyzer;
pub mod annotation;
pub mod constraints;
pub mod corpus;
pub mod error;
pub mod features;
pub mod learning;
pub mod model;
pub mod morphotactics;
pub mod rewrite;

pub use error::{Error, Result};
