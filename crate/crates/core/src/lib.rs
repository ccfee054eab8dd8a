pub mod complementary;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod faults;
pub mod graph;
pub mod params;
pub mod properties;
pub mod seed;

pub use error::{Error, Result};
