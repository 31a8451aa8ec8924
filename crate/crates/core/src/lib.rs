pub mod bench;
pub mod cli;
pub mod confidence;
pub mod corridor;
pub mod error;
pub mod gmm;
pub mod linalg;
pub mod model;
pub mod planners;
pub mod plot;
pub mod robots;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
