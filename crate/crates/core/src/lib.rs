pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod mode;
pub mod model;
pub mod params;
pub mod protocol;
pub mod tomography;

pub use error::{Error, Result};
