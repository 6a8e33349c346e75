pub mod arith;
pub mod cayley;
pub mod ehrhart;
pub mod error;
pub mod export;
pub mod fan;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod nef;
pub mod scenario;
pub mod spheres;
pub mod transport;

pub use error::{Error, Result};
