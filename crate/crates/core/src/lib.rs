//! V-line and star transforms of planar vector fields, with the
//! inversion pipelines that recover fields, potentials and their
//! derivatives from transform data.

pub mod beam;
pub mod error;
pub mod field;
pub mod geom;
pub mod io;
pub mod poisson;
pub mod radon;
pub mod star;
pub mod transform;
pub mod vline;

pub use error::{Error, ErrorClass, Result};
pub use geom::{det2, perp, Direction, Vec2};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
