pub mod chart;
pub mod chern_weil;
pub mod cobordism;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod hypersurface;
pub mod io;
pub mod par;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
