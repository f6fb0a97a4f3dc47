//! Levi-Civita connection, curvature and the conformal decomposition of a chart metric.
//!
//! Index conventions: `R(∂_c, ∂_d)∂_b = R^a_{bcd} ∂_a`, `Ric_{bd} = R^a_{bad}`,
//! Schouten `P = (Ric - S g / (2(n-1))) / (n-2)`, Weyl `W = Rm - P ⊙ g`
//! (Kulkarni–Nomizu), Cotton `C_{abc} = ∇_c P_{ab} - ∇_b P_{ac}`.

mod conformal;
mod flatness;
mod metric;
mod tensors;

pub use conformal::{conformal_rescale, connection_difference, connection_difference_direct, ConformalFactor};
pub use flatness::{classify_conformally_flat, FlatnessConfig, FlatnessCriterion, FlatnessReport, FlatnessVerdict};
pub use metric::{cholesky, invert_jets, ChartMetric, MetricField, Rescaled, ScalarField};
pub use tensors::{christoffel, curvature_package, norm_all_lower, CurvaturePackage, LocalGeometry};
