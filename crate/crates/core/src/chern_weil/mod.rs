//! Chern–Weil forms in the Cartan formalism.
//!
//! Frames are orthonormalized coordinate vectors, `∇e_b = e_a ⊗ ω^a_b` and
//! `Ω = dω + ω∧ω`. Forms carry jet coefficients, so exterior derivatives
//! are exact up to the jet order. Only the first Pontryagin form is
//! implemented, in dimensions 4 and 5, with `L₁ = p₁/3`.

mod cartan;
mod forms;
mod pontryagin;
mod transgression;

pub use cartan::{connection_and_curvature, CartanData, ConnectionForms, CurvatureForms, FrameField};
pub use forms::{combinations, Form, FormField, FormSample, JetForm};
pub use pontryagin::{
    integrate_l_form, integrate_l_form_improper, l_form, l_form_field, pontryagin_conformal_check,
    pontryagin_density, pontryagin_form, pontryagin_from_weyl, pontryagin_sample, ConformalPontryaginReport,
    PontryaginSample,
};
pub use transgression::{
    boundary_transgression_integral, stokes_balance, theta_matrix, transgression, transgression_check, AnalyticCollar,
    StokesReport, TransgressionPoint, TransgressionReport, DEFAULT_T_ORDER,
};
