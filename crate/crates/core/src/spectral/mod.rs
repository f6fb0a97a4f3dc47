//! Eta invariants of model spectra.
//!
//! `η(s) = Σ sign(λ) |λ|^{−s}` is summed directly where it converges and
//! continued to `s = 0` through Hurwitz zeta functions for lattice spectra.
//! An independent route integrates the heat trace `Tr(A e^{−u²A²})`.

mod heat;
mod model;
mod zeta;

pub use heat::{heat_trace_eta, HeatConfig, HeatEtaResult};
pub use model::{
    eta_invariant, eta_mod_2z, eta_series, reduce_mod_2, EtaDiagnostics, EtaMethod, EtaMod2, EtaResult, SpectrumModel,
    DEFAULT_LATTICE_RADIUS, MAX_MULTIPLICITY_DEGREE,
};
pub use zeta::{bernoulli_number, bernoulli_polynomial, hurwitz_zeta, hurwitz_zeta_nonpositive, EM_CUT, EM_TERMS};
