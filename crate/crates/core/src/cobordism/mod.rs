//! Conformal cobordism bookkeeping over eta invariants: the APS identity
//! for fillings with umbilic boundary, the even-integer obstruction, the
//! circle-valued invariant `Φ = exp(iπη)`, and the neck of a connected sum.

mod neck;
mod records;

pub use neck::{neck_conformal_map, NeckMap, NeckReport};
pub use records::{
    aps_identity_check, disjoint_union, obstruction_test, phi, reverse_orientation, ApsReport, ApsStatus, BoundaryEntry,
    CobordismRecord, ConformalMeta, EtaValue, ManifoldRecord, ObstructionVerdict, Phi, Provenanced, APS_SLACK,
};
