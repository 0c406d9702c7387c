//! Energy audits, the local smallness quantity Φ, singular-set candidates,
//! parabolic box counting and fractional-in-time seminorms.

mod dimension;
mod energy;
mod phi;
mod seminorm;

pub use dimension::{
    log_scales, parabolic_box_count, parabolic_dimension_estimate, DimensionError, DimensionReport, SpaceTimePoint,
};
pub use energy::{
    energy_inequality_audit, global_energy, local_energy_audit, EnergyAudit, EnergyReport, LocalAuditError,
    LocalEnergyAudit, LocalEnergyReport, ScalarTestFn, SpaceTimeBump, LOCAL_TERM_NAMES,
};
pub use phi::{
    ball_weights, candidates_from, phi, phi_scan, singular_candidates, Candidate, ParabolicCylinder, PhiData, PhiError, PhiOptions, PhiReport,
    ScanSpec,
};
pub use seminorm::{
    fractional_time_seminorm, interpolation_bound_check, seminorm_of, InterpolationReport, SeminormError,
    SeminormReport, DEFAULT_EXPONENT,
};
