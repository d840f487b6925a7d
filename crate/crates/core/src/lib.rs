//! Bootstrap percolation toolkit.
//!
//! Implements exact stable-direction geometry for two-dimensional update
//! families, classification into the three universality classes, closure
//! engines with machine-checkable growth certificates, the certified
//! difficulty search, a Set Cover reduction generator/verifier, and a Monte
//! Carlo critical-probability estimator.

pub mod difficulty;
pub mod dynamics;
pub mod family;
pub mod geometry;
pub mod montecarlo;
pub mod reduction;
pub mod stability;

pub use difficulty::{
    direction_difficulty, family_difficulty, replay_certificate_file, verify_witness,
    CertificateFile, Difficulty, DifficultyError, DifficultyResult, DifficultyStatus,
    FamilyDifficulty, SearchBudget, Witness,
};
pub use dynamics::{
    closure_1d, closure_finite, half_plane_closure, induced_1d, replay_certificate, BoundMode,
    ClosureBudget, ClosureOutcome, ClosureStatus, DynamicsError, GrowthCertificate,
    HalfPlaneContext, InfectionState, OneDFamily, Region,
};
pub use family::{named_family, FamilyError, FamilyWarning, Rule, UpdateFamily};
pub use geometry::{
    ccw_compare, unstable_arc, Arc, ArcSet, Component, Direction, GeometryError, LatticePoint,
    Side,
};
pub use montecarlo::{estimate_pc, percolation_frequency, sample_percolation, PcEstimate};
pub use reduction::{
    check_w_rigidity, optimal_cover, predicted_alpha, reduce, solve_set_cover_bruteforce,
    verify_reduction_upper_bound, ReductionError, ReductionReport, SetCoverInstance,
};
pub use stability::{
    classify, critical_semicircle_candidates, stability_profile, Classification, StabilityError,
    StabilityProfile,
};
