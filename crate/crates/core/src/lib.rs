//! Casimir forces in piston geometries with arbitrary cross-sections.
//!
//! The crate covers special functions, billiard spectra (closed form and a
//! boundary-method Dirichlet solver for the quarter-stadium family), the
//! piston force with its Weyl and far-distance asymptotes, periodic-orbit
//! constants of the polygonal shapes and checks of the integral identities
//! behind the short-distance expansion.

pub mod numerics;
pub mod specfun;
pub mod billiards;
pub mod orbits;
pub mod casimir;
pub mod identities;
pub mod helmholtz;

pub use billiards::{
    analytic_spectrum, weyl_count, weyl_data, BilliardsError, BoundaryCondition, Level, Shape, Spectrum, SpectrumSource,
    WeylData,
};
pub use casimir::{
    delta_force, eq16_guard, force_curve, piston_force, piston_force_em, weyl_force, AsymptoteSet, CasimirError,
    ForceCurve, ForcePoint, ForceSource, GuardReport, ModeContent, TruncationPolicy, WeylTerms,
};
pub use helmholtz::{
    certify_completeness, obtain_spectrum, solve_up_to, CompletenessReport, HelmholtzError, SolverConfig, SpectrumCache,
};
pub use identities::{verify_identities, IdentityReport};
pub use orbits::{delta_force_constant, OrbitError, OrbitLattice};
