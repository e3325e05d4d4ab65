//! Long-time dynamics of a high-gain quantum free-electron laser.
//!
//! The library covers four layers:
//!
//! * [`special`] — self-contained Jacobi elliptic functions and the complete
//!   elliptic integral of the first kind (AGM-based).
//! * [`dynamics`] — the collective two-level ladder Hamiltonian, its exact
//!   propagation from a Fock seed, and photon-number observables.
//! * [`ensemble`] — mixture-averaged observables for coherent and thermal
//!   seed fields.
//! * [`analytic`] — the closed-form elliptic approximation for the mean
//!   photon number, with saturation intensity and length on and off
//!   resonance.
//! * [`lab`] — laboratory-frame parameter conversion, beam-quality and
//!   decoherence budgets, and a feasibility verdict for SASE vs seeded
//!   operation.

pub mod analytic;
pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod lab;
pub mod special;

pub use analytic::{AnalyticCurveParams, CubicRoots, SaturationMode};
pub use config::SystemConfig;
pub use dynamics::{
    AmplitudeVector, ConservedCharges, PhotonDistribution, PhotonStatistics, Propagator, Spectrum,
    TridiagonalHamiltonian,
};
pub use ensemble::{EnsembleRunner, InitialFieldState, TruncatedDistribution};
pub use error::Error;
pub use lab::{DerivedParams, FeasibilityReport, LabParams, PhysicalConstants, Verdict};
pub use special::EllipticModulus;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
