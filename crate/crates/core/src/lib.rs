//! Position-dependent-mass (PDM) classical systems, the nonlocal point
//! transformation onto constant-mass reference systems, closed-form
//! solutions for the catalogued families, and numerical checks tying them
//! together.

pub mod document;
pub mod dynamics;
pub mod error;
pub mod function;
pub mod integrator;
pub mod models;
pub mod numerics;
pub mod output;
pub mod solutions;
pub mod transform;
pub mod verify;

pub use dynamics::{
    energy, estimate_period, integrate_pdm, integrate_reference, pushforward, InitialState, ReferenceTrajectory,
    Trajectory,
};
pub use document::ModelDocument;
pub use error::{PdmError, Result};
pub use function::{DifferentiableFn, Interval};
pub use integrator::{IntegratorOptions, SampleGrid};
pub use models::{build_model, FamilyTag, ModelFamily, PdmSystem, Sign};
pub use solutions::{omega_effective, ClosedFormSolution};
pub use transform::{catalog_map, check_compatibility, reference_potential, NonlocalMap};
pub use verify::{verify_family, CheckResult, VerifyOptions, VerifyReport};
