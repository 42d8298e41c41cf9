//! Simulation of planar cylinder processes, unions of random strips
//! `{x : |⟨v(φ), x⟩ − p| ≤ r}` positioned by a stationary point process on the
//! line, with the theoretical targets their covered area converges to in
//! growing windows.

pub mod asymptotics;
pub mod config;
pub mod cylinder;
pub mod error;
pub mod ground;
pub mod marks;
pub mod mc;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod window;

pub use asymptotics::{compute_c1, compute_c2, lln_limit, poisson_coverage, sigma_sq, VarianceConstants};
pub use config::{ExperimentConfig, Mode, Model, SCHEMA_VERSION};
pub use cylinder::{build_realization, CylinderRealization, ScanlineSpec, Strip};
pub use error::{Error, Result};
pub use ground::{GroundProcess, GroundSpec};
pub use marks::{OrientationModel, RadiusModel};
pub use mc::{run, ExperimentRecord};
pub use window::{Point2, Window};
