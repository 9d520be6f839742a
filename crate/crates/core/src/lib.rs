//! Reconstruction of a cavity inside a planar conductor from boundary
//! measurements.
//!
//! The forward problem is solved with a Nyström discretization of the
//! logarithmic single layer potential. From the measurement matrix the
//! generalized Pólya–Szegő tensors of the cavity are recovered, and the
//! Laurent coefficients of the exterior conformal map of the cavity follow
//! from an explicit formula in the tensor entries.

pub mod curves;
pub mod error;
pub mod gpst;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod cli;
pub mod reconstruct;
pub mod singlelayer;

pub use curves::{ellipse, from_laurent, invert_map, power_coeffs, LaurentMap, ParamCurve, C64};
pub use error::{Error, Result};
pub use gpst::{extract_moments, GpstMatrix, HarmonicBasis, MomentSequences};
pub use oracle::{laurent_inversion_oracle, moments_from_map, OracleMoments};
pub use reconstruct::{invert_moments, CoefficientVariant, ReconstructionResult};
pub use singlelayer::{BoundaryGrid, LayerSolver, MeasurementMatrix};
