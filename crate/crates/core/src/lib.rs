//! Steady and time-periodic Oseen fundamental solutions, boundary and volume
//! integral representations of exterior time-periodic flow past a translating
//! body, far-field expansions, and numerical decay-rate verification.

pub mod asymptotics;
pub mod error;
pub mod fourier;
pub mod fundsol;
pub mod geom;
pub mod mesh;
pub(crate) mod par;
pub mod params;
pub mod potentials;
pub mod quad;
pub mod scenarios;
pub mod sum;
pub mod verify;
pub mod volume;

pub use error::{OseenError, Result};
pub use fourier::{FourierField, FourierScalar, FourierSeries, FourierTensor};
pub use geom::{log_plus, wake_weight, Ray, Vec3};
pub use mesh::{QuadNode, QuadratureRule, SurfaceMesh};
pub use params::KernelParams;
