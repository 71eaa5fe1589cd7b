//! Physical and truncation parameters shared by every kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{OseenError, Result};
use crate::geom::Vec3;

/// Drift velocity ζ, viscosity ν, period 𝒯 and mode truncation N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub zeta: Vec3,
    pub nu: f64,
    pub period: f64,
    pub n_modes: usize,
}

/// File representation of [`KernelParams`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub zeta: [f64; 3],
    pub nu: f64,
    pub period: f64,
    pub n_modes: usize,
}

impl KernelParams {
    pub fn new(zeta: Vec3, nu: f64, period: f64, n_modes: usize) -> Result<Self> {
        let p = Self {
            zeta,
            nu,
            period,
            n_modes,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(OseenError::InvalidParams(format!("nu must be > 0, got {}", self.nu)));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(OseenError::InvalidParams(format!(
                "period must be > 0, got {}",
                self.period
            )));
        }
        if self.n_modes < 1 {
            return Err(OseenError::InvalidParams("n_modes must be >= 1".into()));
        }
        if !self.zeta.iter().all(|c| c.is_finite()) {
            return Err(OseenError::InvalidParams("zeta must be finite".into()));
        }
        Ok(())
    }

    /// Errors unless ζ ≠ 0, as required by the Oseen-specific kernels.
    pub fn require_drift(&self) -> Result<()> {
        if self.zeta.norm() == 0.0 {
            return Err(OseenError::InvalidParams(
                "operation requires a nonzero drift velocity zeta".into(),
            ));
        }
        Ok(())
    }

    /// Angular frequency `2πk/𝒯` of mode `k`.
    pub fn lambda(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.period
    }

    pub fn with_modes(&self, n_modes: usize) -> Self {
        Self { n_modes, ..*self }
    }

    pub fn with_zeta(&self, zeta: Vec3) -> Self {
        Self { zeta, ..*self }
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            zeta: Vec3::x(),
            nu: 1.0,
            period: 1.0,
            n_modes: 8,
        }
    }
}

impl TryFrom<ParamsFile> for KernelParams {
    type Error = OseenError;

    fn try_from(f: ParamsFile) -> Result<Self> {
        KernelParams::new(Vec3::from(f.zeta), f.nu, f.period, f.n_modes)
    }
}

impl From<&KernelParams> for ParamsFile {
    fn from(p: &KernelParams) -> Self {
        Self {
            zeta: [p.zeta.x, p.zeta.y, p.zeta.z],
            nu: p.nu,
            period: p.period,
            n_modes: p.n_modes,
        }
    }
}
