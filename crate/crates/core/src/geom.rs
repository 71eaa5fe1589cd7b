//! Vector aliases, the anisotropic wake weight and sampling rays.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{OseenError, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type CVec3 = Vector3<Complex64>;
pub type CMat3 = Matrix3<Complex64>;
/// First derivatives of a 3×3 field: `g[l][(i, j)] = ∂_l M_ij`.
pub type Grad3<T> = [Matrix3<T>; 3];

pub const I3: Mat3 = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);

pub fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex_vec(v: &Vec3) -> CVec3 {
    v.map(c64)
}

pub fn to_complex_mat(m: &Mat3) -> CMat3 {
    m.map(c64)
}

/// Wake weight `(|ζ||x| + ζ·x)/2`. Vanishes exactly on the ray anti-parallel
/// to `ζ`, which is the wake axis behind the body.
pub fn wake_weight(zeta: &Vec3, x: &Vec3) -> f64 {
    let w = 0.5 * (zeta.norm() * x.norm() + zeta.dot(x));
    w.max(0.0)
}

/// `max(1, ln r)` for `r > 0`.
pub fn log_plus(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(OseenError::Domain(format!("log_plus requires r > 0, got {r}")));
    }
    Ok(r.ln().max(1.0))
}

/// Sampling ray from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub label: String,
    pub direction: Vec3,
    pub radii: Vec<f64>,
}

impl Ray {
    pub fn new(label: impl Into<String>, direction: Vec3, radii: Vec<f64>) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) {
            return Err(OseenError::Domain("ray direction must be nonzero".into()));
        }
        if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OseenError::Domain(
                "ray radii must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            direction: direction / n,
            radii,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Vec3)> + '_ {
        self.radii.iter().map(move |&r| (r, self.direction * r))
    }

    /// Rejects rays that start inside a sphere of radius `circumradius`.
    pub fn check_outside(&self, circumradius: f64) -> Result<()> {
        if self.radii[0] <= circumradius {
            return Err(OseenError::Domain(format!(
                "ray '{}' starts at r = {} inside the body circumradius {}",
                self.label, self.radii[0], circumradius
            )));
        }
        Ok(())
    }
}

/// `count` radii geometrically spaced from `r_min` to `r_max` inclusive.
pub fn geometric_radii(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && r_min > 0.0 && r_max > r_min);
    let ratio = (r_max / r_min).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| r_min * ratio.powi(i as i32)).collect()
}

/// Two unit vectors completing `a` to an orthonormal frame.
pub fn orthonormal_complement(a: &Vec3) -> (Vec3, Vec3) {
    let a = a.normalize();
    let trial = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let b = (trial - a * a.dot(&trial)).normalize();
    let c = a.cross(&b);
    (b, c)
}

/// Default ray set: both wake-axis directions, two directions orthogonal to
/// `ζ` and two diagonals.
pub fn default_rays(zeta: &Vec3, radii: &[f64]) -> Vec<Ray> {
    let zh = zeta.normalize();
    let (b, c) = orthonormal_complement(&zh);
    let dirs = [
        ("upstream", zh),
        ("wake", -zh),
        ("transverse1", b),
        ("transverse2", c),
        ("diag_up", (zh + b).normalize()),
        ("diag_wake", (-zh + c).normalize()),
    ];
    dirs.iter()
        .map(|(l, d)| Ray::new(*l, *d, radii.to_vec()).expect("valid default ray"))
        .collect()
}
