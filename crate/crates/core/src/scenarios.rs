//! Exact exterior solutions of the homogeneous time-periodic Oseen system,
//! built from singularities placed inside a spherical body.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OseenError, Result};
use crate::fourier::{FourierField, FourierScalar, FourierTensor};
use crate::fundsol::{grad_p, laplace_e, pressure_p, ModeKernelCache};
use crate::geom::{c64, to_complex_mat, to_complex_vec, CMat3, CVec3, Grad3, Vec3};
use crate::mesh::SurfaceMesh;
use crate::params::{KernelParams, ParamsFile};
use crate::potentials::{BoundaryData, VelocitySampler};
use crate::verify::PairSample;

/// Largest allowed distance of a singularity from the body centre, relative
/// to the body radius.
pub const MAX_DEPTH: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub enum Singularity {
    /// `v = Γ^ste(x − y₀)a`, `p = P(x − y₀)·a`.
    SteadyOseenlet { location: Vec3, strength: Vec3 },
    /// Response to the force `2a cos(λ_k t) δ_{y₀}`: mode `±k` only.
    PeriodicOseenlet { k: i64, location: Vec3, strength: Vec3 },
    /// `v = q(t)P(x − y₀)`, `p = q'(t)E(x − y₀) + q(t)ζ·P(x − y₀)`.
    PulsatingSource { location: Vec3, strength: FourierScalar },
}

impl Singularity {
    pub fn location(&self) -> Vec3 {
        match self {
            Self::SteadyOseenlet { location, .. }
            | Self::PeriodicOseenlet { location, .. }
            | Self::PulsatingSource { location, .. } => *location,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereBody {
    pub center: Vec3,
    pub radius: f64,
}

impl Default for SphereBody {
    fn default() -> Self {
        Self {
            center: Vec3::zeros(),
            radius: 1.0,
        }
    }
}

/// Fourier coefficients of a scenario at one point.
#[derive(Debug, Clone)]
pub struct ScenarioModes {
    pub velocity: FourierField,
    pub pressure: FourierScalar,
    /// Jacobian `∂_j v_i`.
    pub jacobian: FourierTensor,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: KernelParams,
    pub body: SphereBody,
    pub singularities: Vec<Singularity>,
    cache: ModeKernelCache,
}

impl Scenario {
    pub fn new(params: KernelParams, body: SphereBody, singularities: Vec<Singularity>) -> Result<Self> {
        params.validate()?;
        if !(body.radius > 0.0) {
            return Err(OseenError::InvalidParams("body radius must be positive".into()));
        }
        for s in &singularities {
            let d = (s.location() - body.center).norm();
            if d > MAX_DEPTH * body.radius {
                return Err(OseenError::Domain(format!(
                    "singularity at distance {d} from the centre of a body of radius {}",
                    body.radius
                )));
            }
            match s {
                Singularity::SteadyOseenlet { .. } => params.require_drift()?,
                Singularity::PeriodicOseenlet { k, .. } => {
                    if *k == 0 || k.unsigned_abs() as usize > params.n_modes {
                        return Err(OseenError::InvalidParams(format!(
                            "periodic oseenlet mode {k} must be nonzero and at most {}",
                            params.n_modes
                        )));
                    }
                }
                Singularity::PulsatingSource { strength, .. } => {
                    if strength.n_modes() != params.n_modes || strength.period() != params.period {
                        return Err(OseenError::Shape(
                            "source strength does not match the kernel truncation".into(),
                        ));
                    }
                    if !strength.is_conjugate_symmetric(1e-14) {
                        return Err(OseenError::Domain("source strength must be real".into()));
                    }
                }
            }
        }
        let cache = ModeKernelCache::new(&params)?;
        Ok(Self {
            params,
            body,
            singularities,
            cache,
        })
    }

    pub fn cache(&self) -> &ModeKernelCache {
        &self.cache
    }

    /// Icosphere mesh of the body at refinement `level`.
    pub fn mesh(&self, level: u32) -> Result<SurfaceMesh> {
        SurfaceMesh::sphere(self.body.center, self.body.radius, level)
    }

    pub fn locations(&self) -> Vec<Vec3> {
        self.singularities.iter().map(|s| s.location()).collect()
    }

    fn check_point(&self, x: &Vec3) -> Result<()> {
        for s in &self.singularities {
            let d = (x - s.location()).norm();
            if !(d > 0.0) {
                return Err(OseenError::Singularity(d));
            }
        }
        Ok(())
    }

    /// Velocity, pressure and velocity Jacobian coefficients at `x`.
    pub fn modes(&self, x: &Vec3) -> Result<ScenarioModes> {
        self.check_point(x)?;
        let (period, n) = (self.params.period, self.params.n_modes);
        let mut v = FourierField::zeros(period, n);
        let mut p = FourierScalar::zeros(period, n);
        let mut jac = FourierTensor::zeros(period, n);
        let mut add = |k: i64, dv: CVec3, dp: Complex64, dj: CMat3| {
            v.set_mode(k, v.mode(k) + dv);
            p.set_mode(k, p.mode(k) + dp);
            jac.set_mode(k, jac.mode(k) + dj);
        };
        for s in &self.singularities {
            let z = x - s.location();
            match s {
                Singularity::SteadyOseenlet { strength, .. } => {
                    let (kv, g) = self.cache.eval(0, &z)?;
                    let a = to_complex_vec(strength);
                    let pa = pressure_p(&z)?.dot(strength);
                    add(0, kv * a, c64(pa), jacobian(&g, &a));
                }
                Singularity::PeriodicOseenlet { k, strength, .. } => {
                    let (kv, g) = self.cache.eval(*k, &z)?;
                    let a = to_complex_vec(strength);
                    let pa = c64(pressure_p(&z)?.dot(strength));
                    let (v1, j1) = (kv * a, jacobian(&g, &a));
                    add(*k, v1, pa, j1);
                    add(-*k, v1.map(|c| c.conj()), pa, j1.map(|c| c.conj()));
                }
                Singularity::PulsatingSource { strength, .. } => {
                    let pv = pressure_p(&z)?;
                    let e = laplace_e(&z)?;
                    let gp = to_complex_mat(&grad_p(&z)?);
                    let zp = self.params.zeta.dot(&pv);
                    for k in -(n as i64)..=n as i64 {
                        let q = strength.mode(k);
                        if q.norm_sqr() == 0.0 {
                            continue;
                        }
                        let lam = self.params.lambda(k);
                        add(
                            k,
                            to_complex_vec(&pv) * q,
                            q * (Complex64::new(0.0, lam) * e + zp),
                            gp * q,
                        );
                    }
                }
            }
        }
        Ok(ScenarioModes {
            velocity: v,
            pressure: p,
            jacobian: jac,
        })
    }

    pub fn eval_velocity(&self, t: f64, x: &Vec3) -> Result<Vec3> {
        Ok(self.modes(x)?.velocity.eval_real(t))
    }

    pub fn eval_pressure(&self, t: f64, x: &Vec3) -> Result<f64> {
        Ok(self.modes(x)?.pressure.eval_real(t))
    }

    pub fn eval_grad_velocity(&self, t: f64, x: &Vec3) -> Result<crate::geom::Mat3> {
        Ok(self.modes(x)?.jacobian.eval_real(t))
    }

    /// Traces of `v` and of the traction `2νD(v)n − pn` at the mesh nodes,
    /// with `n` pointing into the body.
    pub fn boundary_data(&self, mesh: &SurfaceMesh) -> Result<BoundaryData> {
        let nu = self.params.nu;
        let per_node: Vec<(FourierField, FourierField)> = mesh
            .nodes
            .iter()
            .map(|node| {
                let m = self.modes(&node.pos)?;
                let n = to_complex_vec(&-node.normal);
                let traction = m.jacobian.zip_with(&m.pressure, |j, p| {
                    (j + j.transpose()) * n * c64(nu) - n * *p
                })?;
                Ok((m.velocity, traction))
            })
            .collect::<Result<_>>()?;
        let (v_b, traction) = per_node.into_iter().unzip();
        Ok(BoundaryData {
            v_b,
            traction: Some(traction),
            tensor_trace: None,
        })
    }

    /// Mode-`k` sample for the residual oracle.
    pub fn pair_sample(&self, k: i64, x: &Vec3) -> Result<PairSample> {
        let m = self.modes(x)?;
        Ok(PairSample {
            velocity: vec![m.velocity.mode(k)],
            pressure: vec![m.pressure.mode(k)],
        })
    }

    pub fn from_file_data(data: ScenarioFile) -> Result<Self> {
        let params = KernelParams::try_from(data.params)?;
        let BodyFile::Sphere { radius, center } = data.body;
        let body = SphereBody {
            center: Vec3::from(center),
            radius,
        };
        let sings = data
            .singularities
            .into_iter()
            .map(|s| s.into_singularity(&params))
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, body, sings)
    }

    pub fn to_file_data(&self) -> ScenarioFile {
        ScenarioFile {
            params: ParamsFile::from(&self.params),
            body: BodyFile::Sphere {
                radius: self.body.radius,
                center: self.body.center.into(),
            },
            singularities: self.singularities.iter().map(SingularityFile::from).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file_data(serde_json::from_str(text)?)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `J[(i, l)] = Σ_j ∂_lΓ_ij a_j`.
fn jacobian(g: &Grad3<Complex64>, a: &CVec3) -> CMat3 {
    let mut j = CMat3::zeros();
    for l in 0..3 {
        j.set_column(l, &(g[l] * a));
    }
    j
}

impl VelocitySampler for Scenario {
    fn sample(&self, y: &Vec3) -> Result<(FourierField, FourierTensor)> {
        let m = self.modes(y)?;
        Ok((m.velocity, m.jacobian))
    }
}

/// Source strength `q₀`, oseenlet strengths and locations used by
/// [`make_flux_pair`], relative to a body of unit radius at the origin.
pub const FLUX_PAIR_Q0: f64 = 0.8;
pub const FLUX_PAIR_Q1: f64 = 1.0;

/// Two scenarios differing only in the source strength: `q₀ + q₁cos(2πt/𝒯)`
/// and `q₀`. Both carry a steady and a mode-1 oseenlet.
pub fn make_flux_pair(params: &KernelParams, body: SphereBody) -> Result<(Scenario, Scenario)> {
    let r = body.radius;
    let at = |v: [f64; 3]| body.center + Vec3::from(v) * r;
    let oseenlets = vec![
        Singularity::SteadyOseenlet {
            location: at([0.1, -0.2, 0.15]),
            strength: Vec3::new(1.0, 0.6, -0.4),
        },
        Singularity::PeriodicOseenlet {
            k: 1,
            location: at([-0.15, 0.1, 0.2]),
            strength: Vec3::new(0.5, -0.8, 0.7),
        },
    ];
    let src = at([0.2, 0.1, -0.25]);
    let q_dep = FourierScalar::from_trig(params.period, params.n_modes, FLUX_PAIR_Q0, &[(1, FLUX_PAIR_Q1)], &[])?;
    let q_const = FourierScalar::from_trig(params.period, params.n_modes, FLUX_PAIR_Q0, &[], &[])?;
    let with = |q: FourierScalar| {
        let mut s = oseenlets.clone();
        s.push(Singularity::PulsatingSource {
            location: src,
            strength: q,
        });
        Scenario::new(*params, body, s)
    };
    Ok((with(q_dep)?, with(q_const)?))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyFile {
    Sphere { radius: f64, center: [f64; 3] },
}

/// Real trigonometric polynomial `mean + Σ cos_k cos(λ_k t) + Σ sin_k sin(λ_k t)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct TrigFile {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<(i64, f64)>,
    #[serde(default)]
    pub sin: Vec<(i64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SingularityFile {
    SteadyOseenlet { location: [f64; 3], strength: [f64; 3] },
    PeriodicOseenlet { k: i64, location: [f64; 3], strength: [f64; 3] },
    PulsatingSource { location: [f64; 3], strength: TrigFile },
}

impl SingularityFile {
    fn into_singularity(self, params: &KernelParams) -> Result<Singularity> {
        Ok(match self {
            Self::SteadyOseenlet { location, strength } => Singularity::SteadyOseenlet {
                location: location.into(),
                strength: strength.into(),
            },
            Self::PeriodicOseenlet { k, location, strength } => Singularity::PeriodicOseenlet {
                k,
                location: location.into(),
                strength: strength.into(),
            },
            Self::PulsatingSource { location, strength } => Singularity::PulsatingSource {
                location: location.into(),
                strength: FourierScalar::from_trig(
                    params.period,
                    params.n_modes,
                    strength.mean,
                    &strength.cos,
                    &strength.sin,
                )?,
            },
        })
    }
}

impl From<&Singularity> for SingularityFile {
    fn from(s: &Singularity) -> Self {
        match s {
            Singularity::SteadyOseenlet { location, strength } => Self::SteadyOseenlet {
                location: (*location).into(),
                strength: (*strength).into(),
            },
            Singularity::PeriodicOseenlet { k, location, strength } => Self::PeriodicOseenlet {
                k: *k,
                location: (*location).into(),
                strength: (*strength).into(),
            },
            Singularity::PulsatingSource { location, strength } => {
                let n = strength.n_modes() as i64;
                let trig = TrigFile {
                    mean: strength.mode(0).re,
                    cos: (1..=n)
                        .map(|k| (k, 2.0 * strength.mode(k).re))
                        .filter(|c| c.1 != 0.0)
                        .collect(),
                    sin: (1..=n)
                        .map(|k| (k, -2.0 * strength.mode(k).im))
                        .filter(|c| c.1 != 0.0)
                        .collect(),
                };
                Self::PulsatingSource {
                    location: (*location).into(),
                    strength: trig,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub params: ParamsFile,
    pub body: BodyFile,
    pub singularities: Vec<SingularityFile>,
}
