//! Brute-force verification of convolution bounds for the fundamental
//! solutions against anisotropically decaying densities.
//!
//! `(|K| ∗ g)(x) = ∫ |K|(z) g(x − z) dz` is integrated in spherical
//! coordinates about `x` with the polar axis along the wake direction `−ζ̂`,
//! graded toward both poles. The kernel norm is tabulated once on the
//! `z`-grid and reused for every evaluation point.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OseenError, Result};
use crate::fundsol::{grad_p, oseen_steady, oseen_steady_grad, ModeKernelCache};
use crate::geom::{log_plus, orthonormal_complement, wake_weight, Mat3, Ray, Vec3};
use crate::params::KernelParams;
use crate::par;
use crate::quad::{geometric_edges, GaussRule};
use crate::sum::{compensated_sum, CompensatedSum};

/// The convolution estimates that can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvCase {
    /// `|Γ^ste| ∗ g ≤ C[(1+|x|)(1+𝓈)]^{-1}` for `A + min{1,B} > 3`.
    SteadyValue,
    /// `|∇Γ^ste| ∗ g ≤ C[(1+|x|)(1+𝓈)]^{-3/2}` for `A + min{1,B} > 3`, `A + B ≥ 7/2`.
    SteadyGrad,
    /// As `SteadyGrad` with an extra `log₊|x|`, for `A + min{1,B} = 3`.
    SteadyGradLog,
    /// `|∇Γ^ste| ∗ g ≤ C(1+|x|)^{-(A+B)/2}(1+𝓈)^{-(A+B-1)/2}` for `A + B < 3`.
    SteadyGradSlow,
    /// `(χ∇P) ∗ g` with `g = [(1+|x|)(1+𝓈)]^{-2}` and `χ` excluding `B_1`; the
    /// convolution is signed, its Frobenius norm is compared with the bound.
    Pressure,
    /// `|∇Γ^per| ∗ g ≤ C(1+|x|)^{-min{A,4}}`.
    PeriodicGrad,
    /// `|Γ^per| ∗ g ≤ C(1+|x|)^{-3}` for `A > 3`.
    PeriodicValue,
}

impl ConvCase {
    pub const ALL: [ConvCase; 7] = [
        ConvCase::SteadyValue,
        ConvCase::SteadyGrad,
        ConvCase::SteadyGradLog,
        ConvCase::SteadyGradSlow,
        ConvCase::Pressure,
        ConvCase::PeriodicGrad,
        ConvCase::PeriodicValue,
    ];

    /// Exponents `(A, B)` used when none are given.
    pub fn default_exponents(self) -> (f64, f64) {
        match self {
            ConvCase::SteadyValue | ConvCase::SteadyGrad => (3.0, 1.0),
            ConvCase::SteadyGradLog => (2.0, 1.5),
            ConvCase::SteadyGradSlow => (2.0, 0.5),
            ConvCase::Pressure => (2.0, 2.0),
            ConvCase::PeriodicGrad | ConvCase::PeriodicValue => (4.0, 0.0),
        }
    }

    /// Rejects exponents outside the hypotheses of the estimate.
    pub fn check(self, a: f64, b: f64) -> Result<()> {
        let bad = |msg: &str| Err(OseenError::InvalidParams(format!("{self:?} with A={a}, B={b}: {msg}")));
        if !(a.is_finite() && b.is_finite()) || b < 0.0 {
            return bad("exponents must be finite and B ≥ 0");
        }
        let m = a + b.min(1.0);
        let steady = |ok: bool, msg: &str| if a < 2.0 { bad("requires A ≥ 2") } else if ok { Ok(()) } else { bad(msg) };
        match self {
            ConvCase::SteadyValue => steady(m > 3.0, "requires A + min{1,B} > 3"),
            ConvCase::SteadyGrad => steady(m > 3.0 && a + b >= 3.5, "requires A + min{1,B} > 3 and A + B ≥ 7/2"),
            ConvCase::SteadyGradLog => steady((m - 3.0).abs() < 1e-12 && a + b >= 3.5, "requires A + min{1,B} = 3 and A + B ≥ 7/2"),
            ConvCase::SteadyGradSlow => steady(a + b < 3.0, "requires A + B < 3"),
            ConvCase::Pressure => {
                if a == 2.0 && b == 2.0 {
                    Ok(())
                } else {
                    bad("the density is fixed to [(1+|x|)(1+𝓈)]^{-2}")
                }
            }
            ConvCase::PeriodicGrad => if a > 0.0 && b == 0.0 { Ok(()) } else { bad("requires A > 0 and B = 0") },
            ConvCase::PeriodicValue => if a > 3.0 && b == 0.0 { Ok(()) } else { bad("requires A > 3 and B = 0") },
        }
    }

    /// The asserted bound without its constant. `with_log` only affects
    /// [`ConvCase::SteadyGradLog`].
    pub fn bound(self, a: f64, b: f64, x: &Vec3, zeta: &Vec3, with_log: bool) -> Result<f64> {
        let r = x.norm();
        let s = wake_weight(zeta, x);
        let aniso = (1.0 + r) * (1.0 + s);
        Ok(match self {
            ConvCase::SteadyValue => aniso.powi(-1),
            ConvCase::SteadyGrad => aniso.powf(-1.5),
            ConvCase::SteadyGradLog => aniso.powf(-1.5) * if with_log { log_plus(r)? } else { 1.0 },
            ConvCase::SteadyGradSlow => (1.0 + r).powf(-(a + b) / 2.0) * (1.0 + s).powf(-(a + b - 1.0) / 2.0),
            ConvCase::Pressure => {
                let l = log_plus(r)?;
                r.powi(-2) * (1.0f64).min((1.0 + s).powi(-2) * l + l / r + 1.0 / (1.0 + s))
            }
            ConvCase::PeriodicGrad => (1.0 + r).powf(-a.min(4.0)),
            ConvCase::PeriodicValue => (1.0 + r).powi(-3),
        })
    }

    fn inner_radius(self) -> f64 {
        if self == ConvCase::Pressure {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvQuadOptions {
    /// Gauss–Legendre points per panel, in radius and polar angle.
    pub n_gauss: usize,
    /// Smallest polar panel at each pole.
    pub theta_first: f64,
    pub n_phi: usize,
    pub r_first: f64,
}

impl Default for ConvQuadOptions {
    fn default() -> Self {
        Self {
            n_gauss: 8,
            theta_first: 0.005,
            n_phi: 64,
            r_first: 0.01,
        }
    }
}

/// One evaluation point of a bound check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvSample {
    pub ray: String,
    pub r: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvReport {
    pub case: ConvCase,
    pub a: f64,
    pub b: f64,
    pub domain_radius: f64,
    pub samples: Vec<ConvSample>,
    pub sup_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ConvSpec {
    pub case: ConvCase,
    pub a: f64,
    pub b: f64,
    pub rays: Vec<Ray>,
    /// The density is cut off outside this ball.
    pub domain_radius: f64,
    pub with_log: bool,
    pub quad: ConvQuadOptions,
}

impl ConvSpec {
    /// Default exponents, rays `upstream`, `wake`, `transverse1`, `diag_wake`
    /// and radii 2 to 32.
    pub fn new(case: ConvCase, zeta: &Vec3) -> Self {
        let (a, b) = case.default_exponents();
        let radii = vec![2.0, 4.0, 8.0, 16.0, 32.0];
        let rays = crate::geom::default_rays(zeta, &radii)
            .into_iter()
            .filter(|r| ["upstream", "wake", "transverse1", "diag_wake"].contains(&r.label.as_str()))
            .collect();
        Self {
            case,
            a,
            b,
            rays,
            domain_radius: 64.0,
            with_log: true,
            quad: default_quad(case),
        }
    }
}

/// Spherical product rule about the origin, polar axis `axis`.
fn z_grid(axis: &Vec3, r_in: f64, r_out: f64, q: &ConvQuadOptions) -> Vec<(Vec3, f64)> {
    let (e1, e2) = orthonormal_complement(axis);
    let gauss = GaussRule::new(q.n_gauss);
    let half: Vec<f64> = geometric_edges(0.0, PI / 2.0, q.theta_first);
    let mut theta_edges = half.clone();
    theta_edges.extend(half.iter().rev().skip(1).map(|t| PI - t));
    let mut dirs = Vec::new();
    for w in theta_edges.windows(2) {
        for (th, wt) in gauss.on(w[0], w[1]) {
            for j in 0..q.n_phi {
                let ph = 2.0 * PI * j as f64 / q.n_phi as f64;
                let u = axis * th.cos() + (e1 * ph.cos() + e2 * ph.sin()) * th.sin();
                dirs.push((u, wt * th.sin() * 2.0 * PI / q.n_phi as f64));
            }
        }
    }
    let mut out = Vec::new();
    for w in geometric_edges(r_in, r_out, q.r_first.max(r_in * 0.05)).windows(2) {
        for (r, wr) in gauss.on(w[0], w[1]) {
            for (u, wd) in &dirs {
                out.push((u * r, wr * r * r * wd));
            }
        }
    }
    out
}

fn density(a: f64, b: f64, zeta: &Vec3, y: &Vec3) -> f64 {
    (1.0 + y.norm()).powf(-a) * (1.0 + wake_weight(zeta, y)).powf(-b)
}

/// Kernel of `case` at `z`: the signed matrix `χ∇P` for the pressure case,
/// otherwise the kernel norm stored in entry `(0, 0)`.
fn kernel_entry(case: ConvCase, z: &Vec3, params: &KernelParams, cache: &ModeKernelCache) -> Result<Mat3> {
    let frob = |g: &[Mat3; 3]| g.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
    let scalar = |v: f64| {
        let mut m = Mat3::zeros();
        m[(0, 0)] = v;
        m
    };
    Ok(match case {
        ConvCase::SteadyValue => scalar(oseen_steady(z, params)?.norm()),
        ConvCase::SteadyGrad | ConvCase::SteadyGradLog | ConvCase::SteadyGradSlow => {
            scalar(frob(&oseen_steady_grad(z, params)?))
        }
        ConvCase::Pressure => {
            if z.norm() < 1.0 {
                Mat3::zeros()
            } else {
                grad_p(z)?
            }
        }
        ConvCase::PeriodicGrad | ConvCase::PeriodicValue => {
            // L¹(𝕋) norm of Γ^per or ∇Γ^per from its modes on a 4N+1 grid.
            let n = params.n_modes as i64;
            let modes: Vec<_> = (1..=n).map(|k| cache.eval(k, z)).collect::<Result<_>>()?;
            let m = 4 * params.n_modes + 1;
            let vals = (0..m).map(|j| {
                let t = params.period * j as f64 / m as f64;
                let mut v = Mat3::zeros();
                let mut g = [Mat3::zeros(); 3];
                for (i, (mv, mg)) in modes.iter().enumerate() {
                    let e = Complex64::from_polar(2.0, params.lambda(i as i64 + 1) * t);
                    v += (mv * e).map(|c| c.re);
                    for l in 0..3 {
                        g[l] += (mg[l] * e).map(|c| c.re);
                    }
                }
                if case == ConvCase::PeriodicValue {
                    v.norm()
                } else {
                    frob(&g)
                }
            });
            scalar(compensated_sum(vals) / m as f64)
        }
    })
}

/// Quadrature defaults per case; the periodic kernels are costly and nearly
/// isotropic, so they get a coarser grid.
pub fn default_quad(case: ConvCase) -> ConvQuadOptions {
    match case {
        ConvCase::PeriodicGrad | ConvCase::PeriodicValue => ConvQuadOptions {
            n_gauss: 6,
            theta_first: 0.1,
            n_phi: 24,
            r_first: 0.05,
        },
        _ => ConvQuadOptions::default(),
    }
}

struct KernelTable {
    grid: Vec<(Vec3, f64)>,
    weighted: Vec<Mat3>,
}

impl KernelTable {
    fn new(spec: &ConvSpec, params: &KernelParams, r_out: f64) -> Result<Self> {
        let cache = ModeKernelCache::new(params)?;
        let axis = -params.zeta.normalize();
        let grid = z_grid(&axis, spec.case.inner_radius(), r_out, &spec.quad);
        let weighted = par::try_map(&grid, |(z, w)| -> Result<Mat3> {
            Ok(kernel_entry(spec.case, z, params, &cache)? * *w)
        })?;
        Ok(Self { grid, weighted })
    }

    fn report(&self, spec: &ConvSpec, params: &KernelParams, domain_radius: f64) -> Result<ConvReport> {
        let points: Vec<(String, f64, Vec3)> = spec
            .rays
            .iter()
            .flat_map(|ray| ray.points().map(move |(r, x)| (ray.label.clone(), r, x)))
            .collect();
        let zeta = params.zeta;
        let samples = par::try_map(&points, |(label, r, x)| -> Result<ConvSample> {
            let mut acc = CompensatedSum::<Mat3>::new();
            for ((z, _), kw) in self.grid.iter().zip(&self.weighted) {
                let y = x - z;
                if y.norm() < domain_radius {
                    acc.add(kw * density(spec.a, spec.b, &zeta, &y));
                }
            }
            let value = acc.value().norm();
            let bound = spec.case.bound(spec.a, spec.b, x, &zeta, spec.with_log)?;
            Ok(ConvSample {
                ray: label.clone(),
                r: *r,
                value,
                bound,
                ratio: value / bound,
            })
        })?;
        let sup_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        Ok(ConvReport {
            case: spec.case,
            a: spec.a,
            b: spec.b,
            domain_radius,
            samples,
            sup_ratio,
        })
    }
}

fn check_spec(spec: &ConvSpec, params: &KernelParams) -> Result<f64> {
    spec.case.check(spec.a, spec.b)?;
    params.require_drift()?;
    let rmax = spec
        .rays
        .iter()
        .flat_map(|r| r.radii.iter().copied())
        .fold(0.0, f64::max);
    if spec.domain_radius <= rmax {
        return Err(OseenError::InvalidParams(format!(
            "domain radius {} must exceed the largest sample radius {rmax}",
            spec.domain_radius
        )));
    }
    Ok(rmax)
}

/// Evaluates the convolution at every ray point and divides by the asserted
/// bound. The density is cut off outside `spec.domain_radius`.
pub fn verify_conv_bounds(spec: &ConvSpec, params: &KernelParams) -> Result<ConvReport> {
    let rmax = check_spec(spec, params)?;
    KernelTable::new(spec, params, spec.domain_radius + rmax)?.report(spec, params, spec.domain_radius)
}

/// Sup ratios on the given domain and on the doubled domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainStability {
    pub base: ConvReport,
    pub doubled: ConvReport,
    /// `max/min` of the two sup ratios.
    pub variation: f64,
}

pub fn domain_stability(spec: &ConvSpec, params: &KernelParams) -> Result<DomainStability> {
    let rmax = check_spec(spec, params)?;
    let table = KernelTable::new(spec, params, 2.0 * spec.domain_radius + rmax)?;
    let base = table.report(spec, params, spec.domain_radius)?;
    let doubled = table.report(spec, params, 2.0 * spec.domain_radius)?;
    let (a, b) = (base.sup_ratio, doubled.sup_ratio);
    Ok(DomainStability {
        variation: a.max(b) / a.min(b),
        base,
        doubled,
    })
}
