//! Independent oracles: finite-difference PDE residuals, discrete symbol
//! inversion by FFT, and brute-force volume convolutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{OseenError, Result};
use crate::fundsol::mode_velocity;
use crate::geom::{c64, CMat3, CVec3, Mat3, Vec3, I3};
use crate::mesh::SurfaceMesh;
use crate::params::KernelParams;
use crate::par;
use crate::quad::GaussRule;
use crate::sum::{CompensatedSum, Summand};

/// A velocity/pressure pair sampled at a point: column `j` of the velocity
/// matrix is paired with pressure component `j`. Scalar scenarios use one
/// column.
pub struct PairSample {
    pub velocity: Vec<CVec3>,
    pub pressure: Vec<Complex64>,
}

/// Residual of the mode-`λ` Oseen system at a point.
#[derive(Debug, Clone, Copy)]
pub struct Residual {
    /// Largest column residual divided by that column's largest term.
    pub momentum: f64,
    /// Largest column divergence divided by that column's gradient norm.
    pub divergence: f64,
}

/// FD step for residual checks, `10⁻³|x|`.
pub fn residual_step(x: &Vec3) -> f64 {
    1e-3 * x.norm()
}

/// `|iλv̂ - νΔv̂ - ζ·∇v̂ + ∇p̂|` relative to the largest term, by fourth-order
/// central differences with step `h`. `singularities` lists points the
/// stencil must stay away from (distance at least `10h`).
pub fn pde_residual<F>(
    sampler: F,
    lambda: f64,
    x: &Vec3,
    params: &KernelParams,
    h: f64,
    singularities: &[Vec3],
) -> Result<Residual>
where
    F: Fn(&Vec3) -> Result<PairSample>,
{
    for s in singularities {
        let d = (x - s).norm();
        if d < 10.0 * h {
            return Err(OseenError::Proximity {
                dist: d,
                required: 10.0 * h,
            });
        }
    }
    let center = sampler(x)?;
    let ncol = center.velocity.len();
    let mut grad_v = vec![[CVec3::zeros(); 3]; ncol];
    let mut lap_v = vec![CVec3::zeros(); ncol];
    let mut grad_p = vec![[Complex64::new(0.0, 0.0); 3]; ncol];
    for l in 0..3 {
        let mut e = Vec3::zeros();
        e[l] = h;
        let s = [
            sampler(&(x + 2.0 * e))?,
            sampler(&(x + e))?,
            sampler(&(x - e))?,
            sampler(&(x - 2.0 * e))?,
        ];
        for j in 0..ncol {
            let v = |i: usize| s[i].velocity[j];
            let p = |i: usize| s[i].pressure[j];
            grad_v[j][l] = (v(3) - v(0) + (v(1) - v(2)) * c64(8.0)) / c64(12.0 * h);
            lap_v[j] += (-v(0) + v(1) * c64(16.0) - center.velocity[j] * c64(30.0) + v(2) * c64(16.0)
                - v(3))
                / c64(12.0 * h * h);
            grad_p[j][l] = (p(3) - p(0) + (p(1) - p(2)) * 8.0) / (12.0 * h);
        }
    }
    let mut momentum: f64 = 0.0;
    let mut divergence: f64 = 0.0;
    for j in 0..ncol {
        let t_time = center.velocity[j] * Complex64::new(0.0, lambda);
        let t_visc = lap_v[j] * c64(-params.nu);
        let t_drift = -(grad_v[j][0] * c64(params.zeta.x)
            + grad_v[j][1] * c64(params.zeta.y)
            + grad_v[j][2] * c64(params.zeta.z));
        let t_press = CVec3::new(grad_p[j][0], grad_p[j][1], grad_p[j][2]);
        let res = t_time + t_visc + t_drift + t_press;
        let scale = [t_time.norm(), t_visc.norm(), t_drift.norm(), t_press.norm()]
            .into_iter()
            .fold(0.0, f64::max);
        if scale > 0.0 {
            momentum = momentum.max(res.norm() / scale);
        }
        let div = grad_v[j][0][0] + grad_v[j][1][1] + grad_v[j][2][2];
        let gnorm = grad_v[j].iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if gnorm > 0.0 {
            divergence = divergence.max(div.norm() / gnorm);
        }
    }
    Ok(Residual {
        momentum,
        divergence,
    })
}

/// Uniform periodic grid for the discrete symbol inversion.
#[derive(Debug, Clone, Copy)]
pub struct FftGridSpec {
    /// Box is `[-L, L)³`.
    pub half_length: f64,
    pub n: usize,
    pub k: i64,
    pub params: KernelParams,
}

impl FftGridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(OseenError::InvalidParams(format!(
                "grid size must be a power of two, got {}",
                self.n
            )));
        }
        if self.half_length < 8.0 {
            return Err(OseenError::InvalidParams(format!(
                "box half-length must be >= 8, got {}",
                self.half_length
            )));
        }
        if self.k == 0 {
            return Err(OseenError::ExcludedMode);
        }
        self.params.validate()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn point(&self, idx: [usize; 3]) -> Vec3 {
        let d = self.spacing();
        Vec3::new(
            -self.half_length + idx[0] as f64 * d,
            -self.half_length + idx[1] as f64 * d,
            -self.half_length + idx[2] as f64 * d,
        )
    }
}

/// Mode kernel sampled on the periodic grid.
#[derive(Debug, Clone)]
pub struct FftField {
    pub spec: FftGridSpec,
    /// Row-major over `(i0, i1, i2)`.
    pub values: Vec<CMat3>,
}

impl FftField {
    pub fn at(&self, idx: [usize; 3]) -> CMat3 {
        let n = self.spec.n;
        self.values[(idx[0] * n + idx[1]) * n + idx[2]]
    }

    /// Grid indices with `r_min ≤ |x| ≤ r_max`.
    pub fn shell_indices(&self, r_min: f64, r_max: f64) -> Vec<[usize; 3]> {
        let n = self.spec.n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let r = self.spec.point([a, b, c]).norm();
                    if r >= r_min && r <= r_max {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }
}

fn fft3_inverse(data: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    // axis 2 is contiguous
    for chunk in data.chunks_mut(n) {
        fft.process(chunk);
    }
    for a in 0..n {
        for c in 0..n {
            for b in 0..n {
                line[b] = data[(a * n + b) * n + c];
            }
            fft.process(&mut line);
            for b in 0..n {
                data[(a * n + b) * n + c] = line[b];
            }
        }
    }
    for b in 0..n {
        for c in 0..n {
            for a in 0..n {
                line[a] = data[(a * n + b) * n + c];
            }
            fft.process(&mut line);
            for a in 0..n {
                data[(a * n + b) * n + c] = line[a];
            }
        }
    }
}

/// Stokeslet minus its Gaussian-smoothed version, `S - S∗G_ε`, where `G_ε`
/// has Fourier transform `exp(-ε²|ξ|²/4)`. Beyond a few `ε` this is the
/// dipole `ε²(3x̂x̂ - I)/(16πν|x|³)` up to Gaussian-small terms.
pub fn stokeslet_gauss_difference(x: &Vec3, nu: f64, eps: f64) -> Result<Mat3> {
    let r = x.norm();
    if !(r > 0.0) {
        return Err(OseenError::Singularity(r));
    }
    let q = r / eps;
    // Radial profile f = |x| ∗ G_ε; S∗G_ε = [(f'' + f'/r) I + (f'/r - f'') x̂x̂]/(8πν).
    let (f1_over_r, f2) = if q < 1e-2 {
        let a = 4.0 / (3.0 * PI.sqrt() * eps);
        let b = q * q / (PI.sqrt() * eps);
        (a - 4.0 * b / 15.0, a - 4.0 * b / 5.0)
    } else {
        let erf = libm::erf(q);
        let g = (-q * q).exp() / PI.sqrt();
        let f1 = erf - eps * eps * erf / (2.0 * r * r) + eps * g / r;
        let f2 = eps * eps * erf / (r * r * r) - 2.0 * eps * g / (r * r);
        (f1 / r, f2)
    };
    let xh = x / r;
    let xx = xh * xh.transpose();
    let smooth = (I3 * (f2 + f1_over_r) + xx * (f1_over_r - f2)) / (8.0 * PI * nu);
    let stokes = (I3 + xx) / (8.0 * PI * nu * r);
    Ok(stokes - smooth)
}

/// Inverse discrete Fourier transform of `(I - ξ̂ξ̂)/(ν|ξ|² + i(λ_k - ζ·ξ))`
/// on the dual grid of the box. The `ξ = 0` entry is `(2/3) I/(iλ_k)`, the
/// angular average of the projector, and the Nyquist planes are dropped.
///
/// The slowly decaying Stokes part `(I - ξ̂ξ̂)(1 - e^{-ε²|ξ|²/4})/(ν|ξ|²)`,
/// `ε = 2Δ`, is removed before the transform and restored in closed form
/// by [`stokeslet_gauss_difference`]; without this the truncation error
/// decays only like `1/n`. The restored part decays like `|x|⁻³`, as the
/// kernel itself does, so its periodic images only shift the grid mean. The grid origin holds the transformed part
/// alone.
pub fn fft_mode_oracle(spec: &FftGridSpec) -> Result<FftField> {
    spec.validate()?;
    let n = spec.n;
    let p = &spec.params;
    let lambda = p.lambda(spec.k);
    let dk = PI / spec.half_length;
    let freq = |m: usize| {
        let s = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
        s as f64 * dk
    };
    let sign = |m: usize| if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let norm = 1.0 / (2.0 * spec.half_length).powi(3);
    let eps = 2.0 * spec.spacing();
    let mut comps: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n * n * n]; 6];
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let xi = Vec3::new(freq(a), freq(b), freq(c));
                let idx = (a * n + b) * n + c;
                if a == n / 2 || b == n / 2 || c == n / 2 {
                    continue;
                }
                let phase = sign(a) * sign(b) * sign(c) * norm;
                let x2 = xi.norm_squared();
                if x2 == 0.0 {
                    let d = c64(2.0 / 3.0) / Complex64::new(0.0, lambda) * phase;
                    comps[0][idx] = d;
                    comps[3][idx] = d;
                    comps[5][idx] = d;
                    continue;
                }
                let denom = Complex64::new(p.nu * x2, lambda - p.zeta.dot(&xi));
                let split = -(-eps * eps * x2 / 4.0).exp_m1() / (p.nu * x2);
                let m = (c64(1.0) / denom - split) * phase;
                for (q, &(i, j)) in PAIRS.iter().enumerate() {
                    let proj = if i == j { 1.0 } else { 0.0 } - xi[i] * xi[j] / x2;
                    comps[q][idx] = m * proj;
                }
            }
        }
    }
    for comp in comps.iter_mut() {
        fft3_inverse(comp, n);
    }
    let mut values = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let idx = (a * n + b) * n + c;
                let g = |q: usize| comps[q][idx];
                let mut m = CMat3::new(g(0), g(1), g(2), g(1), g(3), g(4), g(2), g(4), g(5));
                let x = spec.point([a, b, c]);
                if x.norm() > 0.0 {
                    m += stokeslet_gauss_difference(&x, p.nu, eps)?.map(c64);
                }
                values.push(m);
            }
        }
    }
    Ok(FftField {
        spec: *spec,
        values,
    })
}

/// Relative L2 disagreement after subtracting the set average from both
/// sides.
pub fn mean_subtracted_rel_error(a: &[CMat3], b: &[CMat3]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().fold(CMat3::zeros(), |s, m| s + m) / c64(n);
    let mb = b.iter().fold(CMat3::zeros(), |s, m| s + m) / c64(n);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let da = x - ma;
        let db = y - mb;
        num += (da - db).iter().map(|c| c.norm_sqr()).sum::<f64>();
        den += db.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    (num / den).sqrt()
}

/// Compares the FFT oracle with a kernel evaluator on the shell
/// `r_min ≤ |x| ≤ r_max`.
pub fn compare_fft_with<F>(field: &FftField, r_min: f64, r_max: f64, kernel: F) -> Result<f64>
where
    F: Fn(&Vec3) -> Result<CMat3> + Sync + Send,
{
    let idx = field.shell_indices(r_min, r_max);
    if idx.is_empty() {
        return Err(OseenError::Domain("no grid points in comparison shell".into()));
    }
    let oracle: Vec<CMat3> = idx.iter().map(|&i| field.at(i)).collect();
    let direct = par::try_map(&idx, |&i| kernel(&field.spec.point(i)))?;
    Ok(mean_subtracted_rel_error(&oracle, &direct))
}

/// FFT oracle against `fundsol::mode_velocity` on `|x| ∈ [1, L/4]`.
pub fn fft_vs_mode_velocity(spec: &FftGridSpec) -> Result<f64> {
    let field = fft_mode_oracle(spec)?;
    let p = spec.params;
    let k = spec.k;
    compare_fft_with(&field, 1.0, spec.half_length / 4.0, move |x| mode_velocity(x, &p, k))
}

/// Ball region for brute-force convolution.
#[derive(Debug, Clone, Copy)]
pub struct BallRegion {
    pub center: Vec3,
    pub radius: f64,
}

fn bump(r: f64, a: f64) -> f64 {
    if r >= a {
        0.0
    } else {
        let q = 1.0 - (r / a).powi(2);
        q * q * q * q
    }
}

/// Near-field part `∫_{|z|<a} k(z) ρ(x - z) ψ(|z|) dz` on a spherical
/// product rule centred at `x`; the `r²` Jacobian removes the kernel
/// singularity.
fn near_field<T, K, D>(kernel: &K, density: &D, x: &Vec3, a: f64, dirs: &SurfaceMesh, radial: &GaussRule) -> Result<T>
where
    T: Summand + std::ops::Mul<f64, Output = T>,
    K: Fn(&Vec3) -> Result<T>,
    D: Fn(&Vec3) -> f64,
{
    let mut acc = CompensatedSum::<T>::new();
    for (r, wr) in radial.on(0.0, a) {
        let wb = wr * r * r * bump(r, a);
        for node in &dirs.nodes {
            let z = node.pos * r;
            let rho = density(&(x - z));
            if rho != 0.0 {
                acc.add(kernel(&z)? * (wb * node.weight * rho));
            }
        }
    }
    Ok(acc.value())
}

/// `∫_region k(x - y) ρ(y) dy` by brute force on a Cartesian grid of
/// spacing `h`. `ρ` is taken as zero outside the region.
///
/// A smooth bump `ψ` of radius `max(6h, R/4)` around `x` splits the integral: the
/// singular part `kρψ` is integrated in spherical coordinates about `x`,
/// the remainder `kρ(1 - ψ)` is bounded and summed cell by cell.
pub fn brute_conv_oracle<T, K, D>(
    kernel: K,
    density: D,
    region: &BallRegion,
    h: f64,
    points: &[Vec3],
) -> Result<Vec<T>>
where
    T: Summand + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Send + Sync,
    K: Fn(&Vec3) -> Result<T> + Sync + Send,
    D: Fn(&Vec3) -> f64 + Sync + Send,
{
    if !(h > 0.0) || h > region.radius / 4.0 {
        return Err(OseenError::InvalidParams(format!(
            "resolution h = {h} too coarse for region radius {}",
            region.radius
        )));
    }
    let a = (6.0 * h).max(0.25 * region.radius);
    let m = (region.radius / h).ceil() as i64;
    let mut cells = Vec::new();
    for i in -m..m {
        for j in -m..m {
            for k in -m..m {
                let y = region.center
                    + Vec3::new(
                        (i as f64 + 0.5) * h,
                        (j as f64 + 0.5) * h,
                        (k as f64 + 0.5) * h,
                    );
                if (y - region.center).norm() < region.radius {
                    cells.push((y, density(&y)));
                }
            }
        }
    }
    let inside = |y: &Vec3| {
        if (y - region.center).norm() < region.radius {
            density(y)
        } else {
            0.0
        }
    };
    let dirs = SurfaceMesh::sphere_gauss(Vec3::zeros(), 1.0, 16)?;
    let radial = GaussRule::new(24);
    let vol = h * h * h;
    par::try_map(points, |x| {
        let mut acc = CompensatedSum::<T>::new();
        for (y, rho) in &cells {
            let d = (x - y).norm();
            let w = rho * (1.0 - bump(d, a));
            if w != 0.0 {
                acc.add(kernel(&(x - y))? * (w * vol));
            }
        }
        let near = if region_distance(region, x) < a {
            near_field(&kernel, &inside, x, a, &dirs, &radial)?
        } else {
            <T as Summand>::zero()
        };
        Ok(acc.value() + near)
    })
}

fn region_distance(region: &BallRegion, x: &Vec3) -> f64 {
    ((x - region.center).norm() - region.radius).max(0.0)
}
