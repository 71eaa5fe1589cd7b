//! Fundamental solutions: Laplace, pressure, Stokes, steady Oseen, the
//! drift-Helmholtz kernel and the time-periodic Oseen mode kernels.
//!
//! Gradient layout is `g[l][(i, j)] = ∂_l M_ij` throughout.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{OseenError, Result};
use crate::geom::{c64, wake_weight, CMat3, Grad3, Mat3, Vec3, I3};
use crate::params::KernelParams;
use crate::quad::{geometric_edges, GaussRule};

const FOUR_PI: f64 = 4.0 * PI;

fn check_nonzero(x: &Vec3) -> Result<f64> {
    let r = x.norm();
    if !(r > 0.0) || !r.is_finite() {
        return Err(OseenError::Singularity(r));
    }
    Ok(r)
}

fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `E(x) = 1/(4π|x|)`.
pub fn laplace_e(x: &Vec3) -> Result<f64> {
    let r = check_nonzero(x)?;
    Ok(1.0 / (FOUR_PI * r))
}

/// `P(x) = x/(4π|x|³) = -∇E(x)`.
pub fn pressure_p(x: &Vec3) -> Result<Vec3> {
    let r = check_nonzero(x)?;
    Ok(x / (FOUR_PI * r * r * r))
}

/// `∂_i P_j = (δ_ij - 3x̂_i x̂_j)/(4π|x|³)`.
pub fn grad_p(x: &Vec3) -> Result<Mat3> {
    let r = check_nonzero(x)?;
    let xh = x / r;
    Ok((I3 - 3.0 * xh * xh.transpose()) / (FOUR_PI * r * r * r))
}

/// `h[l][(i, j)] = ∂_l ∂_i P_j`.
pub fn hess_p(x: &Vec3) -> Result<Grad3<f64>> {
    let r = check_nonzero(x)?;
    let xh = x / r;
    let c = 1.0 / (FOUR_PI * r.powi(4));
    let mut h = [Mat3::zeros(); 3];
    for (l, hl) in h.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                hl[(i, j)] = c
                    * (-3.0 * (kron(i, j) * xh[l] + kron(i, l) * xh[j] + kron(j, l) * xh[i])
                        + 15.0 * xh[i] * xh[j] * xh[l]);
            }
        }
    }
    Ok(h)
}

/// Stokeslet `(I + x̂x̂)/(8πν|x|)`.
pub fn stokeslet(x: &Vec3, nu: f64) -> Result<Mat3> {
    let r = check_nonzero(x)?;
    if !(nu > 0.0) {
        return Err(OseenError::InvalidParams(format!("nu must be > 0, got {nu}")));
    }
    let xh = x / r;
    Ok((I3 + xh * xh.transpose()) / (8.0 * PI * nu * r))
}

/// `(1 - e^{-s})/s`, continuous at `s = 0`.
pub fn phi1(s: f64) -> f64 {
    if s < 1e-3 {
        1.0 - s / 2.0 + s * s / 6.0 - s * s * s / 24.0
    } else {
        -(-s).exp_m1() / s
    }
}

/// `(1 - e^{-s} - s e^{-s})/s²`, continuous at `s = 0`.
pub fn phi2(s: f64) -> f64 {
    if s < 1e-3 {
        0.5 - s / 3.0 + s * s / 8.0 - s * s * s / 30.0
    } else {
        (-(-s).exp_m1() - s * (-s).exp()) / (s * s)
    }
}

/// Steady Oseen velocity kernel.
pub fn oseen_steady(x: &Vec3, params: &KernelParams) -> Result<Mat3> {
    params.require_drift()?;
    let r = check_nonzero(x)?;
    let nu = params.nu;
    let zn = params.zeta.norm();
    let zh = params.zeta / zn;
    let xh = x / r;
    let s = wake_weight(&params.zeta, x) / nu;
    let w = xh + zh;
    Ok(I3 * ((-s).exp() / (FOUR_PI * nu * r))
        - (I3 - xh * xh.transpose()) * (phi1(s) / (8.0 * PI * nu * r))
        + (w * w.transpose()) * (zn * phi2(s) / (16.0 * PI * nu * nu)))
}

fn fd_step(r: f64) -> f64 {
    (1e-4 * r.max(1.0)).min(0.1 * r)
}

/// Fourth-order central differences of a matrix field.
pub fn fd_gradient<T, F>(x: &Vec3, h: f64, f: F) -> Result<Grad3<T>>
where
    T: nalgebra::Scalar
        + nalgebra::ClosedAddAssign
        + nalgebra::ClosedSubAssign
        + std::ops::Mul<f64, Output = T>
        + Copy,
    F: Fn(&Vec3) -> Result<nalgebra::Matrix3<T>>,
{
    let mut g: Vec<nalgebra::Matrix3<T>> = Vec::with_capacity(3);
    for l in 0..3 {
        let mut e = Vec3::zeros();
        e[l] = h;
        let fp2 = f(&(x + 2.0 * e))?;
        let fp1 = f(&(x + e))?;
        let fm1 = f(&(x - e))?;
        let fm2 = f(&(x - 2.0 * e))?;
        let d = fm2 - fp2 + (fp1 - fm1).map(|c| c * 8.0);
        g.push(d.map(|c| c * (1.0 / (12.0 * h))));
    }
    Ok([g[0], g[1], g[2]])
}

/// Gradient of the steady Oseen kernel by fourth-order central differences.
pub fn oseen_steady_grad(x: &Vec3, params: &KernelParams) -> Result<Grad3<f64>> {
    let r = check_nonzero(x)?;
    fd_gradient(x, fd_step(r), |y| oseen_steady(y, params))
}

/// Principal root `μ = sqrt(|ζ|²/(4ν²) + iλ/ν)`, `Re μ > 0` unless both
/// terms vanish.
pub fn drift_helmholtz_mu(zeta: &Vec3, nu: f64, lambda: f64) -> Complex64 {
    let m = Complex64::new(zeta.norm_squared() / (4.0 * nu * nu), lambda / nu).sqrt();
    if m.re < 0.0 {
        -m
    } else {
        m
    }
}

/// Fundamental solution of `iλ - νΔ - ζ·∇`:
/// `K_λ(x) = exp(-ζ·x/(2ν) - μ|x|)/(4πν|x|)`.
pub fn drift_helmholtz_k(x: &Vec3, params: &KernelParams, lambda: f64) -> Result<Complex64> {
    let r = check_nonzero(x)?;
    let mu = drift_helmholtz_mu(&params.zeta, params.nu, lambda);
    Ok(k_value(x, r, &params.zeta, params.nu, mu))
}

fn k_value(x: &Vec3, r: f64, zeta: &Vec3, nu: f64, mu: Complex64) -> Complex64 {
    (c64(-zeta.dot(x) / (2.0 * nu)) - mu * r).exp() / (FOUR_PI * nu * r)
}

/// `K_λ` together with its gradient.
pub fn drift_helmholtz_k_grad(
    x: &Vec3,
    params: &KernelParams,
    lambda: f64,
) -> Result<(Complex64, [Complex64; 3])> {
    let r = check_nonzero(x)?;
    let nu = params.nu;
    let mu = drift_helmholtz_mu(&params.zeta, nu, lambda);
    let k = k_value(x, r, &params.zeta, nu, mu);
    let xh = x / r;
    let g = [0, 1, 2].map(|l| k * (c64(-params.zeta[l] / (2.0 * nu) - xh[l] / r) - mu * xh[l]));
    Ok((k, g))
}

thread_local! {
    static GAUSS16: GaussRule = GaussRule::new(16);
}

/// Mode kernel at an arbitrary nonzero frequency, with gradient.
///
/// Uses `Γ̂ = K_λ I + ∇∇Φ` where `Φ = E ∗ K_λ` has the one-dimensional
/// representation `Φ(x) = (1/4πν) ∫₀¹ exp(e(u))/g(u) du`,
/// `g(u) = sqrt(u²|ζ|²/(4ν²) + iλ/ν)`, `e(u) = -u²ζ·x/(2ν) - u g(u)|x|`.
pub fn mode_kernel_lambda(
    x: &Vec3,
    zeta: &Vec3,
    nu: f64,
    lambda: f64,
    with_grad: bool,
) -> Result<(CMat3, Grad3<Complex64>)> {
    let r = check_nonzero(x)?;
    if lambda == 0.0 {
        return Err(OseenError::ExcludedMode);
    }
    let xh = x / r;
    let zx = zeta.dot(x);
    let c2 = zeta.norm_squared() / (4.0 * nu * nu);
    let il = Complex64::new(0.0, lambda / nu);
    let g_of = |u: f64| {
        let g = (c64(u * u * c2) + il).sqrt();
        if g.re < 0.0 {
            -g
        } else {
            g
        }
    };
    let g0 = g_of(0.0);
    let u_t = if c2 > 0.0 { g0.norm() / c2.sqrt() } else { 1.0 };
    let first = 0.25f64.min(1.0 / (g0.norm() * r)).min(u_t) * 0.5;
    let edges = geometric_edges(0.0, 1.0, first);

    let mut h = CMat3::zeros();
    let mut t = [CMat3::zeros(); 3];
    let proj = I3 - xh * xh.transpose();
    GAUSS16.with(|rule| {
        for w in edges.windows(2) {
            for (u, wt) in rule.on(w[0], w[1]) {
                let g = g_of(u);
                let ug = g * u;
                let ex = (c64(-u * u * zx / (2.0 * nu)) - ug * r).exp() / g * wt;
                let a = [0, 1, 2].map(|i| c64(-u * u * zeta[i] / (2.0 * nu)) - ug * xh[i]);
                let eij = |i: usize, j: usize| -ug * proj[(i, j)] / r;
                for i in 0..3 {
                    for j in 0..3 {
                        h[(i, j)] += ex * (a[i] * a[j] + eij(i, j));
                    }
                }
                if with_grad {
                    let c3 = ug / (r * r);
                    for (l, tl) in t.iter_mut().enumerate() {
                        for i in 0..3 {
                            for j in 0..3 {
                                let eijl = c3
                                    * (kron(i, j) * xh[l] + kron(i, l) * xh[j] + kron(j, l) * xh[i]
                                        - 3.0 * xh[i] * xh[j] * xh[l]);
                                tl[(i, j)] += ex
                                    * (a[l] * (a[i] * a[j] + eij(i, j))
                                        + eij(i, l) * a[j]
                                        + a[i] * eij(j, l)
                                        + eijl);
                            }
                        }
                    }
                }
            }
        }
    });
    let mu = drift_helmholtz_mu(zeta, nu, lambda);
    let k = k_value(x, r, zeta, nu, mu);
    let scale = c64(1.0 / (FOUR_PI * nu));
    let value = CMat3::identity() * k + h * scale;
    let mut grad = [CMat3::zeros(); 3];
    if with_grad {
        for l in 0..3 {
            let dk = k * (c64(-zeta[l] / (2.0 * nu) - xh[l] / r) - mu * xh[l]);
            grad[l] = CMat3::identity() * dk + t[l] * scale;
        }
    }
    Ok((value, grad))
}

/// Mode kernel `Γ̂_k(x)` of the purely periodic part, `k ≠ 0`.
pub fn mode_velocity(x: &Vec3, params: &KernelParams, k: i64) -> Result<CMat3> {
    if k == 0 {
        return Err(OseenError::ExcludedMode);
    }
    Ok(mode_kernel_lambda(x, &params.zeta, params.nu, params.lambda(k), false)?.0)
}

/// Gradient of `Γ̂_k`.
pub fn mode_velocity_grad(x: &Vec3, params: &KernelParams, k: i64) -> Result<Grad3<Complex64>> {
    if k == 0 {
        return Err(OseenError::ExcludedMode);
    }
    Ok(mode_kernel_lambda(x, &params.zeta, params.nu, params.lambda(k), true)?.1)
}

/// Closed-form mode kernel for `ζ = 0`:
/// `Γ̂ = K I + ∇∇[(E - νK)/(iλ)]` with `K = e^{-μr}/(4πνr)`.
pub fn mode_velocity_zeta0(x: &Vec3, nu: f64, lambda: f64) -> Result<CMat3> {
    let r = check_nonzero(x)?;
    if lambda == 0.0 {
        return Err(OseenError::ExcludedMode);
    }
    let mu = drift_helmholtz_mu(&Vec3::zeros(), nu, lambda);
    let em = (-mu * r).exp();
    let one_minus = -(-mu * r).exp_m1_c();
    // f(r) = (1 - e^{-μr})/(4π iλ r)
    let c = 1.0 / (Complex64::new(0.0, lambda) * FOUR_PI);
    let f1 = c * (mu * em / r - one_minus / (r * r));
    let f2 = c * (-mu * mu * em / r - mu * em * 2.0 / (r * r) + one_minus * 2.0 / (r * r * r));
    let xh = x / r;
    let xx = xh * xh.transpose();
    let k = em / (FOUR_PI * nu * r);
    Ok(CMat3::identity() * k + xx.map(c64) * f2 + (I3 - xx).map(c64) * (f1 / r))
}

trait ExpM1C {
    fn exp_m1_c(self) -> Complex64;
}

impl ExpM1C for Complex64 {
    /// `e^z - 1` without cancellation for small `|z|`.
    fn exp_m1_c(self) -> Complex64 {
        if self.norm() < 1e-3 {
            let z = self;
            z * (c64(1.0) + z * (c64(0.5) + z * (c64(1.0 / 6.0) + z / 24.0)))
        } else {
            self.exp() - 1.0
        }
    }
}

/// Per-mode data for repeated evaluation of the periodic kernel.
#[derive(Debug, Clone)]
pub struct ModeKernelCache {
    pub params: KernelParams,
    pub lambdas: Vec<f64>,
    pub mus: Vec<Complex64>,
    /// Radius beyond which `|K_{λ_k}| < tail_tol` in every direction.
    pub tail_radius: Vec<f64>,
    pub tail_tol: f64,
}

impl ModeKernelCache {
    pub fn new(params: &KernelParams) -> Result<Self> {
        Self::with_tolerance(params, 1e-10)
    }

    pub fn with_tolerance(params: &KernelParams, tail_tol: f64) -> Result<Self> {
        params.validate()?;
        let n = params.n_modes as i64;
        let lambdas: Vec<f64> = (1..=n).map(|k| params.lambda(k)).collect();
        let mus: Vec<Complex64> = lambdas
            .iter()
            .map(|&l| drift_helmholtz_mu(&params.zeta, params.nu, l))
            .collect();
        let zh = params.zeta.norm() / (2.0 * params.nu);
        let tail_radius = mus
            .iter()
            .map(|mu| {
                // Worst direction: exp(-(Re μ - |ζ|/2ν) r)/(4πνr).
                let decay = mu.re - zh;
                let bound = |r: f64| (-decay * r).exp() / (FOUR_PI * params.nu * r);
                let (mut lo, mut hi) = (1e-6, 1.0);
                while bound(hi) > tail_tol {
                    hi *= 2.0;
                }
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if bound(mid) > tail_tol {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            })
            .collect();
        Ok(Self {
            params: *params,
            lambdas,
            mus,
            tail_radius,
            tail_tol,
        })
    }

    /// `Γ̂_k` and its gradient; `k = 0` gives the steady kernel and negative
    /// `k` the conjugate of mode `-k`.
    pub fn eval(&self, k: i64, x: &Vec3) -> Result<(CMat3, Grad3<Complex64>)> {
        if k.unsigned_abs() as usize > self.params.n_modes {
            return Err(OseenError::Shape(format!(
                "mode {k} outside truncation {}",
                self.params.n_modes
            )));
        }
        if k == 0 {
            let v = oseen_steady(x, &self.params)?.map(c64);
            let g = oseen_steady_grad(x, &self.params)?.map(|m| m.map(c64));
            return Ok((v, g));
        }
        let lambda = self.lambdas[k.unsigned_abs() as usize - 1];
        let (v, g) = mode_kernel_lambda(x, &self.params.zeta, self.params.nu, lambda, true)?;
        if k > 0 {
            Ok((v, g))
        } else {
            Ok((v.map(|c| c.conj()), g.map(|m| m.map(|c| c.conj()))))
        }
    }

    /// `Γ̂_k` without the gradient.
    pub fn eval_value(&self, k: i64, x: &Vec3) -> Result<CMat3> {
        if k == 0 {
            return Ok(oseen_steady(x, &self.params)?.map(c64));
        }
        let lambda = self.lambdas[k.unsigned_abs() as usize - 1];
        let (v, _) = mode_kernel_lambda(x, &self.params.zeta, self.params.nu, lambda, false)?;
        Ok(if k > 0 { v } else { v.map(|c| c.conj()) })
    }

    /// All positive modes `Γ̂_1..Γ̂_N` at one point.
    pub fn positive_modes(&self, x: &Vec3) -> Result<Vec<CMat3>> {
        (1..=self.params.n_modes as i64).map(|k| self.eval_value(k, x)).collect()
    }
}

/// `Γ^per(t, x) = Σ_{1≤|k|≤N} e^{iλ_k t} Γ̂_k(x)`, real by conjugate pairing.
pub fn periodic_velocity(t: f64, x: &Vec3, params: &KernelParams) -> Result<Mat3> {
    let mut out = Mat3::zeros();
    for k in 1..=params.n_modes as i64 {
        let m = mode_velocity(x, params, k)?;
        let e = Complex64::from_polar(1.0, params.lambda(k) * t);
        out += (m * e).map(|c| 2.0 * c.re);
    }
    Ok(out)
}

/// Gradient of [`periodic_velocity`].
pub fn periodic_velocity_grad(t: f64, x: &Vec3, params: &KernelParams) -> Result<Grad3<f64>> {
    let mut out = [Mat3::zeros(); 3];
    for k in 1..=params.n_modes as i64 {
        let g = mode_velocity_grad(x, params, k)?;
        let e = Complex64::from_polar(1.0, params.lambda(k) * t);
        for l in 0..3 {
            out[l] += (g[l] * e).map(|c| 2.0 * c.re);
        }
    }
    Ok(out)
}

/// `Γ(t, x) = Γ^ste(x) + Γ^per(t, x)`.
pub fn full_velocity(t: f64, x: &Vec3, params: &KernelParams) -> Result<Mat3> {
    Ok(oseen_steady(x, params)? + periodic_velocity(t, x, params)?)
}

/// `‖Γ^per(·, x)‖_{L²(𝕋)}` with normalized measure, by Parseval.
pub fn periodic_l2_norm(x: &Vec3, params: &KernelParams) -> Result<f64> {
    let mut s = 0.0;
    for k in 1..=params.n_modes as i64 {
        s += 2.0 * mode_velocity(x, params, k)?.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    Ok(s.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(zeta: Vec3) -> KernelParams {
        KernelParams::new(zeta, 1.0, 1.0, 2).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, rmin: f64, rmax: f64) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n * rng.gen_range(rmin..rmax);
            }
        }
    }

    fn cmat_rel(a: &CMat3, b: &CMat3) -> f64 {
        (a - b).map(|c| c.norm()).norm() / b.map(|c| c.norm()).norm()
    }

    #[test]
    fn laplace_and_pressure_values() {
        assert!((laplace_e(&Vec3::x()).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((laplace_e(&Vec3::new(0.0, 2.0, 0.0)).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-16);
        let p = pressure_p(&Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert!((p.z - 1.0 / (16.0 * PI)).abs() < 1e-16 && p.x == 0.0 && p.y == 0.0);
        assert!(matches!(laplace_e(&Vec3::zeros()), Err(OseenError::Singularity(_))));
        assert!(pressure_p(&Vec3::zeros()).is_err());
    }

    #[test]
    fn pressure_is_minus_grad_e_and_derivatives_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..10 {
            let x = random_point(&mut rng, 0.5, 5.0);
            let p = pressure_p(&x).unwrap();
            let gp = grad_p(&x).unwrap();
            let hp = hess_p(&x).unwrap();
            assert!(gp.trace().abs() < 1e-12 * gp.norm());
            for l in 0..3 {
                let mut e = Vec3::zeros();
                e[l] = h;
                let de = (laplace_e(&(x + e)).unwrap() - laplace_e(&(x - e)).unwrap()) / (2.0 * h);
                assert!((-de - p[l]).abs() < 1e-8 * p.norm());
                let dp = (pressure_p(&(x + e)).unwrap() - pressure_p(&(x - e)).unwrap()) / (2.0 * h);
                assert!((dp - gp.row(l).transpose()).norm() < 1e-7 * gp.norm());
                let dg = (grad_p(&(x + e)).unwrap() - grad_p(&(x - e)).unwrap()) / (2.0 * h);
                assert!((dg - hp[l]).norm() < 1e-7 * hp[l].norm().max(1e-300));
            }
        }
    }

    #[test]
    fn stokeslet_values() {
        let g = stokeslet(&Vec3::x(), 1.0).unwrap();
        assert!((g[(0, 0)] - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((g[(1, 1)] - 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert!((g[(2, 2)] - 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert_eq!(g[(0, 1)], 0.0);
        let x = Vec3::new(0.3, -1.2, 0.7);
        let a = stokeslet(&x, 2.0).unwrap();
        assert!((a - a.transpose()).norm() < 1e-16);
        assert!((stokeslet(&(2.0 * x), 2.0).unwrap() * 2.0 - a).norm() < 1e-15);
    }

    #[test]
    fn oseen_steady_reference_values() {
        let p = params(Vec3::x());
        let g = oseen_steady(&-Vec3::x(), &p).unwrap();
        let expect = (I3 + Vec3::x() * Vec3::x().transpose()) / (8.0 * PI);
        assert!((g - expect).norm() < 1e-15);
        let g = oseen_steady(&Vec3::x(), &p).unwrap();
        let e1 = (-1f64).exp();
        assert!((g[(0, 0)] - (1.0 - e1) / (4.0 * PI)).abs() < 1e-15);
        assert!((g[(1, 1)] - (3.0 * e1 - 1.0) / (8.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn oseen_tends_to_stokes() {
        let p = params(1e-6 * Vec3::x());
        for x in [Vec3::x(), Vec3::new(0.0, 0.6, 0.8), Vec3::new(-0.6, 0.0, 0.8)] {
            let a = oseen_steady(&x, &p).unwrap();
            let b = stokeslet(&x, 1.0).unwrap();
            assert!((a - b).norm() / b.norm() < 1e-5);
        }
    }

    #[test]
    fn phi_series_is_continuous() {
        let below = 1e-3 * (1.0 - 1e-9);
        let above = 1e-3;
        assert!((phi1(below) - phi1(above)).abs() < 1e-12);
        assert!((phi2(below) - phi2(above)).abs() < 1e-12);
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(phi2(0.0), 0.5);
    }

    #[test]
    fn oseen_symmetry_and_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = params(Vec3::new(0.7, -0.3, 0.5));
        let pm = p.with_zeta(-p.zeta);
        for _ in 0..10 {
            let x = random_point(&mut rng, 0.5, 6.0);
            let a = oseen_steady(&x, &p).unwrap();
            assert!((a - a.transpose()).norm() < 1e-15 * a.norm());
            let b = oseen_steady(&-x, &pm).unwrap();
            assert!((a - b).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn oseen_gradient_richardson() {
        let p = params(Vec3::new(1.0, 0.2, 0.0));
        let x = Vec3::new(-1.3, 0.4, 0.9);
        let g = oseen_steady_grad(&x, &p).unwrap();
        let g2 = fd_gradient(&x, 2e-4, |y| oseen_steady(y, &p)).unwrap();
        for l in 0..3 {
            assert!((g[l] - g2[l]).norm() < 1e-9 * g[l].norm());
        }
    }

    #[test]
    fn helmholtz_kernel_examples() {
        let p = params(Vec3::x());
        let k = drift_helmholtz_k(&-Vec3::x(), &p, 0.0).unwrap();
        assert!((k.re - 1.0 / (4.0 * PI)).abs() < 1e-16 && k.im == 0.0);
        let p0 = params(Vec3::zeros());
        let k = drift_helmholtz_k(&Vec3::x(), &p0, 2.0 * PI).unwrap();
        assert!((k.norm() - (-PI.sqrt()).exp() / (4.0 * PI)).abs() < 1e-15);
        let x = Vec3::new(0.3, 0.5, -0.2);
        let a = drift_helmholtz_k(&x, &p, 3.0).unwrap();
        let b = drift_helmholtz_k(&x, &p, -3.0).unwrap();
        assert!((a - b.conj()).norm() < 1e-16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = random_point(&mut rng, 0.5, 8.0);
            let k0 = drift_helmholtz_k(&x, &p, 0.0).unwrap();
            let first = (-wake_weight(&p.zeta, &x)).exp() / (4.0 * PI * x.norm());
            assert!((k0.re - first).abs() <= 1e-12 * first);
        }
    }

    #[test]
    fn helmholtz_gradient_matches_fd() {
        let p = params(Vec3::new(0.5, 1.0, 0.0));
        let x = Vec3::new(0.4, -0.7, 1.1);
        let (_, g) = drift_helmholtz_k_grad(&x, &p, 4.0).unwrap();
        let h = 1e-6;
        for l in 0..3 {
            let mut e = Vec3::zeros();
            e[l] = h;
            let d = (drift_helmholtz_k(&(x + e), &p, 4.0).unwrap()
                - drift_helmholtz_k(&(x - e), &p, 4.0).unwrap())
                / (2.0 * h);
            assert!((d - g[l]).norm() < 1e-7 * g[l].norm());
        }
    }

    #[test]
    fn mode_kernel_zero_drift_closed_form() {
        let p = params(Vec3::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for k in [1i64, 2, -1] {
            for _ in 0..10 {
                let x = random_point(&mut rng, 0.3, 8.0);
                let a = mode_velocity(&x, &p, k).unwrap();
                let b = mode_velocity_zeta0(&x, 1.0, p.lambda(k)).unwrap();
                assert!(cmat_rel(&a, &b) < 1e-10, "k={k} x={x:?} {}", cmat_rel(&a, &b));
            }
        }
    }

    #[test]
    fn mode_kernel_conjugate_symmetry_and_excluded_mode() {
        let p = params(Vec3::x());
        let x = Vec3::new(1.0, 2.0, -0.5);
        let a = mode_velocity(&x, &p, 1).unwrap();
        let b = mode_velocity(&x, &p, -1).unwrap();
        assert!(cmat_rel(&a.map(|c| c.conj()), &b) < 1e-13);
        assert!(matches!(mode_velocity(&x, &p, 0), Err(OseenError::ExcludedMode)));
    }

    #[test]
    fn mode_kernel_gradient_matches_fd() {
        let p = params(Vec3::new(1.0, 0.0, 0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let x = random_point(&mut rng, 1.0, 8.0);
            let g = mode_velocity_grad(&x, &p, 1).unwrap();
            let fd = fd_gradient(&x, 1e-3 * x.norm(), |y| mode_velocity(y, &p, 1)).unwrap();
            for l in 0..3 {
                assert!(cmat_rel(&fd[l], &g[l]) < 1e-7);
            }
        }
    }

    #[test]
    fn mode_kernel_is_symmetric_matrix() {
        let p = params(Vec3::new(1.0, 0.5, 0.0));
        let x = Vec3::new(-2.0, 0.3, 1.0);
        let a = mode_velocity(&x, &p, 2).unwrap();
        assert!(cmat_rel(&a.transpose(), &a) < 1e-13);
    }

    #[test]
    fn periodic_velocity_properties() {
        let p = KernelParams::new(Vec3::x(), 1.0, 1.0, 1).unwrap();
        let x = Vec3::new(1.0, 1.5, 0.0);
        let a = periodic_velocity(0.0, &x, &p).unwrap();
        let b = periodic_velocity(1.0, &x, &p).unwrap();
        assert!((a - b).norm() < 1e-14 * a.norm());
        let m = 9;
        let mean: Mat3 = (0..m)
            .map(|j| periodic_velocity(j as f64 / m as f64, &x, &p).unwrap())
            .sum::<Mat3>()
            / m as f64;
        assert!(mean.norm() < 1e-14 * a.norm());
        let full_mean: Mat3 = (0..m)
            .map(|j| full_velocity(j as f64 / m as f64, &x, &p).unwrap())
            .sum::<Mat3>()
            / m as f64;
        let st = oseen_steady(&x, &p).unwrap();
        assert!((full_mean - st).norm() < 1e-14 * st.norm());
    }

    #[test]
    fn cache_matches_direct_and_tail_radius_decreases() {
        let p = KernelParams::new(Vec3::x(), 1.0, 1.0, 4).unwrap();
        let cache = ModeKernelCache::new(&p).unwrap();
        assert!(cache.tail_radius.windows(2).all(|w| w[1] < w[0]));
        let x = Vec3::new(2.0, -1.0, 0.5);
        for k in -4..=4 {
            let (v, _) = cache.eval(k, &x).unwrap();
            let d = if k == 0 {
                oseen_steady(&x, &p).unwrap().map(c64)
            } else {
                mode_velocity(&x, &p, k).unwrap()
            };
            assert!(cmat_rel(&v, &d) < 1e-14);
        }
        assert!(cache.eval(5, &x).is_err());
    }
}
