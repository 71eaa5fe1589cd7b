//! Truncated Fourier series on the time torus with normalized measure.
//!
//! A series stores the coefficients `ĝ_k`, `k = -N..=N`, of
//! `g(t) = Σ_k ĝ_k e^{iλ_k t}` with `λ_k = 2πk/𝒯`. Convolution on the torus
//! multiplies coefficients with unit constant, so the periodic delta has
//! every coefficient equal to one.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{OseenError, Result};
use crate::sum::{CompensatedSum, Summand};

/// Values that can be Fourier coefficients.
pub trait Coefficient:
    Summand + Add<Output = Self> + Sub<Output = Self> + Mul<Complex64, Output = Self> + PartialEq
{
    type Real: Copy;
    fn zero() -> Self {
        <Self as Summand>::zero()
    }
    fn conj(&self) -> Self;
    fn norm_sqr(&self) -> f64;
    fn re(&self) -> Self::Real;
    fn im_norm(&self) -> f64;
}

impl Coefficient for Complex64 {
    type Real = f64;
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn im_norm(&self) -> f64 {
        self.im.abs()
    }
}

impl Coefficient for Vector3<Complex64> {
    type Real = Vector3<f64>;
    fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }
    fn norm_sqr(&self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum()
    }
    fn re(&self) -> Vector3<f64> {
        self.map(|c| c.re)
    }
    fn im_norm(&self) -> f64 {
        self.map(|c| c.im).norm()
    }
}

impl Coefficient for Matrix3<Complex64> {
    type Real = Matrix3<f64>;
    fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }
    fn norm_sqr(&self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum()
    }
    fn re(&self) -> Matrix3<f64> {
        self.map(|c| c.re)
    }
    fn im_norm(&self) -> f64 {
        self.map(|c| c.im).norm()
    }
}

/// Truncated Fourier series with `2N + 1` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries<T> {
    period: f64,
    n_modes: usize,
    coeffs: Vec<T>,
}

pub type FourierScalar = FourierSeries<Complex64>;
pub type FourierField = FourierSeries<Vector3<Complex64>>;
pub type FourierTensor = FourierSeries<Matrix3<Complex64>>;

impl<T: Coefficient> FourierSeries<T> {
    pub fn zeros(period: f64, n_modes: usize) -> Self {
        Self {
            period,
            n_modes,
            coeffs: vec![<T as Coefficient>::zero(); 2 * n_modes + 1],
        }
    }

    /// Builds a series from a function of the mode index.
    pub fn from_fn(period: f64, n_modes: usize, f: impl Fn(i64) -> T) -> Self {
        let n = n_modes as i64;
        Self {
            period,
            n_modes,
            coeffs: (-n..=n).map(f).collect(),
        }
    }

    /// A single constant (mode-0) value.
    pub fn constant(period: f64, n_modes: usize, value: T) -> Self {
        let mut s = Self::zeros(period, n_modes);
        s.set_mode(0, value);
        s
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn lambda(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.period
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.n_modes as i64;
        -n..=n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of mode `k`, zero outside the truncation.
    pub fn mode(&self, k: i64) -> T {
        let n = self.n_modes as i64;
        if k.abs() > n {
            <T as Coefficient>::zero()
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    pub fn set_mode(&mut self, k: i64, value: T) {
        let n = self.n_modes as i64;
        assert!(k.abs() <= n, "mode {k} outside truncation {n}");
        self.coeffs[(k + n) as usize] = value;
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(i64, &T) -> U) -> FourierSeries<U> {
        FourierSeries {
            period: self.period,
            n_modes: self.n_modes,
            coeffs: self.modes().zip(self.coeffs.iter()).map(|(k, c)| f(k, c)).collect(),
        }
    }

    fn check_compatible<U>(&self, other: &FourierSeries<U>) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(OseenError::Shape(format!(
                "mode truncations differ: {} vs {}",
                self.n_modes, other.n_modes
            )));
        }
        if (self.period - other.period).abs() > 1e-14 * self.period.abs() {
            return Err(OseenError::Shape(format!(
                "periods differ: {} vs {}",
                self.period, other.period
            )));
        }
        Ok(())
    }

    /// Mode-wise binary combination, the torus convolution for products.
    pub fn zip_with<U: Coefficient, V: Coefficient>(
        &self,
        other: &FourierSeries<U>,
        f: impl Fn(&T, &U) -> V,
    ) -> Result<FourierSeries<V>> {
        self.check_compatible(other)?;
        Ok(FourierSeries {
            period: self.period,
            n_modes: self.n_modes,
            coeffs: self.coeffs.iter().zip(other.coeffs.iter()).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Value at time `t`.
    pub fn eval(&self, t: f64) -> T {
        let mut acc = CompensatedSum::<T>::new();
        for (k, c) in self.modes().zip(self.coeffs.iter()) {
            acc.add(*c * Complex64::from_polar(1.0, self.lambda(k) * t));
        }
        acc.value()
    }

    /// Real part of the value at `t`.
    pub fn eval_real(&self, t: f64) -> T::Real {
        self.eval(t).re()
    }

    /// `∂_t`, i.e. multiplication of mode `k` by `iλ_k`.
    pub fn time_derivative(&self) -> Self {
        self.map(|k, c| *c * Complex64::new(0.0, self.lambda(k)))
    }

    /// Steady part (projection onto mode 0).
    pub fn steady_part(&self) -> Self {
        self.map(|k, c| if k == 0 { *c } else { <T as Coefficient>::zero() })
    }

    /// Purely periodic part (all modes except 0).
    pub fn periodic_part(&self) -> Self {
        self.map(|k, c| if k == 0 { <T as Coefficient>::zero() } else { *c })
    }

    /// `max_k |ĝ_{-k} - conj(ĝ_k)|`, zero for real-valued quantities.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.modes()
            .map(|k| (self.mode(-k) - self.mode(k).conj()).norm_sqr().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.conjugate_asymmetry() <= tol
    }

    /// Replaces `ĝ_{-k}` by `conj(ĝ_k)` for `k > 0` and drops the imaginary
    /// part of mode 0.
    pub fn symmetrized(&self) -> Self {
        self.map(|k, _| {
            let a = self.mode(k);
            let b = self.mode(-k).conj();
            (a + b) * Complex64::new(0.5, 0.0)
        })
    }

    /// `L²(𝕋)` norm with normalized measure.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Uniform time grid `t_j = j𝒯/m`.
    pub fn time_grid(&self, m: usize) -> Vec<f64> {
        (0..m).map(|j| self.period * j as f64 / m as f64).collect()
    }

    /// Samples on the uniform grid of `m` points.
    pub fn sample(&self, m: usize) -> Vec<T> {
        self.time_grid(m).into_iter().map(|t| self.eval(t)).collect()
    }

    /// Discrete Fourier coefficients of uniform samples on `[0, 𝒯)`.
    /// Needs at least `2N + 1` samples.
    pub fn from_samples(period: f64, n_modes: usize, samples: &[T]) -> Result<Self> {
        let m = samples.len();
        if m < 2 * n_modes + 1 {
            return Err(OseenError::Shape(format!(
                "{m} samples cannot resolve {n_modes} modes"
            )));
        }
        Ok(Self::from_fn(period, n_modes, |k| {
            let mut acc = CompensatedSum::<T>::new();
            for (j, s) in samples.iter().enumerate() {
                let phase = -2.0 * PI * (k * j as i64).rem_euclid(m as i64) as f64 / m as f64;
                acc.add(*s * Complex64::from_polar(1.0 / m as f64, phase));
            }
            acc.value()
        }))
    }

    /// Pointwise product in time, projected back onto `N` modes through a
    /// `4N + 1` sample grid.
    pub fn time_product<U: Coefficient, V: Coefficient>(
        &self,
        other: &FourierSeries<U>,
        f: impl Fn(&T, &U) -> V,
    ) -> Result<FourierSeries<V>> {
        self.check_compatible(other)?;
        let m = 4 * self.n_modes + 1;
        let a = self.sample(m);
        let b = other.sample(m);
        let prod: Vec<V> = a.iter().zip(b.iter()).map(|(x, y)| f(x, y)).collect();
        FourierSeries::from_samples(self.period, self.n_modes, &prod)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|_, c| *c * s)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| *a + *b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| *a - *b)
    }
}

impl<T: Coefficient + Mul<T, Output = T>> FourierSeries<T> {
    /// Torus convolution `a ∗ b`: coefficients multiply.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| *a * *b)
    }
}

impl FourierScalar {
    /// The periodic delta, all coefficients one.
    pub fn delta(period: f64, n_modes: usize) -> Self {
        Self::from_fn(period, n_modes, |_| Complex64::new(1.0, 0.0))
    }

    /// `a0 + Σ_k (a_k cos λ_k t + b_k sin λ_k t)` for `k ≥ 1`.
    pub fn from_trig(
        period: f64,
        n_modes: usize,
        mean: f64,
        cos: &[(i64, f64)],
        sin: &[(i64, f64)],
    ) -> Result<Self> {
        let mut s = Self::constant(period, n_modes, Complex64::new(mean, 0.0));
        for &(k, a) in cos {
            check_trig_mode(k, n_modes)?;
            s.set_mode(k, s.mode(k) + Complex64::new(0.5 * a, 0.0));
            s.set_mode(-k, s.mode(-k) + Complex64::new(0.5 * a, 0.0));
        }
        for &(k, b) in sin {
            check_trig_mode(k, n_modes)?;
            s.set_mode(k, s.mode(k) + Complex64::new(0.0, -0.5 * b));
            s.set_mode(-k, s.mode(-k) + Complex64::new(0.0, 0.5 * b));
        }
        Ok(s)
    }

    /// Multiplies a vector series by this scalar series mode-wise.
    pub fn convolve_field(&self, field: &FourierField) -> Result<FourierField> {
        self.zip_with(field, |a, v| v * *a)
    }
}

fn check_trig_mode(k: i64, n_modes: usize) -> Result<()> {
    if k < 1 || k as usize > n_modes {
        return Err(OseenError::Shape(format!(
            "trigonometric mode {k} outside 1..={n_modes}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real_series(rng: &mut ChaCha8Rng, period: f64, n: usize) -> FourierScalar {
        let mut s = FourierScalar::zeros(period, n);
        s.set_mode(0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        for k in 1..=n as i64 {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            s.set_mode(k, c);
            s.set_mode(-k, c.conj());
        }
        s
    }

    #[test]
    fn delta_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_real_series(&mut rng, 2.0, 4);
        let d = FourierScalar::delta(2.0, 4);
        assert_eq!(d.convolve(&b).unwrap(), b);
    }

    #[test]
    fn single_mode_product_stays_in_mode() {
        let mut a = FourierScalar::zeros(1.0, 3);
        let mut b = FourierScalar::zeros(1.0, 3);
        a.set_mode(1, Complex64::new(2.0, 0.0));
        b.set_mode(1, Complex64::new(0.0, 3.0));
        let c = a.convolve(&b).unwrap();
        for k in c.modes() {
            if k == 1 {
                assert_eq!(c.mode(k), Complex64::new(0.0, 6.0));
            } else {
                assert_eq!(c.mode(k), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn convolution_matches_time_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let period = 1.5;
        let a = random_real_series(&mut rng, period, 5);
        let b = random_real_series(&mut rng, period, 5);
        let c = a.convolve(&b).unwrap();
        let m = 64;
        let dt = period / m as f64;
        for i in 0..8 {
            let t = 0.37 * i as f64;
            // (a ∗ b)(t) = (1/𝒯) ∫ a(t - s) b(s) ds, trapezoidal rule is exact
            // for trigonometric polynomials of degree below the grid size.
            let direct: f64 = (0..m)
                .map(|j| {
                    let s = j as f64 * dt;
                    a.eval(t - s).re * b.eval(s).re
                })
                .sum::<f64>()
                / m as f64;
            assert!((c.eval(t).re - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_truncation_is_shape_error() {
        let a = FourierScalar::zeros(1.0, 2);
        let b = FourierScalar::zeros(1.0, 3);
        assert!(matches!(a.convolve(&b), Err(OseenError::Shape(_))));
    }

    #[test]
    fn derivative_of_cosine() {
        let period = 2.0;
        let c = FourierScalar::from_trig(period, 2, 0.0, &[(1, 1.0)], &[]).unwrap();
        let d = c.time_derivative();
        let w = 2.0 * PI / period;
        for i in 0..10 {
            let t = 0.13 * i as f64;
            assert!((d.eval(t).re + w * (w * t).sin()).abs() < 1e-13);
            assert!(d.eval(t).im.abs() < 1e-13);
        }
        let k = FourierScalar::constant(period, 2, Complex64::new(3.0, 0.0));
        assert_eq!(k.time_derivative().l2_norm(), 0.0);
    }

    #[test]
    fn trig_constructor_and_symmetry() {
        let s = FourierScalar::from_trig(1.0, 3, 0.5, &[(1, 1.0)], &[(2, 2.0)]).unwrap();
        assert!(s.is_conjugate_symmetric(0.0));
        for i in 0..7 {
            let t = 0.11 * i as f64;
            let exact = 0.5 + (2.0 * PI * t).cos() + 2.0 * (4.0 * PI * t).sin();
            assert!((s.eval(t).re - exact).abs() < 1e-13);
        }
        assert!(FourierScalar::from_trig(1.0, 3, 0.0, &[(4, 1.0)], &[]).is_err());
    }

    #[test]
    fn sample_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_real_series(&mut rng, 1.0, 4);
        let back = FourierScalar::from_samples(1.0, 4, &a.sample(17)).unwrap();
        for k in a.modes() {
            assert!((a.mode(k) - back.mode(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn time_product_of_cosines() {
        let c = FourierScalar::from_trig(1.0, 2, 0.0, &[(1, 1.0)], &[]).unwrap();
        let sq = c.time_product(&c, |a, b| a * b).unwrap();
        // cos² = 1/2 + cos(2·)/2
        assert!((sq.mode(0).re - 0.5).abs() < 1e-14);
        assert!((sq.mode(2).re - 0.25).abs() < 1e-14);
        assert!(sq.mode(1).norm() < 1e-14);
    }

    #[test]
    fn algebraic_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_real_series(&mut rng, 1.0, 3);
        let b = random_real_series(&mut rng, 1.0, 3);
        let c = random_real_series(&mut rng, 1.0, 3);
        let ab = a.convolve(&b).unwrap();
        assert_eq!(ab, b.convolve(&a).unwrap());
        let l = ab.convolve(&c).unwrap();
        let r = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        for k in l.modes() {
            assert!((l.mode(k) - r.mode(k)).norm() < 1e-14);
        }
        assert_eq!(ab.mode(0), a.mode(0) * b.mode(0));
        assert!(ab.is_conjugate_symmetric(1e-15));
    }
}
