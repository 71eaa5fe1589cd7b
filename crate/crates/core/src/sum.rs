//! Compensated (Neumaier) summation over scalars, complex numbers and small
//! fixed-size vectors/tensors. Every surface and volume quadrature in the
//! crate reduces through [`CompensatedSum`] in node index order, so results are
//! reproducible bit for bit regardless of how evaluation points are scheduled.

use nalgebra::{SMatrix, Scalar};
use num_complex::Complex64;

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// A value that can be accumulated lane by lane with error compensation.
pub trait Summand: Copy {
    fn zero() -> Self;
    fn accumulate(sum: &mut Self, comp: &mut Self, x: &Self);
    fn combine(sum: &Self, comp: &Self) -> Self;
}

impl Summand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn accumulate(sum: &mut Self, comp: &mut Self, x: &Self) {
        neumaier(sum, comp, *x);
    }
    fn combine(sum: &Self, comp: &Self) -> Self {
        sum + comp
    }
}

impl Summand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn accumulate(sum: &mut Self, comp: &mut Self, x: &Self) {
        neumaier(&mut sum.re, &mut comp.re, x.re);
        neumaier(&mut sum.im, &mut comp.im, x.im);
    }
    fn combine(sum: &Self, comp: &Self) -> Self {
        sum + comp
    }
}

impl<T: Summand + Scalar, const R: usize, const C: usize> Summand for SMatrix<T, R, C> {
    fn zero() -> Self {
        SMatrix::from_element(T::zero())
    }
    fn accumulate(sum: &mut Self, comp: &mut Self, x: &Self) {
        for ((s, c), v) in sum.iter_mut().zip(comp.iter_mut()).zip(x.iter()) {
            T::accumulate(s, c, v);
        }
    }
    fn combine(sum: &Self, comp: &Self) -> Self {
        sum.zip_map(comp, |s, c| T::combine(&s, &c))
    }
}

impl<T: Summand, const N: usize> Summand for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn accumulate(sum: &mut Self, comp: &mut Self, x: &Self) {
        for i in 0..N {
            T::accumulate(&mut sum[i], &mut comp[i], &x[i]);
        }
    }
    fn combine(sum: &Self, comp: &Self) -> Self {
        std::array::from_fn(|i| T::combine(&sum[i], &comp[i]))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T: Summand> {
    sum: T,
    comp: T,
}

impl<T: Summand> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Summand> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        T::accumulate(&mut self.sum, &mut self.comp, &x);
    }

    pub fn value(&self) -> T {
        T::combine(&self.sum, &self.comp)
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Summand, I: IntoIterator<Item = T>>(items: I) -> T {
    let mut acc = CompensatedSum::new();
    for x in items {
        acc.add(x);
    }
    acc.value()
}
