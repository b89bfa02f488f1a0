//! Periodic Fourier grid: differentiation, Helmholtz inversion, left-anchored
//! antiderivatives and Sobolev norms.
//!
//! The box is `[-L, L)` sampled at `n` equispaced nodes `x_j = -L + j dx`.
//! Coefficients use the normalisation `f_hat_k = (1/n) sum_j f_j e^{-i k x_j}`
//! so that `int f^2 dx = 2L sum_k |f_hat_k|^2`.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::ops::{Deref, DerefMut, Index, IndexMut};
use std::slice::SliceIndex;
use std::sync::Arc;

/// Real samples of a function on a [`Grid`].
#[derive(Clone, PartialEq, Default)]
pub struct Field<T>(Vec<T>);

impl<T: Scalar> Field<T> {
    pub fn new(values: Vec<T>) -> Self {
        Field(values)
    }

    pub fn zeros(n: usize) -> Self {
        Field(vec![T::zero(); n])
    }

    pub fn constant(n: usize, v: T) -> Self {
        Field(vec![v; n])
    }

    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T) -> T) -> Self {
        Field(grid.nodes().map(f).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: T, x: &Self) {
        debug_assert_eq!(self.len(), x.len());
        for (s, &v) in self.0.iter_mut().zip(&x.0) {
            *s += a * v;
        }
    }

    pub fn sup_norm(&self) -> T {
        self.0.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn max(&self) -> T {
        self.0.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn min(&self) -> T {
        self.0.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn mean(&self) -> T {
        self.0.iter().copied().sum::<T>() / from_usize(self.len())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Periodic shift by `s` nodes: `out[j] = self[j - s]`.
    pub fn shifted(&self, s: usize) -> Self {
        let n = self.len();
        let mut out = self.0.clone();
        out.rotate_right(s % n.max(1));
        Field(out)
    }
}

impl<T> Deref for Field<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Field<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T, I: SliceIndex<[T]>> Index<I> for Field<T> {
    type Output = I::Output;
    fn index(&self, i: I) -> &I::Output {
        &self.0[i]
    }
}

impl<T, I: SliceIndex<[T]>> IndexMut<I> for Field<T> {
    fn index_mut(&mut self, i: I) -> &mut I::Output {
        &mut self.0[i]
    }
}

impl<T: fmt::Debug> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(n={}, ", self.0.len())?;
        f.debug_list().entries(self.0.iter().take(6)).finish()?;
        write!(f, "...)")
    }
}

/// Parameters of the `X^{s+1}` energy norm `|f|_{H^s}^2 + mu m |f_x|_{H^s}^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec<T> {
    pub s: T,
    pub mu: T,
    pub m: T,
}

/// Uniform periodic grid with cached FFT plans.
///
/// Cloning is cheap; plans are shared read-only behind `Arc`.
#[derive(Clone)]
pub struct Grid<T: Scalar> {
    n: usize,
    half_length: T,
    dx: T,
    wavenumbers: Arc<Vec<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("half_length", &self.half_length)
            .finish()
    }
}

impl<T: Scalar> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

impl<T: Scalar> Grid<T> {
    /// `n` must be a power of two and at least 16.
    pub fn new(n: usize, half_length: T) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_length > T::zero()) || !half_length.is_finite() {
            return Err(Error::InvalidInput(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = T::PI() / half_length;
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                base * lit(m)
            })
            .collect();
        Ok(Grid {
            n,
            half_length,
            dx: lit::<T>(2.0) * half_length / from_usize(n),
            wavenumbers: Arc::new(wavenumbers),
            forward,
            inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn x(&self, j: usize) -> T {
        -self.half_length + from_usize::<T>(j) * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    /// Signed angular wavenumber of FFT bin `j`.
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    pub fn zeros(&self) -> Field<T> {
        Field::zeros(self.n)
    }

    pub fn check(&self, f: &Field<T>) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, grid has {}",
                f.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Normalised Fourier coefficients. The phase is relative to `x_0 = -L`,
    /// which is harmless for every diagonal operator used here.
    pub fn forward(&self, f: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = f.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward.process(&mut buf);
        let inv_n = T::one() / from_usize(self.n);
        for c in &mut buf {
            *c *= inv_n;
        }
        buf
    }

    /// Inverse of [`Grid::forward`]; the imaginary part is discarded.
    pub fn inverse(&self, mut spec: Vec<Complex<T>>) -> Field<T> {
        self.inverse.process(&mut spec);
        Field(spec.into_iter().map(|c| c.re).collect())
    }

    /// Multiply the spectrum by `symbol(k, bin)` and transform back.
    pub fn apply_symbol(&self, f: &[T], symbol: impl Fn(T, usize) -> Complex<T>) -> Field<T> {
        let mut spec = self.forward(f);
        for (j, c) in spec.iter_mut().enumerate() {
            *c *= symbol(self.wavenumbers[j], j);
        }
        self.inverse(spec)
    }

    /// `(i k)^order` with the Nyquist bin zeroed for odd orders.
    pub fn derivative_symbol(&self, k: T, bin: usize, order: u32) -> Complex<T> {
        if order % 2 == 1 && bin == self.n / 2 {
            return Complex::new(T::zero(), T::zero());
        }
        let ik = Complex::new(T::zero(), k);
        let mut out = Complex::new(T::one(), T::zero());
        for _ in 0..order {
            out *= ik;
        }
        out
    }

    /// Trigonometric-interpolation derivative of order 1..=4 (0 copies).
    pub fn derivative(&self, f: &Field<T>, order: u32) -> Field<T> {
        assert!(order <= 4, "derivative order {order} > 4");
        if order == 0 {
            return f.clone();
        }
        self.apply_symbol(f, |k, bin| self.derivative_symbol(k, bin, order))
    }

    /// Derivatives of orders `1..=orders.len()` in one forward transform.
    pub fn derivatives(&self, f: &Field<T>, max_order: u32) -> Vec<Field<T>> {
        let spec = self.forward(f);
        (1..=max_order)
            .map(|order| {
                let s = spec
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| c * self.derivative_symbol(self.wavenumbers[j], j, order))
                    .collect();
                self.inverse(s)
            })
            .collect()
    }

    /// Derivative of a field that is flat (but possibly at different levels)
    /// near both box edges, such as a left-anchored antiderivative.
    ///
    /// The linear ramp joining the two edge levels is removed first; what is
    /// left has matching values and slopes across the periodic seam.
    pub fn derivative_tailed(&self, f: &Field<T>, order: u32) -> Field<T> {
        if order == 0 {
            return f.clone();
        }
        let left = f[0];
        let right = f[self.n - 1];
        let slope = (right - left) / (lit::<T>(2.0) * self.half_length);
        let detrended = Field::from_fn(self, |x| x).zip_map(f, |x, v| {
            v - left - slope * (x + self.half_length)
        });
        let mut d = self.derivative(&detrended, order);
        if order == 1 {
            for v in d.iter_mut() {
                *v += slope;
            }
        }
        d
    }

    /// Zero every mode with `|bin| > n/3` (2/3 rule).
    pub fn dealias_spectrum(&self, spec: &mut [Complex<T>]) {
        let cutoff = self.n / 3;
        for (j, c) in spec.iter_mut().enumerate() {
            let m = if j <= self.n / 2 { j } else { self.n - j };
            if m > cutoff {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
    }

    pub fn dealias(&self, f: &Field<T>) -> Field<T> {
        let mut spec = self.forward(f);
        self.dealias_spectrum(&mut spec);
        self.inverse(spec)
    }

    /// Solve `(1 - kappa d_xx) w = f` on the periodic box.
    pub fn helmholtz_solve(&self, f: &Field<T>, kappa: T) -> Field<T> {
        assert!(kappa >= T::zero(), "helmholtz_solve needs kappa >= 0");
        if kappa == T::zero() {
            return f.clone();
        }
        self.apply_symbol(f, |k, _| {
            Complex::new(T::one() / (T::one() + kappa * k * k), T::zero())
        })
    }

    /// Apply `1 - kappa d_xx`.
    pub fn helmholtz_apply(&self, f: &Field<T>, kappa: T) -> Field<T> {
        self.apply_symbol(f, |k, _| Complex::new(T::one() + kappa * k * k, T::zero()))
    }

    /// `x -> int_{-L}^x f`, standing in for `int_{-inf}^x f`.
    ///
    /// `f` must be negligible on the leftmost 5% of the box (relative
    /// tolerance `decay_tol` against `sup |f|`), otherwise the truncation of
    /// the lower limit is meaningless. The zero mode is integrated as a ramp
    /// and the remainder through the Fourier antiderivative, so the result is
    /// spectrally accurate for smooth `f`.
    pub fn antiderivative_from_left(&self, f: &Field<T>, decay_tol: T) -> Result<Field<T>> {
        self.check(f)?;
        let sup = f.sup_norm();
        if sup == T::zero() {
            return Ok(self.zeros());
        }
        let band = (self.n / 20).max(1);
        let edge_max = f[..band].iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        if edge_max > decay_tol * sup {
            return Err(Error::DomainTooSmall {
                edge_max: edge_max.to_f64_lossy(),
                tol: (decay_tol * sup).to_f64_lossy(),
            });
        }
        let mut spec = self.forward(f);
        let mean = spec[0].re;
        spec[0] = Complex::new(T::zero(), T::zero());
        let nyq = self.n / 2;
        for (j, c) in spec.iter_mut().enumerate().skip(1) {
            if j == nyq {
                *c = Complex::new(T::zero(), T::zero());
            } else {
                // 1/(ik) = -i/k
                let k = self.wavenumbers[j];
                *c *= Complex::new(T::zero(), -T::one() / k);
            }
        }
        let periodic = self.inverse(spec);
        let anchor = periodic[0];
        Ok(Field::from_fn(self, |x| mean * (x + self.half_length))
            .zip_map(&periodic, |ramp, p| ramp + p - anchor))
    }

    /// `int f g dx` by the trapezoid rule (spectrally accurate for periodic data).
    pub fn l2_inner(&self, f: &Field<T>, g: &Field<T>) -> T {
        f.iter().zip(g.iter()).map(|(&a, &b)| a * b).sum::<T>() * self.dx
    }

    /// Same inner product evaluated on Fourier coefficients.
    pub fn l2_inner_spectral(&self, f: &Field<T>, g: &Field<T>) -> T {
        let fs = self.forward(f);
        let gs = self.forward(g);
        let s: T = fs.iter().zip(&gs).map(|(a, b)| (a * b.conj()).re).sum();
        s * lit::<T>(2.0) * self.half_length
    }

    /// `|f|_{H^s}` with symbol `(1 + k^2)^{s/2}`.
    pub fn hs_norm(&self, f: &Field<T>, s: T) -> T {
        let spec = self.forward(f);
        let total: T = spec
            .iter()
            .zip(self.wavenumbers.iter())
            .map(|(c, &k)| (T::one() + k * k).powf(s) * c.norm_sqr())
            .sum();
        (total * lit::<T>(2.0) * self.half_length).sqrt()
    }

    /// `|f|_{X^{s+1}}^2 = |f|_{H^s}^2 + mu m |f_x|_{H^s}^2`.
    pub fn xs_norm(&self, f: &Field<T>, spec: NormSpec<T>) -> T {
        let coeffs = self.forward(f);
        let weight = spec.mu * spec.m;
        let total: T = coeffs
            .iter()
            .zip(self.wavenumbers.iter())
            .map(|(c, &k)| (T::one() + k * k).powf(spec.s) * (T::one() + weight * k * k) * c.norm_sqr())
            .sum();
        (total * lit::<T>(2.0) * self.half_length).sqrt()
    }

    /// Largest `|f|` over the leftmost and rightmost 5% of the box, relative to `sup |f|`.
    pub fn edge_ratio(&self, f: &Field<T>) -> T {
        let sup = f.sup_norm();
        if sup == T::zero() {
            return T::zero();
        }
        let band = (self.n / 20).max(1);
        let left = f[..band].iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        let right = f[self.n - band..].iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        left.max(right) / sup
    }
}
