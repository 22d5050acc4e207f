//! Truncated Fourier series on the n-torus with strip norms.
//!
//! A series stores every coefficient of the box `[-N, N]^n` densely. The
//! `real` flag records that the represented function is real on the real torus,
//! i.e. `c_{-k} = conj(c_k)`; operations that preserve reality keep the flag and
//! re-symmetrize after any grid round trip.

pub mod compose;
pub mod grid;

use std::ops::{Add, Mul, Neg, Sub};


use crate::error::{KamError, Result};
use crate::multi_index::{l1, WaveBox};
use crate::scalar::{cplx, czero, Real, C};

pub use grid::{fast_size, node_angle, node_angles, oversampled_size};

/// Width of a complex strip `|Im theta_j| <= s`, restricted to `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StripWidth<T>(T);

impl<T: Real> StripWidth<T> {
    pub fn new(s: T) -> Result<Self> {
        if s > T::zero() && s <= T::one() {
            Ok(Self(s))
        } else {
            Err(KamError::InvalidWidth(s.as_f64()))
        }
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries<T> {
    dim: usize,
    order: usize,
    coeffs: Vec<C<T>>,
    real: bool,
}

impl<T: Real> FourierSeries<T> {
    pub fn zeros(dim: usize, order: usize) -> Self {
        let len = WaveBox::new(dim, order).len();
        Self { dim, order, coeffs: vec![czero(); len], real: true }
    }

    pub fn constant(dim: usize, order: usize, value: T) -> Self {
        let mut f = Self::zeros(dim, order);
        let z = f.wave_box().zero_index();
        f.coeffs[z] = cplx(value, T::zero());
        f
    }

    /// Builds a series from a dense coefficient box. When `real` is set the
    /// coefficients are symmetrized.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<C<T>>, real: bool) -> Result<Self> {
        let expected = WaveBox::new(dim, order).len();
        if coeffs.len() != expected {
            return Err(KamError::DimensionMismatch { expected, found: coeffs.len() });
        }
        let mut f = Self { dim, order, coeffs, real: false };
        if real {
            f.realify();
        }
        Ok(f)
    }

    /// Sparse constructor from `(k, c_k)` pairs; the result is flagged complex.
    pub fn from_terms(dim: usize, order: usize, terms: &[(Vec<i64>, C<T>)]) -> Result<Self> {
        let mut f = Self::zeros(dim, order);
        f.real = false;
        let bx = f.wave_box();
        for (k, c) in terms {
            if k.len() != dim {
                return Err(KamError::DimensionMismatch { expected: dim, found: k.len() });
            }
            let idx = bx.index(k).ok_or_else(|| {
                KamError::InvalidParameter(format!("wave vector {k:?} outside order {order}"))
            })?;
            f.coeffs[idx] = f.coeffs[idx] + *c;
        }
        Ok(f)
    }

    /// `amplitude * cos(k . theta)`.
    pub fn cosine(dim: usize, order: usize, k: &[i64], amplitude: T) -> Result<Self> {
        let half = amplitude / T::lit(2.0);
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        let mut f = Self::from_terms(
            dim,
            order,
            &[(k.to_vec(), cplx(half, T::zero())), (neg, cplx(half, T::zero()))],
        )?;
        f.real = true;
        Ok(f)
    }

    /// `amplitude * sin(k . theta)`.
    pub fn sine(dim: usize, order: usize, k: &[i64], amplitude: T) -> Result<Self> {
        let half = amplitude / T::lit(2.0);
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        let mut f = Self::from_terms(
            dim,
            order,
            &[(k.to_vec(), cplx(T::zero(), -half)), (neg, cplx(T::zero(), half))],
        )?;
        f.real = true;
        Ok(f)
    }

    /// `c * e^{i k . theta}` (complex valued).
    pub fn exponential(dim: usize, order: usize, k: &[i64], c: C<T>) -> Result<Self> {
        Self::from_terms(dim, order, &[(k.to_vec(), c)])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn wave_box(&self) -> WaveBox {
        WaveBox::new(self.dim, self.order)
    }

    #[inline]
    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, k: &[i64]) -> C<T> {
        self.wave_box().index(k).map(|i| self.coeffs[i]).unwrap_or_else(czero)
    }

    /// Sets one coefficient. Clears the reality flag unless the caller keeps the
    /// conjugate partner consistent and calls [`Self::realify`].
    pub fn set_coeff(&mut self, k: &[i64], c: C<T>) -> Result<()> {
        let idx = self.wave_box().index(k).ok_or_else(|| {
            KamError::InvalidParameter(format!("wave vector {k:?} outside order {}", self.order))
        })?;
        self.coeffs[idx] = c;
        self.real = false;
        Ok(())
    }

    /// Average over the torus (the `k = 0` coefficient).
    #[inline]
    pub fn mean(&self) -> C<T> {
        self.coeffs[self.wave_box().zero_index()]
    }

    /// Value at `theta = 0`, i.e. the sum of all coefficients.
    pub fn value_at_origin(&self) -> C<T> {
        self.coeffs.iter().fold(czero(), |acc, c| acc + c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == T::zero() && c.im == T::zero())
    }

    /// Largest `|c_{-k} - conj(c_k)|`.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let bx = self.wave_box();
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[bx.mirror(i)] - self.coeffs[i].conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Projects onto real-valued functions and sets the reality flag.
    pub fn realify(&mut self) {
        let bx = self.wave_box();
        let half = T::lit(0.5);
        let n = self.coeffs.len();
        for i in 0..=n / 2 {
            let j = bx.mirror(i);
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) * half;
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        self.real = true;
    }

    pub fn real_part(&self) -> Self {
        let bx = self.wave_box();
        let half = T::lit(0.5);
        let coeffs = (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] + self.coeffs[bx.mirror(i)].conj()) * half)
            .collect();
        Self { dim: self.dim, order: self.order, coeffs, real: true }
    }

    /// Zero-pads or truncates to `order`.
    pub fn resized(&self, order: usize) -> Self {
        if order == self.order {
            return self.clone();
        }
        let mut out = Self::zeros(self.dim, order);
        out.real = self.real;
        let from = self.wave_box();
        let to = out.wave_box();
        let mut k = vec![0i64; self.dim];
        for (i, c) in self.coeffs.iter().enumerate() {
            from.wave_into(i, &mut k);
            if let Some(j) = to.index(&k) {
                out.coeffs[j] = *c;
            }
        }
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(KamError::DimensionMismatch { expected: self.dim, found: other.dim })
        } else {
            Ok(())
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(C<T>, C<T>) -> C<T>) -> Result<Self> {
        self.check_dim(other)?;
        let order = self.order.max(other.order);
        let a = self.resized(order);
        let b = other.resized(order);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| op(*x, *y)).collect();
        Ok(Self { dim: self.dim, order, coeffs, real: self.real && other.real })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            real: self.real,
        }
    }

    pub fn scale_complex(&self, a: C<T>) -> Self {
        Self {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            real: self.real && a.im == T::zero(),
        }
    }

    /// `self + a * other` with the orders merged.
    pub fn axpy(&self, a: T, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y * a)
    }

    pub fn add_constant(&self, c: T) -> Self {
        let mut out = self.clone();
        let z = out.wave_box().zero_index();
        out.coeffs[z] = out.coeffs[z] + cplx(c, T::zero());
        out
    }

    /// Exact product: the order of the result is the sum of the orders and no
    /// aliasing occurs.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.mul_truncated(other, self.order + other.order)
    }

    /// Product truncated to `order`; retained coefficients are exact.
    pub fn mul_truncated(&self, other: &Self, order: usize) -> Result<Self> {
        self.check_dim(other)?;
        let full = self.order + other.order;
        let order = order.min(full);
        // retained modes |k| <= order never alias with product modes |k'| <= full
        let m = fast_size((full + order + 1).max(2 * self.order.max(other.order) + 1));
        let a = self.to_grid(m)?;
        let b = other.to_grid(m)?;
        let prod: Vec<C<T>> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let (mut out, _) = Self::from_grid(self.dim, m, prod, order, false)?;
        if self.real && other.real {
            out.realify();
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(KamError::AxisOutOfRange { axis, dim: self.dim });
        }
        let bx = self.wave_box();
        let mut k = vec![0i64; self.dim];
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                bx.wave_into(i, &mut k);
                c * cplx(T::zero(), T::from_i64_lossy(k[axis]))
            })
            .collect();
        Ok(Self { dim: self.dim, order: self.order, coeffs, real: self.real })
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim).map(|j| self.partial_derivative(j).expect("axis in range")).collect()
    }

    /// `L_alpha f = f' . alpha`, i.e. `c_k -> i (k . alpha) c_k`.
    pub fn lie_derivative(&self, alpha: &[T]) -> Result<Self> {
        if alpha.len() != self.dim {
            return Err(KamError::DimensionMismatch { expected: self.dim, found: alpha.len() });
        }
        let bx = self.wave_box();
        let mut k = vec![0i64; self.dim];
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                bx.wave_into(i, &mut k);
                let ka = dot_wave(&k, alpha);
                c * cplx(T::zero(), ka)
            })
            .collect();
        Ok(Self { dim: self.dim, order: self.order, coeffs, real: self.real })
    }

    /// Weighted l1 majorant `sum_k |c_k| e^{|k|_1 s}` of the sup norm on the strip
    /// of width `s`.
    pub fn majorant_norm(&self, s: T) -> T {
        let bx = self.wave_box();
        let mut k = vec![0i64; self.dim];
        let mut acc = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let a = c.norm();
            if a == T::zero() {
                continue;
            }
            bx.wave_into(i, &mut k);
            acc = acc + a * (T::from_i64_lossy(l1(&k)) * s).exp();
        }
        acc
    }

    /// Unweighted l1 norm of the coefficients.
    pub fn l1_norm(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Largest `|k|_1` among nonzero non-constant coefficients.
    pub fn spectral_radius(&self) -> i64 {
        let bx = self.wave_box();
        let mut k = vec![0i64; self.dim];
        let mut best = 0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re != T::zero() || c.im != T::zero() {
                bx.wave_into(i, &mut k);
                best = best.max(l1(&k));
            }
        }
        best
    }

    /// Grid estimate of `sup |f|` on the strip `|Im theta_j| <= s`: the maximum of
    /// `|f|` over the `2^n` distinguished boundary tori `Im theta = +-s`, sampled
    /// with `oversample * (2N + 1)` nodes per axis.
    pub fn sup_norm_estimate(&self, s: T, oversample: usize) -> Result<T> {
        if oversample < 2 {
            return Err(KamError::InvalidParameter("oversample must be >= 2".into()));
        }
        let m = oversample * (2 * self.order + 1);
        let mut best = T::zero();
        for signs in 0..(1usize << self.dim) {
            let shifted = self.shifted_imaginary(&sign_vector(signs, self.dim, s));
            let grid = shifted.to_grid(m)?;
            for v in grid {
                best = best.max(v.norm());
            }
        }
        Ok(best)
    }

    /// Coefficients of `theta -> f(theta + i y)`.
    pub fn shifted_imaginary(&self, y: &[T]) -> Self {
        let bx = self.wave_box();
        let mut k = vec![0i64; self.dim];
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                bx.wave_into(i, &mut k);
                c * (-dot_wave(&k, y)).exp()
            })
            .collect();
        Self { dim: self.dim, order: self.order, coeffs, real: false }
    }

    /// Samples on the `m^n` equispaced grid `theta_j = 2 pi i_j / m`.
    pub fn to_grid(&self, m: usize) -> Result<Vec<C<T>>> {
        let needed = 2 * self.order + 1;
        if m < needed {
            return Err(KamError::GridTooSmall { grid: m, order: self.order, needed });
        }
        let total = m.pow(self.dim as u32);
        let mut data = vec![czero::<T>(); total];
        let bx = self.wave_box();
        let mut k = vec![0i64; self.dim];
        for (i, c) in self.coeffs.iter().enumerate() {
            bx.wave_into(i, &mut k);
            let mut pos = 0usize;
            for &kj in &k {
                pos = pos * m + kj.rem_euclid(m as i64) as usize;
            }
            data[pos] = *c;
        }
        grid::fft_nd(&mut data, self.dim, m, true);
        Ok(data)
    }

    /// Coefficients up to `order` of grid samples. Returns the series and the
    /// fraction of the spectral energy that fell outside the retained box.
    pub fn from_grid(
        dim: usize,
        m: usize,
        mut values: Vec<C<T>>,
        order: usize,
        real: bool,
    ) -> Result<(Self, T)> {
        let needed = 2 * order + 1;
        if m < needed {
            return Err(KamError::GridTooSmall { grid: m, order, needed });
        }
        let total = m.pow(dim as u32);
        if values.len() != total {
            return Err(KamError::DimensionMismatch { expected: total, found: values.len() });
        }
        let inv_total = T::one() / T::from_usize_lossy(total);
        // removing the mean first keeps FFT round-off relative to the oscillating part
        let mean = pairwise_sum(&values) * inv_total;
        for v in values.iter_mut() {
            *v = *v - mean;
        }
        grid::fft_nd(&mut values, dim, m, false);
        let mut out = Self::zeros(dim, order);
        out.real = false;
        let bx = out.wave_box();
        let mut k = vec![0i64; dim];
        let mut kept = T::zero();
        for (i, slot) in out.coeffs.iter_mut().enumerate() {
            bx.wave_into(i, &mut k);
            let mut pos = 0usize;
            for &kj in &k {
                pos = pos * m + kj.rem_euclid(m as i64) as usize;
            }
            let c = values[pos] * inv_total;
            kept = kept + c.norm_sqr();
            *slot = c;
        }
        let all: T = values.iter().map(|c| (c * inv_total).norm_sqr()).sum();
        let z = bx.zero_index();
        out.coeffs[z] = out.coeffs[z] + mean;
        let energy = all + mean.norm_sqr();
        let tail = if energy > T::zero() { ((all - kept).max(T::zero())) / energy } else { T::zero() };
        if real {
            out.realify();
        }
        Ok((out, tail))
    }

    /// Direct evaluation at a real point.
    pub fn eval(&self, theta: &[T]) -> C<T> {
        let z: Vec<C<T>> = theta.iter().map(|t| cplx(*t, T::zero())).collect();
        self.eval_complex(&z)
    }

    /// Direct evaluation at a complex point by axis-wise contraction.
    pub fn eval_complex(&self, theta: &[C<T>]) -> C<T> {
        assert_eq!(theta.len(), self.dim, "point dimension");
        let side = self.wave_box().side();
        let n = self.order as i64;
        let mut buf = self.coeffs.clone();
        let mut len = buf.len();
        for axis in (0..self.dim).rev() {
            let phases: Vec<C<T>> = (-n..=n)
                .map(|k| (cplx(T::zero(), T::from_i64_lossy(k)) * theta[axis]).exp())
                .collect();
            len /= side;
            for outer in 0..len {
                let row = &buf[outer * side..(outer + 1) * side];
                let mut acc = czero();
                for (c, p) in row.iter().zip(&phases) {
                    acc = acc + c * p;
                }
                buf[outer] = acc;
            }
        }
        buf[0]
    }

    /// Real part of the value at a real point (meaningful for real series).
    pub fn eval_re(&self, theta: &[T]) -> T {
        self.eval(theta).re
    }
}

/// `k . x` for an integer wave vector.
#[inline]
pub fn dot_wave<T: Real>(k: &[i64], x: &[T]) -> T {
    k.iter().zip(x).fold(T::zero(), |acc, (kj, xj)| acc + T::from_i64_lossy(*kj) * *xj)
}

fn sign_vector<T: Real>(bits: usize, dim: usize, s: T) -> Vec<T> {
    (0..dim).map(|j| if bits >> j & 1 == 1 { -s } else { s }).collect()
}

pub(crate) fn pairwise_sum<T: Real>(v: &[C<T>]) -> C<T> {
    if v.len() <= 32 {
        return v.iter().fold(czero(), |acc, x| acc + x);
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean of the product of two series, `sum_k a_k b_{-k}`, without forming the product.
pub fn mean_of_product<T: Real>(a: &FourierSeries<T>, b: &FourierSeries<T>) -> Result<C<T>> {
    a.check_dim(b)?;
    let order = a.order.min(b.order);
    let a = a.resized(order);
    let b = b.resized(order);
    let bx = a.wave_box();
    Ok((0..a.coeffs.len()).fold(czero(), |acc, i| acc + a.coeffs[i] * b.coeffs[bx.mirror(i)]))
}

impl<T: Real> Add for &FourierSeries<T> {
    type Output = FourierSeries<T>;
    fn add(self, rhs: Self) -> FourierSeries<T> {
        self.try_add(rhs).expect("dimension mismatch in series addition")
    }
}

impl<T: Real> Sub for &FourierSeries<T> {
    type Output = FourierSeries<T>;
    fn sub(self, rhs: Self) -> FourierSeries<T> {
        self.try_sub(rhs).expect("dimension mismatch in series subtraction")
    }
}

impl<T: Real> Neg for &FourierSeries<T> {
    type Output = FourierSeries<T>;
    fn neg(self) -> FourierSeries<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &FourierSeries<T> {
    type Output = FourierSeries<T>;
    fn mul(self, rhs: T) -> FourierSeries<T> {
        self.scale(rhs)
    }
}
