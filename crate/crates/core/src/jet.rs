//! Hamiltonian germs polynomial in the actions: `H(theta, r) = sum_m H_m(theta) r^m`
//! over `|m|_1 <= d`, each `H_m` a truncated Fourier series.
//!
//! Every operation returns a jet of the same degree; terms of higher degree in
//! `r` are discarded.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{KamError, Result};
use crate::fourier::{fast_size, FourierSeries};
use crate::multi_index::Monomials;
use crate::scalar::{cplx, czero, Real, C};

#[derive(Debug, Clone)]
pub struct ActionJet<T: Real> {
    monomials: Arc<Monomials>,
    order: usize,
    terms: Vec<FourierSeries<T>>,
}

impl<T: Real> PartialEq for ActionJet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.monomials == other.monomials && self.order == other.order && self.terms == other.terms
    }
}

impl<T: Real> ActionJet<T> {
    pub fn zeros(dim: usize, degree: usize, order: usize) -> Self {
        let monomials = Monomials::new(dim, degree);
        let terms = (0..monomials.len()).map(|_| FourierSeries::zeros(dim, order)).collect();
        Self { monomials, order, terms }
    }

    /// A jet with only the `r^0` coefficient set.
    pub fn from_angle_function(f: &FourierSeries<T>, degree: usize) -> Self {
        let mut j = Self::zeros(f.dim(), degree, f.order());
        j.terms[0] = f.clone();
        j
    }

    pub fn constant(dim: usize, degree: usize, order: usize, c: T) -> Self {
        let mut j = Self::zeros(dim, degree, order);
        j.terms[0] = FourierSeries::constant(dim, order, c);
        j
    }

    /// `v . r` with constant `v`.
    pub fn linear(dim: usize, degree: usize, order: usize, v: &[T]) -> Self {
        assert_eq!(v.len(), dim);
        let mut j = Self::zeros(dim, degree, order);
        if degree >= 1 {
            for (axis, &vj) in v.iter().enumerate() {
                let idx = j.monomials.unit(axis).expect("unit monomial");
                j.terms[idx] = FourierSeries::constant(dim, order, vj);
            }
        }
        j
    }

    /// The quadratic form `r . Q r` for a symmetric `Q` given row-major.
    pub fn quadratic_form(dim: usize, degree: usize, order: usize, q: &[T]) -> Self {
        assert_eq!(q.len(), dim * dim);
        let mut j = Self::zeros(dim, degree, order);
        if degree < 2 {
            return j;
        }
        for a in 0..dim {
            for b in a..dim {
                let mut e = vec![0usize; dim];
                e[a] += 1;
                e[b] += 1;
                let idx = j.monomials.index(&e).expect("quadratic monomial");
                let c = if a == b { q[a * dim + a] } else { q[a * dim + b] + q[b * dim + a] };
                j.terms[idx] = FourierSeries::constant(dim, order, c);
            }
        }
        j
    }

    /// Assembles a jet from `(m, H_m)` pairs; repeated exponents are summed.
    pub fn from_terms(
        dim: usize,
        degree: usize,
        order: usize,
        terms: Vec<(Vec<usize>, FourierSeries<T>)>,
    ) -> Result<Self> {
        let mut j = Self::zeros(dim, degree, order);
        for (m, f) in terms {
            if f.dim() != dim {
                return Err(KamError::DimensionMismatch { expected: dim, found: f.dim() });
            }
            let idx = j.monomials.index(&m).ok_or_else(|| {
                KamError::InvalidParameter(format!("exponent {m:?} outside degree {degree}"))
            })?;
            j.terms[idx] = j.terms[idx].try_add(&f.resized(order))?.resized(order);
        }
        Ok(j)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.monomials.dim()
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.monomials.degree()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn monomials(&self) -> &Arc<Monomials> {
        &self.monomials
    }

    #[inline]
    pub fn terms(&self) -> &[FourierSeries<T>] {
        &self.terms
    }

    #[inline]
    pub fn term_at(&self, idx: usize) -> &FourierSeries<T> {
        &self.terms[idx]
    }

    /// Coefficient of `r^m`; zero series when `m` is outside the jet.
    pub fn term(&self, m: &[usize]) -> FourierSeries<T> {
        self.monomials
            .index(m)
            .map(|i| self.terms[i].clone())
            .unwrap_or_else(|| FourierSeries::zeros(self.dim(), self.order))
    }

    pub fn set_term(&mut self, m: &[usize], f: FourierSeries<T>) -> Result<()> {
        let idx = self
            .monomials
            .index(m)
            .ok_or_else(|| KamError::InvalidParameter(format!("exponent {m:?} outside jet")))?;
        if f.dim() != self.dim() {
            return Err(KamError::DimensionMismatch { expected: self.dim(), found: f.dim() });
        }
        self.terms[idx] = f.resized(self.order);
        Ok(())
    }

    pub(crate) fn set_term_at(&mut self, idx: usize, f: FourierSeries<T>) {
        self.terms[idx] = f.resized(self.order);
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.is_real())
    }

    pub fn conjugate_symmetry_defect(&self) -> T {
        self.terms.iter().map(|t| t.conjugate_symmetry_defect()).fold(T::zero(), T::max)
    }

    /// Same jet at another Fourier order (zero padding or truncation).
    pub fn with_order(&self, order: usize) -> Self {
        Self {
            monomials: self.monomials.clone(),
            order,
            terms: self.terms.iter().map(|t| t.resized(order)).collect(),
        }
    }

    /// Same jet at another polynomial degree (zero padding or truncation).
    pub fn with_degree(&self, degree: usize) -> Self {
        if degree == self.degree() {
            return self.clone();
        }
        let mut out = Self::zeros(self.dim(), degree, self.order);
        for (i, m) in self.monomials.iter().enumerate() {
            if let Some(j) = out.monomials.index(m) {
                out.terms[j] = self.terms[i].clone();
            }
        }
        out
    }

    /// Keeps only the terms with `lo <= |m| <= hi`.
    pub fn degree_range(&self, lo: usize, hi: usize) -> Self {
        let mut out = self.clone();
        for i in 0..out.terms.len() {
            let d = self.monomials.total_degree(i);
            if d < lo || d > hi {
                out.terms[i] = FourierSeries::zeros(self.dim(), self.order);
            }
        }
        out
    }

    /// Lowest degree carrying a nonzero coefficient, if any.
    pub fn min_degree(&self) -> Option<usize> {
        (0..self.terms.len())
            .filter(|&i| !self.terms[i].is_zero())
            .map(|i| self.monomials.total_degree(i))
            .min()
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if self.dim() != other.dim() {
            return Err(KamError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let degree = self.degree().max(other.degree());
        let order = self.order.max(other.order);
        Ok((
            self.with_degree(degree).with_order(order),
            other.with_degree(degree).with_order(order),
        ))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let terms = a.terms.iter().zip(&b.terms).map(|(x, y)| x + y).collect();
        Ok(Self { monomials: a.monomials, order: a.order, terms })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let terms = a.terms.iter().zip(&b.terms).map(|(x, y)| x - y).collect();
        Ok(Self { monomials: a.monomials, order: a.order, terms })
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            monomials: self.monomials.clone(),
            order: self.order,
            terms: self.terms.iter().map(|t| t.scale(a)).collect(),
        }
    }

    pub fn realify(&mut self) {
        for t in self.terms.iter_mut() {
            t.realify();
        }
    }

    /// Theta-average of every coefficient (an integrable jet).
    pub fn averaged(&self) -> Self {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            *t = FourierSeries::constant(self.dim(), self.order, t.mean().re);
        }
        out
    }

    pub fn partial_theta(&self, axis: usize) -> Result<Self> {
        let terms = self.terms.iter().map(|t| t.partial_derivative(axis)).collect::<Result<_>>()?;
        Ok(Self { monomials: self.monomials.clone(), order: self.order, terms })
    }

    pub fn partial_r(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim() {
            return Err(KamError::AxisOutOfRange { axis, dim: self.dim() });
        }
        let mut out = Self::zeros(self.dim(), self.degree(), self.order);
        let mut lower = vec![0usize; self.dim()];
        for (i, m) in self.monomials.iter().enumerate() {
            if m[axis] == 0 {
                continue;
            }
            lower.copy_from_slice(m);
            lower[axis] -= 1;
            let j = self.monomials.index(&lower).expect("lower exponent present");
            out.terms[j] = self.terms[i].scale(T::from_usize_lossy(m[axis]));
        }
        Ok(out)
    }

    /// Majorant `sum_m |H_m|_s s^{|m|}` of the sup norm on `T^n_s x D^n_s`.
    pub fn jet_norm(&self, s: T) -> T {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| t.majorant_norm(s) * s.powi(self.monomials.total_degree(i) as i32))
            .sum()
    }

    /// Direct evaluation at a real point.
    pub fn eval(&self, theta: &[T], r: &[T]) -> C<T> {
        let mut acc = czero();
        for (i, m) in self.monomials.iter().enumerate() {
            if self.terms[i].is_zero() {
                continue;
            }
            let mut mono = T::one();
            for (rj, &e) in r.iter().zip(m) {
                mono = mono * rj.powi(e as i32);
            }
            acc = acc + self.terms[i].eval(theta) * mono;
        }
        acc
    }

    /// Grid estimate of the sup norm on `T^n_s x D^n_t`: the maximum over the
    /// distinguished boundary `Im theta = +-s`, `|r_j| = t`.
    pub fn sup_norm_estimate(&self, s: T, t: T, oversample: usize) -> Result<T> {
        if oversample < 2 {
            return Err(KamError::InvalidParameter("oversample must be >= 2".into()));
        }
        let dim = self.dim();
        let m = oversample * (2 * self.order + 1);
        let nu = oversample * (2 * self.degree() + 1);
        let total = m.pow(dim as u32);
        let mut best = T::zero();
        for signs in 0..(1usize << dim) {
            let y: Vec<T> = (0..dim).map(|j| if signs >> j & 1 == 1 { -s } else { s }).collect();
            let grids: Vec<Vec<C<T>>> = self
                .terms
                .iter()
                .map(|f| f.shifted_imaginary(&y).to_grid(m))
                .collect::<Result<_>>()?;
            let npoly = nu.pow(dim as u32);
            // r_j = t e^{i nu_j} on the torus of radius t
            let polys: Vec<Vec<C<T>>> = (0..npoly)
                .map(|q| {
                    let mut idx = vec![0usize; dim];
                    let mut qq = q;
                    for j in (0..dim).rev() {
                        idx[j] = qq % nu;
                        qq /= nu;
                    }
                    let r: Vec<C<T>> = idx
                        .iter()
                        .map(|&i| C::from_polar(t, crate::fourier::node_angle::<T>(i, nu)))
                        .collect();
                    self.monomials
                        .iter()
                        .map(|mexp| {
                            mexp.iter().zip(&r).fold(cplx(T::one(), T::zero()), |acc, (&e, rj)| acc * rj.powi(e as i32))
                        })
                        .collect()
                })
                .collect();
            let local = (0..total)
                .into_par_iter()
                .map(|p| {
                    let mut mx = T::zero();
                    for poly in &polys {
                        let mut v = czero();
                        for (g, w) in grids.iter().zip(poly) {
                            v = v + g[p] * w;
                        }
                        mx = mx.max(v.norm());
                    }
                    mx
                })
                .reduce(T::zero, T::max);
            best = best.max(local);
        }
        Ok(best)
    }

    /// Product in the ring of degree-`d` jets; theta-products are exact on the
    /// retained modes.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let order = a.order;
        let m = fast_size(3 * order + 1);
        let ga = JetGrid::from_jet(&a, m)?;
        let gb = JetGrid::from_jet(&b, m)?;
        let prod = ga.mul(&gb);
        prod.to_jet(order, a.is_real() && b.is_real())
    }

    /// Multiplies every coefficient by a function of the angles.
    pub fn mul_series(&self, f: &FourierSeries<T>) -> Result<Self> {
        let g = Self::from_angle_function(&f.resized(self.order), self.degree());
        self.mul(&g)
    }

    /// Poisson bracket `{F, G} = sum_j dF/dr_j dG/dtheta_j - dF/dtheta_j dG/dr_j`,
    /// so that `{H, f}` is the derivative of `f` along the flow of `H`.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        let (f, g) = self.aligned(other)?;
        let order = f.order;
        let m = fast_size(3 * order + 1);
        let mut acc: Option<JetGrid<T>> = None;
        for j in 0..f.dim() {
            let a = JetGrid::from_jet(&f.partial_r(j)?, m)?.mul(&JetGrid::from_jet(&g.partial_theta(j)?, m)?);
            let b = JetGrid::from_jet(&f.partial_theta(j)?, m)?.mul(&JetGrid::from_jet(&g.partial_r(j)?, m)?);
            let term = a.sub(&b);
            acc = Some(match acc {
                None => term,
                Some(prev) => prev.add(&term),
            });
        }
        acc.expect("dim >= 1").to_jet(order, f.is_real() && g.is_real())
    }

    /// Exact recentering `H(theta, R + r)` (binomial expansion, degree preserved).
    pub fn translated(&self, shift: &[T]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(KamError::DimensionMismatch { expected: self.dim(), found: shift.len() });
        }
        let n = self.dim();
        let mut ident = vec![T::zero(); n * n];
        for j in 0..n {
            ident[j * n + j] = T::one();
        }
        let powers = affine_powers(&self.monomials, &ident, shift);
        let mut out = Self::zeros(n, self.degree(), self.order);
        for (i, poly) in powers.iter().enumerate() {
            if self.terms[i].is_zero() {
                continue;
            }
            for (j, &c) in poly.iter().enumerate() {
                if c != T::zero() {
                    out.terms[j] = out.terms[j].axpy(c, &self.terms[i])?;
                }
            }
        }
        Ok(out)
    }
}

/// Sparse copy of a real jet for repeated pointwise evaluation with first
/// derivatives; conjugate pairs `+-k` are folded into one cosine term.
#[derive(Debug, Clone)]
pub struct PointJet<T: Real> {
    dim: usize,
    degree: usize,
    terms: Vec<PointTerm<T>>,
}

#[derive(Debug, Clone)]
struct PointTerm<T> {
    k: Vec<T>,
    m: Vec<usize>,
    re: T,
    im: T,
}

impl<T: Real> PointJet<T> {
    pub fn new(jet: &ActionJet<T>) -> Result<Self> {
        if !jet.is_real() {
            return Err(KamError::InvalidParameter("pointwise evaluation needs a real jet".into()));
        }
        let n = jet.dim();
        let mut terms = Vec::new();
        for (i, m) in jet.monomials.iter().enumerate() {
            let f = &jet.terms[i];
            let wb = f.wave_box();
            let mut k = vec![0i64; n];
            for (idx, c) in f.coeffs().iter().enumerate() {
                if c.re == T::zero() && c.im == T::zero() {
                    continue;
                }
                wb.wave_into(idx, &mut k);
                // keep the representative whose first nonzero entry is positive
                let sign = k.iter().find(|x| **x != 0).copied().unwrap_or(0);
                if sign < 0 {
                    continue;
                }
                let w = if sign == 0 { T::one() } else { T::lit(2.0) };
                terms.push(PointTerm { k: k.iter().map(|x| T::from_i64_lossy(*x)).collect(), m: m.to_vec(), re: c.re * w, im: c.im * w });
            }
        }
        Ok(Self { dim: n, degree: jet.degree(), terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at `(theta, r)`; gradients are written into `d_theta` and `d_r`.
    pub fn eval_with_gradient(&self, theta: &[T], r: &[T], d_theta: &mut [T], d_r: &mut [T]) -> T {
        let n = self.dim;
        let mut pow = vec![T::one(); n * (self.degree + 1)];
        for j in 0..n {
            for p in 1..=self.degree {
                pow[j * (self.degree + 1) + p] = pow[j * (self.degree + 1) + p - 1] * r[j];
            }
        }
        let rp = |j: usize, e: usize| pow[j * (self.degree + 1) + e];
        d_theta.iter_mut().for_each(|x| *x = T::zero());
        d_r.iter_mut().for_each(|x| *x = T::zero());
        let mut value = T::zero();
        for t in &self.terms {
            let phase = t.k.iter().zip(theta).fold(T::zero(), |a, (k, x)| a + *k * *x);
            let (sn, cs) = phase.sin_cos();
            let f = t.re * cs - t.im * sn;
            let df = -(t.re * sn + t.im * cs);
            let mono = (0..n).fold(T::one(), |a, j| a * rp(j, t.m[j]));
            value = value + f * mono;
            for j in 0..n {
                d_theta[j] = d_theta[j] + t.k[j] * df * mono;
                if t.m[j] > 0 {
                    let partial = (0..n).fold(T::one(), |a, l| a * if l == j { rp(l, t.m[l] - 1) } else { rp(l, t.m[l]) });
                    d_r[j] = d_r[j] + T::from_usize_lossy(t.m[j]) * f * partial;
                }
            }
        }
        value
    }

    pub fn eval(&self, theta: &[T], r: &[T]) -> T {
        let mut a = vec![T::zero(); self.dim];
        let mut b = vec![T::zero(); self.dim];
        self.eval_with_gradient(theta, r, &mut a, &mut b)
    }

    /// Hamiltonian vector field `theta' = d_r H`, `r' = -d_theta H` on the
    /// state `(theta, r)`.
    pub fn hamiltonian_field(&self, y: &[T], dy: &mut [T]) {
        let n = self.dim;
        let (theta, r) = y.split_at(n);
        let (dt, dr) = dy.split_at_mut(n);
        self.eval_with_gradient(theta, r, dr, dt);
        dr.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Coefficient vectors (over `mono`) of `p^m` for every monomial `m`, where
/// `p = B r + b` with `B` row-major.
pub fn affine_powers<T: Real>(mono: &Monomials, b_mat: &[T], b_vec: &[T]) -> Vec<Vec<T>> {
    let n = mono.dim();
    let len = mono.len();
    let forms: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut f = vec![T::zero(); len];
            f[0] = b_vec[j];
            if mono.degree() >= 1 {
                for l in 0..n {
                    f[mono.unit(l).expect("unit")] = b_mat[j * n + l];
                }
            }
            f
        })
        .collect();
    let mut powers: Vec<Vec<T>> = Vec::with_capacity(len);
    let mut lower = vec![0usize; n];
    for i in 0..len {
        let m = mono.exponent(i);
        if i == 0 {
            let mut one = vec![T::zero(); len];
            one[0] = T::one();
            powers.push(one);
            continue;
        }
        let axis = m.iter().position(|&e| e > 0).expect("nonzero exponent");
        lower.copy_from_slice(m);
        lower[axis] -= 1;
        let prev = mono.index(&lower).expect("graded order");
        powers.push(poly_mul(mono, &powers[prev], &forms[axis]));
    }
    powers
}

pub(crate) fn poly_mul<T: Real>(mono: &Monomials, a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); mono.len()];
    for &(ia, ib, ic) in mono.products() {
        out[ic] = out[ic] + a[ia] * b[ib];
    }
    out
}

/// Jet sampled on an `m^n` grid; absent entries are identically zero.
pub(crate) struct JetGrid<T: Real> {
    monomials: Arc<Monomials>,
    dim: usize,
    m: usize,
    values: Vec<Option<Vec<C<T>>>>,
}

impl<T: Real> JetGrid<T> {
    pub(crate) fn from_jet(j: &ActionJet<T>, m: usize) -> Result<Self> {
        let values = j
            .terms
            .par_iter()
            .map(|t| if t.is_zero() { Ok(None) } else { t.to_grid(m).map(Some) })
            .collect::<Result<_>>()?;
        Ok(Self { monomials: j.monomials.clone(), dim: j.dim(), m, values })
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        let total = self.m.pow(self.dim as u32);
        let mut values: Vec<Option<Vec<C<T>>>> = vec![None; self.monomials.len()];
        for &(ia, ib, ic) in self.monomials.products() {
            if let (Some(a), Some(b)) = (&self.values[ia], &other.values[ib]) {
                let slot = values[ic].get_or_insert_with(|| vec![czero(); total]);
                for ((s, x), y) in slot.iter_mut().zip(a).zip(b) {
                    *s = *s + x * y;
                }
            }
        }
        Self { monomials: self.monomials.clone(), dim: self.dim, m: self.m, values }
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match (a, b) {
                (None, None) => None,
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(b.iter().map(|y| y * sign).collect()),
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x + y * sign).collect()),
            })
            .collect();
        Self { monomials: self.monomials.clone(), dim: self.dim, m: self.m, values }
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub(crate) fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    pub(crate) fn to_jet(&self, order: usize, real: bool) -> Result<ActionJet<T>> {
        let terms = self
            .values
            .par_iter()
            .map(|v| match v {
                None => Ok(FourierSeries::zeros(self.dim, order)),
                Some(g) => FourierSeries::from_grid(self.dim, self.m, g.clone(), order, real).map(|x| x.0),
            })
            .collect::<Result<_>>()?;
        Ok(ActionJet { monomials: self.monomials.clone(), order, terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type S = FourierSeries<f64>;
    type J = ActionJet<f64>;

    #[test]
    fn point_jet_matches_dense_evaluation() {
        let mut h = J::quadratic_form(2, 3, 3, &[0.5, 0.2, 0.2, 0.7]);
        h.set_term(&[0, 0], S::cosine(2, 3, &[1, -2], 0.3).unwrap().try_add(&S::sine(2, 3, &[0, 1], 0.1).unwrap()).unwrap()).unwrap();
        h.set_term(&[2, 1], S::cosine(2, 3, &[1, 1], -0.4).unwrap().add_constant(0.25)).unwrap();
        h.set_term(&[1, 0], S::sine(2, 3, &[3, 0], 0.05).unwrap()).unwrap();
        let p = PointJet::new(&h).unwrap();
        let (theta, r) = ([0.3, -1.1], [0.2, -0.15]);
        let (mut dt, mut dr) = ([0.0; 2], [0.0; 2]);
        let v = p.eval_with_gradient(&theta, &r, &mut dt, &mut dr);
        assert_abs_diff_eq!(v, h.eval(&theta, &r).re, epsilon = 1e-15);
        for j in 0..2 {
            assert_abs_diff_eq!(dt[j], h.partial_theta(j).unwrap().eval(&theta, &r).re, epsilon = 1e-15);
            assert_abs_diff_eq!(dr[j], h.partial_r(j).unwrap().eval(&theta, &r).re, epsilon = 1e-15);
        }
    }

    #[test]
    fn jet_norm_examples() {
        let s = 0.5;
        let a = J::linear(1, 3, 2, &[0.8]);
        assert_abs_diff_eq!(a.jet_norm(s), 0.8 * s, epsilon = 1e-15);
        assert_abs_diff_eq!(J::constant(2, 2, 3, 1.0).jet_norm(s), 1.0, epsilon = 1e-15);
        let mut h = J::zeros(1, 3, 2);
        h.set_term(&[2], S::cosine(1, 2, &[1], 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(h.jet_norm(0.5), 0.25 * 0.5f64.exp(), epsilon = 1e-14);
    }

    #[test]
    fn bracket_examples() {
        let alpha = 0.7;
        let f = J::linear(1, 3, 4, &[alpha]);
        let g = J::from_angle_function(&S::sine(1, 4, &[1], 1.0).unwrap(), 3);
        let b = f.poisson_bracket(&g).unwrap();
        let expect = S::cosine(1, 4, &[1], alpha).unwrap();
        assert!((&b.term(&[0]) - &expect).max_abs_coeff() < 1e-15);
        let self_b = g.poisson_bracket(&g).unwrap();
        assert!(self_b.jet_norm(0.3) < 1e-15);
        let half = J::quadratic_form(1, 3, 4, &[0.5]);
        let c = J::from_angle_function(&S::cosine(1, 4, &[1], 1.0).unwrap(), 3);
        let b2 = half.poisson_bracket(&c).unwrap();
        let expect = S::sine(1, 4, &[1], -1.0).unwrap();
        assert!((&b2.term(&[1]) - &expect).max_abs_coeff() < 1e-15);
        assert!(b2.term(&[0]).is_zero() || b2.term(&[0]).max_abs_coeff() < 1e-16);
    }

    #[test]
    fn translation_examples() {
        let h = J::quadratic_form(1, 3, 1, &[0.5]);
        let r0 = 0.3;
        let t = h.translated(&[r0]).unwrap();
        assert_abs_diff_eq!(t.term(&[0]).mean().re, r0 * r0 / 2.0, epsilon = 1e-16);
        assert_abs_diff_eq!(t.term(&[1]).mean().re, r0, epsilon = 1e-16);
        assert_abs_diff_eq!(t.term(&[2]).mean().re, 0.5, epsilon = 1e-16);
        assert_eq!(h.translated(&[0.0]).unwrap(), h);
    }

    #[test]
    fn partial_r_lowers_degree() {
        let h = J::quadratic_form(2, 3, 1, &[1.0, 0.5, 0.5, 2.0]);
        let d = h.partial_r(0).unwrap();
        // d/dr_0 (r0^2 + r0 r1 + 2 r1^2) = 2 r0 + r1
        assert_abs_diff_eq!(d.term(&[1, 0]).mean().re, 2.0, epsilon = 1e-16);
        assert_abs_diff_eq!(d.term(&[0, 1]).mean().re, 1.0, epsilon = 1e-16);
    }

    #[test]
    fn affine_powers_expand_binomials() {
        let mono = Monomials::new(2, 3);
        let b = [2.0, 0.0, 1.0, 1.0];
        let shift = [0.5, -1.0];
        let p = affine_powers(&mono, &b, &shift);
        // p0 = 2 r0 + 0.5 ; p0^2 = 4 r0^2 + 2 r0 + 0.25
        let i = mono.index(&[2, 0]).unwrap();
        assert_abs_diff_eq!(p[i][0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p[i][mono.index(&[1, 0]).unwrap()], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[i][mono.index(&[2, 0]).unwrap()], 4.0, epsilon = 1e-15);
        // evaluate p^(1,1) at a point
        let r: [f64; 2] = [0.3, -0.7];
        let i11 = mono.index(&[1, 1]).unwrap();
        let val: f64 = mono.iter().enumerate().map(|(q, m)| p[i11][q] * r[0].powi(m[0] as i32) * r[1].powi(m[1] as i32)).sum();
        let p0 = 2.0 * r[0] + 0.5;
        let p1 = r[0] + r[1] - 1.0;
        assert_abs_diff_eq!(val, p0 * p1, epsilon = 1e-14);
    }
}
