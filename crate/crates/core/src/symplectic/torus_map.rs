//! Origin-fixing maps `phi = id + v` of the torus, their composition and their
//! inversion by the contraction `x -> y - v(x)`.

use crate::error::{KamError, Result};
use crate::fourier::compose::ShiftedEvaluator;
use crate::fourier::{oversampled_size, FourierSeries};
use crate::linalg;
use crate::scalar::Real;

/// Energy fraction above the retained order tolerated after re-expansion.
pub const TAIL_TOL: f64 = 1e-10;

const MAX_FIXED_POINT_ITER: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusMap<T: Real> {
    v: Vec<FourierSeries<T>>,
}

impl<T: Real> TorusMap<T> {
    pub fn identity(dim: usize, order: usize) -> Self {
        Self { v: (0..dim).map(|_| FourierSeries::zeros(dim, order)).collect() }
    }

    /// Requires real components with `v(0) = 0` (to `1e-13` relative to `|v|_0`).
    pub fn new(v: Vec<FourierSeries<T>>) -> Result<Self> {
        let map = Self::checked_shape(v)?;
        let scale = T::one().max(map.norm(T::zero()));
        for vj in &map.v {
            let at0 = vj.value_at_origin().norm();
            if at0 > T::lit(1e-13) * scale {
                return Err(KamError::InvalidParameter(format!(
                    "displacement does not fix the origin: |v(0)| = {:e}", at0.as_f64()
                )));
            }
        }
        Ok(map)
    }

    /// Subtracts `v(0)` from every component.
    pub fn normalized(v: Vec<FourierSeries<T>>) -> Result<Self> {
        let mut map = Self::checked_shape(v)?;
        for vj in map.v.iter_mut() {
            *vj = vj.add_constant(-vj.value_at_origin().re);
        }
        Ok(map)
    }

    fn checked_shape(v: Vec<FourierSeries<T>>) -> Result<Self> {
        let n = v.len();
        if n == 0 {
            return Err(KamError::InvalidParameter("empty displacement".into()));
        }
        let order = v.iter().map(|x| x.order()).max().unwrap_or(0);
        let mut out = Vec::with_capacity(n);
        for mut vj in v {
            if vj.dim() != n {
                return Err(KamError::DimensionMismatch { expected: n, found: vj.dim() });
            }
            vj.realify();
            out.push(vj.resized(order));
        }
        Ok(Self { v: out })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.v[0].order()
    }

    #[inline]
    pub fn displacement(&self) -> &[FourierSeries<T>] {
        &self.v
    }

    pub fn is_identity(&self) -> bool {
        self.v.iter().all(|x| x.is_zero())
    }

    pub fn resized(&self, order: usize) -> Self {
        Self { v: self.v.iter().map(|x| x.resized(order)).collect() }
    }

    /// `max_j |v_j|_s` in the majorant norm.
    pub fn norm(&self, s: T) -> T {
        self.v.iter().map(|x| x.majorant_norm(s)).fold(T::zero(), T::max)
    }

    /// `max_j sum_l |d_l v_j|_s`, the induced max-norm of `v'`.
    pub fn derivative_norm(&self, s: T) -> T {
        self.v
            .iter()
            .map(|vj| {
                (0..self.dim())
                    .map(|l| vj.partial_derivative(l).expect("axis in range").majorant_norm(s))
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }

    /// Invertibility certificate `|v|_{s+2 sigma} < sigma`.
    pub fn certify(&self, s: T, sigma: T) -> Result<()> {
        let norm = self.norm(s + sigma + sigma);
        if norm < sigma {
            Ok(())
        } else {
            Err(KamError::CertificateViolated { norm: norm.as_f64(), sigma: sigma.as_f64() })
        }
    }

    /// `phi(theta)` (not reduced modulo `2 pi`).
    pub fn apply(&self, theta: &[T]) -> Vec<T> {
        theta.iter().zip(&self.v).map(|(t, vj)| *t + vj.eval_re(theta)).collect()
    }

    /// `phi'(theta) = I + v'(theta)`, row-major.
    pub fn jacobian(&self, theta: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut a = vec![T::zero(); n * n];
        for j in 0..n {
            for l in 0..n {
                let d = self.v[j].partial_derivative(l).expect("axis").eval_re(theta);
                a[j * n + l] = d + if j == l { T::one() } else { T::zero() };
            }
        }
        a
    }

    /// Real samples `v_j(theta_p)` on the `m^n` grid.
    pub fn displacement_grid(&self, m: usize) -> Result<Vec<Vec<T>>> {
        self.v.iter().map(|vj| Ok(vj.to_grid(m)?.into_iter().map(|c| c.re).collect())).collect()
    }

    /// Samples of `d_l v_j` on the grid, indexed `[j * n + l][p]`.
    pub fn derivative_grid(&self, m: usize) -> Result<Vec<Vec<T>>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for vj in &self.v {
            for l in 0..n {
                out.push(vj.partial_derivative(l)?.to_grid(m)?.into_iter().map(|c| c.re).collect());
            }
        }
        Ok(out)
    }

    /// Smallest `|det phi'|` over the grid.
    pub fn min_jacobian_det(&self, m: usize) -> Result<T> {
        let n = self.dim();
        let dv = self.derivative_grid(m)?;
        let total = m.pow(n as u32);
        let mut worst = T::infinity();
        let mut a = vec![T::zero(); n * n];
        for p in 0..total {
            for q in 0..n * n {
                a[q] = dv[q][p] + if q / n == q % n { T::one() } else { T::zero() };
            }
            worst = worst.min(det(&a, n).abs());
        }
        Ok(worst)
    }
}

pub(crate) fn det<T: Real>(a: &[T], n: usize) -> T {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => match linalg::Lu::new(a, n) {
            Ok(lu) => lu.determinant(),
            Err(_) => T::zero(),
        },
    }
}

fn max_abs<T: Real>(grids: &[Vec<T>]) -> T {
    grids.iter().flat_map(|g| g.iter()).fold(T::zero(), |a, x| a.max(x.abs()))
}

/// Samples of `f(phi(theta_p))` on the `m^n` grid.
pub fn eval_along<T: Real>(f: &FourierSeries<T>, shifts: &[Vec<T>], m: usize) -> Result<Vec<crate::scalar::C<T>>> {
    let w = max_abs(shifts);
    Ok(ShiftedEvaluator::new(f, m, w, T::epsilon())?.eval(shifts))
}

/// `f o phi` re-expanded at `order`. Errors when the discarded spectral energy
/// exceeds [`TAIL_TOL`].
pub fn compose_series<T: Real>(f: &FourierSeries<T>, phi: &TorusMap<T>, order: usize) -> Result<FourierSeries<T>> {
    if f.dim() != phi.dim() {
        return Err(KamError::DimensionMismatch { expected: phi.dim(), found: f.dim() });
    }
    if phi.is_identity() || f.is_zero() {
        return Ok(f.resized(order));
    }
    let m = oversampled_size(order.max(f.order()).max(phi.order()));
    let shifts = phi.displacement_grid(m)?;
    let vals = eval_along(f, &shifts, m)?;
    let (out, tail) = FourierSeries::from_grid(f.dim(), m, vals, order, f.is_real())?;
    check_tail(tail, spectral_energy(&out))?;
    Ok(out)
}

/// Discarded amplitude below which a re-expansion is accepted whatever its
/// relative tail: round-off-sized inputs have meaningless relative spectra.
pub const TAIL_ABS: f64 = 1e-15;

pub(crate) fn spectral_energy<T: Real>(f: &FourierSeries<T>) -> T {
    f.coeffs().iter().map(|c| c.norm_sqr()).sum()
}

/// `tail` is the discarded fraction of the spectral energy `energy`.
pub(crate) fn check_tail<T: Real>(tail: T, energy: T) -> Result<()> {
    let amplitude = (tail.as_f64() * energy.as_f64()).max(0.0).sqrt();
    if tail.as_f64() > TAIL_TOL && amplitude > TAIL_ABS {
        Err(KamError::TailTooLarge { tail: tail.as_f64(), tol: TAIL_TOL })
    } else {
        Ok(())
    }
}

/// `phi2 o phi1`, displacement `v1 + v2(theta + v1)`, re-expanded at the larger
/// order and renormalized to fix the origin.
pub fn compose_torus_maps<T: Real>(phi2: &TorusMap<T>, phi1: &TorusMap<T>) -> Result<TorusMap<T>> {
    if phi2.dim() != phi1.dim() {
        return Err(KamError::DimensionMismatch { expected: phi1.dim(), found: phi2.dim() });
    }
    let order = phi1.order().max(phi2.order());
    if phi2.is_identity() {
        return Ok(phi1.resized(order));
    }
    if phi1.is_identity() {
        return Ok(phi2.resized(order));
    }
    let v = phi1
        .v
        .iter()
        .zip(&phi2.v)
        .map(|(v1, v2)| compose_series(v2, phi1, order)?.try_add(v1).map(|x| x.resized(order)))
        .collect::<Result<Vec<_>>>()?;
    TorusMap::normalized(v)
}

/// Result of inverting a torus map, with the quantitative bounds of the
/// inversion theorem evaluated in the majorant norm.
#[derive(Debug, Clone)]
pub struct Inversion<T: Real> {
    pub inverse: TorusMap<T>,
    /// `max_p |phi(psi(theta_p)) - theta_p|` on the evaluation grid.
    pub residual: T,
    pub iterations: usize,
    /// `|psi - id|_s`.
    pub shift_norm: T,
    /// `|v|_{s+sigma}`.
    pub shift_bound: T,
    /// `|psi' - id|_s`.
    pub derivative_norm: T,
    /// `2 |v|_{s+2 sigma} / sigma`, present when it is at most 1.
    pub derivative_bound: Option<T>,
}

impl<T: Real> Inversion<T> {
    pub fn bounds_hold(&self) -> bool {
        let slack = T::one() + T::lit(1e-12);
        self.shift_norm <= self.shift_bound * slack
            && self.derivative_bound.is_none_or(|b| self.derivative_norm <= b * slack)
    }
}

/// Right inverse of `phi` at the order of `phi`.
pub fn invert_torus_map<T: Real>(phi: &TorusMap<T>, s: T, sigma: T, tol: T) -> Result<Inversion<T>> {
    invert_torus_map_to_order(phi, phi.order(), s, sigma, tol)
}

/// Right inverse `psi = id + u` of `phi`, from the fixed point `u = -v(id + u)`
/// iterated on the grid and re-expanded at `order`.
pub fn invert_torus_map_to_order<T: Real>(
    phi: &TorusMap<T>,
    order: usize,
    s: T,
    sigma: T,
    tol: T,
) -> Result<Inversion<T>> {
    phi.certify(s, sigma)?;
    let n = phi.dim();
    let v_far = phi.norm(s + sigma + sigma);
    let shift_bound = phi.norm(s + sigma);
    let ratio = (T::one() + T::one()) * v_far / sigma;
    let derivative_bound = (ratio <= T::one()).then_some(ratio);
    if phi.is_identity() {
        return Ok(Inversion {
            inverse: TorusMap::identity(n, order),
            residual: T::zero(),
            iterations: 0,
            shift_norm: T::zero(),
            shift_bound,
            derivative_norm: T::zero(),
            derivative_bound,
        });
    }
    let m = oversampled_size(order.max(phi.order()));
    let total = m.pow(n as u32);
    // |u| <= |v|_0 along the iteration
    let reach = phi.norm(T::zero());
    let evals = phi
        .v
        .iter()
        .map(|vj| ShiftedEvaluator::new(vj, m, reach, T::epsilon()))
        .collect::<Result<Vec<_>>>()?;
    let mut u: Vec<Vec<T>> = vec![vec![T::zero(); total]; n];
    let mut iterations = 0;
    let mut last = T::infinity();
    let target = tol * T::lit(1e-3);
    loop {
        let next: Vec<Vec<T>> = evals.iter().map(|e| e.eval(&u).into_iter().map(|c| -c.re).collect()).collect();
        let change = next
            .iter()
            .zip(&u)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).abs()))
            .fold(T::zero(), T::max);
        u = next;
        iterations += 1;
        // stop at the target or once round-off stalls the contraction
        if change <= target || (change >= last && change <= tol) {
            break;
        }
        if iterations >= MAX_FIXED_POINT_ITER || !change.is_finite() {
            return Err(KamError::NonConvergence {
                what: "torus map inversion".into(),
                iterations,
                last: change.as_f64(),
            });
        }
        last = change;
    }
    let mut comps = Vec::with_capacity(n);
    for uj in u {
        let vals = uj.into_iter().map(|x| crate::scalar::cplx(x, T::zero())).collect();
        let (series, tail) = FourierSeries::from_grid(n, m, vals, order, true)?;
        check_tail(tail, spectral_energy(&series))?;
        comps.push(series);
    }
    let inverse = TorusMap::normalized(comps)?;
    // residual of phi o psi - id with the truncated inverse
    let ug = inverse.displacement_grid(m)?;
    let mut residual = T::zero();
    for (j, e) in evals.iter().enumerate() {
        let vv = e.eval(&ug);
        for p in 0..total {
            residual = residual.max((ug[j][p] + vv[p].re).abs());
        }
    }
    if !(residual <= tol) {
        return Err(KamError::TailTooLarge { tail: residual.as_f64(), tol: tol.as_f64() });
    }
    Ok(Inversion {
        shift_norm: inverse.norm(s),
        derivative_norm: inverse.derivative_norm(s),
        inverse,
        residual,
        iterations,
        shift_bound,
        derivative_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = FourierSeries<f64>;

    fn sine_map(a: f64, order: usize) -> TorusMap<f64> {
        TorusMap::new(vec![S::sine(1, order, &[1], a).unwrap()]).unwrap()
    }

    #[test]
    fn identity_inverts_to_identity() {
        let inv = invert_torus_map(&TorusMap::<f64>::identity(2, 4), 0.1, 0.1, 1e-12).unwrap();
        assert!(inv.inverse.is_identity());
    }

    #[test]
    fn sine_map_inverse_meets_residual_and_bounds() {
        let phi = sine_map(0.1, 40);
        let inv = invert_torus_map(&phi, 0.2, 0.2, 1e-12).unwrap();
        assert!(inv.residual <= 1e-12, "{}", inv.residual);
        assert!(inv.bounds_hold());
        // independent pointwise check at 512 nodes by scalar fixed point
        for i in 0..512 {
            let y = 2.0 * std::f64::consts::PI * i as f64 / 512.0;
            let mut x = y;
            for _ in 0..200 {
                x = y - 0.1 * x.sin();
            }
            let psi = inv.inverse.apply(&[y])[0];
            assert!((psi - x).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_with_identity() {
        let phi = sine_map(0.05, 6);
        let id = TorusMap::identity(1, 6);
        assert_eq!(compose_torus_maps(&id, &phi).unwrap(), phi);
        assert_eq!(compose_torus_maps(&phi, &id).unwrap(), phi);
    }

    #[test]
    fn rejects_uncertified_map() {
        let phi = sine_map(0.5, 4);
        assert!(matches!(invert_torus_map(&phi, 0.1, 0.1, 1e-12), Err(KamError::CertificateViolated { .. })));
    }

    #[test]
    fn rejects_map_moving_origin() {
        assert!(TorusMap::new(vec![S::cosine(1, 2, &[1], 0.1).unwrap()]).is_err());
    }
}
