//! Fibered exact symplectomorphisms `G = (phi, dS)` acting by
//! `G(theta, r) = (phi(theta), phi'(theta)^{-T} (r + dS(theta)))`.

use rayon::prelude::*;

use super::torus_map::{check_tail, spectral_energy, compose_series, compose_torus_maps, eval_along, invert_torus_map_to_order, Inversion, TorusMap};
use crate::error::{KamError, Result};
use crate::fourier::{oversampled_size, FourierSeries};
use crate::jet::{affine_powers, ActionJet};
use crate::linalg;
use crate::scalar::{czero, Real, C};

/// `rho = dS` stored through its zero-average potential `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOneForm<T: Real> {
    potential: FourierSeries<T>,
}

impl<T: Real> ExactOneForm<T> {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self { potential: FourierSeries::zeros(dim, order) }
    }

    /// Requires a zero-average potential (to `1e-13` relative to `|S|_0`).
    pub fn new(mut potential: FourierSeries<T>) -> Result<Self> {
        let mean = potential.mean();
        if mean.norm() > T::lit(1e-13) * T::one().max(potential.l1_norm()) {
            return Err(KamError::NonZeroAverage { mean: mean.norm().as_f64() });
        }
        potential.realify();
        Ok(Self { potential: potential.add_constant(-mean.re) })
    }

    /// Drops the average of `potential`, returning it alongside.
    pub fn renormalized(mut potential: FourierSeries<T>) -> (Self, T) {
        potential.realify();
        let mean = potential.mean().re;
        (Self { potential: potential.add_constant(-mean) }, mean)
    }

    #[inline]
    pub fn potential(&self) -> &FourierSeries<T> {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn rho(&self) -> Vec<FourierSeries<T>> {
        self.potential.gradient()
    }

    /// `max_j |rho_j|_s`.
    pub fn norm(&self, s: T) -> T {
        self.rho().iter().map(|r| r.majorant_norm(s)).fold(T::zero(), T::max)
    }

    /// `max_{i,j} |d_i rho_j - d_j rho_i|` over coefficients.
    pub fn curl_defect(&self) -> T {
        let rho = self.rho();
        let n = rho.len();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                let a = rho[j].partial_derivative(i).expect("axis");
                let b = rho[i].partial_derivative(j).expect("axis");
                worst = worst.max((&a - &b).max_abs_coeff());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberedSymplectomorphism<T: Real> {
    phi: TorusMap<T>,
    form: ExactOneForm<T>,
}

impl<T: Real> FiberedSymplectomorphism<T> {
    pub fn identity(dim: usize, order: usize) -> Self {
        Self { phi: TorusMap::identity(dim, order), form: ExactOneForm::zero(dim, order) }
    }

    pub fn new(phi: TorusMap<T>, form: ExactOneForm<T>) -> Result<Self> {
        if phi.dim() != form.dim() {
            return Err(KamError::DimensionMismatch { expected: phi.dim(), found: form.dim() });
        }
        Ok(Self { phi, form })
    }

    #[inline]
    pub fn phi(&self) -> &TorusMap<T> {
        &self.phi
    }

    #[inline]
    pub fn form(&self) -> &ExactOneForm<T> {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn order(&self) -> usize {
        self.phi.order().max(self.form.potential.order())
    }

    pub fn is_identity(&self) -> bool {
        self.phi.is_identity() && self.form.potential.is_zero()
    }

    /// Tangent-style size `max(|v|_s, |rho|_s)`.
    pub fn norm(&self, s: T) -> T {
        self.phi.norm(s).max(self.form.norm(s))
    }

    /// Pointwise action on a real phase-space point.
    pub fn apply(&self, theta: &[T], r: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.dim();
        let big_theta = self.phi.apply(theta);
        let a = self.phi.jacobian(theta);
        let at = linalg::transpose(&a, n);
        let shifted: Vec<T> = self.form.rho().iter().zip(r).map(|(rj, x)| *x + rj.eval_re(theta)).collect();
        let big_r = linalg::solve(&at, n, &shifted)?;
        Ok((big_theta, big_r))
    }

    /// `G^{-1} = (psi, -S o psi)` with `psi` the right inverse of `phi`.
    pub fn inverse(&self, s: T, sigma: T, tol: T) -> Result<(Self, Inversion<T>)> {
        let order = self.order();
        let inv = invert_torus_map_to_order(&self.phi, order, s, sigma, tol)?;
        let pulled = compose_series(&self.form.potential, &inv.inverse, order)?.scale(-T::one());
        let (form, _) = ExactOneForm::renormalized(pulled);
        Ok((Self { phi: inv.inverse.clone(), form }, inv))
    }
}

/// `G2 o G1 = (phi2 o phi1, S1 + S2 o phi1)`; the average of `S2 o phi1` is
/// dropped and returned.
pub fn group_compose<T: Real>(
    g2: &FiberedSymplectomorphism<T>,
    g1: &FiberedSymplectomorphism<T>,
) -> Result<(FiberedSymplectomorphism<T>, T)> {
    let order = g1.order().max(g2.order());
    let phi = compose_torus_maps(&g2.phi, &g1.phi)?.resized(order);
    let pulled = compose_series(&g2.form.potential, &g1.phi, order)?;
    let sum = pulled.try_add(&g1.form.potential)?.resized(order);
    let (form, mean) = ExactOneForm::renormalized(sum);
    Ok((FiberedSymplectomorphism { phi, form }, mean))
}

/// `H o G` at the Fourier order of `H`: at each grid node the coefficients
/// `H_m(phi(theta))` are combined with the powers of the affine substitution
/// `p = B r + B rho`, `B = phi'^{-T}`, then re-expanded.
pub fn pullback_jet<T: Real>(h: &ActionJet<T>, g: &FiberedSymplectomorphism<T>) -> Result<ActionJet<T>> {
    pullback_jet_to_order(h, g, h.order())
}

pub fn pullback_jet_to_order<T: Real>(
    h: &ActionJet<T>,
    g: &FiberedSymplectomorphism<T>,
    order: usize,
) -> Result<ActionJet<T>> {
    let n = h.dim();
    if g.dim() != n {
        return Err(KamError::DimensionMismatch { expected: n, found: g.dim() });
    }
    if g.is_identity() {
        return Ok(h.with_order(order));
    }
    let mono = h.monomials().clone();
    let len = mono.len();
    let m = oversampled_size(order.max(h.order()).max(g.order()));
    let total = m.pow(n as u32);
    let shifts = g.phi.displacement_grid(m)?;
    let dv = g.phi.derivative_grid(m)?;
    let rho: Vec<Vec<T>> = g
        .form
        .rho()
        .iter()
        .map(|r| Ok(r.to_grid(m)?.into_iter().map(|c| c.re).collect()))
        .collect::<Result<_>>()?;
    let values: Vec<Option<Vec<C<T>>>> = h
        .terms()
        .iter()
        .map(|t| if t.is_zero() { Ok(None) } else { eval_along(t, &shifts, m).map(Some) })
        .collect::<Result<_>>()?;
    let nodes: Vec<Vec<C<T>>> = (0..total)
        .into_par_iter()
        .map(|p| -> Result<Vec<C<T>>> {
            let mut a = vec![T::zero(); n * n];
            for q in 0..n * n {
                a[q] = dv[q][p] + if q / n == q % n { T::one() } else { T::zero() };
            }
            let b = linalg::transpose(&linalg::inverse(&a, n)?, n);
            let rho_p: Vec<T> = rho.iter().map(|r| r[p]).collect();
            let shift = linalg::mat_vec(&b, n, &rho_p);
            let powers = affine_powers(&mono, &b, &shift);
            let mut out = vec![czero(); len];
            for (i, val) in values.iter().enumerate() {
                if let Some(val) = val {
                    let hv = val[p];
                    for (o, &c) in out.iter_mut().zip(&powers[i]) {
                        *o = *o + hv * c;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let real = h.is_real();
    let mut out = ActionJet::zeros(n, h.degree(), order);
    let terms: Vec<(FourierSeries<T>, T)> = (0..len)
        .into_par_iter()
        .map(|i| {
            let grid: Vec<C<T>> = nodes.iter().map(|v| v[i]).collect();
            if grid.iter().all(|c| *c == czero()) {
                return Ok((FourierSeries::zeros(n, order), T::zero()));
            }
            FourierSeries::from_grid(n, m, grid, order, real)
        })
        .collect::<Result<_>>()?;
    // tails are judged against the whole jet so that round-off-sized terms
    // (whose relative tail is meaningless) cannot trip the check
    let total: T = terms.iter().map(|(f, _)| spectral_energy(f)).sum();
    let discarded: T = terms.iter().map(|(f, t)| spectral_energy(f) * *t / (T::one() - t.min(T::lit(0.5)))).sum();
    if total > T::zero() {
        check_tail(discarded / total, total)?;
    }
    for (i, (series, _)) in terms.into_iter().enumerate() {
        out.set_term_at(i, series);
    }
    Ok(out)
}

/// `|H|_{G,s} = |H o G^{-1}|_s` in the jet majorant norm.
pub fn pulled_norm<T: Real>(
    h: &ActionJet<T>,
    g: &FiberedSymplectomorphism<T>,
    s: T,
    sigma: T,
    tol: T,
) -> Result<T> {
    if g.is_identity() {
        return Ok(h.jet_norm(s));
    }
    let (ginv, _) = g.inverse(s, sigma, tol)?;
    Ok(pullback_jet(h, &ginv)?.jet_norm(s))
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type S = FourierSeries<f64>;
    type J = ActionJet<f64>;

    fn small_group(n: usize) -> FiberedSymplectomorphism<f64> {
        let (v, pot) = if n == 1 {
            (vec![S::sine(1, 6, &[1], 0.02).unwrap()], S::cosine(1, 6, &[2], 0.01).unwrap())
        } else {
            (
                vec![S::sine(2, 6, &[1, 0], 0.02).unwrap(), S::sine(2, 6, &[1, 1], -0.015).unwrap()],
                &S::cosine(2, 6, &[0, 1], 0.01).unwrap() + &S::sine(2, 6, &[1, -1], 0.005).unwrap(),
            )
        };
        FiberedSymplectomorphism::new(TorusMap::new(v).unwrap(), ExactOneForm::new(pot).unwrap()).unwrap()
    }

    #[test]
    fn identity_pullback_is_identity() {
        let h = J::quadratic_form(2, 3, 4, &[1.0, 0.2, 0.2, 0.5]);
        let g = FiberedSymplectomorphism::identity(2, 4);
        assert_eq!(pullback_jet(&h, &g).unwrap(), h);
    }

    #[test]
    fn constant_is_invariant() {
        let h = J::constant(2, 3, 6, 1.5);
        let p = pullback_jet(&h, &small_group(2)).unwrap();
        assert!(p.try_sub(&h).unwrap().jet_norm(0.1) < 1e-14);
    }

    #[test]
    fn linear_jet_under_fiber_translation() {
        let alpha = [1.0, 1.618];
        let pot = S::cosine(2, 6, &[1, 2], 0.01).unwrap();
        let form = ExactOneForm::new(pot.clone()).unwrap();
        let g = FiberedSymplectomorphism::new(TorusMap::identity(2, 6), form).unwrap();
        let h = J::linear(2, 3, 6, &alpha);
        let p = pullback_jet(&h, &g).unwrap();
        let expect = pot.lie_derivative(&alpha).unwrap();
        assert!((&p.term(&[0, 0]) - &expect).max_abs_coeff() < 1e-15);
        assert_abs_diff_eq!(p.term(&[1, 0]).mean().re, alpha[0], epsilon = 1e-15);
    }

    #[test]
    fn pullback_matches_pointwise_action() {
        let g = small_group(2);
        let mut h = J::quadratic_form(2, 3, 6, &[0.5, 0.1, 0.1, 0.5]);
        h.set_term(&[0, 0], S::cosine(2, 6, &[1, 1], 0.3).unwrap()).unwrap();
        h.set_term(&[1, 0], S::sine(2, 6, &[0, 1], 0.2).unwrap()).unwrap();
        let p = pullback_jet_to_order(&h, &g, 24).unwrap();
        for (th, r) in [([0.3, 1.1], [0.01, -0.02]), ([4.0, 2.5], [0.03, 0.01])] {
            let (bt, br) = g.apply(&th, &r).unwrap();
            let direct = h.eval(&bt, &br).re;
            assert!((p.eval(&th, &r).re - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn composition_law() {
        let g1 = small_group(2);
        let g2 = small_group(2);
        let (g, _) = group_compose(&g2, &g1).unwrap();
        for (th, r) in [([0.3, 1.1], [0.01, -0.02]), ([4.0, 2.5], [0.03, 0.01])] {
            let (t1, r1) = g1.apply(&th, &r).unwrap();
            let (t2, r2) = g2.apply(&t1, &r1).unwrap();
            let (t, rr) = g.apply(&th, &r).unwrap();
            for j in 0..2 {
                assert!((t[j] - t2[j]).abs() < 1e-12 && (rr[j] - r2[j]).abs() < 1e-12);
            }
        }
        let id = FiberedSymplectomorphism::identity(2, 6);
        assert_eq!(group_compose(&id, &g1).unwrap().0, g1);
    }

    #[test]
    fn inverse_round_trip() {
        let g = small_group(1);
        let g = FiberedSymplectomorphism::new(g.phi().resized(16), ExactOneForm::new(g.form().potential().resized(16)).unwrap()).unwrap();
        let (gi, _) = g.inverse(0.1, 0.1, 1e-13).unwrap();
        let (t, r) = g.apply(&[0.7], &[0.02]).unwrap();
        let (t0, r0) = gi.apply(&t, &r).unwrap();
        assert!((t0[0] - 0.7).abs() < 1e-13 && (r0[0] - 0.02).abs() < 1e-13, "{t0:?} {r0:?}");
    }
}
