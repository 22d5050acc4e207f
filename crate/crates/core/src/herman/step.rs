//! One Newton step: the triangular solve of the linearized conjugacy equation
//! `dK + K' . Gdot + dbeta . (r o G^{-1}) = (H - K o G - beta . r) o G^{-1}`.

use crate::error::{KamError, Result};
use crate::fourier::{mean_of_product, FourierSeries};
use crate::jet::ActionJet;
use crate::linalg;
use crate::scalar::Real;
use crate::small_divisors::{cohomological_constant, solve_cohomological, FrequencyVector};
use crate::symplectic::{compose_series, group_compose, pullback_jet, ExactOneForm, FiberedSymplectomorphism, TorusMap};

use super::conjugacy::TwistedConjugacy;

/// Widths of one step: `(s, sigma)` for the step bound, and the certificate
/// widths used to invert `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWidths<T> {
    pub s: T,
    pub sigma: T,
    pub inversion_s: T,
    pub inversion_sigma: T,
    pub inversion_tol: T,
}

impl<T: Real> StepWidths<T> {
    pub fn uniform(s: T, sigma: T) -> Self {
        Self { s, sigma, inversion_s: s, inversion_sigma: sigma, inversion_tol: default_inversion_tol() }
    }
}

pub(crate) fn default_inversion_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(1e4))
}

/// The Newton correction at the identity: `(dK, (phidot, dSdot), dbeta, dc)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentStep<T: Real> {
    pub delta_k: ActionJet<T>,
    pub phi_dot: Vec<FourierSeries<T>>,
    pub s_dot: FourierSeries<T>,
    pub delta_beta: Vec<T>,
    pub delta_c: T,
}

impl<T: Real> TangentStep<T> {
    pub fn rho_dot(&self) -> Vec<FourierSeries<T>> {
        self.s_dot.gradient()
    }

    /// `max(|dK|_s, |phidot|_s, |rhodot|_s, |dbeta|, |dc|)`.
    pub fn norm(&self, s: T) -> T {
        let phi = self.phi_dot.iter().map(|v| v.majorant_norm(s)).fold(T::zero(), T::max);
        let rho = self.rho_dot().iter().map(|v| v.majorant_norm(s)).fold(T::zero(), T::max);
        let beta = self.delta_beta.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        self.delta_k.jet_norm(s).max(phi).max(rho).max(beta).max(self.delta_c.abs())
    }

    /// The vector field `(phidot, rhodot - phidot'^T r)` as jets.
    pub fn vector_field(&self, degree: usize, order: usize) -> Result<(Vec<ActionJet<T>>, Vec<ActionJet<T>>)> {
        tangent_field(&self.phi_dot, &self.rho_dot(), degree, order)
    }
}

pub(crate) fn tangent_field<T: Real>(
    phi_dot: &[FourierSeries<T>],
    rho_dot: &[FourierSeries<T>],
    degree: usize,
    order: usize,
) -> Result<(Vec<ActionJet<T>>, Vec<ActionJet<T>>)> {
    let n = phi_dot.len();
    let theta = phi_dot.iter().map(|v| ActionJet::from_angle_function(&v.resized(order), degree)).collect();
    let mut r_field = Vec::with_capacity(n);
    for j in 0..n {
        let mut y = ActionJet::from_angle_function(&rho_dot[j].resized(order), degree);
        if degree >= 1 {
            for (l, vl) in phi_dot.iter().enumerate() {
                let mut e = vec![0usize; n];
                e[l] = 1;
                y.set_term(&e, vl.partial_derivative(j)?.scale(-T::one()))?;
            }
        }
        r_field.push(y);
    }
    Ok((theta, r_field))
}

/// Derivative of `k` along the phase-space field `(theta_dot, r_dot)`.
pub(crate) fn directional_derivative<T: Real>(
    k: &ActionJet<T>,
    theta_dot: &[ActionJet<T>],
    r_dot: &[ActionJet<T>],
) -> Result<ActionJet<T>> {
    let mut acc = ActionJet::zeros(k.dim(), k.degree(), k.order());
    for j in 0..k.dim() {
        if theta_dot[j].min_degree().is_some() {
            acc = acc.try_add(&k.partial_theta(j)?.mul(&theta_dot[j])?)?;
        }
        if r_dot[j].min_degree().is_some() {
            acc = acc.try_add(&k.partial_r(j)?.mul(&r_dot[j])?)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct StepReport<T: Real> {
    pub step: TangentStep<T>,
    /// `|(H - K o G - beta . r) o G^{-1}|_{s+sigma}`, the defect in the pulled norm.
    pub transported_norm: T,
    /// Size of the residual of the linear equation in degrees 0 and 1.
    pub linear_residual: T,
    /// Largest average of the order-1 right-hand side before its solve.
    pub order1_mean: T,
    /// `|dx|_s`.
    pub step_norm: T,
    /// Assembled step constant (an engineering estimate, see `assembled_c_prime`).
    pub c_prime: T,
    /// `sigma^{-tau-n-1} C' |dH|_{G,s+sigma}`.
    pub step_bound: T,
    pub bound_holds: bool,
}

/// `C' = kappa (C_0 / gamma)^2 (1 + 2 |K_2|_{s+sigma})`, with `kappa` the
/// inverse norm of the averaged order-1 matrix: two successive cohomological
/// solves coupled through the twist.
pub fn assembled_c_prime<T: Real>(freq: &FrequencyVector<T>, kappa: T, k2_norm: T) -> T {
    let c0 = T::lit(cohomological_constant(freq.dim(), freq.tau.as_f64()));
    let a = c0 / freq.gamma;
    kappa.max(T::one()) * a * a * (T::one() + (T::one() + T::one()) * k2_norm)
}

pub(crate) fn k2_matrix<T: Real>(k: &ActionJet<T>) -> Vec<FourierSeries<T>> {
    let n = k.dim();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0usize; n];
            e[i] += 1;
            e[j] += 1;
            let t = k.term(&e);
            out.push(if i == j { t } else { t.scale(T::lit(0.5)) });
        }
    }
    out
}

/// Applies one Newton correction to `x` for the Hamiltonian `h`.
pub fn newton_step<T: Real>(
    h: &ActionJet<T>,
    x: &TwistedConjugacy<T>,
    freq: &FrequencyVector<T>,
    widths: StepWidths<T>,
) -> Result<(TwistedConjugacy<T>, StepReport<T>)> {
    let n = h.dim();
    let order = h.order();
    let degree = h.degree();
    let alpha = &freq.alpha;
    let residual = h.try_sub(&x.image()?)?;

    let (ginv, psi) = if x.g.is_identity() {
        (FiberedSymplectomorphism::identity(n, order), None)
    } else {
        let (ginv, _) = x.g.inverse(widths.inversion_s, widths.inversion_sigma, widths.inversion_tol)?;
        let psi = ginv.phi().clone();
        (ginv, Some(psi))
    };
    let hdot = pullback_jet(&residual, &ginv)?;
    let transported_norm = hdot.jet_norm(widths.s + widths.sigma);

    // rho o psi and phi' o psi
    let rho = x.g.form().rho();
    let dv: Vec<FourierSeries<T>> = (0..n * n)
        .map(|q| x.g.phi().displacement()[q / n].partial_derivative(q % n))
        .collect::<Result<_>>()?;
    let pull = |f: &FourierSeries<T>| match &psi {
        Some(p) => compose_series(f, p, order),
        None => Ok(f.resized(order)),
    };
    let rho_psi: Vec<FourierSeries<T>> = rho.iter().map(&pull).collect::<Result<_>>()?;
    let a_psi: Vec<FourierSeries<T>> = dv
        .iter()
        .enumerate()
        .map(|(q, f)| Ok(pull(f)?.add_constant(if q / n == q % n { T::one() } else { T::zero() })))
        .collect::<Result<_>>()?;

    let h0 = hdot.term_at(0).clone();
    let h1: Vec<FourierSeries<T>> = (0..n).map(|j| hdot.term_at(hdot.monomials().unit(j).expect("unit")).clone()).collect();
    let h0_mean = h0.mean().re;
    let s_h = solve_cohomological(&h0.add_constant(-h0_mean), alpha)?;
    let s_j: Vec<FourierSeries<T>> = rho_psi
        .iter()
        .map(|r| solve_cohomological(&r.add_constant(-r.mean().re), alpha))
        .collect::<Result<_>>()?;

    // averaged order-1 system (<phi' o psi> + M) dbeta = <H_1> - <2 K_2 grad S_H>
    let k2 = k2_matrix(&x.k);
    let twist_mean = |f: &FourierSeries<T>, i: usize| -> Result<T> {
        let mut acc = T::zero();
        for l in 0..n {
            acc = acc + mean_of_product(&k2[i * n + l], &f.partial_derivative(l)?)?.re;
        }
        Ok((T::one() + T::one()) * acc)
    };
    let mut mat = vec![T::zero(); n * n];
    let mut rhs = vec![T::zero(); n];
    for i in 0..n {
        rhs[i] = h1[i].mean().re - twist_mean(&s_h, i)?;
        for j in 0..n {
            mat[i * n + j] = a_psi[i * n + j].mean().re + twist_mean(&s_j[j], i)?;
        }
    }
    let lu = linalg::Lu::new(&mat, n).map_err(|_| KamError::Singular("averaged order-1 matrix".into()))?;
    let delta_beta = lu.solve(&rhs);
    let kappa = linalg::norm_inf(&lu.inverse(), n);

    let delta_c = h0_mean + (0..n).map(|j| rho_psi[j].mean().re * delta_beta[j]).sum::<T>();
    let mut s_dot = s_h;
    for j in 0..n {
        s_dot = s_dot.axpy(delta_beta[j], &s_j[j])?;
    }
    s_dot.realify();
    let rho_dot = s_dot.gradient();

    // order 1: L_alpha phidot = phi' o psi . dbeta + 2 K_2 rhodot - H_1
    let mut phi_dot = Vec::with_capacity(n);
    let mut order1_mean = T::zero();
    for i in 0..n {
        let mut q = h1[i].scale(-T::one());
        for l in 0..n {
            q = q.axpy(delta_beta[l], &a_psi[i * n + l])?;
            let prod = k2[i * n + l].mul_truncated(&rho_dot[l], order)?;
            q = q.axpy(T::one() + T::one(), &prod)?;
        }
        let mean = q.mean().re;
        order1_mean = order1_mean.max(mean.abs());
        let scale = T::one().max(h1[i].l1_norm()).max(delta_beta.iter().fold(T::zero(), |a, b| a.max(b.abs())));
        if mean.abs() > T::lit(1e-10) * scale {
            return Err(KamError::NonZeroAverage { mean: mean.as_f64() });
        }
        let mut f = solve_cohomological(&q.add_constant(-mean), alpha)?;
        f = f.add_constant(-f.value_at_origin().re);
        f.realify();
        phi_dot.push(f);
    }

    // degree >= 2 remainder
    let (theta_dot, r_dot) = tangent_field(&phi_dot, &rho_dot, degree, order)?;
    let kg = directional_derivative(&x.k, &theta_dot, &r_dot)?;
    let mut delta_k = hdot.try_sub(&kg)?.degree_range(2, degree);
    delta_k = delta_k.try_add(&ActionJet::constant(n, degree, order, delta_c))?;
    delta_k.realify();

    // residual of the linear equation in degrees 0 and 1
    let mut r_inv = ActionJet::zeros(n, degree, order);
    let mut r0 = FourierSeries::zeros(n, order);
    for j in 0..n {
        r0 = r0.axpy(-delta_beta[j], &rho_psi[j])?;
        let mut lin = FourierSeries::zeros(n, order);
        for l in 0..n {
            lin = lin.axpy(delta_beta[l], &a_psi[j * n + l])?;
        }
        let mut e = vec![0usize; n];
        e[j] = 1;
        r_inv.set_term(&e, lin)?;
    }
    r_inv.set_term_at(0, r0);
    let lin_res = hdot.try_sub(&delta_k)?.try_sub(&kg)?.try_sub(&r_inv)?.degree_range(0, 1);
    let linear_residual = lin_res.jet_norm(widths.s);

    let step = TangentStep { delta_k, phi_dot, s_dot, delta_beta, delta_c };
    let step_norm = step.norm(widths.s);
    let k2_norm = k2.iter().map(|f| f.majorant_norm(widths.s + widths.sigma)).fold(T::zero(), T::max);
    let c_prime = assembled_c_prime(freq, kappa, k2_norm);
    let tau_prime = freq.tau + T::from_usize_lossy(n) + T::one();
    let step_bound = widths.sigma.powf(-tau_prime) * c_prime * transported_norm;
    let bound_holds = step_norm <= step_bound * (T::one() + T::lit(1e-12));

    let next = apply_step(x, &step)?;
    Ok((
        next,
        StepReport { step, transported_norm, linear_residual, order1_mean, step_norm, c_prime, step_bound, bound_holds },
    ))
}

/// `K + dK, (id + phidot, dSdot) o G, beta + dbeta`.
pub fn apply_step<T: Real>(x: &TwistedConjugacy<T>, step: &TangentStep<T>) -> Result<TwistedConjugacy<T>> {
    let k = x.k.try_add(&step.delta_k)?;
    let beta = x.beta.iter().zip(&step.delta_beta).map(|(a, b)| *a + *b).collect();
    let inc = FiberedSymplectomorphism::new(
        TorusMap::normalized(step.phi_dot.clone())?,
        ExactOneForm::renormalized(step.s_dot.clone()).0,
    )?;
    let g = if inc.is_identity() { x.g.clone() } else { group_compose(&inc, &x.g)?.0 };
    Ok(TwistedConjugacy { k, g, beta })
}
