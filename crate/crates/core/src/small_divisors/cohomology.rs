//! The equation `L_alpha f = g` solved mode by mode, and its a priori bounds.

use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{KamError, Result};
use crate::fourier::{dot_wave, FourierSeries};
use crate::scalar::{cplx, Real};

/// Zero-average `f` with `sum_j alpha_j d_j f = g`; `f_k = g_k / (i k.alpha)`.
///
/// The mean of `g` must vanish to `1e-12` relative to `|g|_0`.
pub fn solve_cohomological<T: Real>(g: &FourierSeries<T>, alpha: &[T]) -> Result<FourierSeries<T>> {
    if alpha.len() != g.dim() {
        return Err(KamError::DimensionMismatch { expected: g.dim(), found: alpha.len() });
    }
    let mean = g.mean().norm();
    let threshold = T::lit(1e-12) * g.l1_norm().max(T::min_positive_value());
    if mean > threshold {
        return Err(KamError::NonZeroAverage { mean: mean.as_f64() });
    }
    let bx = g.wave_box();
    let mut k = vec![0i64; g.dim()];
    let scale: T = alpha.iter().map(|a| a.abs()).sum();
    let mut coeffs = g.coeffs().to_vec();
    let zero = bx.zero_index();
    for (i, c) in coeffs.iter_mut().enumerate() {
        if i == zero {
            *c = cplx(T::zero(), T::zero());
            continue;
        }
        bx.wave_into(i, &mut k);
        let d = dot_wave(&k, alpha);
        let kk = T::from_i64_lossy(crate::multi_index::l1(&k));
        if d.abs() <= T::lit(4.0) * T::epsilon() * kk * scale {
            if c.norm() == T::zero() {
                continue;
            }
            return Err(KamError::Resonance { witness: k.clone(), value: d.as_f64() });
        }
        *c = cplx(c.im / d, -c.re / d);
    }
    FourierSeries::from_coeffs(g.dim(), g.order(), coeffs, g.is_real())
}

/// `C_0 = 4^n e^n Gamma(tau + n) / (n - 1)!`, the constant of the Diophantine
/// cohomological estimate.
pub fn cohomological_constant(n: usize, tau: f64) -> f64 {
    let nf = n as f64;
    4f64.powi(n as i32) * nf.exp() * gamma_fn(tau + nf) / gamma_fn(nf)
}

/// `C_0 gamma^{-1} sigma^{-tau-n}`: `|f|_s <= bound |g|_{s+sigma}`.
pub fn cohomological_bound(n: usize, tau: f64, gamma: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(KamError::InvalidWidth(sigma));
    }
    if !(gamma > 0.0) {
        return Err(KamError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(cohomological_constant(n, tau) / gamma * sigma.powf(-tau - n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = FourierSeries<f64>;

    #[test]
    fn single_harmonic() {
        let alpha = 0.7;
        let g = S::cosine(1, 3, &[1], 1.0).unwrap();
        let f = solve_cohomological(&g, &[alpha]).unwrap();
        let expect = S::sine(1, 3, &[1], 1.0 / alpha).unwrap();
        assert!((&f - &expect).max_abs_coeff() < 1e-15);
        assert!(solve_cohomological(&S::zeros(2, 3), &[1.0, 2.0]).unwrap().is_zero());
    }

    #[test]
    fn errors() {
        let g = S::constant(1, 2, 1.0);
        assert!(matches!(solve_cohomological(&g, &[1.0]), Err(KamError::NonZeroAverage { .. })));
        let g = S::cosine(2, 2, &[1, -1], 1.0).unwrap();
        assert!(matches!(solve_cohomological(&g, &[1.0, 1.0]), Err(KamError::Resonance { .. })));
    }

    #[test]
    fn constant_values() {
        assert!((cohomological_bound(1, 1.0, 1.0, 1.0).unwrap() - 4.0 * std::f64::consts::E).abs() < 1e-12);
        let a = cohomological_bound(1, 1.0, 1.0, 0.5).unwrap();
        let b = cohomological_bound(1, 1.0, 1.0, 0.25).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
    }
}
