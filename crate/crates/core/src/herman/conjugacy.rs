//! Twisted conjugacies `H = K o G + beta . r` with `K = c + alpha . r + O(r^2)`.

use crate::error::{KamError, Result};
use crate::fourier::FourierSeries;
use crate::jet::ActionJet;
use crate::scalar::Real;
use crate::symplectic::{pullback_jet, FiberedSymplectomorphism};

#[derive(Debug, Clone, PartialEq)]
pub struct TwistedConjugacy<T: Real> {
    pub k: ActionJet<T>,
    pub g: FiberedSymplectomorphism<T>,
    pub beta: Vec<T>,
}

impl<T: Real> TwistedConjugacy<T> {
    /// Checks that `K` is in normal form for `alpha`: constant `r^0`
    /// coefficient and `r^1` coefficient equal to `alpha`, to `1e-13`.
    pub fn new(k: ActionJet<T>, g: FiberedSymplectomorphism<T>, beta: Vec<T>, alpha: &[T]) -> Result<Self> {
        let n = k.dim();
        if g.dim() != n || beta.len() != n || alpha.len() != n {
            return Err(KamError::DimensionMismatch { expected: n, found: beta.len() });
        }
        let x = Self { k, g, beta };
        let defect = x.normal_form_defect(alpha);
        if defect > T::lit(1e-13) {
            return Err(KamError::InvalidParameter(format!(
                "K is not in normal form (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(x)
    }

    /// `(K^o, id, 0)` with `K^o = <H_0> + alpha . r + sum_{|m| >= 2} H_m r^m`.
    pub fn initial(h: &ActionJet<T>, alpha: &[T]) -> Self {
        Self {
            k: normal_form_guess(h, alpha),
            g: FiberedSymplectomorphism::identity(h.dim(), h.order()),
            beta: vec![T::zero(); h.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    /// The constant `c` of the normal form.
    pub fn energy(&self) -> T {
        self.k.term_at(0).mean().re
    }

    /// Largest deviation of `K_0` from a constant and of `K_1` from `alpha`.
    pub fn normal_form_defect(&self, alpha: &[T]) -> T {
        let k0 = self.k.term_at(0);
        let mut worst = max_oscillation(k0);
        for (j, &a) in alpha.iter().enumerate() {
            let idx = self.k.monomials().unit(j).expect("unit");
            let kj = self.k.term_at(idx);
            worst = worst.max(max_oscillation(kj)).max((kj.mean().re - a).abs()).max(kj.mean().im.abs());
        }
        worst
    }

    /// `K o G + beta . r`.
    pub fn image(&self) -> Result<ActionJet<T>> {
        let kg = pullback_jet(&self.k, &self.g)?;
        kg.try_add(&ActionJet::linear(self.dim(), self.k.degree(), self.k.order(), &self.beta))
    }
}

fn max_oscillation<T: Real>(f: &FourierSeries<T>) -> T {
    let z = f.wave_box().zero_index();
    f.coeffs().iter().enumerate().filter(|(i, _)| *i != z).map(|(_, c)| c.norm()).fold(T::zero(), T::max)
}

/// Normal-form initial guess read off a Hamiltonian.
pub fn normal_form_guess<T: Real>(h: &ActionJet<T>, alpha: &[T]) -> ActionJet<T> {
    let n = h.dim();
    let mut k = h.degree_range(2, h.degree());
    k.set_term_at(0, FourierSeries::constant(n, h.order(), h.term_at(0).mean().re));
    k.try_add(&ActionJet::linear(n, h.degree(), h.order(), alpha)).expect("same shape")
}

/// `|H - K o G - beta . r|` in the jet majorant norm at width `s`.
pub fn defect<T: Real>(h: &ActionJet<T>, x: &TwistedConjugacy<T>, s: T) -> Result<T> {
    Ok(h.try_sub(&x.image()?)?.jet_norm(s))
}
