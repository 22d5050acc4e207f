//! Evaluation of a series at displaced grid nodes `theta_p + w(theta_p)`.
//!
//! Two routes: a Taylor expansion in the displacement, whose terms
//! `w^a / a! * d^a f` are assembled from FFT-sampled derivative grids, and direct
//! Fourier summation at every displaced node. The Taylor order is chosen from
//! the a priori remainder bound `sum_k |c_k| R_J(|k|_1 |w|_inf)`; when that order
//! or the memory it needs gets too large the direct route is used.

use rayon::prelude::*;

use super::grid::{node_angle, node_indices};
use super::FourierSeries;
use crate::error::Result;
use crate::multi_index::{l1, Monomials};
use crate::scalar::{cplx, czero, Real, C};

const MAX_TAYLOR_ORDER: usize = 48;
const MAX_TABLE_ENTRIES: usize = 1 << 22;

/// Precomputed derivative grids of one series, reusable for many displacement
/// fields whose sup norm stays below `max_shift`.
pub struct ShiftedEvaluator<'a, T: Real> {
    series: &'a FourierSeries<T>,
    m: usize,
    max_shift: T,
    route: Route<T>,
}

enum Route<T> {
    Taylor { order: usize, terms: Vec<(Vec<usize>, T, Vec<C<T>>)> },
    Direct,
}

impl<'a, T: Real> ShiftedEvaluator<'a, T> {
    /// `tol` is relative to the l1 norm of the coefficients.
    pub fn new(series: &'a FourierSeries<T>, m: usize, max_shift: T, tol: T) -> Result<Self> {
        Self::build(series, m, max_shift, tol, false)
    }

    /// Like [`ShiftedEvaluator::new`] but keeps the Taylor route whenever the
    /// order and table size allow it, regardless of cost.
    pub fn taylor_preferred(series: &'a FourierSeries<T>, m: usize, max_shift: T, tol: T) -> Result<Self> {
        Self::build(series, m, max_shift, tol, true)
    }

    fn build(series: &'a FourierSeries<T>, m: usize, max_shift: T, tol: T, force: bool) -> Result<Self> {
        let total = m.pow(series.dim() as u32);
        let order = taylor_order(series, max_shift, tol);
        let route = match order {
            Some(j) => {
                let mono = Monomials::new(series.dim(), j);
                let direct_cost = (2 * series.order() + 1).pow(series.dim() as u32) as f64;
                let fft_cost = mono.len() as f64 * (5.0 * (m as f64).log2() + series.dim() as f64 + 2.0);
                if mono.len() * total > MAX_TABLE_ENTRIES || (!force && fft_cost > direct_cost) {
                    Route::Direct
                } else {
                    Route::Taylor { order: j, terms: derivative_grids(series, m, &mono)? }
                }
            }
            None => Route::Direct,
        };
        Ok(Self { series, m, max_shift, route })
    }

    pub fn taylor_order(&self) -> Option<usize> {
        match &self.route {
            Route::Taylor { order, .. } => Some(*order),
            Route::Direct => None,
        }
    }

    /// Values at `theta_p + shift_p`, `shifts[axis][p]`.
    pub fn eval(&self, shifts: &[Vec<T>]) -> Vec<C<T>> {
        let dim = self.series.dim();
        let total = self.m.pow(dim as u32);
        assert_eq!(shifts.len(), dim);
        let w = shifts.iter().flat_map(|s| s.iter()).fold(T::zero(), |a, x| a.max(x.abs()));
        match &self.route {
            Route::Taylor { order, terms } if w <= self.max_shift => {
                let mut powers: Vec<Vec<Vec<T>>> = Vec::with_capacity(dim);
                for axis in 0..dim {
                    let mut per = vec![vec![T::one(); total]];
                    for e in 1..=*order {
                        let prev = &per[e - 1];
                        per.push(prev.iter().zip(&shifts[axis]).map(|(a, b)| *a * *b).collect());
                    }
                    powers.push(per);
                }
                let mut out = vec![czero::<T>(); total];
                for (exp, inv_fact, grid) in terms {
                    out.par_iter_mut().enumerate().for_each(|(p, o)| {
                        let mut weight = *inv_fact;
                        for (axis, &e) in exp.iter().enumerate() {
                            if e > 0 {
                                weight = weight * powers[axis][e][p];
                            }
                        }
                        *o = *o + grid[p] * weight;
                    });
                }
                out
            }
            _ => direct_shifted(self.series, self.m, shifts),
        }
    }
}

/// One-shot evaluation at displaced nodes.
pub fn eval_shifted<T: Real>(
    series: &FourierSeries<T>,
    m: usize,
    shifts: &[Vec<T>],
    tol: T,
) -> Result<Vec<C<T>>> {
    let w = shifts.iter().flat_map(|s| s.iter()).fold(T::zero(), |a, x| a.max(x.abs()));
    Ok(ShiftedEvaluator::new(series, m, w, tol)?.eval(shifts))
}

/// Direct Fourier summation at every displaced node (the reference route).
pub fn direct_shifted<T: Real>(series: &FourierSeries<T>, m: usize, shifts: &[Vec<T>]) -> Vec<C<T>> {
    let dim = series.dim();
    let total = m.pow(dim as u32);
    (0..total)
        .into_par_iter()
        .map(|p| {
            let mut idx = vec![0usize; dim];
            node_indices(p, dim, m, &mut idx);
            let theta: Vec<T> = (0..dim).map(|j| node_angle::<T>(idx[j], m) + shifts[j][p]).collect();
            series.eval(&theta)
        })
        .collect()
}

/// Smallest Taylor order whose remainder bound is below `tol * |c|_1`, if any.
fn taylor_order<T: Real>(series: &FourierSeries<T>, w: T, tol: T) -> Option<usize> {
    let bx = series.wave_box();
    let mut k = vec![0i64; series.dim()];
    // (|c_k|, |k|_1 w) for nonconstant modes
    let mut weights: Vec<(T, T)> = Vec::new();
    let mut scale = T::zero();
    for (i, c) in series.coeffs().iter().enumerate() {
        let a = c.norm();
        scale = scale + a;
        if a == T::zero() {
            continue;
        }
        bx.wave_into(i, &mut k);
        let kk = l1(&k);
        if kk > 0 {
            weights.push((a, T::from_i64_lossy(kk) * w));
        }
    }
    if weights.is_empty() || w == T::zero() {
        return Some(0);
    }
    let target = tol * scale.max(T::min_positive_value());
    // term_j(x) = x^{j+1} / (j+1)! * e^x bounds the remainder after order j
    let mut terms: Vec<T> = weights.iter().map(|(_, x)| *x * x.exp()).collect();
    for j in 0..=MAX_TAYLOR_ORDER {
        let bound: T = weights.iter().zip(&terms).map(|((a, _), t)| *a * *t).sum();
        if bound <= target {
            return Some(j);
        }
        let denom = T::from_usize_lossy(j + 2);
        for (t, (_, x)) in terms.iter_mut().zip(&weights) {
            *t = *t * *x / denom;
        }
    }
    None
}

fn derivative_grids<T: Real>(
    series: &FourierSeries<T>,
    m: usize,
    mono: &Monomials,
) -> Result<Vec<(Vec<usize>, T, Vec<C<T>>)>> {
    let dim = series.dim();
    let bx = series.wave_box();
    let waves = bx.waves();
    (0..mono.len())
        .into_par_iter()
        .map(|i| {
            let exp = mono.exponent(i).to_vec();
            let mut fact = T::one();
            for &e in &exp {
                for q in 2..=e {
                    fact = fact * T::from_usize_lossy(q);
                }
            }
            let coeffs: Vec<C<T>> = series
                .coeffs()
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let mut factor = cplx(T::one(), T::zero());
                    for (axis, &e) in exp.iter().enumerate() {
                        let ik = cplx(T::zero(), T::from_i64_lossy(waves[idx * dim + axis]));
                        for _ in 0..e {
                            factor = factor * ik;
                        }
                    }
                    c * factor
                })
                .collect();
            let d = FourierSeries::from_coeffs(dim, series.order(), coeffs, false)?;
            Ok((exp, T::one() / fact, d.to_grid(m)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FourierSeries<f64> {
        let a = FourierSeries::cosine(2, 6, &[1, 2], 0.4).unwrap();
        let b = FourierSeries::sine(2, 6, &[3, -1], 0.2).unwrap();
        let c = FourierSeries::cosine(2, 6, &[0, 6], 0.05).unwrap();
        &(&a + &b) + &c
    }

    #[test]
    fn taylor_matches_direct() {
        let f = sample();
        let m = 26;
        let total = m * m;
        let shifts: Vec<Vec<f64>> = (0..2)
            .map(|ax| (0..total).map(|p| 0.01 * ((p * (ax + 3)) as f64).sin()).collect())
            .collect();
        let ev = ShiftedEvaluator::taylor_preferred(&f, m, 0.01, 1e-16).unwrap();
        assert!(ev.taylor_order().is_some());
        let t = ev.eval(&shifts);
        let d = direct_shifted(&f, m, &shifts);
        for (a, b) in t.iter().zip(&d) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_series_needs_no_taylor_terms() {
        let f = FourierSeries::constant(2, 4, 2.0);
        let ev = ShiftedEvaluator::new(&f, 18, 0.5, 1e-16).unwrap();
        assert_eq!(ev.taylor_order(), Some(0));
    }
}
