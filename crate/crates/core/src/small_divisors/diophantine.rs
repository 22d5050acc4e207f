//! Brute-force Diophantine constants `gamma = min |k.alpha| |k|_1^tau`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::scalar::Real;

/// Outcome of a brute-force search over `0 < |k|_1 <= k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub gamma: f64,
    pub witness_k: Vec<i64>,
    pub k_max: usize,
    /// Minimum over `|k|_1 <= k_max / 2`.
    pub gamma_half: f64,
    /// `gamma / gamma_half`, in `[0, 1]`; close to 1 means the search box
    /// already captured the minimum.
    pub stability_ratio: f64,
    /// Set when some `k` gives `k.alpha = 0` up to rounding.
    pub resonant: bool,
}

#[derive(Clone, Copy)]
struct Best<T> {
    value: T,
    small: T,
    key: [i64; 4],
}

fn better<T: Real>(a: Best<T>, b: Best<T>) -> Best<T> {
    let pick = |x: T, y: T, kx: &[i64; 4], ky: &[i64; 4]| x < y || (x == y && kx < ky);
    let value_side = if pick(a.value, b.value, &a.key, &b.key) { a } else { b };
    Best { small: a.small.min(b.small), ..value_side }
}

/// Minimum of `|k.alpha| |k|_1^tau` over the half space of nonzero `k` with
/// `|k|_1 <= k_max` (first nonzero entry positive). Dimensions up to 4.
pub fn diophantine_constant<T: Real>(alpha: &[T], tau: T, k_max: usize) -> Result<DiophantineReport> {
    let n = alpha.len();
    if n == 0 || n > 4 {
        return Err(KamError::InvalidParameter(format!("brute force supports 1..=4 frequencies, got {n}")));
    }
    if k_max == 0 {
        return Err(KamError::InvalidParameter("k_max must be positive".into()));
    }
    let weight: Vec<T> = (0..=k_max).map(|l| T::from_usize_lossy(l).powf(tau)).collect();
    let half = (k_max / 2).max(1);
    let abs_alpha: Vec<T> = alpha.iter().map(|a| a.abs()).collect();
    let start = Best { value: T::infinity(), small: T::infinity(), key: [i64::MAX; 4] };
    // index k_0 >= 0 in parallel; k_0 = 0 forces the next axes into the half space
    let best = (0..=k_max as i64)
        .into_par_iter()
        .map(|k0| {
            let mut best = start;
            let mut k = [0i64; 4];
            k[0] = k0;
            let budget = k_max - k0 as usize;
            walk(alpha, &abs_alpha, &weight, half, &mut k, 1, n, k0 as usize, budget, k0 > 0, &mut best);
            best
        })
        .reduce(|| start, better);
    let resonant = best.value == T::zero();
    let gamma = best.value.as_f64();
    let gamma_half = best.small.as_f64();
    let stability_ratio = if gamma_half > 0.0 { gamma / gamma_half } else if resonant { 0.0 } else { 1.0 };
    Ok(DiophantineReport {
        gamma,
        witness_k: best.key[..n].to_vec(),
        k_max,
        gamma_half,
        stability_ratio,
        resonant,
    })
}

#[allow(clippy::too_many_arguments)]
fn walk<T: Real>(
    alpha: &[T],
    abs_alpha: &[T],
    weight: &[T],
    half: usize,
    k: &mut [i64; 4],
    axis: usize,
    n: usize,
    used: usize,
    budget: usize,
    positive: bool,
    best: &mut Best<T>,
) {
    if axis == n {
        if used == 0 || !positive {
            return;
        }
        let mut dot = T::zero();
        let mut scale = T::zero();
        for j in 0..n {
            let kj = T::from_i64_lossy(k[j]);
            dot = dot + kj * alpha[j];
            scale = scale + kj.abs() * abs_alpha[j];
        }
        let mut d = dot.abs();
        if d <= T::lit(4.0) * T::epsilon() * scale {
            d = T::zero();
        }
        let v = d * weight[used];
        let mut key = [0i64; 4];
        key[..n].copy_from_slice(&k[..n]);
        if v < best.value || (v == best.value && key < best.key) {
            best.value = v;
            best.key = key;
        }
        if used <= half && v < best.small {
            best.small = v;
        }
        return;
    }
    let b = budget as i64;
    for kj in -b..=b {
        if !positive && kj < 0 {
            continue;
        }
        k[axis] = kj;
        let a = kj.unsigned_abs() as usize;
        walk(alpha, abs_alpha, weight, half, k, axis + 1, n, used + a, budget - a, positive || kj > 0, best);
    }
    k[axis] = 0;
}

/// A frequency vector together with a Diophantine certificate valid on the
/// searched box: `|k.alpha| >= gamma |k|_1^{-tau}` for `0 < |k|_1 <= k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector<T> {
    pub alpha: Vec<T>,
    pub tau: T,
    pub gamma: T,
    pub k_max: usize,
    pub witness_k: Vec<i64>,
}

impl<T: Real> FrequencyVector<T> {
    /// Runs the brute-force search; a resonance within the box is an error.
    pub fn certify(alpha: Vec<T>, tau: T, k_max: usize) -> Result<Self> {
        let n = alpha.len();
        if !(tau > T::from_usize_lossy(n) - T::one()) && n > 1 {
            return Err(KamError::InvalidParameter(format!("tau must exceed n - 1 = {}", n - 1)));
        }
        let report = diophantine_constant(&alpha, tau, k_max)?;
        if report.resonant {
            let value = crate::fourier::dot_wave(&report.witness_k, &alpha).as_f64();
            return Err(KamError::Resonance { witness: report.witness_k, value });
        }
        Ok(Self { alpha, tau, gamma: T::lit(report.gamma), k_max, witness_k: report.witness_k })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}
