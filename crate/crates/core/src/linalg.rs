//! Small dense real linear algebra (row-major `n x n`), LU with partial pivoting.

use crate::error::{KamError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &[T], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(KamError::DimensionMismatch { expected: n * n, found: a.len() });
        }
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        for col in 0..n {
            let (piv, pmax) = (col..n)
                .map(|r| (r, lu[r * n + col].abs()))
                .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > T::epsilon() * scale) {
                return Err(KamError::Singular(format!("pivot {pmax} in column {col}")));
            }
            if piv != col {
                for c in 0..n {
                    lu.swap(piv * n + c, col * n + c);
                }
                perm.swap(piv, col);
            }
            let d = lu[col * n + col];
            for r in col + 1..n {
                let f = lu[r * n + col] / d;
                lu[r * n + col] = f;
                for c in col + 1..n {
                    lu[r * n + c] = lu[r * n + c] - f * lu[col * n + c];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] = x[r] - self.lu[r * n + c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] = x[r] - self.lu[r * n + c] * x[c];
            }
            x[r] = x[r] / self.lu[r * n + r];
        }
        x
    }

    pub fn determinant(&self) -> T {
        let n = self.n;
        let mut d = (0..n).fold(T::one(), |acc, i| acc * self.lu[i * n + i]);
        // parity of the row permutation
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                d = -d;
            }
        }
        d
    }

    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[c] = T::one();
            let col = self.solve(&e);
            for r in 0..n {
                inv[r * n + c] = col[r];
            }
        }
        inv
    }
}

pub fn solve<T: Real>(a: &[T], n: usize, b: &[T]) -> Result<Vec<T>> {
    Ok(Lu::new(a, n)?.solve(b))
}

pub fn inverse<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    Ok(Lu::new(a, n)?.inverse())
}

pub fn transpose<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let mut t = vec![T::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            t[c * n + r] = a[r * n + c];
        }
    }
    t
}

pub fn mat_vec<T: Real>(a: &[T], n: usize, x: &[T]) -> Vec<T> {
    (0..n).map(|r| (0..n).map(|c| a[r * n + c] * x[c]).sum()).collect()
}

/// Induced infinity norm (max row sum).
pub fn norm_inf<T: Real>(a: &[T], n: usize) -> T {
    (0..n)
        .map(|r| (0..n).map(|c| a[r * n + c].abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

/// Condition number in the infinity norm; infinite for singular input.
pub fn condition_inf<T: Real>(a: &[T], n: usize) -> T {
    match inverse(a, n) {
        Ok(inv) => norm_inf(a, n) * norm_inf(&inv, n),
        Err(_) => T::infinity(),
    }
}

pub fn vec_norm_inf<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a: [f64; 9] = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = [1.0, -2.0, 0.5];
        let b = mat_vec(&a, 3, &x);
        let y = solve(&a, 3, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
        let inv = inverse(&a, 3).unwrap();
        let id = (0..9).map(|i| {
            let (r, c) = (i / 3, i % 3);
            (0..3).map(|k| a[r * 3 + k] * inv[k * 3 + c]).sum::<f64>()
        });
        for (i, v) in id.enumerate() {
            let e = if i / 3 == i % 3 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_singular() {
        assert!(Lu::new(&[1.0, 2.0, 2.0, 4.0], 2).is_err());
        assert!(condition_inf::<f64>(&[1.0, 2.0, 2.0, 4.0], 2).is_infinite());
    }
}
