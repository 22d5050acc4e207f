//! Index sets: the dense box of wave vectors `[-N, N]^n` and the graded set of
//! action monomials `r^m`, `|m|_1 <= d`.

use std::sync::Arc;

/// Dense box of wave vectors `k` with `|k_j| <= order`, stored row-major with the
/// last axis varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveBox {
    pub dim: usize,
    pub order: usize,
}

impl WaveBox {
    pub fn new(dim: usize, order: usize) -> Self {
        Self { dim, order }
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.order + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let n = self.order as i64;
        let mut idx = 0usize;
        for &kj in k {
            if kj.abs() > n {
                return None;
            }
            idx = idx * self.side() + (kj + n) as usize;
        }
        Some(idx)
    }

    /// Writes the wave vector of flat index `idx` into `out`.
    #[inline]
    pub fn wave_into(&self, mut idx: usize, out: &mut [i64]) {
        let side = self.side();
        for j in (0..self.dim).rev() {
            out[j] = (idx % side) as i64 - self.order as i64;
            idx /= side;
        }
    }

    pub fn wave(&self, idx: usize) -> Vec<i64> {
        let mut k = vec![0; self.dim];
        self.wave_into(idx, &mut k);
        k
    }

    /// Flat table of all wave vectors (`len * dim` entries).
    pub fn waves(&self) -> Vec<i64> {
        let mut table = vec![0i64; self.len() * self.dim];
        for (idx, chunk) in table.chunks_mut(self.dim.max(1)).enumerate() {
            self.wave_into(idx, chunk);
        }
        table
    }

    /// Flat index of `-k` given the flat index of `k`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }
}

/// `|k|_1`.
#[inline]
pub fn l1(k: &[i64]) -> i64 {
    k.iter().map(|x| x.abs()).sum()
}

/// Graded (then lexicographically descending) enumeration of exponents
/// `m in N^n` with `|m|_1 <= degree`, plus a product table truncated at `degree`.
#[derive(Debug, PartialEq, Eq)]
pub struct Monomials {
    dim: usize,
    degree: usize,
    exps: Vec<Vec<usize>>,
    /// `(a, b, a+b)` for every pair with `|a| + |b| <= degree`.
    products: Vec<(usize, usize, usize)>,
}

impl Monomials {
    pub fn new(dim: usize, degree: usize) -> Arc<Self> {
        let mut exps = Vec::new();
        for total in 0..=degree {
            let mut cur = vec![0usize; dim];
            push_graded(&mut exps, &mut cur, 0, total);
        }
        let mut products = Vec::new();
        let mut sum = vec![0usize; dim];
        for (ia, a) in exps.iter().enumerate() {
            for (ib, b) in exps.iter().enumerate() {
                let da: usize = a.iter().sum();
                let db: usize = b.iter().sum();
                if da + db > degree {
                    continue;
                }
                for j in 0..dim {
                    sum[j] = a[j] + b[j];
                }
                let ic = exps.iter().position(|e| *e == sum).expect("closed under sums");
                products.push((ia, ib, ic));
            }
        }
        Arc::new(Self { dim, degree, exps, products })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.exps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    #[inline]
    pub fn exponent(&self, i: usize) -> &[usize] {
        &self.exps[i]
    }

    #[inline]
    pub fn total_degree(&self, i: usize) -> usize {
        self.exps[i].iter().sum()
    }

    pub fn index(&self, m: &[usize]) -> Option<usize> {
        self.exps.iter().position(|e| e == m)
    }

    /// Index of the unit exponent `e_j`.
    pub fn unit(&self, j: usize) -> Option<usize> {
        let mut e = vec![0; self.dim];
        e[j] = 1;
        self.index(&e)
    }

    #[inline]
    pub fn products(&self) -> &[(usize, usize, usize)] {
        &self.products
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.exps.iter().map(|e| e.as_slice())
    }
}

fn push_graded(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, axis: usize, remaining: usize) {
    if axis + 1 == cur.len() {
        cur[axis] = remaining;
        out.push(cur.clone());
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=remaining).rev() {
        cur[axis] = e;
        push_graded(out, cur, axis + 1, remaining - e);
    }
    cur[axis] = 0;
}

/// Number of monomials of degree `<= d` in `n` variables, `C(n + d, n)`.
pub fn monomial_count(n: usize, d: usize) -> usize {
    let mut c = 1usize;
    for i in 1..=n {
        c = c * (d + i) / i;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_box_roundtrip() {
        let b = WaveBox::new(2, 3);
        assert_eq!(b.len(), 49);
        for idx in 0..b.len() {
            let k = b.wave(idx);
            assert_eq!(b.index(&k), Some(idx));
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            assert_eq!(b.index(&neg), Some(b.mirror(idx)));
        }
        assert_eq!(b.wave(b.zero_index()), vec![0, 0]);
    }

    #[test]
    fn monomials_graded() {
        let m = Monomials::new(2, 3);
        assert_eq!(m.len(), monomial_count(2, 3));
        assert_eq!(m.exponent(0), &[0, 0]);
        assert_eq!(m.exponent(1), &[1, 0]);
        assert_eq!(m.exponent(2), &[0, 1]);
        assert_eq!(m.unit(1), Some(2));
        for &(a, b, c) in m.products() {
            for j in 0..2 {
                assert_eq!(m.exponent(a)[j] + m.exponent(b)[j], m.exponent(c)[j]);
            }
        }
        let m1 = Monomials::new(1, 4);
        assert_eq!(m1.len(), 5);
    }
}
