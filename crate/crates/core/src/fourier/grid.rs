//! Equispaced grids on the torus and n-dimensional FFTs between them and
//! coefficient boxes.

use rustfft::FftPlanner;

use crate::scalar::{czero, Real, C};

/// Multidimensional in-place FFT over a row-major `m^dim` array (last axis fastest).
/// `inverse = true` computes `sum_k a_k e^{+i k theta}` without normalization.
pub(crate) fn fft_nd<T: Real>(data: &mut [C<T>], dim: usize, m: usize, inverse: bool) {
    if dim == 0 || m <= 1 {
        return;
    }
    debug_assert_eq!(data.len(), m.pow(dim as u32));
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    let mut scratch = vec![czero::<T>(); fft.get_inplace_scratch_len()];
    // last axis: contiguous lines
    fft.process_with_scratch(data, &mut scratch);
    let mut line = vec![czero::<T>(); m];
    for axis in (0..dim - 1).rev() {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        for start in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Angle of grid node `i` on an `m`-point axis.
#[inline]
pub fn node_angle<T: Real>(i: usize, m: usize) -> T {
    T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(m)
}

/// Per-axis node indices of flat grid index `p`.
#[inline]
pub(crate) fn node_indices(mut p: usize, dim: usize, m: usize, out: &mut [usize]) {
    for j in (0..dim).rev() {
        out[j] = p % m;
        p /= m;
    }
}

/// Angles of all grid nodes, one vector per axis.
pub fn node_angles<T: Real>(dim: usize, m: usize) -> Vec<Vec<T>> {
    let total = m.pow(dim as u32);
    let mut axes = vec![vec![T::zero(); total]; dim];
    let mut idx = vec![0usize; dim];
    for p in 0..total {
        node_indices(p, dim, m, &mut idx);
        for j in 0..dim {
            axes[j][p] = node_angle(idx[j], m);
        }
    }
    axes
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5}.
pub fn fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Grid size used for nonlinear operations at truncation order `order`: twice the
/// number of retained modes per axis.
pub fn oversampled_size(order: usize) -> usize {
    2 * (2 * order + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_sizes() {
        assert_eq!(fast_size(7), 8);
        assert_eq!(fast_size(131), 135);
        assert_eq!(fast_size(1), 1);
    }

    #[test]
    fn fft_nd_roundtrip() {
        let m = 6;
        let mut data: Vec<C<f64>> = (0..m * m).map(|i| C::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let orig = data.clone();
        fft_nd(&mut data, 2, m, false);
        fft_nd(&mut data, 2, m, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / (m * m) as f64 - b).norm() < 1e-12);
        }
    }
}
