//! Dense kernels.
//!
//! Every output row is accumulated in the same order no matter how many rows
//! are processed together, so a batched pass returns bit-identical rows to
//! one-at-a-time passes. Large products go through a blocked GEMM whose
//! per-element summation order depends only on the inner dimension; the
//! recurrent step, which runs on one row during rollouts, uses a plain
//! row kernel.

use super::Scalar;

#[inline]
pub fn axpy<F: Scalar>(y: &mut [F], a: F, x: &[F]) {
    for (y, &x) in y.iter_mut().zip(x) {
        *y += a * x;
    }
}

/// How an operand is stored relative to its logical shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Row-major as given.
    Plain,
    /// Row-major storage of the transpose.
    Transposed,
}

/// `out[m x n] += op(a)[m x k] * op(b)[k x n]`, `out` row-major.
pub fn gemm_acc<F: Scalar>(a: &[F], la: Layout, b: &[F], lb: Layout, out: &mut [F], m: usize, k: usize, n: usize) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(out.len(), m * n);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    let (rsa, csa) = match la {
        Layout::Plain => (k as isize, 1),
        Layout::Transposed => (1, m as isize),
    };
    let (rsb, csb) = match lb {
        Layout::Plain => (n as isize, 1),
        Layout::Transposed => (1, k as isize),
    };
    // SAFETY: the asserts above bound every strided index by the slice lengths,
    // and `out` is a unique borrow distinct from `a` and `b`.
    unsafe { F::gemm(m, k, n, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, out.as_mut_ptr(), n as isize, 1) }
}

/// Columns accumulated in registers at a time.
const TILE: usize = 32;

/// `out += a_row * b` for one output row, skipping zero coefficients. Each
/// element sums its terms in increasing `k`.
#[inline(always)]
fn accumulate_row<F: Scalar>(out: &mut [F], a_row: &[F], b: &[F]) {
    let cols = out.len();
    let mut c0 = 0;
    while c0 + TILE <= cols {
        let mut acc = [F::zero(); TILE];
        acc.copy_from_slice(&out[c0..c0 + TILE]);
        for (&a, b_row) in a_row.iter().zip(b.chunks_exact(cols)) {
            if a != F::zero() {
                let src = &b_row[c0..c0 + TILE];
                for j in 0..TILE {
                    acc[j] += a * src[j];
                }
            }
        }
        out[c0..c0 + TILE].copy_from_slice(&acc);
        c0 += TILE;
    }
    if c0 < cols {
        for (&a, b_row) in a_row.iter().zip(b.chunks_exact(cols)) {
            if a != F::zero() {
                axpy(&mut out[c0..], a, &b_row[c0..]);
            }
        }
    }
}

fn matmul_rows<F: Scalar>(a: &[F], b: &[F], out: &mut [F], k: usize, cols: usize) {
    for (a_row, out_row) in a.chunks_exact(k).zip(out.chunks_exact_mut(cols)) {
        accumulate_row(out_row, a_row, b);
    }
}

/// Same arithmetic as [`matmul_rows`], compiled for wider registers. No
/// fused multiply-add is involved, so results match the baseline build.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn matmul_rows_avx2<F: Scalar>(a: &[F], b: &[F], out: &mut [F], k: usize, cols: usize) {
    matmul_rows(a, b, out, k, cols)
}

/// `out[rows x cols] += a[rows x k] * b[k x cols]`, one row at a time.
pub fn matmul_acc<F: Scalar>(a: &[F], b: &[F], out: &mut [F], rows: usize, k: usize, cols: usize) {
    assert_eq!(a.len(), rows * k);
    assert_eq!(b.len(), k * cols);
    assert_eq!(out.len(), rows * cols);
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports the enabled feature.
        return unsafe { matmul_rows_avx2(a, b, out, k, cols) };
    }
    matmul_rows(a, b, out, k, cols)
}

/// Copies `bias` into every row of `out`.
pub fn fill_rows<F: Scalar>(out: &mut [F], bias: &[F]) {
    for row in out.chunks_exact_mut(bias.len()) {
        row.copy_from_slice(bias);
    }
}

/// `out[c] += sum_r d[r x c]`.
pub fn col_sum_acc<F: Scalar>(d: &[F], out: &mut [F]) {
    for row in d.chunks_exact(out.len()) {
        for (o, &x) in out.iter_mut().zip(row) {
            *o += x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * n];
        for r in 0..m {
            for c in 0..n {
                out[r * n + c] = (0..k).map(|i| a[r * k + i] * b[i * n + c]).sum();
            }
        }
        out
    }

    fn transpose(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
        let mut t = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                t[c * rows + r] = m[r * cols + c];
            }
        }
        t
    }

    #[test]
    fn products_match_naive() {
        let (m, k, n) = (3, 5, 37);
        let a: Vec<f64> = (0..m * k).map(|i| i as f64 - 2.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i % 7) as f64 * 0.5).collect();
        let expect: Vec<f64> = naive(&a, &b, m, k, n).iter().map(|x| x + 1.0).collect();
        let mut out = vec![1.0; m * n];
        matmul_acc(&a, &b, &mut out, m, k, n);
        assert_eq!(out, expect);
        let (at, bt) = (transpose(&a, m, k), transpose(&b, k, n));
        for (x, lx) in [(&a, Layout::Plain), (&at, Layout::Transposed)] {
            for (y, ly) in [(&b, Layout::Plain), (&bt, Layout::Transposed)] {
                let mut out = vec![1.0; m * n];
                gemm_acc(x, lx, y, ly, &mut out, m, k, n);
                for (o, e) in out.iter().zip(&expect) {
                    assert!((o - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rows_do_not_depend_on_batch() {
        let (m, k, n) = (45, 64, 70);
        let a: Vec<f32> = (0..m * k).map(|i| ((i * 7919) % 13) as f32 * 0.37 - 2.0).collect();
        let b: Vec<f32> = (0..k * n).map(|i| ((i * 104729) % 17) as f32 * 0.11 - 0.9).collect();
        let mut all = vec![0.25f32; m * n];
        let mut all_gemm = all.clone();
        matmul_acc(&a, &b, &mut all, m, k, n);
        gemm_acc(&a, Layout::Plain, &b, Layout::Plain, &mut all_gemm, m, k, n);
        for r in 0..m {
            let row = &a[r * k..(r + 1) * k];
            let mut one = vec![0.25f32; n];
            matmul_acc(row, &b, &mut one, 1, k, n);
            assert_eq!(&all[r * n..(r + 1) * n], &one[..]);
            let mut one = vec![0.25f32; n];
            gemm_acc(row, Layout::Plain, &b, Layout::Plain, &mut one, 1, k, n);
            assert_eq!(&all_gemm[r * n..(r + 1) * n], &one[..]);
        }
    }
}
