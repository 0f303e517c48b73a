//! Spectral norm through a Jacobi eigensolver on the Gram matrix.
//!
//! The Hermitian Gram matrix `G = A + iB` is embedded as the real symmetric
//! matrix `[[A, -B], [B, A]]`, whose spectrum is that of `G` with every
//! eigenvalue doubled. Cyclic Jacobi rotations diagonalise it.

use crate::scalar::Real;
use crate::ternary::RingElement;

const MAX_SWEEPS: usize = 64;

/// Largest singular value of `x`. Assumes finite entries.
pub fn spectral_norm<T: Real>(x: &RingElement<T>) -> T {
    let scale = x.max_abs();
    if scale.is_zero() {
        return T::zero();
    }
    let eig = gram_eigenvalues(x, scale);
    let top = eig.into_iter().fold(T::zero(), T::max);
    scale * top.max(T::zero()).sqrt()
}

/// Singular values in descending order (`min(rows, cols)` of them).
pub fn singular_values<T: Real>(x: &RingElement<T>) -> Vec<T> {
    let scale = x.max_abs();
    let k = x.rows().min(x.cols());
    if scale.is_zero() {
        return vec![T::zero(); k];
    }
    let mut eig = gram_eigenvalues(x, scale);
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    // each eigenvalue appears twice in the real embedding
    eig.into_iter()
        .step_by(2)
        .take(k)
        .map(|l| scale * l.max(T::zero()).sqrt())
        .collect()
}

fn gram_eigenvalues<T: Real>(x: &RingElement<T>, scale: T) -> Vec<T> {
    let inv = scale.recip();
    let (m, n) = (x.rows(), x.cols());
    // Gram on the smaller side
    let k = m.min(n);
    let entry = |i: usize, j: usize| x.get(i, j) * inv;
    let mut re = vec![T::zero(); k * k];
    let mut im = vec![T::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = num_complex::Complex::new(T::zero(), T::zero());
            if m <= n {
                for p in 0..n {
                    acc = acc + entry(a, p) * entry(b, p).conj();
                }
            } else {
                for p in 0..m {
                    acc = acc + entry(p, a).conj() * entry(p, b);
                }
            }
            re[a * k + b] = acc.re;
            im[a * k + b] = acc.im;
        }
    }
    let dim = 2 * k;
    let mut s = vec![T::zero(); dim * dim];
    for a in 0..k {
        for b in 0..k {
            let (r, i) = (re[a * k + b], im[a * k + b]);
            s[a * dim + b] = r;
            s[(a + k) * dim + (b + k)] = r;
            s[a * dim + (b + k)] = -i;
            s[(a + k) * dim + b] = i;
        }
    }
    jacobi_eigenvalues(&mut s, dim)
}

/// Eigenvalues of a dense real symmetric matrix (destroyed in place).
pub(crate) fn jacobi_eigenvalues<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let v = a[i * n + j] * a[i * n + j];
                total = total + v;
                if i != j {
                    off = off + v;
                }
            }
        }
        if off <= eps * eps * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.is_zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let two = T::one() + T::one();
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
