//! Small dense tensor helpers on fixed-size 4D arrays.
//!
//! Index convention throughout the crate: spacetime indices run 0..4 with
//! x0 the time coordinate; tensors are nested `[T; 4]` arrays indexed
//! `t[mu][nu]...` in the order the symbol is written.

use crate::error::{FrError, Result};
use crate::scalar::Scalar;
use std::array::from_fn;

pub type V4<T> = [T; 4];
pub type M4<T> = [[T; 4]; 4];
pub type T3<T> = [[[T; 4]; 4]; 4];
pub type T4<T> = [[[[T; 4]; 4]; 4]; 4];
pub type T5<T> = [[[[[T; 4]; 4]; 4]; 4]; 4];

pub fn vec4<T>(f: impl FnMut(usize) -> T) -> V4<T> {
    from_fn(f)
}

pub fn mat4<T>(mut f: impl FnMut(usize, usize) -> T) -> M4<T> {
    from_fn(|i| from_fn(|j| f(i, j)))
}

pub fn ten3<T>(mut f: impl FnMut(usize, usize, usize) -> T) -> T3<T> {
    from_fn(|i| from_fn(|j| from_fn(|k| f(i, j, k))))
}

pub fn ten4<T>(mut f: impl FnMut(usize, usize, usize, usize) -> T) -> T4<T> {
    from_fn(|i| from_fn(|j| from_fn(|k| from_fn(|l| f(i, j, k, l)))))
}

pub fn sum1<T: Scalar>(mut f: impl FnMut(usize) -> T) -> T {
    f(0) + f(1) + f(2) + f(3)
}

pub fn sum2<T: Scalar>(mut f: impl FnMut(usize, usize) -> T) -> T {
    sum1(|i| sum1(|j| f(i, j)))
}

pub fn sum3<T: Scalar>(mut f: impl FnMut(usize, usize, usize) -> T) -> T {
    sum1(|i| sum1(|j| sum1(|k| f(i, j, k))))
}

pub fn max_abs_v4(v: &V4<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_m4(m: &M4<f64>) -> f64 {
    m.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn max_abs_t3(t: &T3<f64>) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |a, x| a.max(x.abs()))
}

/// 4x4 determinant by cofactor expansion (kept generic so it works on jets).
pub fn det4<T: Scalar>(m: &M4<T>) -> T {
    let minor = |r: [usize; 3], c: [usize; 3]| -> T {
        let a = |i: usize, j: usize| m[r[i]][c[j]].clone();
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    };
    let rows = [1, 2, 3];
    let cols = |skip: usize| -> [usize; 3] {
        let mut out = [0; 3];
        let mut k = 0;
        for j in 0..4 {
            if j != skip {
                out[k] = j;
                k += 1;
            }
        }
        out
    };
    let mut acc = m[0][0].clone() * minor(rows, cols(0));
    acc = acc - m[0][1].clone() * minor(rows, cols(1));
    acc = acc + m[0][2].clone() * minor(rows, cols(2));
    acc = acc - m[0][3].clone() * minor(rows, cols(3));
    acc
}

/// Adjugate/cofactor inverse of a 4x4 matrix. This is the authoritative
/// inversion route for fundamental tensors; closed-form alternatives are
/// compared against it.
pub fn inv4<T: Scalar>(m: &M4<T>) -> Result<(M4<T>, T)> {
    let det = det4(m);
    let scale = max_abs_m4(&mat4(|i, j| m[i][j].value()));
    if det.value().abs() < 1e-14 * scale.powi(4).max(f64::MIN_POSITIVE) {
        return Err(FrError::SingularMetric { det: det.value() });
    }
    let cof = |r: usize, c: usize| -> T {
        let rr: Vec<usize> = (0..4).filter(|&i| i != r).collect();
        let cc: Vec<usize> = (0..4).filter(|&j| j != c).collect();
        let a = |i: usize, j: usize| m[rr[i]][cc[j]].clone();
        let minor = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        if (r + c) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    let mut inv = mat4(|_, _| T::zero());
    for i in 0..4 {
        for j in 0..4 {
            // adjugate is the transposed cofactor matrix
            inv[i][j] = cof(j, i).try_div(&det).map_err(FrError::from)?;
        }
    }
    Ok((inv, det))
}

pub fn mat_mul<T: Scalar>(a: &M4<T>, b: &M4<T>) -> M4<T> {
    mat4(|i, j| sum1(|k| a[i][k].clone() * b[k][j].clone()))
}

pub fn mat_vec<T: Scalar>(a: &M4<T>, v: &V4<T>) -> V4<T> {
    vec4(|i| sum1(|k| a[i][k].clone() * v[k].clone()))
}

/// Eigenvalues of a symmetric 4x4 by cyclic Jacobi rotations, sorted
/// descending. Convergence tolerance 1e-13 on the off-diagonal norm.
pub fn sym_eigenvalues(m: &M4<f64>) -> [f64; 4] {
    let mut a = *m;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q] * a[p][q];
            }
        }
        let scale = (0..4).map(|i| a[i][i].abs()).fold(1e-300, f64::max);
        if off.sqrt() <= 1e-13 * scale {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig = [a[0][0], a[1][1], a[2][2], a[3][3]];
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Rank-one update inverse: for `g = A + lambda b b^T` with `A` invertible
/// and `1 + lambda |b|_A^2 != 0`,
/// `g^{-1} = A^{-1} - lambda/(1 + lambda B^2) B B^T` with `B = A^{-1} b`.
pub fn rank_one_update_inverse<const N: usize>(
    a_inv: &[[f64; N]; N],
    lambda: f64,
    b: &[f64; N],
) -> Option<[[f64; N]; N]> {
    let b_up: [f64; N] = from_fn(|i| (0..N).map(|j| a_inv[i][j] * b[j]).sum());
    let b2: f64 = (0..N).map(|i| b_up[i] * b[i]).sum();
    let denom = 1.0 + lambda * b2;
    if denom == 0.0 {
        return None;
    }
    Some(from_fn(|i| {
        from_fn(|j| a_inv[i][j] - lambda / denom * b_up[i] * b_up[j])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_inverse_roundtrip() {
        let m: M4<f64> = [
            [4.0, 1.0, 0.2, 0.0],
            [1.0, -3.0, 0.5, 0.1],
            [0.2, 0.5, -2.0, 0.3],
            [0.0, 0.1, 0.3, -1.5],
        ];
        let (inv, _) = inv4(&m).unwrap();
        let id = mat_mul(&m, &inv);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - want).abs() < 1e-13, "{i}{j}: {}", id[i][j]);
            }
        }
    }

    #[test]
    fn jacobi_eigenvalues_minkowski() {
        let eta = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ];
        assert_eq!(sym_eigenvalues(&eta), [1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn jacobi_eigenvalues_offdiagonal() {
        // eigenvalues of [[2,1],[1,2]] block are 3 and 1
        let m = [
            [2.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 5.0, 0.0],
            [0.0, 0.0, 0.0, -4.0],
        ];
        let e = sym_eigenvalues(&m);
        let want = [5.0, 3.0, 1.0, -4.0];
        for k in 0..4 {
            assert!((e[k] - want[k]).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn rank_one_identity_plus_e1() {
        // A = I3, lambda = 1, b = e1: g^{-1}[0][0] = 1 - 1/2 = 1/2
        let a_inv = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let inv = rank_one_update_inverse(&a_inv, 1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(inv[0][0], 0.5);
        assert_eq!(inv[1][1], 1.0);
        assert_eq!(inv[0][1], 0.0);
    }
}
