//! Dense complex linear algebra for small matrices: a complex Schur
//! decomposition via Hessenberg reduction and shifted QR (nalgebra has no
//! non-Hermitian complex eigensolver), eigenvector extraction by back
//! substitution, kernels and operator norms through nalgebra's SVD, joint
//! diagonalization of normal matrices, and a Padé scaling-and-squaring
//! matrix exponential.
//!
//! Everything here targets dimensions in the single digits; no blocking,
//! no balancing beyond what the shifts provide.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative singular-value cutoff for kernel extraction.
pub const KERNEL_CUTOFF: f64 = 1e-8;

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |m, s| m.max(*s))
}

/// A = Q T Q* with Q unitary and T upper triangular.
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

fn householder_vector(x: &[Complex64]) -> Option<(Vec<Complex64>, f64)> {
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let sign = if x[0] == ZERO {
        ONE
    } else {
        x[0] / x[0].norm()
    };
    let mut u = x.to_vec();
    u[0] += sign * norm;
    let unorm2: f64 = u.iter().map(|v| v.norm_sqr()).sum();
    if unorm2 == 0.0 {
        return None;
    }
    Some((u, 2.0 / unorm2))
}

/// Reduce to upper Hessenberg form, accumulating the unitary similarity.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let col: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some((u, beta)) = householder_vector(&col) else {
            continue;
        };
        // h ← P h P with P = I − β u u* acting on rows/cols k+1..
        for j in 0..n {
            let s: Complex64 = (0..u.len()).map(|i| u[i].conj() * h[(k + 1 + i, j)]).sum();
            let s = s * beta;
            for i in 0..u.len() {
                h[(k + 1 + i, j)] -= u[i] * s;
            }
        }
        for i in 0..n {
            let s: Complex64 = (0..u.len()).map(|j| h[(i, k + 1 + j)] * u[j]).sum();
            let s = s * beta;
            for j in 0..u.len() {
                h[(i, k + 1 + j)] -= s * u[j].conj();
            }
        }
        for i in 0..n {
            let s: Complex64 = (0..u.len()).map(|j| q[(i, k + 1 + j)] * u[j]).sum();
            let s = s * beta;
            for j in 0..u.len() {
                q[(i, k + 1 + j)] -= s * u[j].conj();
            }
        }
    }
    // clean the area below the subdiagonal
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = ZERO;
        }
    }
    (h, q)
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// Eigenvalue of the trailing 2×2 block closest to its bottom-right entry.
fn wilkinson_shift(h: &CMatrix, m: usize) -> Complex64 {
    let a = h[(m - 2, m - 2)];
    let b = h[(m - 2, m - 1)];
    let c = h[(m - 1, m - 2)];
    let d = h[(m - 1, m - 1)];
    let delta = (a - d) * 0.5;
    let disc = (delta * delta + b * c).sqrt();
    let denom = if (delta + disc).norm() >= (delta - disc).norm() {
        delta + disc
    } else {
        delta - disc
    };
    if denom == ZERO {
        d
    } else {
        d - b * c / denom
    }
}

/// Complex Schur decomposition by explicit single-shift QR with deflation.
pub fn complex_schur(a: &CMatrix) -> Result<Schur> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidInput("schur needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(Schur {
            q: CMatrix::identity(0, 0),
            t: CMatrix::identity(0, 0),
        });
    }
    let scale = a
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let (mut h, mut q) = hessenberg(a);
    let eps = f64::EPSILON;
    let mut m = n; // active window is 0..m
    let mut stall = 0usize;
    let mut total_iter = 0usize;
    let max_iter = 60 * n.max(4);
    while m > 1 {
        // deflate tiny subdiagonals
        for k in 0..m - 1 {
            if h[(k + 1, k)].norm()
                <= eps * (h[(k, k)].norm() + h[(k + 1, k + 1)].norm()).max(scale * eps)
            {
                h[(k + 1, k)] = ZERO;
            }
        }
        if h[(m - 1, m - 2)] == ZERO {
            m -= 1;
            stall = 0;
            continue;
        }
        total_iter += 1;
        if total_iter > max_iter {
            return Err(Error::NumericalInstability(format!(
                "QR iteration did not converge after {max_iter} sweeps"
            )));
        }
        // active block start
        let mut l = m - 1;
        while l > 0 && h[(l, l - 1)] != ZERO {
            l -= 1;
        }
        stall += 1;
        let sigma = if stall.is_multiple_of(16) {
            // exceptional shift to break symmetric stalls
            h[(m - 1, m - 1)] + Complex64::new(1.5, 0.5) * h[(m - 1, m - 2)].norm()
        } else {
            wilkinson_shift(&h, m)
        };
        // explicit QR step on the active block l..m
        let mut rot = Vec::with_capacity(m - l - 1);
        for i in l..m {
            h[(i, i)] -= sigma;
        }
        for k in l..m - 1 {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
        }
        for (k, (c, s)) in (l..m - 1).zip(rot.iter()) {
            let s = *s;
            let c = *c;
            for i in 0..=(k + 1).min(m - 1) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = c * x + s.conj() * y;
                h[(i, k + 1)] = -s * x + c * y;
            }
            for i in 0..n {
                let x = q[(i, k)];
                let y = q[(i, k + 1)];
                q[(i, k)] = c * x + s.conj() * y;
                q[(i, k + 1)] = -s * x + c * y;
            }
        }
        for i in l..m {
            h[(i, i)] += sigma;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { q, t: h })
}

/// Eigenvalues and (non-orthogonal) unit eigenvectors via back substitution
/// on the Schur factor.
pub fn eigen_decomposition(a: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = a.nrows();
    let schur = complex_schur(a)?;
    let t = &schur.t;
    let tnorm = operator_norm(t).max(1e-300);
    let mut vecs = CMatrix::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let mut v = vec![ZERO; n];
        v[i] = ONE;
        for j in (0..i).rev() {
            let mut s = ZERO;
            for k in j + 1..=i {
                s += t[(j, k)] * v[k];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < f64::EPSILON * tnorm {
                d = Complex64::new(f64::EPSILON * tnorm, 0.0);
            }
            v[j] = -s / d;
        }
        let mut col = &schur.q * CVector::from_vec(v);
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
        vecs.set_column(i, &col);
    }
    Ok((schur.eigenvalues(), vecs))
}

/// Eigen decomposition of a Hermitian matrix: ascending real eigenvalues
/// with orthonormal eigenvectors.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = nalgebra::SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(a.nrows(), a.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Joint spectral decomposition of a normal matrix U (unitary in practice):
/// orthonormal eigenvectors with their eigenvalues, obtained by
/// diagonalizing the commuting Hermitian pair (U+U*)/2 and (U−U*)/2i.
pub fn normal_eigen(u: &CMatrix, normality_tol: f64) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = u.nrows();
    let comm = u * u.adjoint() - u.adjoint() * u;
    let dev = operator_norm(&comm);
    if dev > normality_tol {
        return Err(Error::NumericalInstability(format!(
            "matrix is not normal: ‖UU*−U*U‖ = {dev:e}"
        )));
    }
    let re_part = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    let im_part = (u - u.adjoint()) * Complex64::new(0.0, -0.5);
    let (re_vals, w) = hermitian_eigen(&re_part);
    // group eigenvalues of the real part, then split each group by the
    // imaginary part
    let group_tol = 1e-7 * (1.0 + re_vals.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut vals = vec![ZERO; n];
    let mut vecs = CMatrix::zeros(n, n);
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && (re_vals[end] - re_vals[end - 1]).abs() <= group_tol {
            end += 1;
        }
        let wg = w.columns(start, end - start).into_owned();
        let bg = wg.adjoint() * &im_part * &wg;
        let (im_vals, z) = hermitian_eigen(&bg);
        let rotated = &wg * &z;
        for (offset, iv) in im_vals.iter().enumerate() {
            let col = start + offset;
            vals[col] = Complex64::new(
                re_vals[start..end].iter().sum::<f64>() / (end - start) as f64,
                *iv,
            );
            vecs.set_column(col, &rotated.column(offset));
        }
        // recompute per vector for a sharper eigenvalue
        for (col, val) in vals.iter_mut().enumerate().take(end).skip(start) {
            let v = vecs.column(col).into_owned();
            *val = (v.adjoint() * u * &v)[(0, 0)];
        }
        start = end;
    }
    Ok((vals, vecs))
}

/// Orthonormal basis of the right kernel of `a`, by singular value
/// threshold relative to max(σ_max, floor).
pub fn kernel_basis(a: &CMatrix, scale_floor: f64) -> CMatrix {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let cutoff = KERNEL_CUTOFF * smax.max(scale_floor);
    let mut cols = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= cutoff {
            cols.push(i);
        }
    }
    // singular values beyond min(nrows, ncols) are implicit zeros
    let rank_limit = svd.singular_values.len();
    let mut basis = CMatrix::zeros(n, cols.len() + n.saturating_sub(rank_limit));
    for (dst, &src) in cols.iter().enumerate() {
        basis.set_column(dst, &vt.row(src).adjoint());
    }
    for extra in 0..n.saturating_sub(rank_limit) {
        basis.set_column(cols.len() + extra, &vt.row(rank_limit + extra).adjoint());
    }
    basis
}

/// Orthonormal complement of the columns selected by `kernel_basis`.
pub fn kernel_complement(a: &CMatrix, scale_floor: f64) -> CMatrix {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let cutoff = KERNEL_CUTOFF * smax.max(scale_floor);
    let cols: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cutoff)
        .map(|(i, _)| i)
        .collect();
    let mut basis = CMatrix::zeros(a.ncols(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        basis.set_column(dst, &vt.row(src).adjoint());
    }
    basis
}

/// Orthonormalize the columns of `a` (thin QR, dropping rank-deficient
/// directions by singular value threshold).
pub fn orthonormal_columns(a: &CMatrix) -> CMatrix {
    if a.ncols() == 0 {
        return a.clone();
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > KERNEL_CUTOFF * smax.max(1.0))
        .map(|(i, _)| i)
        .collect();
    let mut out = CMatrix::zeros(a.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// sin of the largest principal angle between the column spans of two
/// orthonormal bases: σ_max((I − Q_a Q_a*) Q_b). Computed this way it stays
/// accurate down to angles near machine precision, unlike acos of an inner
/// product.
pub fn max_principal_angle_sin(qa: &CMatrix, qb: &CMatrix) -> f64 {
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qb.ncols() == 0 {
        return 0.0;
    }
    let resid = qb - qa * (qa.adjoint() * qb);
    operator_norm(&resid)
}

/// 1-norm (max column sum).
fn norm1(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Padé(13) with scaling and squaring.
pub fn expm(a: &CMatrix) -> CMatrix {
    const THETA_13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let nrm = norm1(a);
    let s = if nrm > THETA_13 {
        (nrm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a1 = a * Complex64::new(0.5f64.powi(s), 0.0);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let bc = |i: usize| Complex64::new(B[i], 0.0);
    let u_inner = &a6 * (&a6 * bc(13) + &a4 * bc(11) + &a2 * bc(9))
        + &a6 * bc(7)
        + &a4 * bc(5)
        + &a2 * bc(3)
        + &id * bc(1);
    let u = &a1 * u_inner;
    let v = &a6 * (&a6 * bc(12) + &a4 * bc(10) + &a2 * bc(8))
        + &a6 * bc(6)
        + &a4 * bc(4)
        + &a2 * bc(2)
        + &id * bc(0);
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = lhs
        .lu()
        .solve(&rhs)
        .unwrap_or_else(|| CMatrix::identity(n, n));
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn assert_schur_valid(a: &CMatrix, s: &Schur, tol: f64) {
        let n = a.nrows();
        let qq = s.q.adjoint() * &s.q;
        assert!((qq - CMatrix::identity(n, n)).norm() < tol, "Q not unitary");
        let recon = &s.q * &s.t * s.q.adjoint();
        assert!((recon - a).norm() < tol * (1.0 + a.norm()), "A ≠ QTQ*");
        for j in 0..n {
            for i in j + 1..n {
                assert_eq!(s.t[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn schur_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 5, 8, 12] {
            for _ in 0..12 {
                let a = random_matrix(&mut rng, n);
                let s = complex_schur(&a).unwrap();
                assert_schur_valid(&a, &s, 1e-11);
            }
        }
    }

    #[test]
    fn schur_eigenvalues_match_planted_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 6;
        let planted: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let g = random_matrix(&mut rng, n);
        let q = g.qr().q();
        let d = CMatrix::from_diagonal(&CVector::from_vec(planted.clone()));
        let a = &q * d * q.adjoint();
        let s = complex_schur(&a).unwrap();
        let mut got = s.eigenvalues();
        let mut want = planted;
        let key = |z: &Complex64| (z.re, z.im);
        got.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        want.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn eigenvectors_satisfy_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 4, 7] {
            for _ in 0..8 {
                let a = random_matrix(&mut rng, n);
                let (vals, vecs) = eigen_decomposition(&a).unwrap();
                for (i, lambda) in vals.iter().enumerate() {
                    let v = vecs.column(i).into_owned();
                    let resid = &a * &v - &v * *lambda;
                    assert!(resid.norm() < 1e-9, "n={n} λ={lambda}: {}", resid.norm());
                }
            }
        }
    }

    #[test]
    fn schur_handles_repeated_eigenvalues() {
        // Jordan-like block: defective matrix, Schur must still reconstruct
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                ONE,
                Complex64::new(1.0, 0.0),
                ZERO,
                ZERO,
                ONE,
                Complex64::new(1.0, 0.0),
                ZERO,
                ZERO,
                ONE,
            ],
        );
        let s = complex_schur(&a).unwrap();
        assert_schur_valid(&a, &s, 1e-10);
        for ev in s.eigenvalues() {
            assert!((ev - ONE).norm() < 1e-7);
        }
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_matrix(&mut rng, 6);
        let h = &g + g.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            6,
            vals.iter().map(|v| Complex64::new(*v, 0.0)),
        ));
        let recon = &vecs * d * vecs.adjoint();
        assert!((recon - &h).norm() < 1e-10);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn normal_eigen_diagonalizes_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 4, 6] {
            let g = random_matrix(&mut rng, n);
            let u = g.qr().q();
            let (vals, vecs) = normal_eigen(&u, 1e-8).unwrap();
            // orthonormal eigenvectors
            assert!((vecs.adjoint() * &vecs - CMatrix::identity(n, n)).norm() < 1e-10);
            for (i, lambda) in vals.iter().enumerate() {
                assert!((lambda.norm() - 1.0).abs() < 1e-10);
                let v = vecs.column(i).into_owned();
                let resid = &u * &v - &v * *lambda;
                assert!(resid.norm() < 1e-9, "λ={lambda}: {}", resid.norm());
            }
        }
    }

    #[test]
    fn normal_eigen_splits_conjugate_pairs() {
        // rotation block: eigenvalues e^{±iφ} share the same real part
        let phi = std::f64::consts::TAU * 0.3;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(phi.cos(), 0.0),
                Complex64::new(-phi.sin(), 0.0),
                Complex64::new(phi.sin(), 0.0),
                Complex64::new(phi.cos(), 0.0),
            ],
        );
        let (vals, _) = normal_eigen(&u, 1e-10).unwrap();
        let mut ims: Vec<f64> = vals.iter().map(|v| v.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + phi.sin()).abs() < 1e-10);
        assert!((ims[1] - phi.sin()).abs() < 1e-10);
    }

    #[test]
    fn normal_eigen_rejects_nonnormal() {
        let a = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(normal_eigen(&a, 1e-8).is_err());
    }

    #[test]
    fn kernel_of_projector_complement() {
        // P = diag(1,1,0): kernel of P is e3, complement is span(e1,e2)
        let p = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, ZERO]));
        let k = kernel_basis(&p, 1.0);
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].norm() - 1.0).abs() < 1e-12);
        let c = kernel_complement(&p, 1.0);
        assert_eq!(c.ncols(), 2);
        let angle = max_principal_angle_sin(&CMatrix::from_partial_diagonal(3, 2, &[ONE, ONE]), &c);
        assert!(angle < 1e-12);
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        let z = CMatrix::zeros(3, 3);
        let k = kernel_basis(&z, 1.0);
        assert_eq!(k.ncols(), 3);
    }

    #[test]
    fn principal_angle_detects_rotation() {
        let e1 = CMatrix::from_partial_diagonal(2, 1, &[ONE]);
        let mut rot = CMatrix::zeros(2, 1);
        let phi = 0.1f64;
        rot[(0, 0)] = Complex64::new(phi.cos(), 0.0);
        rot[(1, 0)] = Complex64::new(phi.sin(), 0.0);
        let s = max_principal_angle_sin(&e1, &rot);
        assert!((s - phi.sin()).abs() < 1e-12);
    }

    #[test]
    fn expm_basics() {
        // nilpotent: e^{[[0,1],[0,0]]} = [[1,1],[0,1]]
        let n = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let e = expm(&n);
        assert!((e[(0, 0)] - ONE).norm() < 1e-14);
        assert!((e[(0, 1)] - ONE).norm() < 1e-14);
        assert!((e[(1, 1)] - ONE).norm() < 1e-14);

        // diagonal
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 2.0),
        ]));
        let e = expm(&d);
        assert!((e[(0, 0)] - Complex64::new((-0.5f64).exp(), 0.0)).norm() < 1e-12);
        assert!((e[(1, 1)] - Complex64::new(0.0, 2.0).exp()).norm() < 1e-12);

        // skew-Hermitian exponentiates to a unitary
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = random_matrix(&mut rng, 5);
        let skew = (&g - g.adjoint()) * Complex64::new(0.5, 0.0);
        let u = expm(&skew);
        assert!((u.adjoint() * &u - CMatrix::identity(5, 5)).norm() < 1e-11);

        // scaling branch: large norm still accurate on a known case
        let big = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(3.0, 40.0),
            Complex64::new(-7.0, 0.0),
        ]));
        let e = expm(&big);
        assert!((e[(0, 0)] - Complex64::new(3.0, 40.0).exp()).norm() / e[(0, 0)].norm() < 1e-10);
        assert!((e[(1, 1)] - Complex64::new((-7.0f64).exp(), 0.0)).norm() < 1e-10);
    }
}
