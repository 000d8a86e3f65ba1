//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything here works on `DMatrix<Complex64>` / `DVector<Complex64>`.
//! Matrices are column-major (nalgebra's layout); `vec_mat` / `unvec_mat`
//! use column-major vectorization, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real scalar as a complex number.
#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Trace inner product ⟨A, B⟩ = tr(A B*).
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Frobenius norm.
pub fn fro_norm(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Rank-one operator x ⊗ y : z ↦ ⟨z, y⟩ x, i.e. the matrix x y*.
pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    let mut m = CMatrix::zeros(x.len(), y.len());
    for i in 0..x.len() {
        for j in 0..y.len() {
            m[(i, j)] = x[i] * y[j].conj();
        }
    }
    m
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut v = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            v[i * b.len() + j] = a[i] * b[j];
        }
    }
    v
}

/// Column-major vectorization.
pub fn vec_mat(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_mat`] for an `rows × cols` matrix.
pub fn unvec_mat(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    debug_assert_eq!(v.len(), rows * cols);
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Standard basis vector e_i in ℂⁿ.
pub fn basis_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = cr(1.0);
    v
}

/// Matrix unit E_ij = e_i e_j*.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    matrix_unit_rect(n, n, i, j)
}

/// Rectangular matrix unit.
pub fn matrix_unit_rect(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    m[(i, j)] = cr(1.0);
    m
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// ascending. Returns `(eigenvalues, eigenvectors)` with eigenvectors as
/// columns, orthonormal. The input is symmetrized first so tiny Hermiticity
/// defects do not leak into complex eigenvalues.
pub fn hermitian_eigen_sorted(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let h = (m + m.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Singular values of a complex matrix, sorted descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank_with_tol(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None => 0,
        Some(&s0) if s0 == 0.0 => 0,
        Some(&s0) => sv.iter().filter(|&&s| s > rel_tol * s0).count(),
    }
}

/// Orthonormalize a list of vectors by modified Gram–Schmidt with a second
/// re-orthogonalization pass, dropping vectors whose residual after
/// projection falls below `rel_tol` times their original norm.
pub fn orthonormalize(vectors: &[CVector], rel_tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let orig = v.norm();
        if orig == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&w);
                w -= b * coeff;
            }
        }
        if w.norm() > rel_tol * orig {
            let n = w.norm();
            basis.push(w.unscale(n));
        }
    }
    basis
}

/// Orthonormal basis (as columns) of the column space of `m`, with relative
/// rank threshold `rel_tol`.
pub fn column_space_basis(m: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let max_norm = (0..m.ncols())
        .map(|j| m.column(j).norm())
        .fold(0.0_f64, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let mut basis: Vec<CVector> = Vec::new();
    for j in 0..m.ncols() {
        let mut w: CVector = m.column(j).into();
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&w);
                w -= b * coeff;
            }
        }
        if w.norm() > rel_tol * max_norm {
            let n = w.norm();
            basis.push(w.unscale(n));
        }
    }
    basis
}

/// Unitary polar factor of a square invertible matrix, via SVD: for
/// M = U Σ V*, returns U V*.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    u * vt
}

/// Inverse square root of a Hermitian positive-definite matrix.
pub fn psd_inv_sqrt(m: &CMatrix, rel_tol: f64) -> Option<CMatrix> {
    let (vals, vecs) = hermitian_eigen_sorted(m);
    let top = vals.last().copied().unwrap_or(0.0);
    if top <= 0.0 || vals.iter().any(|&v| v <= rel_tol * top) {
        return None;
    }
    let n = m.nrows();
    let mut d = CMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        d[(i, i)] = cr(1.0 / v.sqrt());
    }
    Some(&vecs * d * vecs.adjoint())
}

/// Standard-normal sample via Box–Muller (keeps the RNG dependency surface
/// to plain uniform draws).
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    c(gaussian(rng), gaussian(rng))
}

/// Random unit vector in ℂⁿ (isotropic).
pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| gaussian_complex(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v.unscale(norm);
        }
    }
}

/// Random unitary matrix (QR of a Gaussian matrix, diagonal phase fixed).
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let cols: Vec<CVector> = (0..n).map(|j| g.column(j).into()).collect();
    let basis = orthonormalize(&cols, 1e-12);
    assert_eq!(basis.len(), n, "gaussian matrix was numerically singular");
    CMatrix::from_columns(&basis)
}

/// Orthogonal projection onto a random k-dimensional subspace.
pub fn random_projection(rng: &mut impl Rng, n: usize, k: usize) -> CMatrix {
    assert!(k <= n);
    let u = random_unitary(rng, n);
    let mut p = CMatrix::zeros(n, n);
    for j in 0..k {
        let col: CVector = u.column(j).into();
        p += outer(&col, &col);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hermitian_eigen_recomposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = CMatrix::from_fn(5, 5, |_, _| gaussian_complex(&mut rng));
        let h = (&g + g.adjoint()).scale(0.5);
        let (vals, vecs) = hermitian_eigen_sorted(&h);
        let mut d = CMatrix::zeros(5, 5);
        for (i, &v) in vals.iter().enumerate() {
            d[(i, i)] = cr(v);
        }
        let recomposed = &vecs * d * vecs.adjoint();
        assert!(fro_norm(&(&recomposed - &h)) < 1e-10);
        assert!(fro_norm(&(vecs.adjoint() * &vecs - identity(5))) < 1e-10);
        for i in 1..vals.len() {
            assert!(vals[i] >= vals[i - 1]);
        }
    }

    #[test]
    fn vectorization_roundtrip_and_kron_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = CMatrix::from_fn(3, 3, |_, _| gaussian_complex(&mut rng));
        let x = CMatrix::from_fn(3, 3, |_, _| gaussian_complex(&mut rng));
        let b = CMatrix::from_fn(3, 3, |_, _| gaussian_complex(&mut rng));
        assert!(fro_norm(&(unvec_mat(&vec_mat(&x), 3, 3) - &x)) < 1e-14);
        // vec(A X B) = (Bᵀ ⊗ A) vec(X) in column-major layout
        let lhs = vec_mat(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_mat(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn polar_factor_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = CMatrix::from_fn(4, 4, |_, _| gaussian_complex(&mut rng));
        let u = polar_unitary(&m);
        assert!(fro_norm(&(&u * u.adjoint() - identity(4))) < 1e-10);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = random_unitary(&mut rng, 6);
        assert!(fro_norm(&(&u * u.adjoint() - identity(6))) < 1e-10);
    }
}
