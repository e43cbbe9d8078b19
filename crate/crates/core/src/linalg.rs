//! Small dense complex linear algebra used throughout the crate.
//!
//! Everything here works on `DMatrix<Complex64>`; the matrices of interest
//! are at most a few hundred rows, so no attempt is made at blocking or
//! sparsity.

use nalgebra::{Complex, DMatrix, DVector};

pub type Complex64 = Complex<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
/// order; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Hermitian eigensolver. Only the Hermitian part of `m` is used.
pub fn eigh(m: &CMat) -> Eigh {
    let n = m.nrows();
    if n == 1 {
        return Eigh { values: vec![m[(0, 0)].re], vectors: CMat::identity(1, 1) };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).values
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `U†U − 1`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn real_trace(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `Re Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { ZERO })
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `u m u†`.
pub fn conjugate(u: &CMat, m: &CMat) -> CMat {
    u * m * u.adjoint()
}

/// Trace norm of a Hermitian matrix, the sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

/// Squared Frobenius norm.
pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Partial trace of an operator on `⊗_k C^{dims[k]}`, keeping the factors
/// listed in `keep` (in increasing order). The result lives on the product of
/// the kept factors in their original order.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "operator dimension does not match factor dims");
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let d_keep: usize = kept_dims.iter().product();
    let d_trace: usize = traced_dims.iter().product();

    // strides of each factor in the full row-major multi-index
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offset = |idx: usize, factors: &[usize], factor_dims: &[usize]| -> usize {
        let mut rem = idx;
        let mut off = 0;
        for pos in (0..factors.len()).rev() {
            let digit = rem % factor_dims[pos];
            rem /= factor_dims[pos];
            off += digit * strides[factors[pos]];
        }
        off
    };
    let keep_off: Vec<usize> = (0..d_keep).map(|i| offset(i, keep, &kept_dims)).collect();
    let trace_off: Vec<usize> = (0..d_trace).map(|t| offset(t, &traced, &traced_dims)).collect();

    let mut out = CMat::zeros(d_keep, d_keep);
    for (i, &ri) in keep_off.iter().enumerate() {
        for (j, &cj) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &trace_off {
                acc += m[(ri + t, cj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Number of real parameters of a `d × d` Hermitian generator.
pub fn generator_len(d: usize) -> usize {
    d * d
}

/// Hermitian matrix from `d²` reals: the first `d` fill the diagonal, the
/// rest fill the strict upper triangle as (real, imaginary) pairs in
/// row-major order.
pub fn hermitian_from_params(d: usize, params: &[f64]) -> CMat {
    assert_eq!(params.len(), generator_len(d));
    let mut g = CMat::zeros(d, d);
    for i in 0..d {
        g[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = Complex64::new(params[k], params[k + 1]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
            k += 2;
        }
    }
    g
}

/// `exp(−i G)` for the Hermitian generator encoded by `params`, computed
/// spectrally so the result is unitary to rounding.
pub fn unitary_from_params(d: usize, params: &[f64]) -> CMat {
    let g = hermitian_from_params(d, params);
    exp_i_hermitian(&g, -1.0)
}

/// `exp(i·t·G)` for Hermitian `G`.
pub fn exp_i_hermitian(g: &CMat, t: f64) -> CMat {
    let e = eigh(g);
    let n = g.nrows();
    let mut scaled = e.vectors.clone();
    for (c, &lam) in e.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, t * lam);
        for r in 0..n {
            scaled[(r, c)] *= phase;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Givens rotation between basis states `i` and `j` of a `d`-dimensional
/// space: `|i⟩ → cos θ |i⟩ + sin θ |j⟩`, `|j⟩ → −sin θ |i⟩ + cos θ |j⟩`.
pub fn givens(d: usize, i: usize, j: usize, theta: f64) -> CMat {
    let mut u = CMat::identity(d, d);
    let (s, c) = theta.sin_cos();
    u[(i, i)] = Complex64::new(c, 0.0);
    u[(j, j)] = Complex64::new(c, 0.0);
    u[(j, i)] = Complex64::new(s, 0.0);
    u[(i, j)] = Complex64::new(-s, 0.0);
    u
}

/// Permutation matrix sending basis state `k` to `perm[k]`.
pub fn permutation_matrix(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut p = CMat::zeros(n, n);
    for (k, &target) in perm.iter().enumerate() {
        p[(target, k)] = ONE;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_sorts_ascending_with_small_residual() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(0.5, 0.3), c(0.0, -1.0), c(0.5, -0.3), c(-1.0, 0.0), c(0.2, 0.0), c(0.0, 1.0), c(0.2, 0.0), c(0.5, 0.0)],
        );
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..3 {
            let v = e.vectors.column(k).into_owned();
            let r = &m * &v - v.scale(e.values[k]);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let a = diag(&[0.7, 0.3]);
        let b = diag(&[0.5, 0.25, 0.25]);
        let ab = kron(&a, &b);
        assert!((partial_trace(&ab, &[2, 3], &[0]) - &a).norm() < 1e-15);
        assert!((partial_trace(&ab, &[2, 3], &[1]) - &b).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_three_factors_keeps_middle() {
        let a = diag(&[0.6, 0.4]);
        let b = diag(&[0.1, 0.9]);
        let r = diag(&[0.2, 0.3, 0.5]);
        let full = kron(&kron(&a, &b), &r);
        let kept = partial_trace(&full, &[2, 2, 3], &[1]);
        assert!((kept - &b).norm() < 1e-15);
        let ar = partial_trace(&full, &[2, 2, 3], &[0, 2]);
        assert!((ar - kron(&a, &r)).norm() < 1e-15);
    }

    #[test]
    fn generated_unitaries_are_unitary() {
        let params: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin() * 3.0).collect();
        let u = unitary_from_params(4, &params);
        assert!(unitarity_defect(&u) < 1e-13);
        let zero = unitary_from_params(4, &[0.0; 16]);
        assert!((zero - CMat::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn givens_rotates_in_plane() {
        let u = givens(4, 1, 2, std::f64::consts::FRAC_PI_2);
        assert!(unitarity_defect(&u) < 1e-15);
        assert!((u[(2, 1)].re - 1.0).abs() < 1e-15);
    }
}
