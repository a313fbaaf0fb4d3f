//! Dense complex linear algebra helpers shared by the rest of the crate.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix, the working representation everywhere.
pub type CMat = Array2<Complex64>;
/// Dense complex vector.
pub type CVec = Array1<Complex64>;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros((rows, cols))
}

pub fn identity(n: usize) -> CMat {
    let mut m = zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Matrix unit |i><j|.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

/// `(A + A^\dagger) / 2`, used to suppress Hermiticity drift before
/// decompositions.
pub fn hermitize(a: &CMat) -> CMat {
    let ad = dagger(a);
    (a + &ad).mapv(|z| 0.5 * z)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs(&(a - &dagger(a)))
}

/// Kronecker product with the first factor as the major (slow) index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial trace over the first (major) factor of a `d1*d2 x d1*d2` matrix.
pub fn partial_trace_first(m: &CMat, d1: usize, d2: usize) -> Result<CMat> {
    if m.dim() != (d1 * d2, d1 * d2) {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {0}x{0}, got {1}x{2}",
            d1 * d2,
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = zeros(d2, d2);
    for k in 0..d1 {
        for i in 0..d2 {
            for j in 0..d2 {
                out[(i, j)] += m[(k * d2 + i, k * d2 + j)];
            }
        }
    }
    Ok(out)
}

/// Partial trace over the second (minor) factor of a `d1*d2 x d1*d2` matrix.
pub fn partial_trace_second(m: &CMat, d1: usize, d2: usize) -> Result<CMat> {
    if m.dim() != (d1 * d2, d1 * d2) {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {0}x{0}, got {1}x{2}",
            d1 * d2,
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            for k in 0..d2 {
                out[(i, j)] += m[(i * d2 + k, j * d2 + k)];
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first.
pub fn eigh(a: &CMat) -> Result<(Array1<f64>, CMat)> {
    let h = hermitize(a);
    h.eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("eigh failed: {e}")))
}

/// Eigenvalues only.
pub fn eigvalsh(a: &CMat) -> Result<Array1<f64>> {
    Ok(eigh(a)?.0)
}

pub fn min_eigenvalue(a: &CMat) -> Result<f64> {
    let vals = eigvalsh(a)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Trace norm `tr sqrt(A^\dagger A)`, the sum of singular values.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    let ata = dagger(a).dot(a);
    let vals = eigvalsh(&ata)?;
    Ok(vals.iter().map(|&v| v.max(0.0).sqrt()).sum())
}

/// Trace distance `|| a - b ||_1 / 2`.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    Ok(0.5 * trace_norm(&(a - b))?)
}

/// Discrete Fourier matrix `F_{jk} = exp(2 pi i j k / d) / sqrt(d)`.
pub fn fourier_matrix(d: usize) -> CMat {
    let norm = 1.0 / (d as f64).sqrt();
    Array2::from_shape_fn((d, d), |(j, k)| {
        let phase = std::f64::consts::TAU * (j * k) as f64 / d as f64;
        Complex64::from_polar(norm, phase)
    })
}

/// Zero out all off-diagonal entries (the total dephasing on matrices).
pub fn dephase_mat(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = zeros(n, a.ncols());
    for i in 0..n.min(a.ncols()) {
        out[(i, i)] = a[(i, i)];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&identity(2), &identity(3));
        assert_eq!(max_abs(&(&k - &identity(6))), 0.0);
    }

    #[test]
    fn partial_traces_of_kron_recover_factors() {
        let a = array![[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(3.0, 0.0)]];
        let b = array![[c(0.5, 0.0), c(0.1, 0.3)], [c(0.1, -0.3), c(0.5, 0.0)]];
        let k = kron(&a, &b);
        let tb = partial_trace_second(&k, 2, 2).unwrap();
        let ta = partial_trace_first(&k, 2, 2).unwrap();
        // tr(b) = 1, tr(a) = 4
        assert!(max_abs(&(&tb - &a)) < 1e-12);
        let a_scaled = b.mapv(|z| z * trace(&a));
        assert!(max_abs(&(&ta - &a_scaled)) < 1e-12);
    }

    #[test]
    fn trace_norm_matches_hand_values() {
        let d = array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]];
        assert_abs_diff_eq!(trace_norm(&d).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_norm(&zeros(3, 3)).unwrap(), 0.0, epsilon = 1e-14);
        // |0><0| - I/2 has eigenvalues +-1/2
        let m = array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]];
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fourier_matrix_is_unitary() {
        for d in 1..=5 {
            let f = fourier_matrix(d);
            let prod = dagger(&f).dot(&f);
            assert!(max_abs(&(&prod - &identity(d))) < 1e-12);
        }
    }

    #[test]
    fn fourier_2_is_hadamard() {
        let f = fourier_matrix(2);
        let s = 1.0 / 2f64.sqrt();
        let h = array![[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]];
        assert!(max_abs(&(&f - &h)) < 1e-12);
    }
}
