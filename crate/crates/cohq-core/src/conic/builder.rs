//! Assembles conic problems from equations between complex Hermitian
//! matrices.
//!
//! Each complex Hermitian variable of size `n` becomes either a real PSD
//! segment of side `2n` (via the `[[Re, -Im], [Im, Re]]` embedding) or, when
//! unconstrained, a minimally parameterized free segment of `n^2` real
//! coordinates. Constraint rows are materialized by pushing an orthonormal
//! basis of each segment through the caller's (real-linear) matrix maps, so
//! the maps can be written in plain complex matrix algebra.
//!
//! The embedding over-parameterizes PSD segments; all constraint and
//! objective rows depend only on the Hermitian average of a segment, which
//! makes the real problem attain exactly the complex optimum, and the
//! extractor returns that average.

use num_complex::Complex64;

use super::{
    smat, solve, svec_len, unembed_complex, ConeSegment, ConicProblem, SolveResult,
    SparseTriplets,
};
use crate::quantum::linalg::{hermitize, CMat};
use crate::Result;

/// Handle to a variable segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegId(usize);

#[derive(Debug, Clone, Copy)]
enum SegKind {
    /// Complex Hermitian PSD matrix of side `n`, embedded as `Psd(2n)`.
    HermPsd(usize),
    /// Complex Hermitian free matrix of side `n`, `n^2` coordinates.
    HermFree(usize),
    Nonneg(usize),
    Free(usize),
}

impl SegKind {
    fn num_coords(&self) -> usize {
        match *self {
            SegKind::HermPsd(n) => svec_len(2 * n),
            SegKind::HermFree(n) => n * n,
            SegKind::Nonneg(k) | SegKind::Free(k) => k,
        }
    }

    fn cone(&self) -> ConeSegment {
        match *self {
            SegKind::HermPsd(n) => ConeSegment::Psd(2 * n),
            SegKind::HermFree(n) => ConeSegment::Free(n * n),
            SegKind::Nonneg(k) => ConeSegment::Nonneg(k),
            SegKind::Free(k) => ConeSegment::Free(k),
        }
    }
}

/// Value of one segment handed to constraint/objective closures: the
/// Hermitian matrix for matrix segments, the coordinate vector otherwise.
pub enum SegValue {
    Herm(CMat),
    Real(Vec<f64>),
}

impl SegValue {
    pub fn herm(&self) -> &CMat {
        match self {
            SegValue::Herm(m) => m,
            SegValue::Real(_) => panic!("expected a Hermitian segment"),
        }
    }

    pub fn real(&self) -> &[f64] {
        match self {
            SegValue::Real(v) => v,
            SegValue::Herm(_) => panic!("expected a real segment"),
        }
    }
}

/// Basis element `r` of a segment, as seen by the closures.
fn basis_value(kind: SegKind, r: usize) -> SegValue {
    match kind {
        SegKind::HermPsd(n) => {
            let len = svec_len(2 * n);
            let mut e = vec![0.0; len];
            e[r] = 1.0;
            let s = smat(&e, 2 * n);
            SegValue::Herm(unembed_complex(&s, n))
        }
        SegKind::HermFree(n) => {
            let mut h = CMat::zeros((n, n));
            let (i, j, part) = herm_coord(n, r);
            let inv_sqrt2 = 1.0 / 2f64.sqrt();
            if i == j {
                h[(i, i)] = Complex64::new(1.0, 0.0);
            } else if part == 0 {
                h[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
                h[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
            } else {
                h[(i, j)] = Complex64::new(0.0, inv_sqrt2);
                h[(j, i)] = Complex64::new(0.0, -inv_sqrt2);
            }
            SegValue::Herm(h)
        }
        SegKind::Nonneg(k) | SegKind::Free(k) => {
            let mut v = vec![0.0; k];
            debug_assert!(r < k);
            v[r] = 1.0;
            SegValue::Real(v)
        }
    }
}

/// Coordinate `r` of the Hermitian parameterization: column-major upper
/// triangle, off-diagonal entries split into (re, im) pairs.
/// Returns `(i, j, part)` with `part` 0 = real, 1 = imaginary.
fn herm_coord(n: usize, r: usize) -> (usize, usize, u8) {
    let mut idx = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                if idx == r {
                    return (i, j, 0);
                }
                idx += 1;
            } else {
                if idx == r {
                    return (i, j, 0);
                }
                idx += 1;
                if idx == r {
                    return (i, j, 1);
                }
                idx += 1;
            }
        }
    }
    panic!("coordinate {r} out of range for Hermitian side {n}");
}

/// Row encoding of a Hermitian matrix equation of side `m`: `m^2` real rows,
/// column-major upper triangle, `Re` then `Im` for off-diagonal entries.
fn herm_rows(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..=j {
            out.push(m[(i, j)].re);
            if i < j {
                out.push(m[(i, j)].im);
            }
        }
    }
    out
}

type MatMap<'a> = &'a dyn Fn(&SegValue) -> CMat;
type ScalarMap<'a> = &'a dyn Fn(&SegValue) -> f64;

/// Incremental builder; see the module docs.
pub struct Builder {
    kinds: Vec<SegKind>,
    offsets: Vec<usize>,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    objective: Vec<f64>,
}

impl Builder {
    pub fn new() -> Self {
        Self {
            kinds: Vec::new(),
            offsets: Vec::new(),
            ncols: 0,
            entries: Vec::new(),
            rhs: Vec::new(),
            objective: Vec::new(),
        }
    }

    fn push_seg(&mut self, kind: SegKind) -> SegId {
        let id = SegId(self.kinds.len());
        self.kinds.push(kind);
        self.offsets.push(self.ncols);
        self.ncols += kind.num_coords();
        self.objective.resize(self.ncols, 0.0);
        id
    }

    /// Complex Hermitian PSD variable of side `n`.
    pub fn herm_psd(&mut self, n: usize) -> SegId {
        self.push_seg(SegKind::HermPsd(n))
    }

    /// Unconstrained complex Hermitian variable of side `n`.
    pub fn herm_free(&mut self, n: usize) -> SegId {
        self.push_seg(SegKind::HermFree(n))
    }

    /// Entrywise nonnegative real vector of length `k`.
    pub fn nonneg(&mut self, k: usize) -> SegId {
        self.push_seg(SegKind::Nonneg(k))
    }

    /// Free real vector of length `k`.
    pub fn free(&mut self, k: usize) -> SegId {
        self.push_seg(SegKind::Free(k))
    }

    /// Add the Hermitian matrix equation `sum_t map_t(x_t) = rhs` of side
    /// `dim`. Maps must be real-linear and Hermiticity preserving.
    pub fn eq_matrix(&mut self, dim: usize, terms: &[(SegId, MatMap)], rhs: &CMat) {
        assert_eq!(rhs.dim(), (dim, dim));
        let row0 = self.rhs.len();
        let nrows = dim * dim;
        for (id, map) in terms {
            let kind = self.kinds[id.0];
            let off = self.offsets[id.0];
            for r in 0..kind.num_coords() {
                let img = map(&basis_value(kind, r));
                assert_eq!(img.dim(), (dim, dim), "matrix map returned wrong shape");
                let rows = herm_rows(&hermitize(&img));
                for (k, v) in rows.iter().enumerate() {
                    if *v != 0.0 {
                        self.entries.push((row0 + k, off + r, *v));
                    }
                }
            }
        }
        self.rhs.extend(herm_rows(&hermitize(rhs)));
        debug_assert_eq!(self.rhs.len(), row0 + nrows);
    }

    /// Add the scalar equation `sum_t map_t(x_t) = rhs`.
    pub fn eq_scalar(&mut self, terms: &[(SegId, ScalarMap)], rhs: f64) {
        let row = self.rhs.len();
        for (id, map) in terms {
            let kind = self.kinds[id.0];
            let off = self.offsets[id.0];
            for r in 0..kind.num_coords() {
                let v = map(&basis_value(kind, r));
                if v != 0.0 {
                    self.entries.push((row, off + r, v));
                }
            }
        }
        self.rhs.push(rhs);
    }

    /// Accumulate `map(x_seg)` into the (minimized) objective.
    pub fn objective(&mut self, seg: SegId, map: ScalarMap) {
        let kind = self.kinds[seg.0];
        let off = self.offsets[seg.0];
        for r in 0..kind.num_coords() {
            self.objective[off + r] += map(&basis_value(kind, r));
        }
    }

    /// Finish the problem. Rows with no coefficients are dropped (they can
    /// only arise from identically-zero constraint components).
    pub fn build(self) -> (ConicProblem, Extractor) {
        let nrows = self.rhs.len();
        let mut used = vec![false; nrows];
        for &(r, _, _) in &self.entries {
            used[r] = true;
        }
        let mut remap = vec![usize::MAX; nrows];
        let mut rhs = Vec::with_capacity(nrows);
        for (r, &u) in used.iter().enumerate() {
            if u {
                remap[r] = rhs.len();
                rhs.push(self.rhs[r]);
            } else {
                debug_assert!(
                    self.rhs[r].abs() < 1e-12,
                    "dropped constraint row with nonzero rhs"
                );
            }
        }
        let entries: Vec<(usize, usize, f64)> = self
            .entries
            .into_iter()
            .map(|(r, c, v)| (remap[r], c, v))
            .collect();
        let problem = ConicProblem {
            objective: self.objective,
            constraints: SparseTriplets {
                nrows: rhs.len(),
                ncols: self.ncols,
                entries,
            },
            rhs,
            cones: self.kinds.iter().map(|k| k.cone()).collect(),
        };
        let extractor = Extractor {
            kinds: self.kinds,
            offsets: self.offsets,
        };
        (problem, extractor)
    }

    /// Build and solve in one step.
    pub fn solve(self, tol: f64, max_iter: usize) -> Result<(SolveResult, Extractor)> {
        let (problem, extractor) = self.build();
        let result = solve(&problem, tol, max_iter)?;
        Ok((result, extractor))
    }
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

/// Reads segment values back out of a [`SolveResult`].
pub struct Extractor {
    kinds: Vec<SegKind>,
    offsets: Vec<usize>,
}

impl Extractor {
    fn coords<'a>(&self, result: &'a SolveResult, seg: SegId) -> &'a [f64] {
        let off = self.offsets[seg.0];
        &result.primal[off..off + self.kinds[seg.0].num_coords()]
    }

    /// Hermitian value of a matrix segment.
    pub fn herm(&self, result: &SolveResult, seg: SegId) -> CMat {
        let coords = self.coords(result, seg);
        match self.kinds[seg.0] {
            SegKind::HermPsd(n) => unembed_complex(&smat(coords, 2 * n), n),
            SegKind::HermFree(n) => {
                let mut h = CMat::zeros((n, n));
                for (r, &v) in coords.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let basis = basis_value(SegKind::HermFree(n), r);
                    h = h + basis.herm().mapv(|z| z * Complex64::new(v, 0.0));
                }
                h
            }
            _ => panic!("segment is not a matrix segment"),
        }
    }

    /// Coordinate vector of a real segment.
    pub fn real(&self, result: &SolveResult, seg: SegId) -> Vec<f64> {
        match self.kinds[seg.0] {
            SegKind::Nonneg(_) | SegKind::Free(_) => self.coords(result, seg).to_vec(),
            _ => panic!("segment is not a real segment"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::SolveStatus;
    use crate::quantum::linalg::{eigvalsh, identity, max_abs, trace};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// min t s.t. t 1 - A >= 0 computes the largest eigenvalue of A.
    fn solve_lambda_max(a: &CMat) -> (f64, CMat) {
        let n = a.nrows();
        let mut b = Builder::new();
        let slack = b.herm_psd(n);
        let t = b.free(1);
        let aa = a.clone();
        b.eq_matrix(
            n,
            &[
                (slack, &|v: &SegValue| v.herm().clone()),
                (t, &|v: &SegValue| {
                    identity(n).mapv(|z| z * c(-v.real()[0], 0.0))
                }),
            ],
            &aa.mapv(|z| -z),
        );
        b.objective(t, &|v: &SegValue| v.real()[0]);
        let (result, ex) = b.solve(1e-9, 200).unwrap();
        assert_eq!(result.status, SolveStatus::Optimal);
        (result.primal_value, ex.herm(&result, slack))
    }

    #[test]
    fn lambda_max_of_pauli_y_is_one() {
        let y = ndarray::array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let (val, slack) = solve_lambda_max(&y);
        assert_abs_diff_eq!(val, 1.0, epsilon = 1e-7);
        // slack = t 1 - Y must be PSD
        let min_eig = eigvalsh(&slack)
            .unwrap()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig > -1e-7);
    }

    #[test]
    fn lambda_max_matches_eigh_on_random_hermitian() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g = crate::random::complex_gaussian(3, 3, &mut rng);
            let h = hermitize(&g);
            let (val, _) = solve_lambda_max(&h);
            let top = eigvalsh(&h)
                .unwrap()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert_abs_diff_eq!(val, top, epsilon = 1e-6);
        }
    }

    #[test]
    fn density_matrix_closest_to_target_in_trace_objective() {
        // min tr(X) over X >= P for a complex projector P: optimum tr(P)
        let psi = ndarray::array![c(0.6, 0.0), c(0.0, 0.8)];
        let n = 2;
        let p: CMat = ndarray::Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        let mut b = Builder::new();
        let x = b.herm_psd(n);
        let slack = b.herm_psd(n);
        b.eq_matrix(
            n,
            &[
                (x, &|v: &SegValue| v.herm().clone()),
                (slack, &|v: &SegValue| v.herm().mapv(|z| -z)),
            ],
            &p,
        );
        b.objective(x, &|v: &SegValue| trace(v.herm()).re);
        let (result, ex) = b.solve(1e-9, 200).unwrap();
        assert_eq!(result.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(result.primal_value, 1.0, epsilon = 1e-7);
        let xm = ex.herm(&result, x);
        // optimal X is the projector itself
        assert!(max_abs(&(&xm - &p)) < 1e-5);
    }

    #[test]
    fn scalar_equalities_and_nonneg_segments() {
        // min tr(R) s.t. diag entries tied to a nonneg vector summing to 1:
        // R - diag(w) = 0, sum w = 1 => optimum 1
        let n = 2;
        let mut b = Builder::new();
        let r = b.herm_psd(n);
        let w = b.nonneg(n);
        b.eq_matrix(
            n,
            &[
                (r, &|v: &SegValue| v.herm().clone()),
                (w, &|v: &SegValue| {
                    let mut m = CMat::zeros((2, 2));
                    for (i, &x) in v.real().iter().enumerate() {
                        m[(i, i)] = c(-x, 0.0);
                    }
                    m
                }),
            ],
            &CMat::zeros((2, 2)),
        );
        b.eq_scalar(&[(w, &|v: &SegValue| v.real().iter().sum())], 1.0);
        b.objective(r, &|v: &SegValue| trace(v.herm()).re);
        let (result, ex) = b.solve(1e-9, 200).unwrap();
        assert_eq!(result.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(result.primal_value, 1.0, epsilon = 1e-7);
        let wv = ex.real(&result, w);
        assert_abs_diff_eq!(wv.iter().sum::<f64>(), 1.0, epsilon = 1e-7);
    }
}
