//! Backend-neutral description of conic optimization problems (semidefinite
//! plus linear) in the standard form
//!
//! ```text
//! minimize    c' x
//! subject to  A x = b,   x in K
//! ```
//!
//! where `K` is an ordered product of cone segments: vectorized real
//! symmetric PSD cones, nonnegative orthants and free segments. PSD segments
//! use the scaled upper-triangle vectorization (`svec`) so that the
//! Euclidean inner product of vectors matches the trace inner product of
//! matrices.
//!
//! [`solve`] is the solver contract; the reference backend is the Clarabel
//! interior-point solver. Complex Hermitian data enter through the
//! `[[Re, -Im], [Im, Re]]` embedding ([`embed_complex`]); the [`builder`]
//! submodule assembles such problems from complex matrix equations.

pub mod builder;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus,
    SupportedConeT::{self, NonnegativeConeT, PSDTriangleConeT, ZeroConeT},
};
use ndarray::prelude::*;
use num_complex::Complex64;

use crate::quantum::linalg::{hermiticity_defect, CMat};
use crate::{Error, Result};

/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration limit.
pub const DEFAULT_MAX_ITER: usize = 200;

// ---------------------------------------------------------------------------
// Symmetric vectorization and the complex embedding
// ---------------------------------------------------------------------------

/// Length of the scaled upper-triangle vectorization of an `n x n` symmetric
/// matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Scaled column-major upper-triangle vectorization: off-diagonal entries
/// are multiplied by sqrt(2) so that `svec(A) . svec(B) = tr(A B)`.
pub fn svec(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let sqrt2 = 2f64.sqrt();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                out.push(m[(i, j)]);
            } else {
                out.push(sqrt2 * 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> Array2<f64> {
    assert_eq!(v.len(), svec_len(n));
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut m = Array2::zeros((n, n));
    let mut idx = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, j)] = v[idx];
            } else {
                m[(i, j)] = v[idx] * inv_sqrt2;
                m[(j, i)] = v[idx] * inv_sqrt2;
            }
            idx += 1;
        }
    }
    m
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a complex
/// Hermitian matrix. Eigenvalues of the embedding are those of `H`, each
/// doubled in multiplicity, so `H >= 0` iff the embedding is.
pub fn embed_complex(h: &CMat) -> Result<Array2<f64>> {
    let defect = hermiticity_defect(h);
    if defect > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "embed_complex expects a Hermitian matrix (defect {defect:.2e})"
        )));
    }
    Ok(embed_complex_unchecked(h))
}

pub(crate) fn embed_complex_unchecked(h: &CMat) -> Array2<f64> {
    let n = h.nrows();
    let mut out = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = h[(i, j)].re;
            out[(n + i, n + j)] = h[(i, j)].re;
            out[(i, n + j)] = -h[(i, j)].im;
            out[(n + i, j)] = h[(i, j)].im;
        }
    }
    out
}

/// Project a `2n x 2n` real symmetric matrix back to the complex Hermitian
/// matrix whose embedding is the closest (averaging over the embedding
/// symmetry).
pub fn unembed_complex(s: &Array2<f64>, n: usize) -> CMat {
    assert_eq!(s.dim(), (2 * n, 2 * n));
    let mut h = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (s[(i, j)] + s[(n + i, n + j)]);
            let im = 0.5 * (s[(n + i, j)] - s[(i, n + j)]);
            h[(i, j)] = Complex64::new(re, im);
        }
    }
    // enforce exact Hermiticity against roundoff
    let hd = h.t().mapv(|z| z.conj());
    (&h + &hd).mapv(|z| 0.5 * z)
}

// ---------------------------------------------------------------------------
// Problem description
// ---------------------------------------------------------------------------

/// One segment of the variable vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSegment {
    /// Vectorized `n x n` real symmetric PSD matrix (svec coordinates).
    Psd(usize),
    /// Entrywise nonnegative block of the given length.
    Nonneg(usize),
    /// Unconstrained block of the given length.
    Free(usize),
}

impl ConeSegment {
    pub fn len(&self) -> usize {
        match *self {
            ConeSegment::Psd(n) => svec_len(n),
            ConeSegment::Nonneg(k) | ConeSegment::Free(k) => k,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sparse matrix in triplet form.
#[derive(Debug, Clone, Default)]
pub struct SparseTriplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseTriplets {
    /// Convert to compressed sparse column form, summing duplicate entries.
    fn to_csc(&self) -> CscMatrix<f64> {
        let mut entries = self.entries.clone();
        entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut colptr = vec![0usize; self.ncols + 1];
        let mut rowval = Vec::with_capacity(entries.len());
        let mut nzval: Vec<f64> = Vec::with_capacity(entries.len());
        let mut idx = 0;
        for c in 0..self.ncols {
            while idx < entries.len() && entries[idx].1 == c {
                let r = entries[idx].0;
                let mut v = entries[idx].2;
                idx += 1;
                while idx < entries.len() && entries[idx].1 == c && entries[idx].0 == r {
                    v += entries[idx].2;
                    idx += 1;
                }
                if v != 0.0 {
                    rowval.push(r);
                    nzval.push(v);
                }
            }
            colptr[c + 1] = rowval.len();
        }
        CscMatrix::new(self.nrows, self.ncols, colptr, rowval, nzval)
    }
}

/// Conic problem in standard form; see the module docs.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub objective: Vec<f64>,
    pub constraints: SparseTriplets,
    pub rhs: Vec<f64>,
    pub cones: Vec<ConeSegment>,
}

impl ConicProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let seg_total: usize = self.cones.iter().map(|s| s.len()).sum();
        if seg_total != self.objective.len() {
            return Err(Error::IllFormedProblem(format!(
                "segment lengths sum to {seg_total}, objective has {} entries",
                self.objective.len()
            )));
        }
        if self.constraints.ncols != self.objective.len() {
            return Err(Error::IllFormedProblem(format!(
                "constraint matrix has {} columns, expected {}",
                self.constraints.ncols,
                self.objective.len()
            )));
        }
        if self.constraints.nrows != self.rhs.len() {
            return Err(Error::IllFormedProblem(format!(
                "constraint matrix has {} rows, rhs has {}",
                self.constraints.nrows,
                self.rhs.len()
            )));
        }
        for &(r, c, _) in &self.constraints.entries {
            if r >= self.constraints.nrows || c >= self.constraints.ncols {
                return Err(Error::IllFormedProblem(format!(
                    "triplet ({r}, {c}) out of range"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Solver contract
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Solution returned by [`solve`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Variable vector, segment layout as in the problem's cone list.
    pub primal: Vec<f64>,
    /// Multipliers of the equality rows.
    pub dual: Vec<f64>,
    /// `|primal - dual| / (1 + |primal|)`.
    pub gap: f64,
    pub iterations: usize,
}

impl SolveResult {
    /// The slice of the primal vector belonging to segment `index`.
    pub fn segment<'a>(&'a self, problem: &ConicProblem, index: usize) -> &'a [f64] {
        let offset: usize = problem.cones[..index].iter().map(|s| s.len()).sum();
        &self.primal[offset..offset + problem.cones[index].len()]
    }
}

/// Solve a conic problem with the Clarabel interior-point backend.
///
/// `Optimal` guarantees primal/dual feasibility residuals and the relative
/// gap are below `tol`. Infeasibility and iteration limits are reported in
/// the status, not as errors.
pub fn solve(problem: &ConicProblem, tol: f64, max_iter: usize) -> Result<SolveResult> {
    problem.validate()?;
    let nvars = problem.num_vars();
    let neq = problem.constraints.nrows;

    // rows enforcing cone membership: s_seg = x_seg
    let mut triplets = problem.constraints.clone();
    let mut cones: Vec<SupportedConeT<f64>> = vec![ZeroConeT(neq)];
    let mut row = neq;
    let mut col = 0usize;
    for seg in &problem.cones {
        let len = seg.len();
        match seg {
            ConeSegment::Psd(n) => {
                for k in 0..len {
                    triplets.entries.push((row + k, col + k, -1.0));
                }
                cones.push(PSDTriangleConeT(*n));
                row += len;
            }
            ConeSegment::Nonneg(k) => {
                for kk in 0..len {
                    triplets.entries.push((row + kk, col + kk, -1.0));
                }
                cones.push(NonnegativeConeT(*k));
                row += len;
            }
            ConeSegment::Free(_) => {}
        }
        col += len;
    }
    let total_rows = row;
    triplets.nrows = total_rows;

    let a = triplets.to_csc();
    let mut b = vec![0.0; total_rows];
    b[..neq].copy_from_slice(&problem.rhs);

    let p = CscMatrix::zeros((nvars, nvars));
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(max_iter as u32)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .build()
        .map_err(|e| Error::IllFormedProblem(format!("solver settings: {e:?}")))?;

    let mut solver = DefaultSolver::new(&p, &problem.objective, &a, &b, &cones, settings)
        .map_err(|e| Error::IllFormedProblem(format!("solver rejected problem: {e:?}")))?;
    solver.solve();

    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::DualInfeasible => SolveStatus::Infeasible,
        _ => SolveStatus::MaxIter,
    };
    let primal_value = sol.obj_val;
    let dual_value = sol.obj_val_dual;
    let gap = (primal_value - dual_value).abs() / (1.0 + primal_value.abs());
    Ok(SolveResult {
        status,
        primal_value,
        dual_value,
        primal: sol.x.clone(),
        dual: sol.z[..neq.min(sol.z.len())].to_vec(),
        gap,
        iterations: sol.iterations as usize,
    })
}
