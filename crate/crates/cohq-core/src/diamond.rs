//! The diamond-measure: the minimal diamond distance between the dephased
//! channel and the dephased image of any detection-incoherent channel,
//! computed by an explicit semidefinite program together with its dual as a
//! strong-duality certificate.
//!
//! With `J = J(Delta Theta)` in `B (x) A` ordering the primal reads
//!
//! ```text
//! minimize    2 || tr_B(Z) ||_inf
//! subject to  Z >= J - W,   [1 - Delta] W = 0,   tr_B(W) = 1_A,
//!             Z >= 0,  W >= 0,
//! ```
//!
//! where `tr_B` traces out the output factor. `W` is parameterized directly
//! by its diagonal (equivalently the stochastic matrix `p(k|i)` of the
//! closest free channel), which removes the `[1 - Delta] W = 0` constraint,
//! and the norm objective is modeled as `minimize a` subject to
//! `a 1_A - 2 tr_B(Z) >= 0`. The dual maximizes
//! `2 (tr(J X) - tr(Y2))` subject to `X <= 1_B (x) rho`, `tr(rho) = 1`,
//! `[1 - Delta] Y1 - X + 1_B (x) Y2 >= 0` and `X, rho >= 0`.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::conic::builder::{Builder, SegValue};
use crate::conic::SolveStatus;
use crate::quantum::linalg::{
    dephase_mat, identity, kron, partial_trace_first, trace, zeros, CMat,
};
use crate::quantum::{compose, Channel, StochasticMatrix};
use crate::{Error, Result};

/// Largest input/output dimension accepted by the SDPs.
pub const DIM_CAP: usize = 8;

/// Primal/dual solutions of the diamond SDP with witnesses.
#[derive(Debug, Clone)]
pub struct DiamondResult {
    /// The measure, equal to the primal optimum (clamped at zero against
    /// solver noise).
    pub value: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal - dual|`, the strong-duality certificate.
    pub gap: f64,
    /// Diagonal Choi matrix of the closest free channel's dephased action.
    pub witness_w: CMat,
    /// Classical action of the closest free channel, read off `W`.
    pub optimal_p: StochasticMatrix,
    pub witness_z: CMat,
    pub dual_x: CMat,
    pub dual_rho: CMat,
    pub dual_y1: CMat,
    pub dual_y2: CMat,
    pub iterations: usize,
}

fn check_cap(chan: &Channel) -> Result<()> {
    if chan.dim_in() > DIM_CAP || chan.dim_out() > DIM_CAP {
        return Err(Error::DimensionCap(format!(
            "diamond SDP supports dimensions up to {DIM_CAP}, channel is {}x{}",
            chan.dim_in(),
            chan.dim_out()
        )));
    }
    Ok(())
}

/// Choi matrix of the dephased channel `Delta . Theta`.
fn dephased_choi(chan: &Channel) -> Result<CMat> {
    let dephased = compose(&Channel::dephasing(chan.dim_out()), chan)?;
    Ok(dephased.choi().data().clone())
}

/// Dual witnesses of the diamond SDP.
#[derive(Debug, Clone)]
pub struct DiamondDual {
    pub value: f64,
    pub x: CMat,
    pub rho: CMat,
    pub y1: CMat,
    pub y2: CMat,
    pub iterations: usize,
}

/// Solve the dual program; the returned value lower-bounds the primal.
pub fn diamond_dual(chan: &Channel, tol: f64) -> Result<DiamondDual> {
    check_cap(chan)?;
    let n = chan.dim_in();
    let m = chan.dim_out();
    let big = m * n;
    let j = dephased_choi(chan)?;

    let mut b = Builder::new();
    let x = b.herm_psd(big);
    let rho = b.herm_psd(n);
    let s2 = b.herm_psd(big);
    let s3 = b.herm_psd(big);
    let y1 = b.herm_free(big);
    let y2 = b.herm_free(n);

    // s2 + x - 1_B (x) rho = 0
    b.eq_matrix(
        big,
        &[
            (s2, &|v: &SegValue| v.herm().clone()),
            (x, &|v: &SegValue| v.herm().clone()),
            (rho, &|v: &SegValue| kron(&identity(m), v.herm()).mapv(|z| -z)),
        ],
        &zeros(big, big),
    );
    // s3 - (y1 - Delta y1) + x - 1_B (x) y2 = 0
    b.eq_matrix(
        big,
        &[
            (s3, &|v: &SegValue| v.herm().clone()),
            (y1, &|v: &SegValue| {
                let h = v.herm();
                dephase_mat(h) - h
            }),
            (x, &|v: &SegValue| v.herm().clone()),
            (y2, &|v: &SegValue| kron(&identity(m), v.herm()).mapv(|z| -z)),
        ],
        &zeros(big, big),
    );
    // tr rho = 1
    b.eq_scalar(&[(rho, &|v: &SegValue| trace(v.herm()).re)], 1.0);

    // maximize 2 (tr(J X) - tr(Y2))  ==  minimize -2 tr(J X) + 2 tr(Y2)
    let jj = j.clone();
    b.objective(x, &move |v: &SegValue| -2.0 * trace(&jj.dot(v.herm())).re);
    b.objective(y2, &|v: &SegValue| 2.0 * trace(v.herm()).re);

    let (result, ex) = b.solve(tol, crate::conic::DEFAULT_MAX_ITER)?;
    if result.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "diamond dual SDP ended with status {:?}",
            result.status
        )));
    }
    Ok(DiamondDual {
        value: -result.primal_value,
        x: ex.herm(&result, x),
        rho: ex.herm(&result, rho),
        y1: ex.herm(&result, y1),
        y2: ex.herm(&result, y2),
        iterations: result.iterations,
    })
}

/// Compute the diamond-measure of a channel, solving both the primal and the
/// dual program and reporting the duality gap as the certificate.
pub fn diamond_measure(chan: &Channel, tol: f64) -> Result<DiamondResult> {
    check_cap(chan)?;
    let n = chan.dim_in();
    let m = chan.dim_out();
    let big = m * n;
    let j = dephased_choi(chan)?;

    let mut b = Builder::new();
    let z = b.herm_psd(big);
    let s1 = b.herm_psd(big);
    let g = b.herm_psd(n);
    let w = b.nonneg(big);
    let a = b.nonneg(1);

    // z - s1 + diag(w) = J   (s1 = Z - J + W >= 0)
    b.eq_matrix(
        big,
        &[
            (z, &|v: &SegValue| v.herm().clone()),
            (s1, &|v: &SegValue| v.herm().mapv(|x| -x)),
            (w, &|v: &SegValue| {
                let len = v.real().len();
                let mut d = zeros(len, len);
                for (idx, &x) in v.real().iter().enumerate() {
                    d[(idx, idx)] = Complex64::new(x, 0.0);
                }
                d
            }),
        ],
        &j,
    );
    // g + 2 tr_B(z) - a 1_A = 0   (g = a 1_A - 2 tr_B(Z) >= 0)
    b.eq_matrix(
        n,
        &[
            (g, &|v: &SegValue| v.herm().clone()),
            (z, &move |v: &SegValue| {
                partial_trace_first(v.herm(), m, n)
                    .expect("segment has product shape")
                    .mapv(|x| 2.0 * x)
            }),
            (a, &move |v: &SegValue| {
                identity(n).mapv(|z| z * Complex64::new(-v.real()[0], 0.0))
            }),
        ],
        &zeros(n, n),
    );
    // tr_B(W) = 1_A: each column of the stochastic matrix on the diagonal of
    // W sums to one. Index layout of w is (k, i) -> k * n + i.
    for i in 0..n {
        let pick_column = move |v: &SegValue| -> f64 {
            v.real()
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx % n == i)
                .map(|(_, &x)| x)
                .sum()
        };
        b.eq_scalar(&[(w, &pick_column)], 1.0);
    }

    b.objective(a, &|v: &SegValue| v.real()[0]);

    let (result, ex) = b.solve(tol, crate::conic::DEFAULT_MAX_ITER)?;
    if result.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "diamond primal SDP ended with status {:?}",
            result.status
        )));
    }

    let dual = diamond_dual(chan, tol)?;
    let primal_value = result.primal_value;
    let w_vec = ex.real(&result, w);
    let mut w_mat = zeros(big, big);
    for (idx, &x) in w_vec.iter().enumerate() {
        w_mat[(idx, idx)] = Complex64::new(x.max(0.0), 0.0);
    }
    let mut p_data = Array2::from_shape_fn((m, n), |(k, i)| w_vec[k * n + i].max(0.0));
    for i in 0..n {
        let s: f64 = p_data.column(i).sum();
        p_data.column_mut(i).mapv_inplace(|v| v / s);
    }
    Ok(DiamondResult {
        value: primal_value.max(0.0),
        primal_value,
        dual_value: dual.value,
        gap: (primal_value - dual.value).abs(),
        witness_w: w_mat,
        optimal_p: StochasticMatrix::new(p_data)?,
        witness_z: ex.herm(&result, z),
        dual_x: dual.x,
        dual_rho: dual.rho,
        dual_y1: dual.y1,
        dual_y2: dual.y2,
        iterations: result.iterations,
    })
}
