//! The nSID-measure: the minimal induced-trace-norm distance between the
//! dephased channel and the dephased image of any detection-incoherent
//! channel,
//!
//! ```text
//! min over free Phi  of  max over states rho  of  || Delta (Theta - Phi) rho ||_1,
//! ```
//!
//! evaluated by alternating two bounds until they meet:
//!
//! * a lower bound from a linear program over a finite, growing state set
//!   ([`outer_lp`]), optimizing the classical action `p(k|l)` of the free
//!   channel;
//! * an upper bound from the exact inner maximization over states for the
//!   current free channel ([`inner_max`]), evaluated by enumerating binary
//!   vectors over the output indices and solving a small semidefinite
//!   program for each.
//!
//! The state found by the inner step is added to the state set together with
//! its orbit under conjugation by powers of `Z = diag(1, w, ..., w^{d-1})`,
//! which preserves its populations, and the loop repeats.

use ndarray::prelude::*;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::classify::channel_from_stochastic;
use crate::conic::builder::{Builder, SegValue};
use crate::conic::{solve, ConeSegment, ConicProblem, SolveStatus, SparseTriplets};
use crate::quantum::linalg::{trace, CMat};
use crate::quantum::{Channel, DensityMatrix, StochasticMatrix};
use crate::{Error, Result};

/// Largest input/output dimension accepted by the iterative scheme.
pub const DIM_CAP: usize = 8;
/// Default termination tolerance on `upper - lower`.
pub const DEFAULT_TOL: f64 = 1e-4;
/// Default iteration limit for the outer loop.
pub const DEFAULT_MAX_ITER: usize = 50;

const SOLVER_TOL: f64 = 1e-8;
const SOLVER_MAX_ITER: usize = 200;

// ---------------------------------------------------------------------------
// StateSet
// ---------------------------------------------------------------------------

/// Ordered collection of equal-dimension states, deduplicated in trace
/// distance.
#[derive(Debug, Clone)]
pub struct StateSet {
    dim: usize,
    states: Vec<DensityMatrix>,
}

/// Two states closer than this in trace distance count as duplicates.
const DEDUP_TOL: f64 = 1e-10;

impl StateSet {
    pub fn from_states(states: Vec<DensityMatrix>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidArgument("empty state set".into()));
        };
        let dim = first.dim();
        let mut set = Self {
            dim,
            states: Vec::new(),
        };
        for rho in states {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch(
                    "state set mixes dimensions".into(),
                ));
            }
            set.push_dedup(rho)?;
        }
        Ok(set)
    }

    /// Incoherent basis projectors, Fourier basis projectors and the
    /// maximally coherent state: the incoherent states pin the classical
    /// action of the free channel, the coherent ones give a nontrivial first
    /// lower bound.
    pub fn initial(dim: usize) -> Self {
        let mut states = Vec::with_capacity(2 * dim + 1);
        for i in 0..dim {
            states.push(DensityMatrix::basis_state(dim, i));
        }
        for k in 0..dim {
            states.push(DensityMatrix::fourier_state(dim, k));
        }
        states.push(DensityMatrix::maximally_coherent(dim));
        Self::from_states(states).expect("initial states share the dimension")
    }

    /// Add a state unless it duplicates an existing one. Returns whether the
    /// set grew.
    pub fn push_dedup(&mut self, rho: DensityMatrix) -> Result<bool> {
        for existing in &self.states {
            if existing.trace_distance(&rho)? <= DEDUP_TOL {
                return Ok(false);
            }
        }
        self.states.push(rho);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }
}

/// The state set extended by the orbit of `rho_star` under conjugation by
/// powers of `Z = diag(1, w, ..., w^{d-1})`, `w = exp(2 pi i / d)`. All
/// orbit states share the populations of `rho_star`.
pub fn augment(set: &StateSet, rho_star: &DensityMatrix) -> Result<StateSet> {
    let mut out = set.clone();
    augment_in_place(&mut out, rho_star)?;
    Ok(out)
}

fn augment_in_place(set: &mut StateSet, rho_star: &DensityMatrix) -> Result<bool> {
    let d = rho_star.dim();
    if d != set.dim() {
        return Err(Error::DimensionMismatch(
            "state dimension differs from the set's".into(),
        ));
    }
    let mut grew = false;
    for k in 0..d {
        let mut conj = rho_star.data().clone();
        for i in 0..d {
            for j in 0..d {
                let phase = std::f64::consts::TAU * (k * (i + d - j) % d) as f64 / d as f64;
                conj[(i, j)] *= Complex64::from_polar(1.0, phase);
            }
        }
        grew |= set.push_dedup(DensityMatrix::new(conj)?)?;
    }
    Ok(grew)
}

// ---------------------------------------------------------------------------
// Outer linear program (lower bound)
// ---------------------------------------------------------------------------

/// Lower-bound LP over the classical action `P` of the free channel:
///
/// ```text
/// minimize 2x   s.t.  x >= sum_k T_{k,i},  T >= 0,  T >= S - P R,
///                     P column-stochastic,
/// ```
///
/// where column `i` of `R` holds the populations of the `i`-th state and
/// column `i` of `S` the populations of its image under `Delta Theta`. The
/// split through `T` encodes `|S - P R|` via the positive part, valid
/// because each column of `S - P R` sums to zero.
pub fn outer_lp(s: &Array2<f64>, r: &Array2<f64>) -> Result<(f64, StochasticMatrix)> {
    let (m, ns) = s.dim();
    let (n, nr) = r.dim();
    if ns != nr || ns == 0 {
        return Err(Error::DimensionMismatch(format!(
            "S has {ns} columns, R has {nr}"
        )));
    }
    let nstates = ns;

    // column layout: [x | T (m*nstates) | P (m*n) | u (nstates) | v (m*nstates)]
    let t_off = 1;
    let p_off = t_off + m * nstates;
    let u_off = p_off + m * n;
    let v_off = u_off + nstates;
    let ncols = v_off + m * nstates;
    let t_idx = |k: usize, i: usize| t_off + k * nstates + i;
    let p_idx = |k: usize, l: usize| p_off + k * n + l;

    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut row = 0;

    // x - sum_k T_{k,i} - u_i = 0
    for i in 0..nstates {
        entries.push((row, 0, 1.0));
        for k in 0..m {
            entries.push((row, t_idx(k, i), -1.0));
        }
        entries.push((row, u_off + i, -1.0));
        rhs.push(0.0);
        row += 1;
    }
    // T_{k,i} + sum_l P_{k,l} R_{l,i} - v_{k,i} = S_{k,i}
    for k in 0..m {
        for i in 0..nstates {
            entries.push((row, t_idx(k, i), 1.0));
            for l in 0..n {
                if r[(l, i)] != 0.0 {
                    entries.push((row, p_idx(k, l), r[(l, i)]));
                }
            }
            entries.push((row, v_off + k * nstates + i, -1.0));
            rhs.push(s[(k, i)]);
            row += 1;
        }
    }
    // sum_k P_{k,l} = 1
    for l in 0..n {
        for k in 0..m {
            entries.push((row, p_idx(k, l), 1.0));
        }
        rhs.push(1.0);
        row += 1;
    }

    let mut objective = vec![0.0; ncols];
    objective[0] = 2.0;
    let problem = ConicProblem {
        objective,
        constraints: SparseTriplets {
            nrows: row,
            ncols,
            entries,
        },
        rhs,
        cones: vec![ConeSegment::Free(1), ConeSegment::Nonneg(ncols - 1)],
    };
    let sol = solve(&problem, SOLVER_TOL, SOLVER_MAX_ITER)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "outer LP ended with status {:?}",
            sol.status
        )));
    }

    let mut p_data = Array2::from_shape_fn((m, n), |(k, l)| sol.primal[p_idx(k, l)].max(0.0));
    for l in 0..n {
        let total: f64 = p_data.column(l).sum();
        p_data.column_mut(l).mapv_inplace(|v| v / total);
    }
    Ok((sol.primal_value, StochasticMatrix::new(p_data)?))
}

// ---------------------------------------------------------------------------
// Inner maximization (upper bound)
// ---------------------------------------------------------------------------

/// Population functionals of a weighted channel difference: `blocks[i]` is
/// the Hermitian matrix `C_i` with `tr(rho C_i) = <i| D(rho) |i>` for
/// `D = sum_t w_t Theta_t`.
fn population_blocks(terms: &[(f64, &Channel)]) -> Vec<CMat> {
    let m = terms[0].1.dim_out();
    let n = terms[0].1.dim_in();
    let mut blocks = vec![CMat::zeros((n, n)); m];
    for &(weight, chan) in terms {
        for kraus in chan.kraus() {
            for i in 0..m {
                for a in 0..n {
                    for b in 0..n {
                        // <i| K E_ab K^dag |i> contracted against rho[a, b]
                        blocks[i][(a, b)] +=
                            Complex64::new(weight, 0.0) * kraus[(i, a)].conj() * kraus[(i, b)];
                    }
                }
            }
        }
    }
    blocks
}

/// Value of the inner SDP branch for one binary vector `B`: maximize
/// `2 sum_{i in B} tr(rho_i C_i)` subject to `0 <= rho_i <= rho`,
/// `tr(rho_i) = 1`, `tr(rho) = 1`. The trace constraints together with
/// `rho_i <= rho` force every selected `rho_i` to equal `rho` (the slack is
/// a traceless PSD matrix), so the branch is solved in the equivalent
/// reduced form `maximize 2 tr(rho sum_{i in B} C_i)` over states, which
/// has a strictly feasible interior. Returns the value and the maximizer.
fn inner_sdp(blocks: &[CMat], bits: u32, tol: f64) -> Result<(f64, DensityMatrix)> {
    let n = blocks[0].nrows();
    let mut q = CMat::zeros((n, n));
    for (i, block) in blocks.iter().enumerate() {
        if bits >> i & 1 == 1 {
            q += block;
        }
    }

    let mut b = Builder::new();
    let rho = b.herm_psd(n);
    b.eq_scalar(&[(rho, &|v: &SegValue| trace(v.herm()).re)], 1.0);
    b.objective(rho, &move |v: &SegValue| -2.0 * trace(&q.dot(v.herm())).re);

    let (result, ex) = b.solve(tol, SOLVER_MAX_ITER)?;
    if result.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "inner SDP for B = {bits:b} ended with status {:?}",
            result.status
        )));
    }
    let rho_star = DensityMatrix::project(&ex.herm(&result, rho))?;
    Ok((-result.primal_value, rho_star))
}

/// Exact maximization of `|| Delta D rho ||_1` over states for a weighted
/// channel difference `D` whose output trace is the constant
/// `trace_offset`. Enumerates all binary vectors over the output indices.
fn inner_max_blocks(
    blocks: &[CMat],
    trace_offset: f64,
    tol: f64,
) -> Result<(f64, DensityMatrix)> {
    let m = blocks.len();
    let n = blocks[0].nrows();
    if m > DIM_CAP {
        return Err(Error::DimensionCap(format!(
            "inner enumeration supports output dimension up to {DIM_CAP}, got {m}"
        )));
    }

    // B = empty and B = full have the closed values -trace_offset and
    // +trace_offset (the population sums over the full index set are the
    // constant trace_offset).
    let mut best = (trace_offset.abs(), DensityMatrix::maximally_mixed(n));

    let candidates: Vec<u32> = (1..(1u32 << m) - 1).collect();
    let solved: Result<Vec<(f64, DensityMatrix)>> = candidates
        .par_iter()
        .map(|&bits| inner_sdp(blocks, bits, tol))
        .collect();
    for (val, rho) in solved? {
        let total = val - trace_offset;
        if total > best.0 {
            best = (total, rho);
        }
    }
    Ok(best)
}

/// Exact maximization of `|| Delta (Theta - Phi_P) rho ||_1` over input
/// states, where `Phi_P` is the classical channel with action `P`. This is
/// a valid upper bound on the nSID-measure for any feasible `P`.
pub fn inner_max(
    chan: &Channel,
    p: &StochasticMatrix,
    tol: f64,
) -> Result<(f64, DensityMatrix)> {
    if p.rows() != chan.dim_out() || p.cols() != chan.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "stochastic matrix is {}x{}, channel is {}x{}",
            p.rows(),
            p.cols(),
            chan.dim_out(),
            chan.dim_in()
        )));
    }
    let free = channel_from_stochastic(p);
    let blocks = population_blocks(&[(1.0, chan), (-1.0, &free)]);
    inner_max_blocks(&blocks, 0.0, tol)
}

// ---------------------------------------------------------------------------
// The iteration
// ---------------------------------------------------------------------------

/// Outcome of the iterative bound scheme.
#[derive(Debug, Clone)]
pub struct NsidResult {
    /// The reported measure: the best (smallest) upper bound found.
    pub value: f64,
    /// Largest lower bound from the outer LPs.
    pub lower: f64,
    /// Running minimum of the inner maximization values.
    pub upper: f64,
    /// Classical action of the free channel attaining `upper`.
    pub optimal_p: StochasticMatrix,
    /// State attaining the inner maximum for `optimal_p`.
    pub worst_state: DensityMatrix,
    pub iterations: usize,
    /// Per-iteration `(lower, upper)` pairs.
    pub history: Vec<(f64, f64)>,
    /// Whether `upper - lower <= tol` was reached.
    pub converged: bool,
}

/// Evaluate the nSID-measure by the alternating bound scheme. On iteration
/// exhaustion the best bounds found are returned with `converged = false`.
pub fn nsid_measure(chan: &Channel, tol: f64, max_iter: usize) -> Result<NsidResult> {
    if chan.dim_in() > DIM_CAP || chan.dim_out() > DIM_CAP {
        return Err(Error::DimensionCap(format!(
            "nSID iteration supports dimensions up to {DIM_CAP}, channel is {}x{}",
            chan.dim_in(),
            chan.dim_out()
        )));
    }
    let n = chan.dim_in();
    let m = chan.dim_out();

    // single output population: every channel is detection-incoherent
    if m == 1 {
        return Ok(NsidResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            optimal_p: StochasticMatrix::uniform(1, n),
            worst_state: DensityMatrix::maximally_mixed(n),
            iterations: 0,
            history: Vec::new(),
            converged: true,
        });
    }

    let mut set = StateSet::initial(n);
    let mut lower = 0.0f64;
    let mut best: Option<(f64, StochasticMatrix, DensityMatrix)> = None;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let nstates = set.len();
        let mut r = Array2::zeros((n, nstates));
        let mut s = Array2::zeros((m, nstates));
        for (i, rho) in set.states().iter().enumerate() {
            r.column_mut(i).assign(&rho.diagonal());
            let image = chan.apply(rho)?;
            s.column_mut(i).assign(&image.diagonal());
        }

        let (lb, p) = outer_lp(&s, &r)?;
        lower = lower.max(lb.max(0.0));

        let (ub_raw, rho_star) = inner_max(chan, &p, SOLVER_TOL)?;
        if best.as_ref().is_none_or(|(u, _, _)| ub_raw < *u) {
            best = Some((ub_raw, p, rho_star.clone()));
        }
        let upper = best.as_ref().map(|(u, _, _)| *u).unwrap();
        history.push((lower, upper));

        if upper - lower <= tol {
            converged = true;
            break;
        }
        // grow the state set by the orbit of the new worst-case state; a
        // stagnant set cannot improve either bound, so stop early
        if !augment_in_place(&mut set, &rho_star)? {
            break;
        }
    }

    let (upper_raw, optimal_p, worst_state) = best.expect("at least one iteration ran");
    let upper = upper_raw.max(lower);
    Ok(NsidResult {
        value: upper.max(0.0),
        lower,
        upper: upper.max(0.0),
        optimal_p,
        worst_state,
        iterations,
        history,
        converged,
    })
}

/// Optimal single-shot probability of correctly guessing which of two
/// channels was applied, `lambda` the prior of `theta0`, when only
/// incoherent measurements are allowed:
/// `1/2 + 1/2 max over pure states of || Delta (lambda Theta_0 - (1 - lambda) Theta_1) psi ||_1`.
pub fn guess_prob_channels(theta0: &Channel, theta1: &Channel, lambda: f64) -> Result<f64> {
    if theta0.dim_in() != theta1.dim_in() || theta0.dim_out() != theta1.dim_out() {
        return Err(Error::DimensionMismatch(
            "channel discrimination needs equal dimensions".into(),
        ));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "prior {lambda} outside [0, 1]"
        )));
    }
    let blocks = population_blocks(&[(lambda, theta0), (-(1.0 - lambda), theta1)]);
    let (value, _) = inner_max_blocks(&blocks, 2.0 * lambda - 1.0, SOLVER_TOL)?;
    Ok(0.5 + 0.5 * value)
}
