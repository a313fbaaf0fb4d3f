//! Relative entropy and a lower-bound estimator for the relative-entropy
//! measure of the detection-creation-incoherent setting,
//! `M_c(Theta) = sup over states of S(Theta Delta rho || Delta Theta rho)`.
//!
//! Both arguments of the relative entropy are linear in `rho` and the
//! relative entropy is jointly convex, so the supremum is attained on pure
//! states; the estimator runs multi-start projected-gradient ascent on the
//! pure-state sphere. Every evaluated point is a valid lower bound.

use ndarray::prelude::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quantum::linalg::{eigh, CVec};
use crate::quantum::{dephase, Channel, DensityMatrix};
use crate::random;
use crate::{Error, Result};

/// Eigenvalues below this floor count as zero support.
const SUPPORT_FLOOR: f64 = 1e-12;

/// Quantum relative entropy `S(rho || sigma) = tr rho (log rho - log sigma)`
/// in bits; `+infinity` when the support of `rho` is not contained in the
/// support of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(
            "relative entropy needs equal dimensions".into(),
        ));
    }
    let (rvals, rvecs) = eigh(rho.data())?;
    let (svals, svecs) = eigh(sigma.data())?;

    // overlap weights |<r_i|s_j>|^2
    let d = rho.dim();
    let mut value = 0.0;
    for i in 0..d {
        let ri = rvals[i].max(0.0);
        if ri <= SUPPORT_FLOOR {
            continue;
        }
        value += ri * ri.log2();
        let rvec = rvecs.column(i);
        for j in 0..d {
            let overlap: Complex64 = rvec
                .iter()
                .zip(svecs.column(j).iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let w = overlap.norm_sqr();
            if w <= 1e-14 {
                continue;
            }
            let sj = svals[j].max(0.0);
            if sj <= SUPPORT_FLOOR {
                return Ok(f64::INFINITY);
            }
            value -= ri * w * sj.log2();
        }
    }
    Ok(value.max(0.0))
}

/// Result of the multi-start ascent.
#[derive(Debug, Clone)]
pub struct McEstimate {
    /// Best value found; a certified lower bound on the measure (it is an
    /// evaluated point of the supremum). May be `+infinity`.
    pub value: f64,
    /// State attaining `value`.
    pub argmax_state: DensityMatrix,
    pub restarts: usize,
    /// Restarts whose ascent stalled below the step limit.
    pub converged_restarts: usize,
}

/// The objective `S(Theta Delta psi || Delta Theta psi)` with eigenvalues
/// floored for a finite, differentiable surrogate during the ascent.
fn objective_regularized(chan: &Channel, psi: &CVec) -> Result<f64> {
    let rho = DensityMatrix::from_pure(psi)?;
    let a = chan.apply(&dephase(&rho))?;
    let b = dephase(&chan.apply(&rho)?);
    regularized_relative_entropy(&a, &b)
}

fn regularized_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let (rvals, rvecs) = eigh(rho.data())?;
    let (svals, svecs) = eigh(sigma.data())?;
    let d = rho.dim();
    let mut value = 0.0;
    for i in 0..d {
        let ri = rvals[i].max(SUPPORT_FLOOR);
        value += ri * ri.log2();
        let rvec = rvecs.column(i);
        for j in 0..d {
            let overlap: Complex64 = rvec
                .iter()
                .zip(svecs.column(j).iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let sj = svals[j].max(SUPPORT_FLOOR);
            value -= ri * overlap.norm_sqr() * sj.log2();
        }
    }
    Ok(value)
}

/// True (infinity-aware) objective, reported for the final state.
fn objective_exact(chan: &Channel, psi: &CVec) -> Result<f64> {
    let rho = DensityMatrix::from_pure(psi)?;
    let a = chan.apply(&dephase(&rho))?;
    let b = dephase(&chan.apply(&rho)?);
    relative_entropy(&a, &b)
}

/// One projected-gradient ascent from `psi0`; returns the best state, its
/// regularized value and whether the ascent stalled (converged) within the
/// step budget.
fn ascend(chan: &Channel, mut psi: CVec, steps: usize) -> Result<(CVec, f64, bool)> {
    let d = psi.len();
    let fd_step = 1e-6;
    let mut value = objective_regularized(chan, &psi)?;
    let mut converged = false;

    for _ in 0..steps {
        // central finite differences on the 2d real coordinates
        let mut grad = vec![0.0f64; 2 * d];
        for k in 0..2 * d {
            let mut fwd = psi.clone();
            let mut bwd = psi.clone();
            let delta = if k < d {
                Complex64::new(fd_step, 0.0)
            } else {
                Complex64::new(0.0, fd_step)
            };
            let idx = k % d;
            fwd[idx] += delta;
            bwd[idx] -= delta;
            grad[k] = (objective_regularized(chan, &fwd)? - objective_regularized(chan, &bwd)?)
                / (2.0 * fd_step);
        }
        // project out the radial component
        let radial: f64 = (0..2 * d)
            .map(|k| {
                let c = if k < d { psi[k % d].re } else { psi[k % d].im };
                grad[k] * c
            })
            .sum();
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mut tangent_norm = 0.0;
        for (k, g) in grad.iter_mut().enumerate() {
            let c = if k < d { psi[k % d].re } else { psi[k % d].im };
            *g -= radial * c / norm_sq;
            tangent_norm += *g * *g;
        }
        if tangent_norm.sqrt() < 1e-9 {
            converged = true;
            break;
        }

        // backtracking line search along the tangent direction
        let mut eta = 0.5;
        let mut improved = false;
        for _ in 0..24 {
            let mut trial = psi.clone();
            for idx in 0..d {
                trial[idx] += Complex64::new(eta * grad[idx], eta * grad[d + idx]);
            }
            let norm: f64 = trial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let trial = trial.mapv(|z| z / Complex64::new(norm, 0.0));
            let trial_value = objective_regularized(chan, &trial)?;
            if trial_value > value + 1e-12 {
                psi = trial;
                value = trial_value;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            converged = true;
            break;
        }
    }
    Ok((psi, value, converged))
}

/// Multi-start lower-bound estimator for the relative-entropy measure.
/// Restarts are seeded deterministically and run in parallel; infinities are
/// returned as found, with the witnessing state.
pub fn mc_lower_bound(chan: &Channel, restarts: usize, steps: usize) -> Result<McEstimate> {
    let d = chan.dim_in();
    let outcomes: Result<Vec<(CVec, f64, bool)>> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC0_FEE ^ (r as u64));
            let psi0 = random::pure_state_vector(d, &mut rng);
            ascend(chan, psi0, steps)
        })
        .collect();

    let mut best_state: Option<CVec> = None;
    let mut best_reg = f64::NEG_INFINITY;
    let mut converged_restarts = 0;
    let outcomes = outcomes?;
    let total = outcomes.len();
    for (psi, reg_value, converged) in outcomes {
        if converged {
            converged_restarts += 1;
        }
        if reg_value > best_reg {
            best_reg = reg_value;
            best_state = Some(psi);
        }
    }
    let psi = best_state.expect("at least one restart");
    let value = objective_exact(chan, &psi)?.max(0.0);
    Ok(McEstimate {
        value,
        argmax_state: DensityMatrix::from_pure(&psi)?,
        restarts: total,
        converged_restarts,
    })
}
