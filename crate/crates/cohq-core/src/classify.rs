//! Membership tests for the free classes: free POVMs, detection-incoherent,
//! creation-incoherent and detection-creation-incoherent channels, decided
//! through the coefficient characterization
//! `coeffs[a,b,a,d] = p(a|b) delta_{bd}` (detection) and
//! `coeffs[b,a,c,a] = p(b|a) delta_{bc}` (creation).

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::quantum::linalg::{identity, max_abs, min_eigenvalue, zeros, CMat};
use crate::quantum::{Channel, StochasticMatrix, TOL_STRUCT};
use crate::{Error, Result};

/// Default classification tolerance: far above the ~1e-15 noise of channels
/// read from files, far below genuine violations at desk dimensions.
pub const DEFAULT_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Povm
// ---------------------------------------------------------------------------

/// A positive operator-valued measure: elements PSD, summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let dim = elements[0].nrows();
        let mut sum = zeros(dim, dim);
        for (n, p) in elements.iter().enumerate() {
            if p.dim() != (dim, dim) {
                return Err(Error::InvalidPovm(format!(
                    "element {n} has shape {:?}, expected ({dim}, {dim})",
                    p.dim()
                )));
            }
            let min_eig = min_eigenvalue(p)?;
            if min_eig < -TOL_STRUCT {
                return Err(Error::InvalidPovm(format!(
                    "element {n} has eigenvalue {min_eig:.2e}"
                )));
            }
            sum += p;
        }
        let defect = max_abs(&(&sum - &identity(dim)));
        if defect > TOL_STRUCT {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity with defect {defect:.2e}"
            )));
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }
}

/// A POVM is free iff every element is diagonal in the incoherent basis.
/// Returns the verdict together with the largest off-diagonal magnitude.
pub fn is_free_povm(povm: &Povm, tol: f64) -> (bool, f64) {
    let mut worst = 0.0f64;
    for p in povm.elements() {
        for i in 0..povm.dim {
            for j in 0..povm.dim {
                if i != j {
                    worst = worst.max(p[(i, j)].norm());
                }
            }
        }
    }
    (worst <= tol, worst)
}

// ---------------------------------------------------------------------------
// Channel classification
// ---------------------------------------------------------------------------

/// Verdicts for the three free classes with the largest violating
/// coefficient magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeClassReport {
    pub detection_incoherent: bool,
    pub creation_incoherent: bool,
    pub detection_creation_incoherent: bool,
    pub max_violation_di: f64,
    pub max_violation_ci: f64,
}

/// Decide membership of a channel in the free classes.
pub fn classify(chan: &Channel, tol: f64) -> FreeClassReport {
    let co = chan.coefficients();
    let m = chan.dim_out();
    let n = chan.dim_in();

    // detection-incoherent: coeffs[a,b,a,d] = 0 for b != d and
    // coeffs[a,b,a,b] in [0, 1]
    let mut viol_di = 0.0f64;
    for a in 0..m {
        for b in 0..n {
            for d in 0..n {
                let v = co.get(a, b, a, d);
                if b != d {
                    viol_di = viol_di.max(v.norm());
                } else {
                    viol_di = viol_di.max(v.im.abs());
                    viol_di = viol_di.max((-v.re).max(v.re - 1.0).max(0.0));
                }
            }
        }
    }

    // creation-incoherent: coeffs[b,a,c,a] = 0 for b != c, plus trace
    // preservation (already guaranteed for a valid channel, included in the
    // reported violation for completeness)
    let mut viol_ci = 0.0f64;
    for a in 0..n {
        for b in 0..m {
            for cc in 0..m {
                if b != cc {
                    viol_ci = viol_ci.max(co.get(b, a, cc, a).norm());
                }
            }
        }
    }
    viol_ci = viol_ci.max(co.trace_preservation_defect());

    let di = viol_di <= tol;
    let ci = viol_ci <= tol;
    FreeClassReport {
        detection_incoherent: di,
        creation_incoherent: ci,
        detection_creation_incoherent: di && ci,
        max_violation_di: viol_di,
        max_violation_ci: viol_ci,
    }
}

/// Population-to-population transition probabilities
/// `p(k|l) = <k| Theta(|l><l|) |k>`.
pub fn classical_action(chan: &Channel) -> StochasticMatrix {
    let m = chan.dim_out();
    let n = chan.dim_in();
    let co = chan.coefficients();
    let data = Array2::from_shape_fn((m, n), |(k, l)| co.get(k, l, k, l).re);
    StochasticMatrix::new(data).expect("classical action of a CPTP channel is stochastic")
}

/// The canonical classical channel realizing the given transition
/// probabilities, Kraus set `{sqrt(p(k|l)) |k><l|}`. The result is
/// detection-creation-incoherent and `classical_action` inverts this exactly.
pub fn channel_from_stochastic(p: &StochasticMatrix) -> Channel {
    let m = p.rows();
    let n = p.cols();
    let mut kraus = Vec::with_capacity(m * n);
    for k in 0..m {
        for l in 0..n {
            let w = p.prob(k, l);
            if w == 0.0 {
                continue;
            }
            let mut op = zeros(m, n);
            op[(k, l)] = Complex64::new(w.sqrt(), 0.0);
            kraus.push(op);
        }
    }
    if kraus.is_empty() {
        // all-zero columns are impossible for a stochastic matrix, but keep
        // the constructor total
        kraus.push(zeros(m, n));
    }
    Channel::new(n, m, kraus).expect("stochastic matrix defines a CPTP channel")
}
