//! Random states, channels and stochastic matrices, used by the estimators
//! and the test corpora.

use ndarray::prelude::*;
use ndarray_linalg::QR;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::classify;
use crate::quantum::linalg::{dagger, hermitize, trace, CMat, CVec};
use crate::quantum::{compose, Channel, DensityMatrix, StochasticMatrix};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    Array2::from_shape_fn((rows, cols), |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random pure state vector.
pub fn pure_state_vector<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    loop {
        let v: CVec = Array1::from_shape_fn(dim, |_| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.mapv(|z| z / Complex64::new(norm, 0.0));
        }
    }
}

pub fn pure_state<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_pure(&pure_state_vector(dim, rng)).expect("normalized vector")
}

/// Full-rank state from the Hilbert-Schmidt ensemble.
pub fn density_matrix<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = complex_gaussian(dim, dim, rng);
    let rho = g.dot(&dagger(&g));
    let tr = trace(&rho).re;
    DensityMatrix::new(hermitize(&rho.mapv(|z| z / Complex64::new(tr, 0.0))))
        .expect("Wishart matrix is a valid state")
}

/// Random CPTP channel with the given Kraus rank, obtained from a Haar-like
/// Stinespring isometry (QR of a Gaussian matrix).
pub fn channel<R: Rng>(dim_in: usize, dim_out: usize, kraus_rank: usize, rng: &mut R) -> Channel {
    assert!(kraus_rank >= 1);
    assert!(
        dim_out * kraus_rank >= dim_in,
        "Stinespring isometry needs dim_out * kraus_rank >= dim_in"
    );
    let g = complex_gaussian(dim_out * kraus_rank, dim_in, rng);
    let (q, _r) = g.qr().expect("QR of a Gaussian matrix");
    let kraus: Vec<CMat> = (0..kraus_rank)
        .map(|n| q.slice(s![n * dim_out..(n + 1) * dim_out, ..]).to_owned())
        .collect();
    Channel::new(dim_in, dim_out, kraus).expect("isometry blocks form a CPTP channel")
}

/// Random column-stochastic matrix with i.i.d. uniform columns.
pub fn stochastic_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> StochasticMatrix {
    let mut data = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(0.01..1.0f64));
    for l in 0..cols {
        let s: f64 = data.column(l).sum();
        data.column_mut(l).mapv_inplace(|v| v / s);
    }
    StochasticMatrix::new(data).expect("normalized columns")
}

/// Diagonal-unitary channel `rho -> U rho U^dag` with random phases.
pub fn diagonal_unitary_channel<R: Rng>(dim: usize, rng: &mut R) -> Channel {
    let mut u = CMat::zeros((dim, dim));
    for i in 0..dim {
        u[(i, i)] = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    }
    Channel::unitary(u).expect("diagonal unitary")
}

/// Random detection-incoherent channel: a classical channel dressed with
/// diagonal-unitary conjugations (these leave all populations untouched).
pub fn free_channel<R: Rng>(dim_in: usize, dim_out: usize, rng: &mut R) -> Channel {
    let classical = classify::channel_from_stochastic(&stochastic_matrix(dim_out, dim_in, rng));
    let pre = diagonal_unitary_channel(dim_in, rng);
    let post = diagonal_unitary_channel(dim_out, rng);
    compose(&post, &compose(&classical, &pre).unwrap()).unwrap()
}

/// Random channel whose detection-incoherence violation is at least
/// `min_violation` (rejection sampling).
pub fn nonfree_channel<R: Rng>(
    dim_in: usize,
    dim_out: usize,
    min_violation: f64,
    rng: &mut R,
) -> Channel {
    loop {
        let chan = channel(dim_in, dim_out, 2, rng);
        let report = classify::classify(&chan, 1e-9);
        if report.max_violation_di >= min_violation {
            return chan;
        }
    }
}
