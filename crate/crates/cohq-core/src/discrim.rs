//! Single-shot discrimination of two states under free (incoherent)
//! measurements: the closed-form optimum and a brute-force oracle over
//! diagonal dichotomic POVMs.

use crate::quantum::DensityMatrix;
use crate::{Error, Result};

/// A discrimination task: the state is `rho0` with probability `lambda`,
/// `rho1` otherwise.
#[derive(Debug, Clone)]
pub struct DiscriminationInstance {
    lambda: f64,
    rho0: DensityMatrix,
    rho1: DensityMatrix,
}

impl DiscriminationInstance {
    pub fn new(lambda: f64, rho0: DensityMatrix, rho1: DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "prior {lambda} outside [0, 1]"
            )));
        }
        if rho0.dim() != rho1.dim() {
            return Err(Error::DimensionMismatch(
                "discrimination states must share the dimension".into(),
            ));
        }
        Ok(Self { lambda, rho0, rho1 })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }
}

/// Optimal guessing probability with incoherent measurements:
/// `(1 - lambda) + sum over i with X_ii > 0 of X_ii` for
/// `X = lambda rho0 - (1 - lambda) rho1`, equivalently
/// `1/2 + || Delta(X) ||_1 / 2`. Only the populations enter. The optimal
/// diagonal POVM takes `B(i) = 1` exactly where `X_ii > 0`; entries with
/// `X_ii = 0` do not affect the value.
pub fn guess_prob_states(inst: &DiscriminationInstance) -> f64 {
    let x0 = inst.rho0.diagonal();
    let x1 = inst.rho1.diagonal();
    let mut gain = 0.0;
    for i in 0..inst.dim() {
        let xii = inst.lambda * x0[i] - (1.0 - inst.lambda) * x1[i];
        if xii > 0.0 {
            gain += xii;
        }
    }
    (1.0 - inst.lambda) + gain
}

/// Independent oracle: maximize
/// `lambda tr(P0 rho0) + (1 - lambda) tr((1 - P0) rho1)` over diagonal `P0`
/// with entries on a uniform grid in `[0, 1]` (endpoints included, so the
/// vertex optimum is on the grid). Dimensions up to 4.
pub fn brute_force_guess_prob(inst: &DiscriminationInstance, grid: usize) -> Result<f64> {
    let d = inst.dim();
    if d > 4 {
        return Err(Error::DimensionCap(format!(
            "brute-force oracle supports dimension up to 4, got {d}"
        )));
    }
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must have at least one step".into()));
    }
    let x0 = inst.rho0.diagonal();
    let x1 = inst.rho1.diagonal();
    let points = grid + 1;
    let mut best = f64::NEG_INFINITY;
    let mut assignment = vec![0usize; d];
    loop {
        let mut p_correct = 0.0;
        for i in 0..d {
            let p0 = assignment[i] as f64 / grid as f64;
            p_correct += inst.lambda * p0 * x0[i] + (1.0 - inst.lambda) * (1.0 - p0) * x1[i];
        }
        best = best.max(p_correct);

        // next grid assignment
        let mut pos = 0;
        loop {
            if pos == d {
                return Ok(best);
            }
            assignment[pos] += 1;
            if assignment[pos] < points {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{dephase, DensityMatrix};
    use crate::random;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag2(a: f64, b: f64) -> DensityMatrix {
        DensityMatrix::new(array![
            [Complex64::new(a, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(b, 0.0)]
        ])
        .unwrap()
    }

    #[test]
    fn closed_form_examples() {
        // perfectly distinguishable populations
        let inst = DiscriminationInstance::new(
            0.5,
            DensityMatrix::basis_state(2, 0),
            DensityMatrix::basis_state(2, 1),
        )
        .unwrap();
        assert_abs_diff_eq!(guess_prob_states(&inst), 1.0, epsilon = 1e-12);

        // |+> vs |->: identical diagonals, incoherent measurements are blind
        let plus = DensityMatrix::maximally_coherent(2);
        let minus = DensityMatrix::new(array![
            [Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)],
            [Complex64::new(-0.5, 0.0), Complex64::new(0.5, 0.0)]
        ])
        .unwrap();
        let inst = DiscriminationInstance::new(0.5, plus, minus).unwrap();
        assert_abs_diff_eq!(guess_prob_states(&inst), 0.5, epsilon = 1e-12);

        // hand-computed mixed-population example
        let inst =
            DiscriminationInstance::new(0.7, diag2(0.9, 0.1), diag2(0.2, 0.8)).unwrap();
        assert_abs_diff_eq!(guess_prob_states(&inst), 0.87, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form_on_examples() {
        let cases = [
            DiscriminationInstance::new(
                0.5,
                DensityMatrix::basis_state(2, 0),
                DensityMatrix::basis_state(2, 1),
            )
            .unwrap(),
            DiscriminationInstance::new(0.7, diag2(0.9, 0.1), diag2(0.2, 0.8)).unwrap(),
        ];
        for inst in cases {
            let oracle = brute_force_guess_prob(&inst, 10).unwrap();
            assert_abs_diff_eq!(guess_prob_states(&inst), oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn oracle_edge_cases() {
        // lambda = 1: always guess 0, best projector takes all of rho0
        let inst = DiscriminationInstance::new(
            1.0,
            DensityMatrix::maximally_mixed(2),
            DensityMatrix::basis_state(2, 1),
        )
        .unwrap();
        assert_abs_diff_eq!(brute_force_guess_prob(&inst, 4).unwrap(), 1.0, epsilon = 1e-12);

        // identical states: guess the prior
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let rho = random::density_matrix(3, &mut rng);
        let inst = DiscriminationInstance::new(0.3, rho.clone(), rho).unwrap();
        assert_abs_diff_eq!(guess_prob_states(&inst), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(brute_force_guess_prob(&inst, 5).unwrap(), 0.7, epsilon = 1e-9);
    }

    #[test]
    fn closed_form_matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for trial in 0..200 {
            let d = if trial % 2 == 0 { 2 } else { 3 };
            let lambda = rng.gen_range(0.0..=1.0);
            let inst = DiscriminationInstance::new(
                lambda,
                random::density_matrix(d, &mut rng),
                random::density_matrix(d, &mut rng),
            )
            .unwrap();
            let closed = guess_prob_states(&inst);
            let oracle = brute_force_guess_prob(&inst, 8).unwrap();
            assert_abs_diff_eq!(closed, oracle, epsilon = 1e-9);
            assert!(closed >= lambda.max(1.0 - lambda) - 1e-12);
            assert!(closed <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dephasing_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..50 {
            let lambda = rng.gen_range(0.0..=1.0);
            let rho0 = random::density_matrix(3, &mut rng);
            let rho1 = random::density_matrix(3, &mut rng);
            let direct =
                DiscriminationInstance::new(lambda, rho0.clone(), rho1.clone()).unwrap();
            let dephased =
                DiscriminationInstance::new(lambda, dephase(&rho0), dephase(&rho1)).unwrap();
            assert_eq!(guess_prob_states(&direct), guess_prob_states(&dephased));
        }
    }

    #[test]
    fn norm_route_agrees_with_population_route() {
        // 1/2 + ||Delta(lambda rho0 - (1-lambda) rho1)||_1 / 2 is the same
        // optimum through the trace norm
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..50 {
            let lambda = rng.gen_range(0.0..=1.0);
            let rho0 = random::density_matrix(2, &mut rng);
            let rho1 = random::density_matrix(2, &mut rng);
            let inst = DiscriminationInstance::new(lambda, rho0.clone(), rho1.clone()).unwrap();
            let x = rho0.data().mapv(|z| z * Complex64::new(lambda, 0.0))
                - rho1.data().mapv(|z| z * Complex64::new(1.0 - lambda, 0.0));
            let deph = crate::quantum::linalg::dephase_mat(&x);
            let norm = crate::quantum::linalg::trace_norm(&deph).unwrap();
            assert_abs_diff_eq!(guess_prob_states(&inst), 0.5 + 0.5 * norm, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(3);
        assert!(DiscriminationInstance::new(0.5, a.clone(), b).is_err());
        assert!(DiscriminationInstance::new(1.5, a.clone(), a.clone()).is_err());
        let inst = DiscriminationInstance::new(
            0.5,
            DensityMatrix::maximally_mixed(5),
            DensityMatrix::maximally_mixed(5),
        )
        .unwrap();
        assert!(brute_force_guess_prob(&inst, 4).is_err());
    }
}
