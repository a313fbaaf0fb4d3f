//! Core domain types: density matrices, channels in Kraus form, Choi
//! matrices, channel coefficients, stochastic matrices, and the total
//! dephasing map everything else builds on.
//!
//! Conventions fixed repo-wide:
//!
//! * The incoherent basis is the computational basis.
//! * Choi matrices live in `B (x) A` with the output factor first,
//!   `J(Theta) = sum_{ij} Theta(|i><j|) (x) |i><j|`.
//! * Channel coefficients are indexed `coeffs[[a, b, c, d]] =
//!   <a| Phi(|b><d|) |c>`.
//! * Structural invariants are checked at 1e-10, Hermiticity of density
//!   matrices at 1e-12, equality round-trips at 1e-12.

pub mod linalg;

use ndarray::prelude::*;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use linalg::{
    dagger, dephase_mat, eigh, fourier_matrix, hermiticity_defect, hermitize, identity, kron,
    matrix_unit, max_abs, partial_trace_first, partial_trace_second, trace, zeros, CMat, CVec,
};

/// Tolerance for structural invariants (trace preservation, positivity, ...).
pub const TOL_STRUCT: f64 = 1e-10;
/// Tolerance for Hermiticity of density matrices.
pub const TOL_HERM: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

/// A quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    data: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues >= -1e-10).
    pub fn new(data: CMat) -> Result<Self> {
        let (r, cdim) = data.dim();
        if r != cdim || r == 0 {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected square nonempty matrix, got {r}x{cdim}"
            )));
        }
        let herm = hermiticity_defect(&data);
        if herm > TOL_HERM {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity defect {herm:.2e} exceeds {TOL_HERM:.0e}"
            )));
        }
        let tr = trace(&data);
        if (tr.re - 1.0).abs() > TOL_STRUCT || tr.im.abs() > TOL_STRUCT {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1 by more than {TOL_STRUCT:.0e}"
            )));
        }
        let min_eig = linalg::min_eigenvalue(&data)?;
        if min_eig < -TOL_STRUCT {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimal eigenvalue {min_eig:.2e} below -{TOL_STRUCT:.0e}"
            )));
        }
        Ok(Self { dim: r, data })
    }

    /// Project a numerically noisy Hermitian matrix onto the closest valid
    /// state: symmetrize, clip negative eigenvalues, renormalize the trace.
    pub fn project(data: &CMat) -> Result<Self> {
        let (vals, vecs) = eigh(data)?;
        let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDensityMatrix(
                "projection collapsed to the zero matrix".into(),
            ));
        }
        let n = data.nrows();
        let mut out = zeros(n, n);
        for (k, &v) in clipped.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let col = vecs.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += c(v / total) * col[i] * col[j].conj();
                }
            }
        }
        Self::new(hermitize(&out))
    }

    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let n = psi.len();
        let data = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj() / c(norm * norm));
        Self::new(data)
    }

    /// Incoherent basis projector |i><i|.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self {
            dim,
            data: matrix_unit(dim, i, i),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let data = identity(dim).mapv(|z| z / c(dim as f64));
        Self { dim, data }
    }

    /// `(1/sqrt(d)) sum_i |i>`, the maximally coherent state.
    pub fn maximally_coherent(dim: usize) -> Self {
        let psi = Array1::from_elem(dim, c(1.0 / (dim as f64).sqrt()));
        Self::from_pure(&psi).expect("uniform superposition is a valid state")
    }

    /// Fourier basis projector |f_k><f_k|.
    pub fn fourier_state(dim: usize, k: usize) -> Self {
        let f = fourier_matrix(dim);
        let psi = f.column(k).to_owned();
        Self::from_pure(&psi).expect("Fourier column is a unit vector")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    /// Populations, the real diagonal.
    pub fn diagonal(&self) -> Array1<f64> {
        self.data.diag().mapv(|z| z.re)
    }

    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        linalg::trace_distance(&self.data, &other.data)
    }
}

/// Total dephasing: erase all off-diagonal entries in the incoherent basis.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix {
        dim: rho.dim,
        data: dephase_mat(&rho.data),
    }
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// A CPTP map held as a list of Kraus operators.
#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

impl Channel {
    /// Validates shapes and trace preservation `sum_n K_n^dag K_n = 1`
    /// within 1e-10.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMat>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus list".into()));
        }
        for (n, k) in kraus.iter().enumerate() {
            if k.dim() != (dim_out, dim_in) {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {n} has shape {:?}, expected ({dim_out}, {dim_in})",
                    k.dim()
                )));
            }
        }
        let mut sum = zeros(dim_in, dim_in);
        for k in &kraus {
            sum += &dagger(k).dot(k);
        }
        let defect = max_abs(&(&sum - &identity(dim_in)));
        if defect > TOL_STRUCT {
            return Err(Error::InvalidChannel(format!(
                "trace preservation defect {defect:.2e} exceeds {TOL_STRUCT:.0e}"
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![identity(dim)],
        }
    }

    /// The total dephasing as a channel, Kraus set `{|i><i|}`.
    pub fn dephasing(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: (0..dim).map(|i| matrix_unit(dim, i, i)).collect(),
        }
    }

    /// Single-Kraus unitary channel.
    pub fn unitary(u: CMat) -> Result<Self> {
        let n = u.nrows();
        Self::new(n, n, vec![u])
    }

    /// The Fourier transform as a unitary channel; for `d = 2` this is the
    /// Hadamard gate.
    pub fn fourier_unitary(dim: usize) -> Self {
        Self::unitary(fourier_matrix(dim)).expect("Fourier matrix is unitary")
    }

    /// Measurement in the Fourier basis with outcomes encoded in the
    /// incoherent basis, Kraus set `{|k><f_k|}`.
    pub fn fourier_measurement(dim: usize) -> Self {
        let f = fourier_matrix(dim);
        let kraus = (0..dim)
            .map(|k| {
                let mut m = zeros(dim, dim);
                for j in 0..dim {
                    m[(k, j)] = f[(j, k)].conj();
                }
                m
            })
            .collect();
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus,
        }
    }

    /// `rho -> (1 - lambda) rho + lambda tr(rho) 1/d`.
    pub fn depolarizing(dim: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing strength {lambda} outside [0, 1]"
            )));
        }
        let mut kraus = vec![identity(dim).mapv(|z| z * c((1.0 - lambda).sqrt()))];
        let scale = c((lambda / dim as f64).sqrt());
        for i in 0..dim {
            for j in 0..dim {
                kraus.push(matrix_unit(dim, i, j).mapv(|z| z * scale));
            }
        }
        Self::new(dim, dim, kraus)
    }

    /// Linear extension `sum_n K_n M K_n^dag` to arbitrary matrices.
    pub fn apply_mat(&self, m: &CMat) -> CMat {
        let mut out = zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += &k.dot(m).dot(&dagger(k));
        }
        out
    }

    /// Apply the channel to a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel expects input dimension {}, state has {}",
                self.dim_in,
                rho.dim()
            )));
        }
        DensityMatrix::new(hermitize(&self.apply_mat(rho.data())))
    }

    /// Choi matrix `J(Theta) = sum_{ij} Theta(|i><j|) (x) |i><j|` in
    /// `B (x) A` ordering.
    pub fn choi(&self) -> ChoiMatrix {
        let n = self.dim_in;
        let m = self.dim_out;
        let mut data = zeros(m * n, m * n);
        for i in 0..n {
            for j in 0..n {
                let block = self.apply_mat(&matrix_unit(n, i, j));
                for k in 0..m {
                    for l in 0..m {
                        data[(k * n + i, l * n + j)] = block[(k, l)];
                    }
                }
            }
        }
        ChoiMatrix {
            dim_in: n,
            dim_out: m,
            data,
        }
    }

    /// Coefficients `coeffs[[a, b, c, d]] = sum_n K_n[a,b] K_n[c,d]^*`.
    pub fn coefficients(&self) -> ChannelCoefficients {
        let n = self.dim_in;
        let m = self.dim_out;
        let mut coeffs = Array4::zeros((m, n, m, n));
        for k in &self.kraus {
            for a in 0..m {
                for b in 0..n {
                    let kab = k[(a, b)];
                    if kab == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for cc in 0..m {
                        for d in 0..n {
                            coeffs[(a, b, cc, d)] += kab * k[(cc, d)].conj();
                        }
                    }
                }
            }
        }
        ChannelCoefficients {
            dim_in: n,
            dim_out: m,
            coeffs,
        }
    }
}

/// Sequential composition `f . g` (first `g`, then `f`); Kraus set is all
/// products `F_i G_j`.
pub fn compose(f: &Channel, g: &Channel) -> Result<Channel> {
    if g.dim_out != f.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "compose: inner dimensions differ ({} vs {})",
            g.dim_out, f.dim_in
        )));
    }
    let kraus: Vec<CMat> = f
        .kraus
        .iter()
        .flat_map(|fk| g.kraus.iter().map(move |gk| fk.dot(gk)))
        .collect();
    Channel::new(g.dim_in, f.dim_out, kraus)
}

/// Parallel composition; Kraus set is all `F_i (x) G_j`.
pub fn tensor(f: &Channel, g: &Channel) -> Result<Channel> {
    let kraus: Vec<CMat> = f
        .kraus
        .iter()
        .flat_map(|fk| g.kraus.iter().map(move |gk| kron(fk, gk)))
        .collect();
    Channel::new(f.dim_in * g.dim_in, f.dim_out * g.dim_out, kraus)
}

/// Convex mixture of two channels with equal dimensions, realized as the
/// Kraus-set union with sqrt(t), sqrt(1-t) weights.
pub fn mix(t: f64, f: &Channel, g: &Channel) -> Result<Channel> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "mixing weight {t} outside [0, 1]"
        )));
    }
    if f.dim_in != g.dim_in || f.dim_out != g.dim_out {
        return Err(Error::DimensionMismatch(
            "mix: channel dimensions differ".into(),
        ));
    }
    let mut kraus = Vec::new();
    if t > 0.0 {
        kraus.extend(f.kraus.iter().map(|k| k.mapv(|z| z * c(t.sqrt()))));
    }
    if t < 1.0 {
        kraus.extend(g.kraus.iter().map(|k| k.mapv(|z| z * c((1.0 - t).sqrt()))));
    }
    Channel::new(f.dim_in, f.dim_out, kraus)
}

// ---------------------------------------------------------------------------
// ChoiMatrix
// ---------------------------------------------------------------------------

/// Choi matrix of a CPTP map in `B (x) A` ordering: positive semidefinite,
/// partial trace over the output factor equals the identity on the input.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    data: CMat,
}

impl ChoiMatrix {
    pub fn new(dim_in: usize, dim_out: usize, data: CMat) -> Result<Self> {
        let n = dim_out * dim_in;
        if data.dim() != (n, n) {
            return Err(Error::InvalidChoiMatrix(format!(
                "expected {n}x{n}, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let min_eig = linalg::min_eigenvalue(&data)?;
        if min_eig < -TOL_STRUCT {
            return Err(Error::InvalidChoiMatrix(format!(
                "minimal eigenvalue {min_eig:.2e} below -{TOL_STRUCT:.0e}"
            )));
        }
        let tr_out = partial_trace_first(&data, dim_out, dim_in)?;
        let defect = max_abs(&(&tr_out - &identity(dim_in)));
        if defect > TOL_STRUCT {
            return Err(Error::InvalidChoiMatrix(format!(
                "partial trace over the output factor differs from identity by {defect:.2e}"
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            data,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    /// Partial trace over the output factor; equals `1_A` for CPTP maps.
    pub fn trace_out_output(&self) -> Result<CMat> {
        partial_trace_first(&self.data, self.dim_out, self.dim_in)
    }

    /// Apply the encoded map via the transpose-on-input contraction
    /// `Theta(rho) = Tr_A[(1_B (x) rho^T) J]`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix expects input dimension {}, state has {}",
                self.dim_in,
                rho.dim()
            )));
        }
        let out = self.apply_mat(rho.data())?;
        DensityMatrix::new(hermitize(&out))
    }

    /// Linear extension of [`ChoiMatrix::apply`] to arbitrary matrices.
    pub fn apply_mat(&self, m: &CMat) -> Result<CMat> {
        let rho_t = m.t().to_owned();
        let lifted = kron(&identity(self.dim_out), &rho_t);
        partial_trace_second(&lifted.dot(&self.data), self.dim_out, self.dim_in)
    }
}

// ---------------------------------------------------------------------------
// ChannelCoefficients
// ---------------------------------------------------------------------------

/// Coefficient representation of a linear map,
/// `Phi(|b><d|) = sum_{a,c} coeffs[[a,b,c,d]] |a><c|`.
#[derive(Debug, Clone)]
pub struct ChannelCoefficients {
    dim_in: usize,
    dim_out: usize,
    coeffs: Array4<Complex64>,
}

impl ChannelCoefficients {
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.coeffs[(a, b, c, d)]
    }

    /// Hermiticity defect `max |coeffs[a,b,c,d] - coeffs[c,d,a,b]^*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let (m, n, _, _) = self.coeffs.dim();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..n {
                for cc in 0..m {
                    for d in 0..n {
                        let diff =
                            (self.coeffs[(a, b, cc, d)] - self.coeffs[(cc, d, a, b)].conj()).norm();
                        worst = worst.max(diff);
                    }
                }
            }
        }
        worst
    }

    /// Trace preservation defect `max |sum_a coeffs[a,b,a,d] - delta_{bd}|`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let (m, n, _, _) = self.coeffs.dim();
        let mut worst = 0.0f64;
        for b in 0..n {
            for d in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..m {
                    s += self.coeffs[(a, b, a, d)];
                }
                let target = if b == d { 1.0 } else { 0.0 };
                worst = worst.max((s - c(target)).norm());
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// StochasticMatrix
// ---------------------------------------------------------------------------

/// Column-stochastic matrix of transition probabilities `p(k|l)`:
/// entries nonnegative, each column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Array2<f64>,
}

impl StochasticMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidStochasticMatrix("empty matrix".into()));
        }
        for &v in data.iter() {
            if v < -TOL_STRUCT {
                return Err(Error::InvalidStochasticMatrix(format!(
                    "negative entry {v:.2e}"
                )));
            }
        }
        for l in 0..cols {
            let s: f64 = data.column(l).sum();
            if (s - 1.0).abs() > TOL_STRUCT {
                return Err(Error::InvalidStochasticMatrix(format!(
                    "column {l} sums to {s}, expected 1"
                )));
            }
        }
        // Clamp solver-level noise so downstream channel constructions are
        // exactly trace preserving.
        let mut clean = data.mapv(|v| v.max(0.0));
        for l in 0..cols {
            let s: f64 = clean.column(l).sum();
            clean.column_mut(l).mapv_inplace(|v| v / s);
        }
        Ok(Self {
            rows,
            cols,
            data: clean,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            rows: dim,
            cols: dim,
            data: Array2::eye(dim),
        }
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: Array2::from_elem((rows, cols), 1.0 / rows as f64),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// `p(k|l)`.
    pub fn prob(&self, k: usize, l: usize) -> f64 {
        self.data[(k, l)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.data - &other.data)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Channel JSON format
// ---------------------------------------------------------------------------

/// Wire format: matrices are row-major, each entry a `[re, im]` pair.
#[derive(Serialize, Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Channel {
    pub fn to_json(&self) -> String {
        let kraus = self
            .kraus
            .iter()
            .map(|k| {
                (0..self.dim_out)
                    .map(|i| (0..self.dim_in).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&ChannelJson {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus,
        })
        .expect("channel serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: ChannelJson =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let mut kraus = Vec::with_capacity(parsed.kraus.len());
        for (n, rows) in parsed.kraus.iter().enumerate() {
            if rows.len() != parsed.dim_out || rows.iter().any(|r| r.len() != parsed.dim_in) {
                return Err(Error::Json(format!(
                    "Kraus operator {n} is not a {}x{} matrix",
                    parsed.dim_out, parsed.dim_in
                )));
            }
            let m = Array2::from_shape_fn((parsed.dim_out, parsed.dim_in), |(i, j)| {
                Complex64::new(rows[i][j][0], rows[i][j][1])
            });
            kraus.push(m);
        }
        Channel::new(parsed.dim_in, parsed.dim_out, kraus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use approx::assert_abs_diff_eq;
    use linalg::eigvalsh;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> DensityMatrix {
        DensityMatrix::maximally_coherent(2)
    }

    #[test]
    fn dephase_examples() {
        // |0><0| is already incoherent
        let zero = DensityMatrix::basis_state(2, 0);
        assert_eq!(max_abs(&(dephase(&zero).data() - zero.data())), 0.0);

        // |+><+| -> I/2
        let plus = plus_state();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(max_abs(&(dephase(&plus).data() - mixed.data())) < 1e-15);

        // explicit diagonal extraction
        let rho = DensityMatrix::new(array![
            [cx(0.7, 0.0), cx(0.0, 0.2)],
            [cx(0.0, -0.2), cx(0.3, 0.0)]
        ])
        .unwrap();
        let expected = array![[cx(0.7, 0.0), cx(0.0, 0.0)], [cx(0.0, 0.0), cx(0.3, 0.0)]];
        assert_eq!(max_abs(&(dephase(&rho).data() - &expected)), 0.0);

        // idempotence is exact
        let once = dephase(&rho);
        let twice = dephase(&once);
        assert_eq!(max_abs(&(once.data() - twice.data())), 0.0);
    }

    #[test]
    fn dephase_factorizes_over_tensor_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random::density_matrix(2, &mut rng);
            let b = random::density_matrix(3, &mut rng);
            let joint = DensityMatrix::new(kron(a.data(), b.data())).unwrap();
            let lhs = dephase(&joint);
            let rhs = kron(dephase(&a).data(), dephase(&b).data());
            assert!(max_abs(&(lhs.data() - &rhs)) < 1e-12);
        }
    }

    #[test]
    fn apply_examples() {
        let plus = plus_state();
        let id = Channel::identity(2);
        let rho = DensityMatrix::new(array![
            [cx(0.6, 0.0), cx(0.1, 0.1)],
            [cx(0.1, -0.1), cx(0.4, 0.0)]
        ])
        .unwrap();
        assert!(max_abs(&(id.apply(&rho).unwrap().data() - rho.data())) < 1e-14);

        let deph = Channel::dephasing(2);
        let out = deph.apply(&plus).unwrap();
        assert!(max_abs(&(out.data() - DensityMatrix::maximally_mixed(2).data())) < 1e-14);

        let had = Channel::fourier_unitary(2);
        let out = had.apply(&DensityMatrix::basis_state(2, 0)).unwrap();
        assert!(max_abs(&(out.data() - plus.data())) < 1e-14);
    }

    #[test]
    fn apply_preserves_trace_and_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let chan = random::channel(3, 3, 3, &mut rng);
            let rho = random::density_matrix(3, &mut rng);
            // Channel::apply validates trace and positivity internally.
            chan.apply(&rho).unwrap();
        }
    }

    #[test]
    fn choi_examples() {
        // identity qubit channel: rank 1, trace 2
        let j = Channel::identity(2).choi();
        let vals = eigvalsh(j.data()).unwrap();
        let nonzero = vals.iter().filter(|&&v| v.abs() > 1e-12).count();
        assert_eq!(nonzero, 1);
        assert_abs_diff_eq!(trace(j.data()).re, 2.0, epsilon = 1e-12);

        // dephasing qubit channel: diag(1, 0, 0, 1) in B (x) A ordering
        let j = Channel::dephasing(2).choi();
        let expected = Array2::from_diag(&array![cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
        assert!(max_abs(&(j.data() - &expected)) < 1e-14);

        // Hadamard channel: direct expansion
        let had = Channel::fourier_unitary(2);
        let j = had.choi();
        let h = fourier_matrix(2);
        let mut expected = zeros(4, 4);
        for i in 0..2 {
            for jj in 0..2 {
                let block = h.dot(&matrix_unit(2, i, jj)).dot(&dagger(&h));
                for k in 0..2 {
                    for l in 0..2 {
                        expected[(k * 2 + i, l * 2 + jj)] = block[(k, l)];
                    }
                }
            }
        }
        assert!(max_abs(&(j.data() - &expected)) < 1e-14);
    }

    #[test]
    fn choi_round_trip_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (din, dout) = (3, 2);
            let chan = random::channel(din, dout, 2, &mut rng);
            let j = chan.choi();
            let rho = random::density_matrix(din, &mut rng);
            let direct = chan.apply(&rho).unwrap();
            let via_choi = j.apply(&rho).unwrap();
            assert!(max_abs(&(direct.data() - via_choi.data())) < 1e-12);
        }
    }

    #[test]
    fn apply_from_choi_examples() {
        let rho = DensityMatrix::new(array![
            [cx(0.6, 0.0), cx(0.1, 0.1)],
            [cx(0.1, -0.1), cx(0.4, 0.0)]
        ])
        .unwrap();
        let j = Channel::identity(2).choi();
        assert!(max_abs(&(j.apply(&rho).unwrap().data() - rho.data())) < 1e-13);

        let j = Channel::dephasing(2).choi();
        let out = j.apply(&plus_state()).unwrap();
        assert!(max_abs(&(out.data() - DensityMatrix::maximally_mixed(2).data())) < 1e-13);

        let j = Channel::fourier_unitary(2).choi();
        let out = j.apply(&DensityMatrix::basis_state(2, 0)).unwrap();
        assert!(max_abs(&(out.data() - plus_state().data())) < 1e-13);
    }

    #[test]
    fn trace_norm_is_a_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let a = random::complex_gaussian(3, 3, &mut rng);
            let b = random::complex_gaussian(3, 3, &mut rng);
            let na = linalg::trace_norm(&a).unwrap();
            let nb = linalg::trace_norm(&b).unwrap();
            let nab = linalg::trace_norm(&(&a + &b)).unwrap();
            assert!(nab <= na + nb + 1e-10);
            let scaled = linalg::trace_norm(&a.mapv(|z| z * cx(-2.5, 0.0))).unwrap();
            assert_abs_diff_eq!(scaled, 2.5 * na, epsilon = 1e-10);
        }
    }

    #[test]
    fn compose_and_tensor_examples() {
        let deph = Channel::dephasing(2);
        let dd = compose(&deph, &deph).unwrap();
        for i in 0..2 {
            let rho = DensityMatrix::basis_state(2, i);
            let a = dd.apply(&rho).unwrap();
            let b = deph.apply(&rho).unwrap();
            assert!(max_abs(&(a.data() - b.data())) < 1e-14);
        }

        let id4 = tensor(&Channel::identity(2), &Channel::identity(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density_matrix(4, &mut rng);
        assert!(max_abs(&(id4.apply(&rho).unwrap().data() - rho.data())) < 1e-13);

        let had = Channel::fourier_unitary(2);
        let hh = compose(&had, &had).unwrap();
        let rho = random::density_matrix(2, &mut rng);
        assert!(max_abs(&(hh.apply(&rho).unwrap().data() - rho.data())) < 1e-13);
    }

    #[test]
    fn standard_channel_examples() {
        // d = 2 Fourier unitary is the Hadamard
        let f = Channel::fourier_unitary(2);
        let h = fourier_matrix(2);
        assert!(max_abs(&(&f.kraus()[0] - &h)) < 1e-14);

        // d = 2 Fourier measurement maps |+><+| to |0><0|
        let fm = Channel::fourier_measurement(2);
        let out = fm.apply(&plus_state()).unwrap();
        assert!(max_abs(&(out.data() - DensityMatrix::basis_state(2, 0).data())) < 1e-14);

        // d = 3 Fourier unitary Kraus is the 3x3 DFT matrix / sqrt(3)
        let f3 = Channel::fourier_unitary(3);
        assert!(max_abs(&(&f3.kraus()[0] - &fourier_matrix(3))) < 1e-14);

        // depolarizing keeps CPTP and sends everything to the mixed state at
        // full strength
        let dep = Channel::depolarizing(3, 1.0).unwrap();
        let rho = DensityMatrix::basis_state(3, 1);
        let out = dep.apply(&rho).unwrap();
        assert!(max_abs(&(out.data() - DensityMatrix::maximally_mixed(3).data())) < 1e-13);
    }

    #[test]
    fn coefficient_examples() {
        // dephasing: only coeffs[i,i,i,i] = 1 nonzero
        let co = Channel::dephasing(2).coefficients();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let expected = if a == b && cc == d && b == d && a == cc {
                            1.0
                        } else {
                            0.0
                        };
                        assert_abs_diff_eq!(co.get(a, b, cc, d).re, expected, epsilon = 1e-14);
                        assert_abs_diff_eq!(co.get(a, b, cc, d).im, 0.0, epsilon = 1e-14);
                    }
                }
            }
        }

        // identity: coeffs[a,b,c,d] = delta_{ab} delta_{cd}
        let co = Channel::identity(2).coefficients();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let expected = if a == b && cc == d { 1.0 } else { 0.0 };
                        assert_abs_diff_eq!(co.get(a, b, cc, d).re, expected, epsilon = 1e-14);
                    }
                }
            }
        }

        // Hadamard: coeffs[a,b,c,d] = H[a,b] H[c,d]
        let h = fourier_matrix(2);
        let co = Channel::fourier_unitary(2).coefficients();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let expected = h[(a, b)] * h[(cc, d)].conj();
                        assert!((co.get(a, b, cc, d) - expected).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn coefficients_satisfy_invariants_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let chan = random::channel(3, 2, 2, &mut rng);
            let co = chan.coefficients();
            assert!(co.hermiticity_defect() < 1e-12);
            assert!(co.trace_preservation_defect() < 1e-10);
            // consistency with apply on matrix units
            for b in 0..3 {
                for d in 0..3 {
                    let out = chan.apply_mat(&matrix_unit(3, b, d));
                    for a in 0..2 {
                        for cc in 0..2 {
                            assert!((out[(a, cc)] - co.get(a, b, cc, d)).norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn stochastic_matrix_validation() {
        assert!(StochasticMatrix::new(array![[0.5, 0.0], [0.5, 1.0]]).is_ok());
        assert!(StochasticMatrix::new(array![[0.5, 0.0], [0.4, 1.0]]).is_err());
        assert!(StochasticMatrix::new(array![[-0.1, 0.0], [1.1, 1.0]]).is_err());
    }

    #[test]
    fn channel_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let chan = random::channel(3, 2, 2, &mut rng);
        let text = chan.to_json();
        let back = Channel::from_json(&text).unwrap();
        assert_eq!(back.dim_in(), 3);
        assert_eq!(back.dim_out(), 2);
        for (a, b) in chan.kraus().iter().zip(back.kraus()) {
            assert!(max_abs(&(a - b)) < 1e-15);
        }
        assert!(Channel::from_json("{not json").is_err());
    }

    #[test]
    fn invalid_channels_are_rejected() {
        // not trace preserving
        let k = vec![identity(2).mapv(|z| z * cx(0.9, 0.0))];
        assert!(Channel::new(2, 2, k).is_err());
        // empty Kraus list
        assert!(Channel::new(2, 2, vec![]).is_err());
        // dimension mismatch in apply
        let chan = Channel::identity(2);
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(chan.apply(&rho).is_err());
    }
}
