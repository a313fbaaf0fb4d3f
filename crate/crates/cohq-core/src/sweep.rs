//! Parameter sweeps over one-parameter channel families, reproducing the
//! qutrit examples: `Theta(p) = (1-p) Delta + p FT` mixes the dephasing with
//! the Fourier transform, `Lambda(p) = (1-p) Delta + p sum_n K_n . K_n^dag`
//! mixes it with a fixed three-Kraus qutrit channel.

use ndarray::array;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::diamond::diamond_measure;
use crate::entropy::mc_lower_bound;
use crate::nsid::nsid_measure;
use crate::quantum::{mix, Channel};
use crate::{Error, Result};

/// Which measures a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureSelection {
    pub diamond: bool,
    pub nsid: bool,
    pub mc: bool,
}

impl Default for MeasureSelection {
    fn default() -> Self {
        Self {
            diamond: true,
            nsid: true,
            mc: false,
        }
    }
}

/// One-parameter families available to [`run_sweep`].
#[derive(Debug, Clone)]
pub enum Family {
    /// `(1-p) Delta + p FT` on qutrits.
    ThetaMix,
    /// `(1-p) Delta + p sum K_n . K_n^dag` on qutrits.
    LambdaMix,
    /// `(1-p) Delta + p Theta` for a caller-provided square channel.
    Custom(Channel),
}

/// The fixed Kraus operators of the `Lambda` family (prefactor `1/sqrt(4)`).
pub fn lambda_kraus_channel() -> Channel {
    let h = 0.5;
    let c = |x: f64| Complex64::new(x * h, 0.0);
    let k1 = array![
        [c(-1.0), c(1.0), c(0.0)],
        [c(0.0), c(0.0), c(0.0)],
        [c(1.0), c(1.0), c(0.0)]
    ];
    let k2 = array![
        [c(1.0), c(0.0), c(-1.0)],
        [c(1.0), c(0.0), c(1.0)],
        [c(0.0), c(0.0), c(0.0)]
    ];
    let k3 = array![
        [c(0.0), c(-1.0), c(1.0)],
        [c(0.0), c(0.0), c(0.0)],
        [c(0.0), c(1.0), c(1.0)]
    ];
    Channel::new(3, 3, vec![k1, k2, k3]).expect("fixed Kraus set is trace preserving")
}

impl Family {
    /// The channel at mixing parameter `p`.
    pub fn channel(&self, p: f64) -> Result<Channel> {
        let base = match self {
            Family::ThetaMix => Channel::fourier_unitary(3),
            Family::LambdaMix => lambda_kraus_channel(),
            Family::Custom(chan) => {
                if chan.dim_in() != chan.dim_out() {
                    return Err(Error::InvalidArgument(
                        "custom sweep families need square channels".into(),
                    ));
                }
                chan.clone()
            }
        };
        mix(p, &base, &Channel::dephasing(base.dim_in()))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::ThetaMix => "theta",
            Family::LambdaMix => "lambda",
            Family::Custom(_) => "custom",
        }
    }
}

/// Specification of a sweep: family, grid and measures.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: Family,
    pub p_grid: Vec<f64>,
    pub measures: MeasureSelection,
    /// Termination tolerance passed to the nSID iteration.
    pub nsid_tol: f64,
    pub nsid_max_iter: usize,
}

impl SweepSpec {
    pub fn new(family: Family, p_grid: Vec<f64>) -> Result<Self> {
        let mut grid = p_grid;
        grid.retain(|p| p.is_finite());
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty sweep grid".into()));
        }
        if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(
                "sweep grid values must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            family,
            p_grid: grid,
            measures: MeasureSelection::default(),
            nsid_tol: crate::nsid::DEFAULT_TOL,
            nsid_max_iter: crate::nsid::DEFAULT_MAX_ITER,
        })
    }

    /// The default grid `0, 0.05, ..., 1`.
    pub fn default_grid() -> Vec<f64> {
        (0..=20).map(|k| k as f64 * 0.05).collect()
    }
}

/// One row of sweep output.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p: f64,
    pub diamond: Option<f64>,
    pub nsid: Option<f64>,
    pub mc: Option<f64>,
}

/// Evaluate the requested measures on the whole grid. Grid points run in
/// parallel; rows come back ordered by `p`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let rows: Result<Vec<SweepRow>> = spec
        .p_grid
        .par_iter()
        .map(|&p| {
            let chan = spec.family.channel(p)?;
            let diamond = if spec.measures.diamond {
                Some(diamond_measure(&chan, crate::conic::DEFAULT_TOL)?.value)
            } else {
                None
            };
            let nsid = if spec.measures.nsid {
                Some(nsid_measure(&chan, spec.nsid_tol, spec.nsid_max_iter)?.value)
            } else {
                None
            };
            let mc = if spec.measures.mc {
                Some(mc_lower_bound(&chan, 32, 80)?.value)
            } else {
                None
            };
            Ok(SweepRow {
                p,
                diamond,
                nsid,
                mc,
            })
        })
        .collect();
    rows
}

/// Render rows as CSV: header line, six-digit values, LF line endings.
pub fn to_csv(rows: &[SweepRow], measures: MeasureSelection) -> String {
    let mut out = String::from("p");
    if measures.diamond {
        out.push_str(",M_diamond");
    }
    if measures.nsid {
        out.push_str(",M_nsid");
    }
    if measures.mc {
        out.push_str(",M_c_lb");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{:.6}", row.p));
        for v in [
            measures.diamond.then_some(row.diamond),
            measures.nsid.then_some(row.nsid),
            measures.mc.then_some(row.mc),
        ]
        .into_iter()
        .flatten()
        {
            match v {
                Some(x) if x.is_finite() => out.push_str(&format!(",{x:.6}")),
                Some(_) => out.push_str(",inf"),
                None => out.push_str(","),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lambda_kraus_channel_is_cptp_and_nonfree() {
        let chan = lambda_kraus_channel();
        let report = classify(&chan, 1e-9);
        assert!(!report.detection_incoherent);
    }

    #[test]
    fn family_endpoints() {
        for family in [Family::ThetaMix, Family::LambdaMix] {
            let at_zero = family.channel(0.0).unwrap();
            assert!(classify(&at_zero, 1e-9).detection_creation_incoherent);
            let at_one = family.channel(1.0).unwrap();
            assert!(!classify(&at_one, 1e-9).detection_incoherent);
        }
    }

    #[test]
    fn grid_is_sorted_deduplicated_and_validated() {
        let spec = SweepSpec::new(Family::ThetaMix, vec![0.5, 0.0, 0.5, 1.0]).unwrap();
        assert_eq!(spec.p_grid, vec![0.0, 0.5, 1.0]);
        assert!(SweepSpec::new(Family::ThetaMix, vec![]).is_err());
        assert!(SweepSpec::new(Family::ThetaMix, vec![1.5]).is_err());
    }

    #[test]
    fn tiny_theta_sweep_rows_are_ordered_and_zero_at_origin() {
        let mut spec = SweepSpec::new(Family::ThetaMix, vec![0.0, 1.0]).unwrap();
        spec.measures = MeasureSelection {
            diamond: true,
            nsid: true,
            mc: false,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert_abs_diff_eq!(rows[0].diamond.unwrap(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(rows[0].nsid.unwrap(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(rows[1].diamond.unwrap(), 4.0 / 3.0, epsilon = 1e-4);
        assert_abs_diff_eq!(rows[1].nsid.unwrap(), 4.0 / 3.0, epsilon = 1e-3);

        let csv = to_csv(&rows, spec.measures);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "p,M_diamond,M_nsid");
        assert!(csv.ends_with('\n'));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn custom_family_requires_square_channels() {
        let rect = crate::classify::channel_from_stochastic(
            &crate::quantum::StochasticMatrix::uniform(2, 3),
        );
        let family = Family::Custom(rect);
        assert!(family.channel(0.5).is_err());
    }
}
