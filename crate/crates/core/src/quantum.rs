//! The optimal quantum model of the Ising chain and its complexity `C_q`.
//!
//! Each causal state `s_i` is encoded in the pure qubit state
//! `|s_i> = sqrt(T_i0)|0> + sqrt(T_i1)|1>`. Their overlap equals the fidelity
//! between the classical conditional futures of `s_0` and `s_1`, the largest
//! overlap any valid model may have, and since the entropy of a two-state
//! mixture falls as the overlap grows, no valid model stores less. `C_q` is the
//! von Neumann entropy of the stationary mixture
//! `rho = p0 |s0><s0| + p1 |s1><s1|`.

use crate::classical::{classical_fidelity, one_step_fidelity};
use crate::entropy::{neg_xlog2x, shannon_bits};
use crate::error::{Error, Result};
use crate::ising::{transition_matrix, IsingParams, TransitionMatrix};

const NORM_TOL: f64 = 1e-12;

/// Fidelity-saturation tolerance (round-off budget for `2^12`-term sums).
pub const SATURATION_TOL: f64 = 1e-10;

/// Eigenvalues within this distance of 0 are round-off from a rank-1 matrix.
const EIGEN_FLOOR: f64 = 4.0 * f64::EPSILON;

/// Two pure real qubit states, one per causal state, with stationary weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumModel {
    amps: [[f64; 2]; 2],
    weights: [f64; 2],
}

impl QuantumModel {
    /// Any pair of unit vectors with a probability vector of weights. Used for
    /// alternative (generally suboptimal or invalid) encodings.
    pub fn from_parts(amps: [[f64; 2]; 2], weights: [f64; 2]) -> Result<Self> {
        for (i, a) in amps.iter().enumerate() {
            let norm = a[0].hypot(a[1]);
            if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidInput(format!(
                    "state {i} has norm {norm}, expected 1"
                )));
            }
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) || (weights[0] + weights[1] - 1.0).abs() > NORM_TOL
        {
            return Err(Error::InvalidInput(format!(
                "weights {weights:?} are not a distribution"
            )));
        }
        Ok(Self { amps, weights })
    }

    /// Canonical pair `|0>` and `f|0> + sqrt(1 - f^2)|1>` with weights `(p0, 1 - p0)`.
    pub fn from_overlap(p0: f64, overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&overlap) {
            return Err(Error::InvalidInput(format!(
                "p0 = {p0} and overlap = {overlap} must lie in [0, 1]"
            )));
        }
        let perp = (1.0 - overlap * overlap).sqrt();
        Self::from_parts([[1.0, 0.0], [overlap, perp]], [p0, 1.0 - p0])
    }

    pub fn state(&self, i: usize) -> [f64; 2] {
        self.amps[i]
    }

    pub fn amplitudes(&self) -> [[f64; 2]; 2] {
        self.amps
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    /// Signed inner product `<s0|s1>`.
    pub fn overlap(&self) -> f64 {
        self.amps[0][0] * self.amps[1][0] + self.amps[0][1] * self.amps[1][1]
    }

    /// Pure-state fidelity `|<s0|s1>|`.
    pub fn fidelity(&self) -> f64 {
        self.overlap().abs()
    }
}

/// Optimal encoding with real non-negative amplitudes `sqrt(T_ij)`.
pub fn build_quantum_model(tm: &TransitionMatrix) -> QuantumModel {
    let t = tm.rows();
    QuantumModel {
        amps: [
            [t[0][0].sqrt(), t[0][1].sqrt()],
            [t[1][0].sqrt(), t[1][1].sqrt()],
        ],
        weights: tm.stationary(),
    }
}

/// Real symmetric 2x2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    m: [[f64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite density matrix entry".into()));
        }
        if (m[0][1] - m[1][0]).abs() > NORM_TOL {
            return Err(Error::InvalidInput("density matrix is not symmetric".into()));
        }
        let rho = Self { m };
        if (rho.trace() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix has trace {}",
                rho.trace()
            )));
        }
        let [lo, hi] = rho.eigenvalues();
        if lo < -NORM_TOL || hi > 1.0 + NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "eigenvalues {lo}, {hi} outside [0, 1]"
            )));
        }
        Ok(rho)
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Eigenvalues in ascending order from the symmetric 2x2 closed form
    /// `mean ± hypot(half_diff, off)`. Values within a few ulps of zero are
    /// snapped to zero.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.m[0][0] + self.m[1][1]);
        let radius = (0.5 * (self.m[0][0] - self.m[1][1])).hypot(0.5 * (self.m[0][1] + self.m[1][0]));
        let mut lo = mean - radius;
        if lo.abs() <= EIGEN_FLOOR {
            lo = 0.0;
        }
        // Unit trace is enforced on construction.
        [lo, 1.0 - lo]
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        shannon_bits(&self.eigenvalues())
    }
}

/// `rho = p0 |s0><s0| + p1 |s1><s1|`.
pub fn stationary_density(model: &QuantumModel) -> DensityMatrix2 {
    let mut m = [[0.0; 2]; 2];
    for (amp, &w) in model.amps.iter().zip(&model.weights) {
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] += w * amp[r] * amp[c];
            }
        }
    }
    DensityMatrix2 { m }
}

/// `C_q` in bits: von Neumann entropy of [`stationary_density`].
pub fn quantum_statistical_complexity(model: &QuantumModel) -> f64 {
    stationary_density(model).entropy_bits()
}

/// Eigenvalues of a mixture of two pure states with weights `(p0, 1 - p0)`
/// and overlap `f`: `(1 ± sqrt(1 - 4 p0 p1 (1 - f^2))) / 2`, ascending.
pub fn mixture_eigenvalues(p0: f64, overlap: f64) -> [f64; 2] {
    let disc = 4.0 * p0 * (1.0 - p0) * (1.0 - overlap * overlap);
    let root = (1.0 - disc).max(0.0).sqrt();
    // (1 - root) / 2 rewritten to avoid cancellation for small disc.
    let small = disc / (2.0 * (1.0 + root));
    [small, 1.0 - small]
}

/// Entropy of the two-state mixture from [`mixture_eigenvalues`].
pub fn mixture_entropy_bits(p0: f64, overlap: f64) -> f64 {
    mixture_eigenvalues(p0, overlap).iter().copied().map(neg_xlog2x).sum()
}

/// Outcome of comparing the model's overlap with the classical future fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    /// `|<s0|s1>|`.
    pub quantum_fidelity: f64,
    /// `F(P(.|s0), P(.|s1))` over length-`L` futures, for `L = 1..=max_len`.
    pub classical: Vec<f64>,
    /// `max_L |quantum_fidelity - classical[L]|`.
    pub max_gap: f64,
    /// No classical fidelity is exceeded (beyond tolerance).
    pub bound_holds: bool,
    /// The bound is met with equality at every length.
    pub saturated: bool,
}

impl SaturationReport {
    pub fn passed(&self) -> bool {
        self.bound_holds && self.saturated
    }
}

/// Checks the maximum-fidelity bound `|<s0|s1>| <= F_L` for every future
/// length `L`, and that the model meets it with equality.
pub fn fidelity_saturation_check(
    tm: &TransitionMatrix,
    model: &QuantumModel,
    max_len: usize,
) -> Result<SaturationReport> {
    let quantum = model.fidelity();
    let classical = (1..=max_len)
        .map(|len| classical_fidelity(tm, len))
        .collect::<Result<Vec<_>>>()?;
    let bound_holds = classical.iter().all(|&f| quantum <= f + SATURATION_TOL);
    let max_gap = classical
        .iter()
        .map(|&f| (quantum - f).abs())
        .fold(0.0, f64::max);
    Ok(SaturationReport {
        quantum_fidelity: quantum,
        classical,
        max_gap,
        bound_holds,
        saturated: max_gap <= SATURATION_TOL,
    })
}

/// Both complexities at one parameter point, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complexities {
    pub c_mu: f64,
    pub c_q: f64,
    pub overlap: f64,
}

pub fn complexities(params: &IsingParams) -> Complexities {
    let tm = transition_matrix(params);
    let model = build_quantum_model(&tm);
    Complexities {
        c_mu: crate::classical::statistical_complexity(&tm),
        c_q: quantum_statistical_complexity(&model),
        overlap: one_step_fidelity(&tm),
    }
}

/// Number of log-spaced points in the coarse `T_max` scan.
pub const TMAX_GRID_POINTS: usize = 101;

/// Profiles whose range on the grid is below this are treated as flat.
const FLAT_TOL: f64 = 1e-12;

/// Result of [`find_tmax`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmaxResult {
    pub t_max: f64,
    pub c_q_max: f64,
    /// The maximum lies strictly inside the range.
    pub interior: bool,
    /// The coarse grid profile rises then falls. When false, `t_max` is the
    /// grid argmax without refinement.
    pub unimodal: bool,
}

/// Log-spaced grid of `points` temperatures from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| {
            if k == 0 {
                lo
            } else if k + 1 == points {
                hi
            } else {
                (a + (b - a) * k as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Temperature maximizing `C_q` at fixed `J`, `B` within `[lo, hi]`.
///
/// A 101-point log-spaced scan brackets the maximum, then golden-section
/// search in `ln T` narrows the bracket to width `tol` in `T`. Monotone or
/// flat profiles return the better endpoint with `interior = false`.
pub fn find_tmax(j: f64, b: f64, range: (f64, f64), tol: f64) -> Result<TmaxResult> {
    let (lo, hi) = range;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "temperature range ({lo}, {hi}) must satisfy 0 < lo < hi < inf"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let cq_at = |t: f64| -> Result<f64> { Ok(complexities(&IsingParams::new(j, b, t)?).c_q) };

    let grid = log_grid(lo, hi, TMAX_GRID_POINTS);
    let values = grid.iter().map(|&t| cq_at(t)).collect::<Result<Vec<_>>>()?;
    let (k, &best) = values
        .iter()
        .enumerate()
        .fold((0, &values[0]), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);

    if best - min <= FLAT_TOL || k == 0 || k == grid.len() - 1 {
        return Ok(TmaxResult {
            t_max: grid[k],
            c_q_max: best,
            interior: false,
            unimodal: true,
        });
    }

    let unimodal = values[..=k].windows(2).all(|w| w[1] >= w[0])
        && values[k..].windows(2).all(|w| w[1] <= w[0]);
    if !unimodal {
        return Ok(TmaxResult {
            t_max: grid[k],
            c_q_max: best,
            interior: true,
            unimodal: false,
        });
    }

    let (mut a, mut d) = (grid[k - 1].ln(), grid[k + 1].ln());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut b_pt = d - inv_phi * (d - a);
    let mut c_pt = a + inv_phi * (d - a);
    let mut fb = cq_at(b_pt.exp())?;
    let mut fc = cq_at(c_pt.exp())?;
    while d.exp() - a.exp() > tol {
        if fb >= fc {
            d = c_pt;
            c_pt = b_pt;
            fc = fb;
            b_pt = d - inv_phi * (d - a);
            fb = cq_at(b_pt.exp())?;
        } else {
            a = b_pt;
            b_pt = c_pt;
            fb = fc;
            c_pt = a + inv_phi * (d - a);
            fc = cq_at(c_pt.exp())?;
        }
    }
    let (t_ref, f_ref) = if fb >= fc { (b_pt.exp(), fb) } else { (c_pt.exp(), fc) };
    let (t_max, c_q_max) = if f_ref >= best { (t_ref, f_ref) } else { (grid[k], best) };
    Ok(TmaxResult {
        t_max,
        c_q_max,
        interior: true,
        unimodal: true,
    })
}
