//! Exact single-step spin statistics of the infinite Ising chain.
//!
//! For the Hamiltonian `H = sum_k (-J x_k x_{k+1} - B x_k)` at temperature
//! `T` (with `k_B = 1`), the infinite chain is a stationary Markov chain over
//! spins. Its transition probabilities come from the symmetric transfer matrix
//!
//! ```text
//! V[x][x'] = exp(beta * (J s(x) s(x') + B (s(x) + s(x')) / 2)),   s(0) = +1, s(1) = -1
//! ```
//!
//! via `T_ij = V_ij v_j / (lambda v_i)` and `p_i ∝ v_i^2`, where `lambda` is
//! the Perron eigenvalue of `V` and `v` its positive eigenvector.

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// A single spin, doubling as the emitted symbol and the causal-state label.
///
/// `Up` (+1) has index 0 and labels `s_0`; `Down` (-1) has index 1 and labels `s_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Spin {
        match i {
            0 => Spin::Up,
            1 => Spin::Down,
            _ => panic!("spin index out of range: {i}"),
        }
    }

    /// The physical spin value, +1 or -1.
    pub fn value(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    /// `"+1"` or `"-1"`.
    pub fn as_str(self) -> &'static str {
        match self {
            Spin::Up => "+1",
            Spin::Down => "-1",
        }
    }
}

/// Physical parameters of the chain: coupling `J`, field `B`, temperature `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    j: f64,
    b: f64,
    temperature: f64,
    beta: f64,
}

impl IsingParams {
    /// Validated constructor. `T` must be finite and strictly positive.
    pub fn new(j: f64, b: f64, temperature: f64) -> Result<Self> {
        check_finite("J", j)?;
        check_finite("B", b)?;
        if temperature.is_nan() || temperature.is_infinite() {
            return Err(Error::InvalidInput(format!(
                "temperature must be finite, got {temperature}"
            )));
        }
        if temperature <= 0.0 {
            return Err(Error::Domain(format!(
                "temperature must be strictly positive, got {temperature}"
            )));
        }
        let beta = 1.0 / temperature;
        if !beta.is_finite() {
            return Err(Error::Domain(format!(
                "temperature {temperature} is too small to invert"
            )));
        }
        Ok(Self {
            j,
            b,
            temperature,
            beta,
        })
    }

    /// The `T -> infinity` limit: `beta = 0` exactly, which makes every
    /// spin independent and uniform regardless of `J` and `B`.
    pub fn infinite_temperature(j: f64, b: f64) -> Result<Self> {
        check_finite("J", j)?;
        check_finite("B", b)?;
        Ok(Self {
            j,
            b,
            temperature: f64::INFINITY,
            beta: 0.0,
        })
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Temperature; `f64::INFINITY` for the infinite-temperature limit.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_infinite_temperature(&self) -> bool {
        self.beta == 0.0
    }

    /// Same chain with the field reversed.
    pub fn with_field(&self, b: f64) -> Self {
        Self { b, ..*self }
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {x}")))
    }
}

/// Row-stochastic 2x2 transition matrix of a two-state Markov chain together
/// with its stationary distribution.
///
/// `t[i][j]` is the probability that a spin following a spin with index `i`
/// has index `j`; `p[i]` the stationary probability of index `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    t: [[f64; 2]; 2],
    p: [f64; 2],
}

impl TransitionMatrix {
    /// Validates stochasticity and that `p` is a left fixed point of `t`.
    pub fn new(t: [[f64; 2]; 2], p: [f64; 2]) -> Result<Self> {
        for (i, row) in t.iter().enumerate() {
            for &x in row {
                if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidInput(format!(
                        "row {i} has entry {x} outside [0, 1]"
                    )));
                }
            }
            if (row[0] + row[1] - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidInput(format!(
                    "row {i} sums to {}, not 1",
                    row[0] + row[1]
                )));
            }
        }
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) || (p[0] + p[1] - 1.0).abs() > ROW_SUM_TOL
        {
            return Err(Error::InvalidInput(format!(
                "stationary weights {p:?} are not a distribution"
            )));
        }
        let tm = Self { t, p };
        if tm.fixed_point_residual() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "weights {p:?} are not stationary for {t:?}"
            )));
        }
        Ok(tm)
    }

    /// Builds the matrix from its rows, solving for the stationary
    /// distribution. Fails when the chain is reducible (both states absorbing).
    pub fn from_rows(t: [[f64; 2]; 2]) -> Result<Self> {
        let out = t[0][1] + t[1][0];
        if out <= 0.0 {
            return Err(Error::InvalidInput(
                "chain has no transitions between states; stationary weights are not unique"
                    .into(),
            ));
        }
        let p = [t[1][0] / out, t[0][1] / out];
        Self::new(t, p)
    }

    /// Independent fair spins: every entry 1/2.
    pub fn uniform() -> Self {
        Self {
            t: [[0.5, 0.5], [0.5, 0.5]],
            p: [0.5, 0.5],
        }
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.t[from][to]
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.t
    }

    pub fn row(&self, i: usize) -> [f64; 2] {
        self.t[i]
    }

    pub fn stationary(&self) -> [f64; 2] {
        self.p
    }

    /// Relabels the two states (global spin flip).
    pub fn swapped(&self) -> Self {
        Self {
            t: [[self.t[1][1], self.t[1][0]], [self.t[0][1], self.t[0][0]]],
            p: [self.p[1], self.p[0]],
        }
    }

    /// True when both rows agree entry-wise within `tol`, i.e. the two causal
    /// states have identical futures and merge into one.
    pub fn rows_coincide(&self, tol: f64) -> bool {
        (self.t[0][0] - self.t[1][0]).abs() <= tol && (self.t[0][1] - self.t[1][1]).abs() <= tol
    }

    /// Largest absolute deviation of a row sum from 1.
    pub fn row_sum_residual(&self) -> f64 {
        self.t
            .iter()
            .map(|r| (r[0] + r[1] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_j |(p t)_j - p_j|`.
    pub fn fixed_point_residual(&self) -> f64 {
        (0..2)
            .map(|j| (self.p[0] * self.t[0][j] + self.p[1] * self.t[1][j] - self.p[j]).abs())
            .fold(0.0, f64::max)
    }
}

/// Transition probabilities and stationary spin distribution of the infinite
/// chain, from the Perron eigenpair of the symmetric transfer matrix.
///
/// The eigenproblem is solved in closed form. With `V = [[a, b], [b, c]]`,
/// `r = hypot((a - c) / 2, b)` and `lambda = (a + c) / 2 + r`, the gaps
/// `lambda - a` and `lambda - c` satisfy `(lambda - a)(lambda - c) = b^2`,
/// which gives every quantity without cancellation:
///
/// ```text
/// T00 = a / lambda    T01 = (lambda - a) / lambda
/// T10 = (lambda - c) / lambda    T11 = c / lambda
/// p0 = (lambda - c) / (2r)    p1 = (lambda - a) / (2r)
/// ```
pub fn transition_matrix(params: &IsingParams) -> TransitionMatrix {
    let beta = params.beta();
    if beta == 0.0 {
        return TransitionMatrix::uniform();
    }
    let (j, b) = (params.j(), params.b());

    // Log-weights of the three distinct entries, shifted so the largest is 0.
    let log_a = beta * (j + b);
    let log_c = beta * (j - b);
    let log_b = -beta * j;
    let shift = log_a.max(log_c).max(log_b);
    let a = (log_a - shift).exp();
    let c = (log_c - shift).exp();
    let off = (log_b - shift).exp();
    let off_sq = (2.0 * (log_b - shift)).exp();

    let half_diff = (c - a) / 2.0;
    let r = half_diff.hypot(off);
    let lambda = (a + c) / 2.0 + r;
    let gap = |u: f64| if u >= 0.0 { u + r } else { off_sq / (r - u) };
    let gap_a = gap(half_diff);
    let gap_c = gap(-half_diff);

    let t = [
        [a / lambda, gap_a / lambda],
        [gap_c / lambda, c / lambda],
    ];
    let norm = gap_a + gap_c;
    let p = [gap_c / norm, gap_a / norm];
    TransitionMatrix { t, p }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Frozen from a 40-digit evaluation of the same closed form, cross-checked
    // against extrapolated ring enumeration in the oracle tests.
    const T00_J1_B0_T1: f64 = 0.880_797_077_977_882_4;
    const T_J1_B03_T2: [[f64; 2]; 2] = [
        [0.824_715_958_781_449_9, 0.175_284_041_218_550_1],
        [0.389_035_390_847_709_3, 0.610_964_609_152_290_7],
    ];
    const P_J1_B03_T2: [f64; 2] = [0.689_388_613_507_873_7, 0.310_611_386_492_126_3];

    #[test]
    fn rejects_bad_temperatures() {
        assert!(matches!(IsingParams::new(1.0, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(IsingParams::new(1.0, 0.0, -2.0), Err(Error::Domain(_))));
        assert!(matches!(
            IsingParams::new(1.0, 0.0, f64::NAN),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            IsingParams::new(1.0, 0.0, f64::INFINITY),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            IsingParams::new(f64::NAN, 0.0, 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(IsingParams::infinite_temperature(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn beta_times_temperature_is_one() {
        let p = IsingParams::new(0.7, -0.2, 3.3).unwrap();
        assert_abs_diff_eq!(p.beta() * p.temperature(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn high_temperature_is_nearly_uniform() {
        let tm = transition_matrix(&IsingParams::new(1.0, 0.0, 1e6).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(tm.get(i, j), 0.5, epsilon = 1e-5);
            }
        }
        assert_abs_diff_eq!(tm.stationary()[0], 0.5, epsilon = 1e-5);
    }

    #[test]
    fn infinite_temperature_flag_is_exactly_uniform() {
        let tm = transition_matrix(&IsingParams::infinite_temperature(1.0, 0.3).unwrap());
        assert_eq!(tm, TransitionMatrix::uniform());
    }

    #[test]
    fn zero_field_golden() {
        let tm = transition_matrix(&IsingParams::new(1.0, 0.0, 1.0).unwrap());
        assert_eq!(tm.get(0, 0), tm.get(1, 1));
        assert_eq!(tm.get(0, 1), tm.get(1, 0));
        assert_eq!(tm.stationary(), [0.5, 0.5]);
        assert_abs_diff_eq!(tm.get(0, 0), T00_J1_B0_T1, epsilon = 1e-14);
    }

    #[test]
    fn finite_field_golden() {
        let tm = transition_matrix(&IsingParams::new(1.0, 0.3, 2.0).unwrap());
        for i in 0..2 {
            assert_abs_diff_eq!(tm.stationary()[i], P_J1_B03_T2[i], epsilon = 1e-14);
            for j in 0..2 {
                assert_abs_diff_eq!(tm.get(i, j), T_J1_B03_T2[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn no_entry_underflows_at_low_temperature() {
        let tm = transition_matrix(&IsingParams::new(3.0, -3.0, 0.05).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                let x = tm.get(i, j);
                assert!(x > 0.0 && x <= 1.0, "t[{i}][{j}] = {x}");
            }
        }
    }

    #[test]
    fn from_rows_solves_stationary() {
        let tm = TransitionMatrix::from_rows([[0.9, 0.1], [0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(tm.stationary()[0], 0.75, epsilon = 1e-15);
        assert!(TransitionMatrix::from_rows([[1.0, 0.0], [0.0, 1.0]]).is_err());
        assert!(TransitionMatrix::from_rows([[0.9, 0.2], [0.3, 0.7]]).is_err());
        assert!(TransitionMatrix::new([[1.0, 0.0], [0.0, 1.0]], [1.0, 0.0]).is_ok());
        assert!(TransitionMatrix::new([[0.9, 0.1], [0.3, 0.7]], [0.5, 0.5]).is_err());
    }

    #[test]
    fn spin_conventions() {
        assert_eq!(Spin::Up.index(), 0);
        assert_eq!(Spin::Down.value(), -1);
        assert_eq!(Spin::from_index(1), Spin::Down);
        assert_eq!(Spin::Up.flipped(), Spin::Down);
    }
}
