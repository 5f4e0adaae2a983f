//! The classical ε-machine of the Ising chain.
//!
//! The chain has two causal states: `s_0` collects every past ending in +1
//! and `s_1` every past ending in -1. Emitting spin `j` always moves the
//! machine to `s_j`, so the machine is unifilar and its dynamics are fully
//! described by the 2x2 [`TransitionMatrix`].

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::shannon_bits;
use crate::error::{Error, Result};
use crate::ising::{Spin, TransitionMatrix};
use crate::sweep::fmt_f64;

/// Longest future for which a full `2^L` probability table is built.
pub const MAX_FUTURE_LEN: usize = 20;

/// Rows closer than this are treated as one causal state.
pub const MERGE_TOL: f64 = 1e-12;

/// Exact probabilities of every length-`L` spin string.
///
/// Strings are indexed with the first symbol in the most significant bit and
/// `Down` encoded as 1, so index order is lexicographic with +1 before -1.
#[derive(Debug, Clone, PartialEq)]
pub struct FutureDistribution {
    len: usize,
    probs: Vec<f64>,
}

impl FutureDistribution {
    pub fn from_probs(len: usize, probs: Vec<f64>) -> Result<Self> {
        check_len(len)?;
        if probs.len() != 1usize << len {
            return Err(Error::InvalidInput(format!(
                "expected {} probabilities for length {len}, got {}",
                1usize << len,
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidInput("negative or NaN probability".into()));
        }
        let dist = Self { len, probs };
        let allowance = 1e-12 * (1u64 << len) as f64;
        if (dist.total() - 1.0).abs() > allowance {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {}, not 1",
                dist.total()
            )));
        }
        Ok(dist)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbols: &[Spin]) -> f64 {
        assert_eq!(symbols.len(), self.len, "string length mismatch");
        self.probs[string_index(symbols)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Sums out the final symbol, giving the length `L - 1` table.
    pub fn marginalize_last(&self) -> Option<FutureDistribution> {
        if self.len <= 1 {
            return None;
        }
        let probs = self.probs.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        Some(Self {
            len: self.len - 1,
            probs,
        })
    }

    /// Largest entry-wise absolute difference; `None` when lengths differ.
    pub fn max_abs_diff(&self, other: &FutureDistribution) -> Option<f64> {
        (self.len == other.len).then(|| {
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    /// Classical fidelity `sum_x sqrt(P(x) Q(x))`.
    pub fn fidelity(&self, other: &FutureDistribution) -> Option<f64> {
        (self.len == other.len).then(|| {
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a * b).sqrt())
                .sum()
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<Spin>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (index_string(i, self.len), p))
    }

    /// CSV with header `string,probability`; strings are space-separated `+1`/`-1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["string", "probability"])?;
        for (s, p) in self.iter() {
            w.write_record([symbols_to_line(&s), fmt_f64(p)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_len(len: usize) -> Result<()> {
    if (1..=MAX_FUTURE_LEN).contains(&len) {
        Ok(())
    } else {
        Err(Error::Size(format!(
            "future length {len} outside 1..={MAX_FUTURE_LEN}"
        )))
    }
}

/// Table index of a spin string.
pub fn string_index(symbols: &[Spin]) -> usize {
    symbols.iter().fold(0, |acc, s| (acc << 1) | s.index())
}

/// Inverse of [`string_index`].
pub fn index_string(index: usize, len: usize) -> Vec<Spin> {
    (0..len)
        .rev()
        .map(|k| Spin::from_index((index >> k) & 1))
        .collect()
}

/// Renders symbols as a space-separated line of `+1`/`-1`.
pub fn symbols_to_line(symbols: &[Spin]) -> String {
    let mut line = String::with_capacity(3 * symbols.len());
    for (k, s) in symbols.iter().enumerate() {
        if k > 0 {
            line.push(' ');
        }
        line.push_str(s.as_str());
    }
    line
}

/// Statistical complexity `C_mu` in bits: the Shannon entropy of the
/// stationary causal-state distribution.
///
/// When the two rows coincide the states have identical futures and merge
/// into a single causal state, so `C_mu = 0` even though `p = (1/2, 1/2)`.
pub fn statistical_complexity(tm: &TransitionMatrix) -> f64 {
    if tm.rows_coincide(MERGE_TOL) {
        return 0.0;
    }
    shannon_bits(&tm.stationary())
}

/// Exact `P(x_1..x_L | s_start)` by the chain rule over the unifilar machine.
pub fn future_distribution(
    tm: &TransitionMatrix,
    start: Spin,
    len: usize,
) -> Result<FutureDistribution> {
    check_len(len)?;
    let t = tm.rows();
    let mut probs = t[start.index()].to_vec();
    for _ in 1..len {
        probs = probs
            .iter()
            .enumerate()
            .flat_map(|(idx, &p)| {
                let state = idx & 1;
                [p * t[state][0], p * t[state][1]]
            })
            .collect();
    }
    Ok(FutureDistribution { len, probs })
}

/// Fidelity between the length-`L` futures of `s_0` and `s_1`, summed over
/// all `2^L` strings.
pub fn classical_fidelity(tm: &TransitionMatrix, len: usize) -> Result<f64> {
    let f0 = future_distribution(tm, Spin::Up, len)?;
    let f1 = future_distribution(tm, Spin::Down, len)?;
    Ok(f0.fidelity(&f1).expect("equal lengths"))
}

/// `sqrt(T00 T10) + sqrt(T01 T11)`, the one-step fidelity that every longer
/// future reproduces because the states resynchronize after one symbol.
pub fn one_step_fidelity(tm: &TransitionMatrix) -> f64 {
    (tm.get(0, 0) * tm.get(1, 0)).sqrt() + (tm.get(0, 1) * tm.get(1, 1)).sqrt()
}

/// A sampled run of the machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub symbols: Vec<Spin>,
    pub final_state: Spin,
}

impl Trajectory {
    pub fn to_line(&self) -> String {
        symbols_to_line(&self.symbols)
    }
}

/// Stateful ε-machine for trajectory simulation.
#[derive(Debug, Clone)]
pub struct EpsilonMachine {
    tm: TransitionMatrix,
    state: Spin,
}

impl EpsilonMachine {
    pub fn new(tm: TransitionMatrix, start: Spin) -> Self {
        Self { tm, state: start }
    }

    pub fn transition_matrix(&self) -> &TransitionMatrix {
        &self.tm
    }

    pub fn state(&self) -> Spin {
        self.state
    }

    /// Causal state of a past: the state labelled by its last symbol.
    pub fn encode(past: &[Spin]) -> Option<Spin> {
        past.last().copied()
    }

    /// The state reached from `state` after emitting `symbol`.
    pub fn next_state(_state: Spin, symbol: Spin) -> Spin {
        symbol
    }

    /// Emits one symbol and moves to the matching causal state.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Spin {
        let up = self.tm.get(self.state.index(), 0);
        let symbol = if rng.random::<f64>() < up {
            Spin::Up
        } else {
            Spin::Down
        };
        self.state = Self::next_state(self.state, symbol);
        symbol
    }

    /// Resets the machine to `start` and runs it for `steps` symbols with a
    /// ChaCha8 stream seeded from `seed`.
    pub fn sample_trajectory(&mut self, start: Spin, steps: usize, seed: u64) -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = start;
        let symbols = (0..steps).map(|_| self.step(&mut rng)).collect();
        Trajectory {
            symbols,
            final_state: self.state,
        }
    }
}

/// Convenience wrapper around [`EpsilonMachine::sample_trajectory`].
pub fn sample_trajectory(tm: &TransitionMatrix, start: Spin, steps: usize, seed: u64) -> Trajectory {
    EpsilonMachine::new(*tm, start).sample_trajectory(start, steps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{transition_matrix, IsingParams};
    use approx::assert_abs_diff_eq;

    fn ising(j: f64, b: f64, t: f64) -> TransitionMatrix {
        transition_matrix(&IsingParams::new(j, b, t).unwrap())
    }

    #[test]
    fn complexity_limits() {
        let tm = ising(1.0, 0.0, 1.0);
        assert_eq!(statistical_complexity(&tm), 1.0);
        let frozen = TransitionMatrix::new([[1.0, 0.0], [0.0, 1.0]], [1.0, 0.0]).unwrap();
        assert_eq!(statistical_complexity(&frozen), 0.0);
        assert_eq!(statistical_complexity(&TransitionMatrix::uniform()), 0.0);
        let inf = transition_matrix(&IsingParams::infinite_temperature(1.0, 0.3).unwrap());
        assert_eq!(statistical_complexity(&inf), 0.0);
    }

    #[test]
    fn single_step_future_is_a_row() {
        let tm = ising(0.4, -1.1, 0.8);
        for s in Spin::ALL {
            let d = future_distribution(&tm, s, 1).unwrap();
            assert_eq!(d.probs(), &tm.row(s.index()));
        }
    }

    #[test]
    fn uniform_future_is_flat() {
        let d = future_distribution(&TransitionMatrix::uniform(), Spin::Up, 3).unwrap();
        assert!(d.probs().iter().all(|&p| p == 0.125));
    }

    #[test]
    fn future_length_guard() {
        let tm = TransitionMatrix::uniform();
        assert!(matches!(future_distribution(&tm, Spin::Up, 0), Err(Error::Size(_))));
        assert!(matches!(future_distribution(&tm, Spin::Up, 21), Err(Error::Size(_))));
        assert!(future_distribution(&tm, Spin::Up, 20).is_ok());
    }

    #[test]
    fn chain_rule_product() {
        let tm = ising(1.0, 0.3, 2.0);
        let d = future_distribution(&tm, Spin::Down, 3).unwrap();
        let expect = tm.get(1, 0) * tm.get(0, 0) * tm.get(0, 1);
        assert_abs_diff_eq!(d.prob(&[Spin::Up, Spin::Up, Spin::Down]), expect, epsilon = 1e-16);
    }

    #[test]
    fn fidelity_limits() {
        let u = TransitionMatrix::uniform();
        for len in 1..=6 {
            assert_abs_diff_eq!(classical_fidelity(&u, len).unwrap(), 1.0, epsilon = 1e-14);
        }
        let frozen = TransitionMatrix::new([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5]).unwrap();
        assert_eq!(classical_fidelity(&frozen, 4).unwrap(), 0.0);
    }

    #[test]
    fn encoding_uses_last_symbol() {
        use Spin::*;
        assert_eq!(EpsilonMachine::encode(&[Down, Down, Up]), Some(Up));
        assert_eq!(EpsilonMachine::encode(&[Up, Down]), Some(Down));
        assert_eq!(EpsilonMachine::encode(&[]), None);
    }

    #[test]
    fn zero_steps_is_empty() {
        let tr = sample_trajectory(&ising(1.0, 0.3, 2.0), Spin::Down, 0, 7);
        assert!(tr.symbols.is_empty());
        assert_eq!(tr.final_state, Spin::Down);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let tm = ising(1.0, 0.3, 2.0);
        let a = sample_trajectory(&tm, Spin::Up, 1000, 99);
        let b = sample_trajectory(&tm, Spin::Up, 1000, 99);
        assert_eq!(a, b);
        assert_eq!(a.final_state, *a.symbols.last().unwrap());
    }

    #[test]
    fn csv_export() {
        let d = future_distribution(&TransitionMatrix::uniform(), Spin::Up, 2).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "string,probability");
        assert_eq!(lines[1], "+1 +1,2.5000000000000000e-1");
        assert_eq!(lines[4], "-1 -1,2.5000000000000000e-1");
    }
}
