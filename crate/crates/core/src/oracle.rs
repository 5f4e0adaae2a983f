//! Brute-force ground truth from exact Boltzmann enumeration of finite rings.
//!
//! A ring of `M = 2N + 1` spins with periodic boundaries is enumerated over
//! all `2^M` configurations. Conditional spin statistics are read off by
//! direct marginalization; nothing here touches the transfer matrix.
//!
//! Configuration `c` stores the spin at site `k` in bit `k` (1 = down). Site 0
//! is the conditioning site `x_0`; sites `1, 2, ...` are the future and sites
//! `M - 1, M - 2, ...` the past `x_{-1}, x_{-2}, ...`.
//!
//! Finite rings differ from the infinite chain by terms that decay
//! geometrically in `M`. [`wynn_epsilon`] accelerates a sequence of ring
//! results to its `M -> infinity` limit using ring data alone.

use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::classical::FutureDistribution;
use crate::error::{Error, Result};
use crate::ising::{IsingParams, Spin};
use crate::sweep::fmt_f64;

pub const MAX_N_HALF: usize = 10;

/// Normalized Boltzmann distribution over every configuration of a ring.
#[derive(Debug, Clone)]
pub struct RingEnsemble {
    n_half: usize,
    params: IsingParams,
    probs: Vec<f64>,
}

impl RingEnsemble {
    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn ring_size(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn params(&self) -> &IsingParams {
        &self.params
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn bit(c: usize, site: usize) -> usize {
        (c >> site) & 1
    }

    /// `[P(x_site = +1), P(x_site = -1)]`.
    pub fn site_marginal(&self, site: usize) -> [f64; 2] {
        assert!(site < self.ring_size(), "site {site} outside ring");
        let mut m = [0.0; 2];
        for (c, &p) in self.probs.iter().enumerate() {
            m[Self::bit(c, site)] += p;
        }
        m
    }

    /// `<x_site>`.
    pub fn magnetization(&self, site: usize) -> f64 {
        let m = self.site_marginal(site);
        m[0] - m[1]
    }

    /// Joint law of the spins at `a` and `b`, indexed `[x_a][x_b]`.
    pub fn pair_marginal(&self, a: usize, b: usize) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for (c, &p) in self.probs.iter().enumerate() {
            m[Self::bit(c, a)][Self::bit(c, b)] += p;
        }
        m
    }

    /// Site with offset `-k` from site 0 (`k >= 1`).
    fn past_site(&self, k: usize) -> usize {
        self.ring_size() - k
    }

    /// CSV `site,p_up,p_down` of every single-site marginal.
    pub fn write_marginals_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["site", "p_up", "p_down"])?;
        for site in 0..self.ring_size() {
            let m = self.site_marginal(site);
            w.write_record([site.to_string(), fmt_f64(m[0]), fmt_f64(m[1])])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_n_half(n_half: usize) -> Result<()> {
    if (1..=MAX_N_HALF).contains(&n_half) {
        Ok(())
    } else {
        Err(Error::Size(format!(
            "ring half-size {n_half} outside 1..={MAX_N_HALF}"
        )))
    }
}

/// Enumerates every configuration of the `2 n_half + 1` spin ring with
/// weight `exp(-H / T)`, `H = sum_k (-J x_k x_{k+1} - B x_k)`, normalized by
/// log-sum-exp.
pub fn enumerate_ring(params: &IsingParams, n_half: usize) -> Result<RingEnsemble> {
    check_n_half(n_half)?;
    let m = 2 * n_half + 1;
    let count = 1usize << m;
    let (j, b, beta) = (params.j(), params.b(), params.beta());
    let top = m - 1;

    let log_weights: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|c| {
            // Bit k of `next` holds the spin at site k + 1 (mod M).
            let next = (c >> 1) | ((c & 1) << top);
            let antialigned = (c ^ next).count_ones() as f64;
            let down = c.count_ones() as f64;
            let bond_sum = m as f64 - 2.0 * antialigned;
            let spin_sum = m as f64 - 2.0 * down;
            beta * (j * bond_sum + b * spin_sum)
        })
        .collect();

    let max = log_weights
        .par_iter()
        .copied()
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_weights.par_iter().map(|&lw| (lw - max).exp()).collect();
    let z: f64 = probs.par_iter().sum();
    probs.par_iter_mut().for_each(|p| *p /= z);

    Ok(RingEnsemble {
        n_half,
        params: *params,
        probs,
    })
}

/// Exact `P(x_1..x_len | x_0 = condition)` on the ring.
pub fn conditional_from_ring(
    ens: &RingEnsemble,
    condition: Spin,
    len: usize,
) -> Result<FutureDistribution> {
    if len == 0 || len > ens.n_half {
        return Err(Error::Size(format!(
            "conditioning window {len} must lie in 1..={}",
            ens.n_half
        )));
    }
    let mut table = vec![0.0; 1 << len];
    let want = condition.index();
    for (c, &p) in ens.probs.iter().enumerate() {
        if c & 1 != want {
            continue;
        }
        let idx = (1..=len).fold(0, |acc, site| (acc << 1) | RingEnsemble::bit(c, site));
        table[idx] += p;
    }
    let z: f64 = table.iter().sum();
    table.iter_mut().for_each(|p| *p /= z);
    FutureDistribution::from_probs(len, table)
}

/// `P(x_1 = +1 | x_0, x_{-1}, ..., x_{-hist_len})` for every history, plus the
/// one-step `P(x_1 = +1 | x_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryConditionals {
    pub hist_len: usize,
    /// Indexed by `(x_0 << hist_len) | (x_{-1} ... x_{-hist_len})`, first past
    /// symbol most significant. `None` for histories of zero probability.
    pub given_history: Vec<Option<f64>>,
    /// Indexed by `x_0`.
    pub given_present: [f64; 2],
}

impl HistoryConditionals {
    /// `max |P(x_1 | x_0, history) - P(x_1 | x_0)|` over histories.
    pub fn gap(&self) -> f64 {
        self.given_history
            .iter()
            .enumerate()
            .filter_map(|(idx, p)| {
                p.map(|p| (p - self.given_present[idx >> self.hist_len]).abs())
            })
            .fold(0.0, f64::max)
    }
}

pub fn history_conditionals(ens: &RingEnsemble, hist_len: usize) -> Result<HistoryConditionals> {
    if hist_len == 0 || hist_len + 1 > ens.n_half {
        return Err(Error::Size(format!(
            "history length {hist_len} needs 1 <= L and L + 1 <= {}",
            ens.n_half
        )));
    }
    let keys = 1usize << (hist_len + 1);
    let mut joint = vec![[0.0f64; 2]; keys];
    let mut present = [[0.0f64; 2]; 2];
    for (c, &p) in ens.probs.iter().enumerate() {
        let x0 = RingEnsemble::bit(c, 0);
        let x1 = RingEnsemble::bit(c, 1);
        let hist = (1..=hist_len).fold(0, |acc, k| (acc << 1) | RingEnsemble::bit(c, ens.past_site(k)));
        joint[(x0 << hist_len) | hist][x1] += p;
        present[x0][x1] += p;
    }
    let up = |pair: [f64; 2]| {
        let z = pair[0] + pair[1];
        (z > 0.0).then(|| pair[0] / z)
    };
    Ok(HistoryConditionals {
        hist_len,
        given_history: joint.into_iter().map(up).collect(),
        given_present: [
            up(present[0]).unwrap_or(f64::NAN),
            up(present[1]).unwrap_or(f64::NAN),
        ],
    })
}

/// Finite-ring deviation from the Markov property:
/// `max |P(x_1 | x_0, x_{-1..-hist_len}) - P(x_1 | x_0)|`.
pub fn markov_gap(ens: &RingEnsemble, hist_len: usize) -> Result<f64> {
    Ok(history_conditionals(ens, hist_len)?.gap())
}

/// Wynn's epsilon algorithm: the limit estimate from the deepest even column
/// of the epsilon table. Stops early if a column difference vanishes, which
/// means the sequence has already converged at working precision.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    assert!(!seq.is_empty(), "empty sequence");
    let mut best = *seq.last().unwrap();
    let mut prev = vec![0.0; seq.len() + 1];
    let mut cur = seq.to_vec();
    let mut order = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        order += 1;
        if next.iter().any(|x| !x.is_finite()) {
            return best;
        }
        if order % 2 == 0 {
            best = *next.last().unwrap();
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Ring results for one parameter point across a range of ring sizes.
#[derive(Debug, Clone)]
pub struct RingSeries {
    pub n_halves: Vec<usize>,
    /// `conditionals[i][s]` is the length-`len` table given `x_0 = s` at `n_halves[i]`.
    pub conditionals: Vec<[FutureDistribution; 2]>,
    /// History conditionals at each size, where the ring is large enough.
    pub histories: Vec<Option<HistoryConditionals>>,
}

impl RingSeries {
    /// Enumerates each ring once and records conditional tables of length
    /// `len` and history conditionals of length `hist_len`.
    pub fn compute(
        params: &IsingParams,
        n_halves: RangeInclusive<usize>,
        len: usize,
        hist_len: usize,
    ) -> Result<Self> {
        let mut series = RingSeries {
            n_halves: Vec::new(),
            conditionals: Vec::new(),
            histories: Vec::new(),
        };
        for n in n_halves {
            let ens = enumerate_ring(params, n)?;
            series.n_halves.push(n);
            series.conditionals.push([
                conditional_from_ring(&ens, Spin::Up, len)?,
                conditional_from_ring(&ens, Spin::Down, len)?,
            ]);
            series.histories.push(history_conditionals(&ens, hist_len).ok());
        }
        Ok(series)
    }

    fn position(&self, n_half: usize) -> Option<usize> {
        self.n_halves.iter().position(|&n| n == n_half)
    }

    pub fn conditional(&self, n_half: usize, start: Spin) -> Option<&FutureDistribution> {
        self.position(n_half).map(|i| &self.conditionals[i][start.index()])
    }

    pub fn markov_gap(&self, n_half: usize) -> Option<f64> {
        self.position(n_half)
            .and_then(|i| self.histories[i].as_ref())
            .map(HistoryConditionals::gap)
    }

    /// Entry-wise Wynn extrapolation of the conditional tables over every ring
    /// size in the series; `[table given +1, table given -1]`.
    pub fn extrapolated_conditionals(&self) -> [Vec<f64>; 2] {
        let extrapolate = |s: usize| {
            let size = self.conditionals[0][s].probs().len();
            (0..size)
                .map(|i| {
                    let seq: Vec<f64> = self.conditionals.iter().map(|c| c[s].probs()[i]).collect();
                    wynn_epsilon(&seq)
                })
                .collect()
        };
        [extrapolate(0), extrapolate(1)]
    }

    /// Markov gap of the Wynn-extrapolated history conditionals, using every
    /// ring size whose history table exists.
    pub fn extrapolated_markov_gap(&self) -> Option<f64> {
        let hs: Vec<&HistoryConditionals> = self.histories.iter().flatten().collect();
        let first = hs.first()?;
        let given_present = [0, 1].map(|x0| {
            let seq: Vec<f64> = hs.iter().map(|h| h.given_present[x0]).collect();
            wynn_epsilon(&seq)
        });
        let given_history = (0..first.given_history.len())
            .map(|i| {
                let seq: Option<Vec<f64>> = hs.iter().map(|h| h.given_history[i]).collect();
                seq.map(|s| wynn_epsilon(&s))
            })
            .collect();
        Some(
            HistoryConditionals {
                hist_len: first.hist_len,
                given_history,
                given_present,
            }
            .gap(),
        )
    }
}
