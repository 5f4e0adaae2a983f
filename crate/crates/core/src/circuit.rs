//! Statevector simulation of the one-qubit sampling circuit.
//!
//! Each step takes the memory qubit in state `|s_i>`, prepares a fresh
//! ancilla with `V|0> = |s_0>`, applies `U` to the ancilla controlled on the
//! memory in the computational basis (`|k>|phi> -> |k> U^k |phi>`, with
//! `U|s_0> = |s_1>`), then emits the old memory qubit and measures it in the
//! Z basis. Outcome `k` occurs with probability `T_ik` and leaves the ancilla
//! in `|s_k>`, which becomes the memory for the next step.
//!
//! Everything is real: the canonical encoding has non-negative amplitudes, so
//! `V` and `U` are plane rotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{index_string, symbols_to_line, FutureDistribution, Trajectory, MAX_FUTURE_LEN};
use crate::error::{Error, Result};
use crate::ising::Spin;
use crate::quantum::QuantumModel;

const UNITARY_TOL: f64 = 1e-12;

/// Tolerance on `|<memory|s_j>| = 1` and on branch normalization.
pub const SYNC_TOL: f64 = 1e-12;

type Mat2 = [[f64; 2]; 2];
type Mat4 = [[f64; 4]; 4];

fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

fn apply2(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn apply4(m: &Mat4, v: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (r, row) in m.iter().enumerate() {
        out[r] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
    }
    out
}

/// `I ⊗ m`, memory qubit first.
fn on_ancilla(m: &Mat2) -> Mat4 {
    let mut g = [[0.0; 4]; 4];
    for k in 0..2 {
        for r in 0..2 {
            for c in 0..2 {
                g[2 * k + r][2 * k + c] = m[r][c];
            }
        }
    }
    g
}

/// `|0><0| ⊗ I + |1><1| ⊗ m`.
fn controlled(m: &Mat2) -> Mat4 {
    let mut g = on_ancilla(&[[1.0, 0.0], [0.0, 1.0]]);
    for r in 0..2 {
        for c in 0..2 {
            g[2 + r][2 + c] = m[r][c];
        }
    }
    g
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// The preparation rotation `V` and the controlled rotation `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepUnitaries {
    pub v: Mat2,
    pub u: Mat2,
    /// `|s_i> = (cos theta_i, sin theta_i)`.
    pub theta0: f64,
    pub theta1: f64,
}

impl StepUnitaries {
    /// `|s_0> = V|0>`.
    pub fn s0(&self) -> [f64; 2] {
        apply2(&self.v, [1.0, 0.0])
    }

    /// `|s_1> = U V |0>`.
    pub fn s1(&self) -> [f64; 2] {
        apply2(&self.u, self.s0())
    }

    pub fn state(&self, s: Spin) -> [f64; 2] {
        match s {
            Spin::Up => self.s0(),
            Spin::Down => self.s1(),
        }
    }

    /// `max |M M^T - I|` over both gates.
    pub fn orthogonality_residual(&self) -> f64 {
        [self.v, self.u]
            .iter()
            .map(|m| {
                let mut worst: f64 = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        let e = m[r][0] * m[c][0] + m[r][1] * m[c][1];
                        let target = if r == c { 1.0 } else { 0.0 };
                        worst = worst.max((e - target).abs());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Runs one circuit step on a memory state. Returns, for each outcome
    /// `k`, the amplitude norm of that branch and the normalized ancilla state
    /// it leaves behind.
    pub fn step(&self, memory: [f64; 2]) -> [(f64, [f64; 2]); 2] {
        let prep = on_ancilla(&self.v);
        let cu = controlled(&self.u);
        let run = |mem: [f64; 2]| {
            let joint = [mem[0], 0.0, mem[1], 0.0];
            apply4(&cu, apply4(&prep, joint))
        };
        let psi = run(memory);
        let mut out = [(0.0, [0.0; 2]); 2];
        for (k, slot) in out.iter_mut().enumerate() {
            let part = [psi[2 * k], psi[2 * k + 1]];
            let norm = part[0].hypot(part[1]);
            let post = if norm > f64::MIN_POSITIVE {
                [part[0] / norm, part[1] / norm]
            } else {
                // Unreachable outcome; report the state it would have produced.
                let mut basis = [0.0; 2];
                basis[k] = 1.0;
                let psi = run(basis);
                [psi[2 * k], psi[2 * k + 1]]
            };
            *slot = (norm, post);
        }
        out
    }
}

/// `V` = rotation by `theta0`, `U` = rotation by `theta1 - theta0`.
pub fn build_step_unitaries(model: &QuantumModel) -> StepUnitaries {
    let angle = |a: [f64; 2]| a[1].atan2(a[0]);
    let theta0 = angle(model.state(0));
    let theta1 = angle(model.state(1));
    let su = StepUnitaries {
        v: rotation(theta0),
        u: rotation(theta1 - theta0),
        theta0,
        theta1,
    };
    debug_assert!(su.orthogonality_residual() <= UNITARY_TOL);
    su
}

/// One measurement history: its amplitude norm, the post-measurement memory
/// qubit, and the emitted prefix (first symbol in the most significant bit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub memory: [f64; 2],
    pub prefix: u32,
}

/// All measurement histories at one depth. The memory is a single qubit by
/// construction (`[f64; 2]`).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub depth: usize,
    pub branches: Vec<Branch>,
}

impl BranchState {
    pub fn root(su: &StepUnitaries, start: Spin) -> Self {
        Self {
            depth: 0,
            branches: vec![Branch {
                weight: 1.0,
                memory: su.state(start),
                prefix: 0,
            }],
        }
    }

    /// Splits every branch on the next measurement, keeping prefix order.
    pub fn advance(&self, su: &StepUnitaries) -> Self {
        let branches = self
            .branches
            .iter()
            .flat_map(|b| {
                su.step(b.memory)
                    .into_iter()
                    .enumerate()
                    .map(move |(k, (norm, post))| Branch {
                        weight: b.weight * norm,
                        memory: post,
                        prefix: (b.prefix << 1) | k as u32,
                    })
            })
            .collect();
        Self {
            depth: self.depth + 1,
            branches,
        }
    }

    /// `|sum of squared weights - 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.branches.iter().map(|b| b.weight * b.weight).sum::<f64>() - 1.0).abs()
    }
}

fn check_len(len: usize) -> Result<()> {
    if (1..=MAX_FUTURE_LEN).contains(&len) {
        Ok(())
    } else {
        Err(Error::Size(format!(
            "circuit depth {len} outside 1..={MAX_FUTURE_LEN}"
        )))
    }
}

/// Exact distribution of the first `len` measured symbols, obtained by
/// enumerating every measurement branch of the circuit.
pub fn exact_output_distribution(
    su: &StepUnitaries,
    start: Spin,
    len: usize,
) -> Result<FutureDistribution> {
    check_len(len)?;
    let mut state = BranchState::root(su, start);
    for _ in 0..len {
        state = state.advance(su);
    }
    let probs = state.branches.iter().map(|b| b.weight * b.weight).collect();
    FutureDistribution::from_probs(len, probs)
}

/// First branch whose memory failed to resynchronize.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncFailure {
    pub start: Spin,
    pub depth: usize,
    pub history: String,
    /// `|<memory|s_j>|`, which should be 1.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub branches_checked: usize,
    pub max_deviation: f64,
    pub max_normalization_error: f64,
    pub first_failure: Option<SyncFailure>,
}

impl SyncReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none() && self.max_normalization_error <= SYNC_TOL
    }
}

/// Verifies that after every measurement history up to depth `len` the
/// memory qubit equals `|s_j>` (up to sign), `j` being the last emitted symbol.
/// Histories of zero probability are skipped.
pub fn assert_synchronization(
    su: &StepUnitaries,
    model: &QuantumModel,
    len: usize,
) -> Result<SyncReport> {
    check_len(len)?;
    let mut report = SyncReport {
        branches_checked: 0,
        max_deviation: 0.0,
        max_normalization_error: 0.0,
        first_failure: None,
    };
    for start in Spin::ALL {
        let mut state = BranchState::root(su, start);
        for _ in 0..len {
            state = state.advance(su);
            report.max_normalization_error =
                report.max_normalization_error.max(state.normalization_error());
            for b in state.branches.iter().filter(|b| b.weight > 0.0) {
                let last = Spin::from_index((b.prefix & 1) as usize);
                let fid = dot(b.memory, model.state(last.index())).abs();
                let dev = (fid - 1.0).abs();
                report.branches_checked += 1;
                report.max_deviation = report.max_deviation.max(dev);
                if dev > SYNC_TOL && report.first_failure.is_none() {
                    report.first_failure = Some(SyncFailure {
                        start,
                        depth: state.depth,
                        history: symbols_to_line(&index_string(b.prefix as usize, state.depth)),
                        fidelity: fid,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Single-trajectory quantum sampler: memory qubit plus owned RNG.
#[derive(Debug, Clone)]
pub struct QuantumSampler {
    su: StepUnitaries,
    memory: [f64; 2],
    rng: ChaCha8Rng,
}

impl QuantumSampler {
    pub fn new(su: StepUnitaries, start: Spin, seed: u64) -> Self {
        Self {
            su,
            memory: su.state(start),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn memory(&self) -> [f64; 2] {
        self.memory
    }

    /// Runs the circuit once, measures the emitted qubit, and collapses.
    pub fn step(&mut self) -> Spin {
        let outcomes = self.su.step(self.memory);
        let p_up = outcomes[0].0 * outcomes[0].0;
        let k = if self.rng.random::<f64>() < p_up { 0 } else { 1 };
        self.memory = outcomes[k].1;
        Spin::from_index(k)
    }
}

/// Samples `steps` symbols by walking one measurement branch.
pub fn sample_quantum_trajectory(
    su: &StepUnitaries,
    start: Spin,
    steps: usize,
    seed: u64,
) -> Trajectory {
    let mut sampler = QuantumSampler::new(*su, start, seed);
    let symbols: Vec<Spin> = (0..steps).map(|_| sampler.step()).collect();
    let final_state = symbols.last().copied().unwrap_or(start);
    Trajectory {
        symbols,
        final_state,
    }
}
