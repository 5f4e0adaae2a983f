//! End-to-end verification suite behind `spin-epsilon verify`.
//!
//! Checks run sequentially in a fixed order so that reports are
//! deterministic for a given seed. The quantum encoder is a parameter so that
//! deliberately corrupted encoders can be shown to fail.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{assert_synchronization, build_step_unitaries, exact_output_distribution};
use crate::classical::{classical_fidelity, future_distribution, one_step_fidelity};
use crate::error::Result;
use crate::ising::{transition_matrix, IsingParams, Spin, TransitionMatrix};
use crate::oracle::RingSeries;
use crate::quantum::{
    build_quantum_model, fidelity_saturation_check, mixture_eigenvalues,
    quantum_statistical_complexity, stationary_density, QuantumModel,
};
use crate::sweep::fmt_f64;

/// How thorough a verification run is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

/// Draw counts, ring sizes and tolerances for one level.
#[derive(Debug, Clone)]
pub struct Plan {
    pub ring_sizes: std::ops::RangeInclusive<usize>,
    /// Ring sizes at which raw errors must strictly decrease.
    pub ring_checkpoints: Vec<usize>,
    pub oracle_table_tol: f64,
    pub oracle_gap_tol: f64,
    pub saturation_draws: usize,
    pub l_independence_draws: usize,
    pub circuit_draws: usize,
    pub sync_draws: usize,
}

impl Plan {
    pub fn for_level(level: Level) -> Self {
        match level {
            Level::Full => Plan {
                ring_sizes: 4..=10,
                ring_checkpoints: vec![4, 6, 8, 10],
                oracle_table_tol: 1e-6,
                oracle_gap_tol: 1e-5,
                saturation_draws: 500,
                l_independence_draws: 200,
                circuit_draws: 100,
                sync_draws: 200,
            },
            Level::Quick => Plan {
                ring_sizes: 3..=6,
                ring_checkpoints: vec![3, 4, 5, 6],
                oracle_table_tol: 1e-2,
                oracle_gap_tol: 1e-2,
                saturation_draws: 50,
                l_independence_draws: 50,
                circuit_draws: 50,
                sync_draws: 50,
            },
        }
    }
}

pub const ORACLE_POINTS: [(f64, f64, f64); 2] = [(1.0, 0.3, 2.0), (1.0, 0.0, 1.0)];
pub const ORACLE_TABLE_LEN: usize = 3;
pub const ORACLE_HIST_LEN: usize = 2;
pub const MAX_FIDELITY_LEN: usize = 12;
pub const MAX_CIRCUIT_LEN: usize = 10;
pub const SYNC_DEPTH: usize = 6;
pub const MONOTONICITY_GRID: usize = 50;

pub const OVERLAP_TOL: f64 = 1e-12;
pub const FIDELITY_L_TOL: f64 = 1e-10;
pub const CIRCUIT_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-12;

/// Random `(J, B, T)` with `J, B` uniform on `[-3, 3]` and `T` log-uniform on
/// `[0.05, 100]`.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R) -> IsingParams {
    let j = rng.random_range(-3.0..=3.0);
    let b = rng.random_range(-3.0..=3.0);
    let t = (rng.random_range(0.05f64.ln()..=100f64.ln())).exp();
    IsingParams::new(j, b, t).expect("sampled parameters are valid")
}

/// Deterministic list of `count` random parameter points.
pub fn random_draws(seed: u64, count: usize) -> Vec<IsingParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_params(&mut rng)).collect()
}

fn describe(p: &IsingParams) -> String {
    format!("J={} B={} T={}", p.j(), p.b(), p.temperature())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub counterexample: Option<String>,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<24} {}", self.name, self.detail)?;
        if let Some(c) = &self.counterexample {
            write!(f, " [first counterexample: {c}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Oracle convergence at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConvergence {
    pub j: f64,
    pub b: f64,
    pub t: f64,
    /// `(n_half, max-entry error of the raw ring tables)` at each checkpoint.
    pub raw_errors: Vec<(usize, f64)>,
    /// `(n_half, raw ring Markov gap)` at each checkpoint.
    pub raw_gaps: Vec<(usize, f64)>,
    /// Max-entry error of the ring tables extrapolated over every ring size.
    pub extrapolated_error: f64,
    /// Markov gap of the extrapolated history conditionals.
    pub extrapolated_gap: f64,
}

impl OracleConvergence {
    pub fn errors_decreasing(&self) -> bool {
        self.raw_errors.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn gaps_decreasing(&self) -> bool {
        self.raw_gaps.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Compares ring-enumeration conditionals against the transfer-matrix
/// ε-machine for one parameter point.
pub fn oracle_convergence(params: &IsingParams, plan: &Plan) -> Result<OracleConvergence> {
    let tm = transition_matrix(params);
    let series = RingSeries::compute(params, plan.ring_sizes.clone(), ORACLE_TABLE_LEN, ORACLE_HIST_LEN)?;
    let exact = [
        future_distribution(&tm, Spin::Up, ORACLE_TABLE_LEN)?,
        future_distribution(&tm, Spin::Down, ORACLE_TABLE_LEN)?,
    ];

    let mut raw_errors = Vec::new();
    let mut raw_gaps = Vec::new();
    for &n in &plan.ring_checkpoints {
        let err = Spin::ALL
            .iter()
            .filter_map(|&s| series.conditional(n, s)?.max_abs_diff(&exact[s.index()]))
            .fold(0.0, f64::max);
        raw_errors.push((n, err));
        if let Some(g) = series.markov_gap(n) {
            raw_gaps.push((n, g));
        }
    }

    let extrapolated = series.extrapolated_conditionals();
    let extrapolated_error = (0..2)
        .flat_map(|s| {
            extrapolated[s]
                .iter()
                .zip(exact[s].probs())
                .map(|(a, b)| (a - b).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);

    Ok(OracleConvergence {
        j: params.j(),
        b: params.b(),
        t: params.temperature(),
        raw_errors,
        raw_gaps,
        extrapolated_error,
        extrapolated_gap: series.extrapolated_markov_gap().unwrap_or(f64::NAN),
    })
}

fn check_oracle(plan: &Plan) -> Result<CheckResult> {
    let mut detail = Vec::new();
    let mut counterexample = None;
    for &(j, b, t) in &ORACLE_POINTS {
        let p = IsingParams::new(j, b, t)?;
        let c = oracle_convergence(&p, plan)?;
        let ok = c.errors_decreasing()
            && c.gaps_decreasing()
            && c.extrapolated_error < plan.oracle_table_tol
            && c.extrapolated_gap < plan.oracle_gap_tol;
        let last = c.raw_errors.last().map(|e| e.1).unwrap_or(f64::NAN);
        detail.push(format!(
            "({}) raw={:.2e} extrapolated={:.2e} gap={:.2e}",
            describe(&p),
            last,
            c.extrapolated_error,
            c.extrapolated_gap
        ));
        if !ok && counterexample.is_none() {
            counterexample = Some(format!("{} {:?}", describe(&p), c));
        }
    }
    Ok(CheckResult {
        name: "oracle-convergence",
        passed: counterexample.is_none(),
        detail: detail.join("; "),
        counterexample,
    })
}

fn check_saturation(
    draws: &[IsingParams],
    encoder: fn(&TransitionMatrix) -> QuantumModel,
) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut counterexample = None;
    for p in draws {
        let tm = transition_matrix(p);
        let model = encoder(&tm);
        let closed = (model.overlap() - one_step_fidelity(&tm)).abs();
        let report = fidelity_saturation_check(&tm, &model, MAX_FIDELITY_LEN)?;
        worst = worst.max(closed).max(report.max_gap);
        if (closed >= OVERLAP_TOL || !report.passed()) && counterexample.is_none() {
            counterexample = Some(format!(
                "{} overlap={} classical={} gap={:.3e}",
                describe(p),
                model.overlap(),
                report.classical[0],
                report.max_gap
            ));
        }
    }
    Ok(CheckResult {
        name: "fidelity-saturation",
        passed: counterexample.is_none(),
        detail: format!("{} draws, max gap {worst:.2e}", draws.len()),
        counterexample,
    })
}

fn check_l_independence(draws: &[IsingParams]) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut counterexample = None;
    for p in draws {
        let tm = transition_matrix(p);
        let reference = one_step_fidelity(&tm);
        for len in 1..=MAX_FIDELITY_LEN {
            let dev = (classical_fidelity(&tm, len)? - reference).abs();
            worst = worst.max(dev);
            if dev > FIDELITY_L_TOL && counterexample.is_none() {
                counterexample = Some(format!("{} L={len} deviation={dev:.3e}", describe(p)));
            }
        }
    }
    Ok(CheckResult {
        name: "fidelity-L-independence",
        passed: counterexample.is_none(),
        detail: format!("{} draws, max deviation {worst:.2e}", draws.len()),
        counterexample,
    })
}

fn check_circuit(
    dist_draws: &[IsingParams],
    sync_draws: &[IsingParams],
    encoder: fn(&TransitionMatrix) -> QuantumModel,
) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut counterexample = None;
    for p in dist_draws {
        let tm = transition_matrix(p);
        let su = build_step_unitaries(&encoder(&tm));
        for len in 1..=MAX_CIRCUIT_LEN {
            for s in Spin::ALL {
                let quantum = exact_output_distribution(&su, s, len)?;
                let classical = future_distribution(&tm, s, len)?;
                let dev = quantum.max_abs_diff(&classical).expect("same length");
                worst = worst.max(dev);
                if dev > CIRCUIT_TOL && counterexample.is_none() {
                    counterexample = Some(format!(
                        "{} start={:?} L={len} deviation={dev:.3e}",
                        describe(p),
                        s
                    ));
                }
            }
        }
    }
    let mut sync_worst: f64 = 0.0;
    for p in sync_draws {
        let tm = transition_matrix(p);
        let model = encoder(&tm);
        let su = build_step_unitaries(&model);
        let report = assert_synchronization(&su, &model, SYNC_DEPTH)?;
        sync_worst = sync_worst.max(report.max_deviation);
        if !report.passed() && counterexample.is_none() {
            counterexample = Some(format!("{} {:?}", describe(p), report.first_failure));
        }
    }
    Ok(CheckResult {
        name: "circuit-vs-markov",
        passed: counterexample.is_none(),
        detail: format!(
            "{} distribution draws (L<={MAX_CIRCUIT_LEN}) max dev {worst:.2e}; {} sync draws (depth {SYNC_DEPTH}) max dev {sync_worst:.2e}",
            dist_draws.len(),
            sync_draws.len()
        ),
        counterexample,
    })
}

/// Grid of interior points `k / (n + 1)`, `k = 1..=n`.
pub fn open_unit_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

/// Mixture entropy must fall strictly with overlap at fixed weights, and the
/// closed-form eigenvalues must match the direct 2x2 solve.
pub fn check_entropy_monotonicity() -> Result<CheckResult> {
    let grid = open_unit_grid(MONOTONICITY_GRID);
    let mut worst_eig: f64 = 0.0;
    let mut counterexample = None;
    for &p0 in &grid {
        let mut previous: Option<(f64, f64)> = None;
        for &f in &grid {
            let model = QuantumModel::from_overlap(p0, f)?;
            let direct = stationary_density(&model).eigenvalues();
            let closed = mixture_eigenvalues(p0, f);
            let dev = (direct[0] - closed[0]).abs().max((direct[1] - closed[1]).abs());
            worst_eig = worst_eig.max(dev);
            let h = quantum_statistical_complexity(&model);
            if counterexample.is_none() {
                if dev > EIGEN_TOL {
                    counterexample = Some(format!("p0={p0} f={f} eigenvalue deviation {dev:.3e}"));
                } else if let Some((pf, ph)) = previous {
                    if h >= ph || h.is_nan() {
                        counterexample =
                            Some(format!("p0={p0}: H(f={pf})={ph} <= H(f={f})={h}"));
                    }
                }
            }
            previous = Some((f, h));
        }
    }
    Ok(CheckResult {
        name: "entropy-monotonicity",
        passed: counterexample.is_none(),
        detail: format!(
            "{n}x{n} grid, max eigenvalue deviation {worst_eig:.2e}",
            n = MONOTONICITY_GRID
        ),
        counterexample,
    })
}

/// Runs every check with the optimal encoder.
pub fn run(level: Level, seed: u64) -> Result<VerifyReport> {
    run_with_encoder(level, seed, build_quantum_model)
}

/// Runs every check with a caller-supplied encoder.
pub fn run_with_encoder(
    level: Level,
    seed: u64,
    encoder: fn(&TransitionMatrix) -> QuantumModel,
) -> Result<VerifyReport> {
    let plan = Plan::for_level(level);
    // Independent streams per check so that changing one draw count does not
    // shift the others.
    let draws = |offset: u64, n: usize| random_draws(seed.wrapping_add(offset), n);
    let checks = vec![
        check_oracle(&plan)?,
        check_saturation(&draws(1, plan.saturation_draws), encoder)?,
        check_l_independence(&draws(2, plan.l_independence_draws))?,
        check_circuit(
            &draws(3, plan.circuit_draws),
            &draws(4, plan.sync_draws),
            encoder,
        )?,
        check_entropy_monotonicity()?,
    ];
    Ok(VerifyReport { level, seed, checks })
}

/// Writes oracle CSVs for golden-file storage into `dir`: site marginals of
/// the largest ring, raw ring conditional tables, and the convergence record.
pub fn dump_oracle(dir: &Path, level: Level) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let plan = Plan::for_level(level);
    for &(j, b, t) in &ORACLE_POINTS {
        let p = IsingParams::new(j, b, t)?;
        let tag = format!("J{j}_B{b}_T{t}");
        let largest = *plan.ring_sizes.end();
        let ens = crate::oracle::enumerate_ring(&p, largest)?;
        ens.write_marginals_csv(BufWriter::new(File::create(
            dir.join(format!("marginals_{tag}_N{largest}.csv")),
        )?))?;
        for s in Spin::ALL {
            crate::oracle::conditional_from_ring(&ens, s, ORACLE_TABLE_LEN)?.write_csv(
                BufWriter::new(File::create(dir.join(format!(
                    "conditional_{tag}_N{largest}_x0{}.csv",
                    s.as_str()
                )))?),
            )?;
        }
        let c = oracle_convergence(&p, &plan)?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(
            dir.join(format!("convergence_{tag}.csv")),
        )?));
        w.write_record(["n_half", "max_table_error", "markov_gap"])?;
        for (n, err) in &c.raw_errors {
            let gap = c
                .raw_gaps
                .iter()
                .find(|(m, _)| m == n)
                .map(|g| fmt_f64(g.1))
                .unwrap_or_default();
            w.write_record([n.to_string(), fmt_f64(*err), gap])?;
        }
        w.write_record([
            "extrapolated".to_string(),
            fmt_f64(c.extrapolated_error),
            fmt_f64(c.extrapolated_gap),
        ])?;
        w.flush()?;
    }
    Ok(())
}
