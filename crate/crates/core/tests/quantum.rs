use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spin_epsilon::classical::{one_step_fidelity, statistical_complexity};
use spin_epsilon::quantum::{
    build_quantum_model, complexities, fidelity_saturation_check, find_tmax,
    mixture_entropy_bits, quantum_statistical_complexity, QuantumModel,
};
use spin_epsilon::verify::random_draws;
use spin_epsilon::{transition_matrix, IsingParams, TransitionMatrix};

const TMAX_J1_B03: f64 = 1.632_130_418_107_903_7;
const CQ_AT_TMAX_J1_B03: f64 = 0.288_860_186_875_454_7;

fn cx(j: f64, b: f64, t: f64) -> spin_epsilon::quantum::Complexities {
    complexities(&IsingParams::new(j, b, t).unwrap())
}

#[test]
fn quantum_never_exceeds_classical() {
    for p in random_draws(21, 1000) {
        let c = complexities(&p);
        assert!(c.c_q <= c.c_mu + 1e-12, "{p:?}: {} > {}", c.c_q, c.c_mu);
        assert!(c.c_q >= 0.0);
        let tm = transition_matrix(&p);
        let [p0, p1] = tm.stationary();
        if c.overlap > 1e-6 && c.overlap < 1.0 - 1e-6 && p0.min(p1) > 1e-6 {
            assert!(c.c_q < c.c_mu, "{p:?}: expected strict advantage");
        }
    }
}

#[test]
fn overlap_matches_one_step_fidelity() {
    for p in random_draws(22, 500) {
        let tm = transition_matrix(&p);
        let m = build_quantum_model(&tm);
        assert!((m.overlap() - one_step_fidelity(&tm)).abs() < 1e-12);
        let rep = fidelity_saturation_check(&tm, &m, 12).unwrap();
        assert!(rep.passed(), "{p:?}: {rep:?}");
    }
}

fn sign_flipped(tm: &TransitionMatrix) -> QuantumModel {
    let t = tm.rows();
    QuantumModel::from_parts(
        [[t[0][0].sqrt(), t[0][1].sqrt()], [t[1][0].sqrt(), -t[1][1].sqrt()]],
        tm.stationary(),
    )
    .unwrap()
}

#[test]
fn suboptimal_encodings_cost_more() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for p in random_draws(24, 200) {
        let tm = transition_matrix(&p);
        let opt = quantum_statistical_complexity(&build_quantum_model(&tm));
        let flipped = quantum_statistical_complexity(&sign_flipped(&tm));
        assert!(flipped >= opt - 1e-12, "{p:?}");

        let p0 = tm.stationary()[0];
        let f = one_step_fidelity(&tm);
        let shrunk = f * rng.random_range(0.0..1.0);
        assert!(mixture_entropy_bits(p0, shrunk) >= opt - 1e-12, "{p:?} f'={shrunk}");
        assert!(statistical_complexity(&tm) >= opt - 1e-12);
    }
}

#[test]
fn sign_flipped_encoding_fails_saturation() {
    let tm = transition_matrix(&IsingParams::new(1.0, 0.3, 2.0).unwrap());
    let rep = fidelity_saturation_check(&tm, &sign_flipped(&tm), 12).unwrap();
    assert!(rep.bound_holds);
    assert!(!rep.saturated);
}

#[test]
fn quantum_cost_decays_at_high_temperature() {
    let mut prev = f64::INFINITY;
    for t in [5.0, 10.0, 100.0, 1e3, 1e4] {
        let c = cx(1.0, 0.3, t);
        assert!(c.c_q < prev);
        prev = c.c_q;
    }
    let hot = cx(1.0, 0.3, 1e4);
    assert_abs_diff_eq!(hot.c_q, 7.5045299069e-8, epsilon = 1e-15);
    assert_abs_diff_eq!(hot.c_mu, 0.99999999935, epsilon = 1e-10);
    assert_abs_diff_eq!(cx(1.0, 0.3, 10.0).c_q, 0.025_069_571_598_886_4, epsilon = 1e-14);
    assert_abs_diff_eq!(cx(1.0, 0.3, 10.0).c_mu, 0.999_032_280_777_323_7, epsilon = 1e-14);
}

#[test]
fn efficiency_ratio_grows_without_bound() {
    let ratios: Vec<f64> = [10.0, 100.0, 1e3, 1e4, 1e5]
        .iter()
        .map(|&t| {
            let c = cx(1.0, 0.3, t);
            c.c_mu / c.c_q
        })
        .collect();
    for w in ratios.windows(2) {
        assert!(w[1] > 5.0 * w[0], "{ratios:?}");
    }
}

#[test]
fn tmax_interior_for_finite_field() {
    let r = find_tmax(1.0, 0.3, (0.05, 100.0), 1e-8).unwrap();
    assert!(r.interior && r.unimodal);
    assert!((r.t_max - TMAX_J1_B03).abs() < 1e-6, "{}", r.t_max);
    assert_abs_diff_eq!(r.c_q_max, CQ_AT_TMAX_J1_B03, epsilon = 1e-12);
}

#[test]
fn tmax_agrees_with_dense_grid() {
    for (j, b) in [(1.0, 0.3), (1.0, 1.0), (2.0, 0.5), (0.5, -0.4)] {
        let r = find_tmax(j, b, (0.05, 100.0), 1e-6).unwrap();
        let dense = (0..=20_000)
            .map(|k| 0.05 * 2000.0f64.powf(k as f64 / 20_000.0))
            .map(|t| (t, cx(j, b, t).c_q))
            .fold((0.0, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a });
        assert!(r.interior, "J={j} B={b}");
        assert!((r.t_max / dense.0 - 1.0).abs() < 1e-3, "J={j} B={b}: {} vs {}", r.t_max, dense.0);
        assert!(r.c_q_max >= dense.1 - 1e-12);
    }
}

#[test]
fn tmax_zero_field_is_boundary() {
    let r = find_tmax(1.0, 0.0, (0.05, 100.0), 1e-6).unwrap();
    assert!(!r.interior);
    assert_eq!(r.t_max, 0.05);
}

#[test]
fn tmax_free_spins_are_flat() {
    let r = find_tmax(0.0, 0.0, (0.05, 100.0), 1e-6).unwrap();
    assert!(!r.interior);
    assert_eq!(r.c_q_max, 0.0);
}

#[test]
fn degenerate_limits() {
    let c = complexities(&IsingParams::infinite_temperature(1.0, 0.3).unwrap());
    assert_eq!((c.c_mu, c.c_q), (0.0, 0.0));
    let cold = cx(1.0, 0.0, 0.05);
    assert_abs_diff_eq!(cold.c_mu, 1.0, epsilon = 1e-15);
    assert!((cold.c_mu - cold.c_q).abs() < 1e-12);
    let far = cx(1.0, 0.0, 1e6);
    assert_abs_diff_eq!(far.c_mu, 1.0, epsilon = 1e-15);
    assert!((far.c_q - 1.0826e-11).abs() < 1e-14, "{}", far.c_q);
}
