use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use spin_epsilon::{transition_matrix, IsingParams, TransitionMatrix};

fn params() -> impl Strategy<Value = IsingParams> {
    (-3.0..3.0f64, -3.0..3.0f64, (0.05f64).ln()..(100.0f64).ln())
        .prop_map(|(j, b, lt)| IsingParams::new(j, b, lt.exp()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rows_are_stochastic(p in params()) {
        let tm = transition_matrix(&p);
        prop_assert!(tm.row_sum_residual() < 1e-10);
        for x in tm.rows().iter().flatten() {
            prop_assert!((0.0..=1.0).contains(x));
        }
    }

    #[test]
    fn stationary_is_a_fixed_point(p in params()) {
        let tm = transition_matrix(&p);
        prop_assert!(tm.fixed_point_residual() < 1e-10);
        let [p0, p1] = tm.stationary();
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_flip_swaps_spins(p in params()) {
        let tm = transition_matrix(&p);
        let flipped = transition_matrix(&p.with_field(-p.b())).swapped();
        for i in 0..2 {
            prop_assert!((tm.stationary()[i] - flipped.stationary()[i]).abs() < 1e-12);
            for j in 0..2 {
                prop_assert!((tm.get(i, j) - flipped.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_field_is_symmetric(j in -3.0..3.0f64, lt in (0.05f64).ln()..(100.0f64).ln()) {
        let tm = transition_matrix(&IsingParams::new(j, 0.0, lt.exp()).unwrap());
        prop_assert!((tm.get(0, 0) - tm.get(1, 1)).abs() < 1e-12);
        prop_assert!((tm.get(0, 1) - tm.get(1, 0)).abs() < 1e-12);
        prop_assert!((tm.stationary()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn from_rows_recovers_stationary(p in params()) {
        let tm = transition_matrix(&p);
        if let Ok(rebuilt) = TransitionMatrix::from_rows(tm.rows()) {
            prop_assert!((rebuilt.stationary()[0] - tm.stationary()[0]).abs() < 1e-9);
        }
    }
}

#[test]
fn ferromagnetic_persistence() {
    // Strong ferromagnetic coupling makes spins persist; antiferromagnetic makes them alternate.
    let ferro = transition_matrix(&IsingParams::new(1.0, 0.0, 0.5).unwrap());
    assert!(ferro.get(0, 0) > 0.9 && ferro.get(1, 1) > 0.9);
    let anti = transition_matrix(&IsingParams::new(-1.0, 0.0, 0.5).unwrap());
    assert!(anti.get(0, 1) > 0.9 && anti.get(1, 0) > 0.9);
}

#[test]
fn zero_coupling_is_independent() {
    let b: f64 = 0.7;
    let t = 1.3;
    let tm = transition_matrix(&IsingParams::new(0.0, b, t).unwrap());
    let up = (b / t).exp() / ((b / t).exp() + (-b / t).exp());
    for i in 0..2 {
        assert_abs_diff_eq!(tm.get(i, 0), up, epsilon = 1e-15);
    }
    assert_abs_diff_eq!(tm.stationary()[0], up, epsilon = 1e-15);
    assert!(tm.rows_coincide(1e-12));
}

#[test]
fn extreme_parameters_stay_finite() {
    for (j, b, t) in [(3.0, 3.0, 0.05), (-3.0, 3.0, 0.05), (3.0, -3.0, 0.01), (50.0, 0.0, 0.01), (1.0, 0.3, 1e12)] {
        let tm = transition_matrix(&IsingParams::new(j, b, t).unwrap());
        assert!(tm.rows().iter().flatten().all(|x| x.is_finite()));
        assert!(tm.row_sum_residual() < 1e-12, "({j}, {b}, {t})");
        assert!(tm.fixed_point_residual() < 1e-12, "({j}, {b}, {t})");
    }
}
