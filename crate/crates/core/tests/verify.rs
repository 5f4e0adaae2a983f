use spin_epsilon::quantum::{build_quantum_model, QuantumModel};
use spin_epsilon::verify::{random_draws, run, run_with_encoder, Level};
use spin_epsilon::TransitionMatrix;

fn sign_flipped(tm: &TransitionMatrix) -> QuantumModel {
    let t = tm.rows();
    QuantumModel::from_parts(
        [[t[0][0].sqrt(), t[0][1].sqrt()], [t[1][0].sqrt(), -t[1][1].sqrt()]],
        tm.stationary(),
    )
    .unwrap()
}

#[test]
fn quick_level_passes() {
    let report = run(Level::Quick, 42).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
    assert_eq!(report.checks.len(), 5);
}

#[test]
fn corrupted_encoder_fails_at_saturation() {
    let report = run_with_encoder(Level::Quick, 42, sign_flipped).unwrap();
    assert!(!report.passed());
    let first = report.first_failure().unwrap();
    assert_eq!(first.name, "fidelity-saturation");
    assert!(first.counterexample.as_deref().unwrap().contains("J="));
    assert!(first.to_string().starts_with("FAIL fidelity-saturation"));
}

#[test]
fn optimal_encoder_via_explicit_hook_matches_default() {
    let a = run(Level::Quick, 7).unwrap();
    let b = run_with_encoder(Level::Quick, 7, build_quantum_model).unwrap();
    assert_eq!(a, b);
}

#[test]
fn draws_are_seeded_and_in_range() {
    let a = random_draws(5, 100);
    assert_eq!(a, random_draws(5, 100));
    for p in &a {
        assert!((-3.0..=3.0).contains(&p.j()) && (-3.0..=3.0).contains(&p.b()));
        assert!((0.05..=100.0).contains(&p.temperature()));
    }
}
