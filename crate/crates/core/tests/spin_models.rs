use lindspec::model::{build_spin_model, Oscillator, SpinSystem};
use lindspec::spectral::SolverOptions;
use lindspec::verify::verify_model;

fn assert_verified(model: &lindspec::BlockModel) {
    let report = verify_model(model, &SolverOptions::default(), 1e-8).unwrap();
    assert!(report.all_passed(), "{}\n{report}", model.name);
}

#[test]
fn xy_chain_with_loss() {
    let mut sys = SpinSystem::chain(3, 0.4, 0.6, 0.2, 0.0);
    sys.detunings = vec![0.1, -0.3, 0.25];
    let model = build_spin_model(&sys, None).unwrap();
    assert_eq!(model.basis.dims(), &[1, 3, 3, 1]);
    assert_verified(&model);
}

#[test]
fn xy_chain_with_dephasing() {
    let mut sys = SpinSystem::chain(3, 0.4, 0.6, 0.2, 0.1);
    sys.detunings = vec![0.1, -0.3, 0.25];
    let model = build_spin_model(&sys, None).unwrap();
    assert!(model.has_dephasing());
    assert_verified(&model);
}

#[test]
fn spins_coupled_to_oscillator() {
    let mut sys = SpinSystem::chain(2, 0.3, 0.5, 0.2, 0.0);
    sys.detunings = vec![0.2, -0.15];
    let osc = Oscillator {
        couplings: vec![1.0, 0.6],
        kappa: 0.5,
        cutoff: 3,
    };
    let model = build_spin_model(&sys, Some(&osc)).unwrap();
    assert_eq!(model.basis.dims(), &[1, 3, 4, 4]);
    assert_verified(&model);
}
