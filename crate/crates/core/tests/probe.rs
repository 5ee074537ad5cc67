use filippov_lab::builtin;
use filippov_lab::integrator::{integrate, IntegratorConfig};
use filippov_lab::linalg::{norm, Matrix};
use filippov_lab::reduction::{
    check_uniqueness_condition, probe_directions, robustness_sweep, stability_probe, ProbeConfig,
    StabilityVerdict, UnstableBehavior,
};
use filippov_lab::system::ReducedSystem;

fn small() -> ProbeConfig {
    ProbeConfig {
        n_samples: 40,
        ..Default::default()
    }
}

#[test]
fn verdicts_are_reproducible_for_a_seed() {
    let rs = builtin::paper_4d();
    let a = stability_probe(&rs, &ProbeConfig { seed: 9, ..small() }).unwrap();
    let b = stability_probe(&rs, &ProbeConfig { seed: 9, ..small() }).unwrap();
    assert_eq!(a, b);
    let sweep_a = robustness_sweep(&rs, 5e-4, 3, &ProbeConfig { seed: 2, ..small() }).unwrap();
    let sweep_b = robustness_sweep(&rs, 5e-4, 3, &ProbeConfig { seed: 2, ..small() }).unwrap();
    assert_eq!(sweep_a, sweep_b);
}

#[test]
fn stable_evidence_bounds_the_sampled_orbits() {
    let rs = builtin::paper_4d();
    let cfg = small();
    let StabilityVerdict::StableEvidence { t, alpha, beta } = stability_probe(&rs, &cfg).unwrap()
    else {
        panic!("expected stable evidence");
    };
    assert!((beta * t - 2f64.ln()).abs() < 1e-12);
    let long = IntegratorConfig {
        t_max: 2.0 * t,
        r_converge: 1e-14,
        ..cfg.integrator.clone()
    };
    let sys = rs.to_system();
    for d in probe_directions(4, cfg.n_samples, cfg.seed) {
        let traj = integrate(&sys, &d, &long).unwrap();
        for (s, x, _) in traj.samples() {
            assert!(norm(x) <= alpha * 1.0001);
            if s >= t {
                assert!(norm(x) <= alpha * 0.5 * 1.0001);
            }
        }
    }
}

#[test]
fn sliding_instability_is_detected() {
    // unstable on the left; sliding pushes x2 outwards at a rate near 2
    let a = Matrix::from_rows(&[vec![0.1, 1.0], vec![-1.0, 2.0]]).unwrap();
    let rs = ReducedSystem::new(a, vec![-1.0, 0.0]).unwrap();
    match stability_probe(&rs, &small()).unwrap() {
        StabilityVerdict::UnstableEvidence { witness, behavior } => {
            assert_eq!(behavior, UnstableBehavior::Escaped);
            assert!((norm(&witness) - 1.0).abs() < 1e-12);
        }
        v => panic!("unexpected verdict {v:?}"),
    }
}

#[test]
fn stable_linear_reduction() {
    let a = Matrix::from_rows(&[
        vec![-1.0, 1.0, 0.0],
        vec![-1.0, -1.0, 0.0],
        vec![0.0, 0.0, -1.0],
    ])
    .unwrap();
    let rs = ReducedSystem::new(a, vec![-1.0, 0.5, 0.2]).unwrap();
    assert!(stability_probe(&rs, &small()).unwrap().is_stable());
    assert!(check_uniqueness_condition(&rs.to_system(), 9, 1.0).unwrap().holds);
}

#[test]
fn sweep_keeps_the_sign_of_c1() {
    let rs = builtin::paper_4d();
    let report = robustness_sweep(&rs, 0.5, 10, &small()).unwrap();
    assert_eq!(report.trials.len(), 10);
    assert!(report.trials.iter().all(|t| t.c1 < 0.0 && (t.c1 + 1.0).abs() <= 0.5));
    let json = report.to_json();
    assert_eq!(json["trials"].as_array().unwrap().len(), 10);
    assert!(json["stable_fraction"].as_f64().unwrap() <= 1.0);
}
