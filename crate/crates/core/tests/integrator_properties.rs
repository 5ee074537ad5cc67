mod common;

use filippov_lab::builtin;
use filippov_lab::integrator::{integrate, EventKind, IntegratorConfig, Mode, SegmentEnd};
use filippov_lab::linalg::{dot, norm, Matrix};
use filippov_lab::system::{PiecewiseSystem, ReducedSystem, Side, VectorFieldSpec};
use proptest::prelude::*;

fn config(t_max: f64) -> IntegratorConfig {
    IntegratorConfig {
        t_max,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transition_events_lie_on_the_surface(x0 in prop::collection::vec(-1.0f64..1.0, 4)) {
        let sys = builtin::paper_4d().to_system();
        let traj = integrate(&sys, &x0, &config(25.0)).unwrap();
        for ev in traj.events() {
            prop_assert!(ev.state[0].abs() <= 1e-12, "{:?}", ev);
        }
    }

    #[test]
    fn sliding_segments_stay_on_the_surface_with_admissible_weights(
        x0 in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let sys = builtin::paper_4d().to_system();
        let traj = integrate(&sys, &x0, &config(25.0)).unwrap();
        for (_, x, mode) in traj.samples() {
            if mode == Mode::Sliding {
                prop_assert_eq!(x[0], 0.0);
                let s = sys.sliding_data(x).unwrap();
                prop_assert!((0.0..=1.0).contains(&s.lambda));
                prop_assert_eq!(s.f_s[0], 0.0);
            }
        }
    }

    #[test]
    fn left_flow_matches_the_matrix_exponential(
        a in 0.2f64..2.0,
        rest in prop::collection::vec(-1.0f64..1.0, 6),
        tail in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        // x1' = -a x1 keeps x1 < 0, so the solution never reaches the surface
        let m = vec![
            vec![-a, 0.0, 0.0],
            vec![rest[0], rest[1] - 1.0, rest[2]],
            vec![rest[3], rest[4], rest[5] - 1.0],
        ];
        let sys = PiecewiseSystem::new(
            VectorFieldSpec::linear(Matrix::from_rows(&m).unwrap()),
            VectorFieldSpec::constant(vec![-1.0, 0.0, 0.0]),
        ).unwrap();
        let x0 = [-1.0, tail[0], tail[1]];
        let traj = integrate(&sys, &x0, &config(3.0)).unwrap();
        for (t, x, mode) in traj.samples() {
            prop_assert_eq!(mode, Mode::Left);
            let exact = common::mat_vec(&common::expm(&m, t), &x0);
            let err: Vec<f64> = x.iter().zip(&exact).map(|(p, q)| p - q).collect();
            prop_assert!(common::norm(&err) <= 1e-6 * common::norm(&exact));
        }
    }

    #[test]
    fn constant_right_flight_hits_at_the_exact_time(
        x1 in 0.1f64..3.0,
        c in prop::collection::vec(-2.0f64..2.0, 2),
        speed in 0.2f64..3.0,
    ) {
        let sys = ReducedSystem::new(Matrix::identity(3).scale(-1.0), vec![-speed, c[0], c[1]])
            .unwrap()
            .to_system();
        let x0 = [x1, 0.5, -0.5];
        let traj = integrate(&sys, &x0, &config(20.0)).unwrap();
        let SegmentEnd::Event(hit) = &traj.segments[0].terminal_event else {
            panic!("first segment has no end event");
        };
        let t_hit = x1 / speed;
        prop_assert!((hit.time - t_hit).abs() <= 1e-10);
        prop_assert!((hit.state[1] - (0.5 + c[0] * t_hit)).abs() <= 1e-9);
    }

    #[test]
    fn reduced_sliding_motion_follows_the_sliding_matrix(
        entries in prop::collection::vec(-2.0f64..2.0, 9),
        c in prop::collection::vec(-2.0f64..2.0, 2),
        c1 in 0.1f64..2.0,
        y in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let a = Matrix::from_row_major(3, 3, entries).unwrap();
        let rs = ReducedSystem::new(a, vec![-c1, c[0], c[1]]).unwrap();
        let x = [0.0, y[0], y[1]];
        let sys = rs.to_system();
        let fl1 = sys.eval_field(Side::Left, &x).unwrap()[0];
        prop_assume!(fl1 > 1e-3);
        let fs = sys.sliding_data(&x).unwrap().f_s;
        let cx = rs.reduced_sliding_matrix().unwrap().mul_vec(&x);
        prop_assert_eq!(cx[0], 0.0);
        // f_s is a positive multiple of C x
        let k = c1 / (fl1 + c1);
        for i in 0..3 {
            prop_assert!((fs[i] - k * cx[i]).abs() <= 1e-12 * (1.0 + norm(&cx)));
        }
        if norm(&cx) > 1e-9 {
            prop_assert!(dot(&fs, &cx) > 0.0);
        }
    }

    #[test]
    fn convex_combination_identity(
        y2 in 1e-6f64..2.0,
        y in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let sys = builtin::paper_4d().to_system();
        let x = [0.0, y2, y[0], y[1]];
        let s = sys.sliding_data(&x).unwrap();
        let fl = sys.eval_field(Side::Left, &x).unwrap();
        let fr = sys.eval_field(Side::Right, &x).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.lambda));
        prop_assert_eq!(s.f_s[0], 0.0);
        for i in 1..4 {
            prop_assert!((s.f_s[i] - ((1.0 - s.lambda) * fl[i] + s.lambda * fr[i])).abs() < 1e-13);
        }
    }
}

#[test]
fn integration_is_deterministic() {
    let sys = builtin::paper_4d().to_system();
    let a = integrate(&sys, &[0.3, -0.2, 0.5, 0.1], &config(40.0)).unwrap();
    let b = integrate(&sys, &[0.3, -0.2, 0.5, 0.1], &config(40.0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sliding_and_left_segments_alternate_on_the_attractor() {
    let sys = builtin::paper_4d().to_system();
    let traj = integrate(&sys, &[0.0, 1.0, 0.0, 0.0], &config(50.0)).unwrap();
    assert_eq!(traj.final_event.kind, EventKind::HorizonReached);
    let modes: Vec<Mode> = traj.segments.iter().map(|s| s.mode).collect();
    assert!(modes.len() > 10);
    for w in modes.windows(2) {
        assert_ne!(w[0], w[1]);
        assert!(w.iter().all(|m| *m != Mode::Right));
    }
}

#[test]
fn planar_counterexample_crosses_the_surface() {
    let sys = builtin::paper_planar_c10(0.2);
    let traj = integrate(&sys, &[-1.0, 0.0], &config(30.0)).unwrap();
    let modes: Vec<Mode> = traj.segments.iter().map(|s| s.mode).collect();
    assert!(modes.contains(&Mode::Left) && modes.contains(&Mode::Right));
    assert!(!modes.contains(&Mode::Sliding));
    let last = traj.final_event.state.clone();
    assert!(norm(&last) < 0.1);
}
