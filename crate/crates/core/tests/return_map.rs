mod common;

use std::f64::consts::PI;

use filippov_lab::builtin;
use filippov_lab::integrator::{integrate_until, EventKind};
use filippov_lab::linalg::norm;
use filippov_lab::sphere::{
    excursion, find_fixed_points, iterate_return_map, project_to_sphere, return_map,
    scan_return_map, section_angle, section_grid, section_point, SectionConfig,
};

fn cfg() -> SectionConfig {
    SectionConfig::default()
}

#[test]
fn matches_reference_values() {
    let rs = builtin::paper_4d();
    for (theta, g, t, d) in [common::RETURN_PI, common::RETURN_2_5] {
        let s = return_map(&rs, theta, &cfg()).unwrap();
        assert!((s.theta_out - g).abs() < 1e-8, "G({theta}) = {}", s.theta_out);
        assert!((s.flight_time - t).abs() < 1e-8 * t, "T({theta}) = {}", s.flight_time);
        assert!((s.radial_factor - d).abs() < 1e-8 * d, "D({theta}) = {}", s.radial_factor);
    }
}

#[test]
fn fixed_points_match_reference() {
    let fps = find_fixed_points(&builtin::paper_4d(), &cfg(), 400).unwrap();
    assert_eq!(fps.len(), 3);
    for (fp, (theta, d)) in fps.iter().zip(common::FIXED_POINTS) {
        assert!((fp.theta - theta).abs() < 1e-7, "{} vs {theta}", fp.theta);
        assert!((fp.radial_factor - d).abs() < 1e-6, "{} vs {d}", fp.radial_factor);
    }
}

#[test]
fn returned_angles_feed_back_consistently() {
    let rs = builtin::paper_4d();
    for theta in [2.0, 2.9, PI, 3.3, 4.2] {
        let first = return_map(&rs, theta, &cfg()).unwrap();
        let second = return_map(&rs, first.theta_out, &cfg()).unwrap();
        // continue the unprojected orbit through a second excursion
        let x0 = section_point(theta, &cfg()).unwrap();
        let mut exits = 0;
        let traj = integrate_until(&rs.to_system(), &x0, &cfg().integrator, |ev| {
            if ev.kind == EventKind::SlidingExitLeft && ev.state[2] < 0.0 {
                exits += 1;
            }
            exits == 2
        })
        .unwrap();
        let direct = section_angle(&traj.final_event.state);
        assert!((direct - second.theta_out).abs() < 1e-6, "theta = {theta}");
        let ratio = norm(&traj.final_event.state) / (first.radial_factor * second.radial_factor);
        assert!((ratio - 1.0).abs() < 1e-6);
    }
}

#[test]
fn excursions_are_homogeneous() {
    let sys = builtin::paper_4d().to_system();
    for theta in [2.2, PI, 3.9] {
        let z = section_point(theta, &cfg()).unwrap();
        let base = excursion(&sys, &z, &cfg().integrator).unwrap();
        for sigma in [0.5, 2.0] {
            let start: Vec<f64> = z.iter().map(|v| sigma * v).collect();
            let ex = excursion(&sys, &start, &cfg().integrator).unwrap();
            let rel = (norm(&ex.arrival) / (sigma * norm(&base.arrival)) - 1.0).abs();
            assert!(rel < 1e-5, "theta {theta}, sigma {sigma}: {rel}");
            let dtheta = (section_angle(&ex.arrival) - section_angle(&base.arrival)).abs();
            assert!(dtheta < 1e-6);
        }
    }
}

#[test]
fn radial_factors_are_positive_across_the_section() {
    let c = cfg();
    let thetas = section_grid(&c, 200);
    for (theta, r) in thetas.iter().zip(scan_return_map(&builtin::paper_4d(), &thetas, &c)) {
        let s = r.unwrap_or_else(|e| panic!("theta {theta}: {e}"));
        assert!(s.radial_factor > 0.0 && s.flight_time > 0.0);
        assert!(c.contains(s.theta_out));
    }
}

#[test]
fn orbit_from_the_stable_fixed_point_stays_put() {
    let (theta, d) = common::FIXED_POINTS[2];
    let c = SectionConfig {
        transient: 0,
        n_iterates: 20,
        ..cfg()
    };
    let stats = iterate_return_map(&builtin::paper_4d(), theta, &c).unwrap();
    assert!(stats.valid);
    assert!(stats.thetas.iter().all(|t| (t - theta).abs() < 1e-7));
    assert!((stats.mean_d_arith - d).abs() < 1e-6);
    assert!((stats.mean_d_geom - d).abs() < 1e-6);
    assert!(stats.lyapunov < 0.0);
}

#[test]
fn excursion_norms_are_products_of_radial_factors() {
    let rs = builtin::paper_4d();
    let c = SectionConfig {
        transient: 0,
        n_iterates: 30,
        ..cfg()
    };
    let theta0 = 2.5;
    let stats = iterate_return_map(&rs, theta0, &c).unwrap();
    assert!(stats.mean_d_geom < 1.0);

    let x0 = section_point(theta0, &c).unwrap();
    let mut norms = Vec::new();
    integrate_until(&rs.to_system(), &x0, &c.integrator, |ev| {
        if ev.kind == EventKind::SlidingExitLeft && ev.state[2] < 0.0 {
            norms.push(norm(&ev.state));
        }
        norms.len() == 30
    })
    .unwrap();
    let mut product = 1.0;
    for (k, r) in norms.iter().enumerate().take(10) {
        product *= stats.radial_factors[k];
        assert!((r / product - 1.0).abs() < 1e-6, "excursion {k}");
    }
    assert!(norms[29] < 1.0);
}

#[test]
fn projected_orbit_returns_to_the_section_curve() {
    let sys = builtin::paper_4d().to_system();
    let z = section_point(2.8, &cfg()).unwrap();
    let ex = excursion(&sys, &z, &cfg().integrator).unwrap();
    let projected = project_to_sphere(&ex.trajectory).unwrap();
    let (_, last) = projected.last().unwrap();
    assert!(last[0].abs() < 1e-12 && last[1].abs() < 1e-9 && last[2] < 0.0);
    assert!((norm(last) - 1.0).abs() < 1e-12);
}
