//! Slowing the right piece by `1/γ` only reparameterizes time: the orbit
//! read on the clock `p(t)` matches the orbit of the scaled system.

use filippov_lab::builtin;
use filippov_lab::integrator::{verify_time_scaling, IntegratorConfig};

fn main() -> anyhow::Result<()> {
    let system = builtin::paper_4d().to_system();
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-12,
        max_step: 0.01,
        t_max: 20.0,
        ..Default::default()
    };
    for gamma in [0.25, 0.5, 0.9] {
        let r = verify_time_scaling(&system, &[0.0, 1.0, 0.0, 0.0], gamma, &cfg)?;
        let (t, s) = r.end();
        println!(
            "gamma = {gamma}: p({t:.2}) = {s:.3}, max deviation = {:.2e}",
            r.max_deviation.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
