//! Integrates the four-dimensional reduced system from a point on the
//! left of the switching surface and prints the mode sequence and events.

use filippov_lab::builtin;
use filippov_lab::integrator::{integrate, IntegratorConfig};
use filippov_lab::linalg::norm;

fn main() -> anyhow::Result<()> {
    let system = builtin::paper_4d().to_system();
    let cfg = IntegratorConfig {
        t_max: 60.0,
        ..Default::default()
    };
    let traj = integrate(&system, &[-0.5, 0.2, 0.3, -0.4], &cfg)?;

    let modes: String = traj.segments.iter().map(|s| s.mode.code()).collect();
    println!("modes: {modes}");
    for e in traj.events().iter().take(12) {
        println!("t = {:9.4}  {:<22} x1 = {:+.1e}", e.time, e.kind.name(), e.state[0]);
    }
    println!(
        "stopped at t = {:.3} ({}), |x| = {:.3e}",
        traj.end_time(),
        traj.final_event.kind.name(),
        norm(&traj.final_event.state)
    );
    Ok(())
}
