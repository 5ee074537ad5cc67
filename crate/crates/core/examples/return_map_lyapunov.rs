//! Return map on the half circle `(0, 0, cos θ, sin θ)`: fixed points,
//! a long orbit, and its Lyapunov exponent.

use filippov_lab::builtin;
use filippov_lab::sphere::{find_fixed_points, iterate_return_map, return_map, SectionConfig};

fn main() -> anyhow::Result<()> {
    let rs = builtin::paper_4d();
    let cfg = SectionConfig {
        n_iterates: 2000,
        ..Default::default()
    };

    let g = return_map(&rs, std::f64::consts::PI, &cfg)?;
    println!(
        "G(pi) = {:.6}, T = {:.4}, D = {:.4}",
        g.theta_out, g.flight_time, g.radial_factor
    );

    for fp in find_fixed_points(&rs, &cfg, 400)? {
        println!("fixed point theta = {:.6}, D = {:.4}", fp.theta, fp.radial_factor);
    }

    let stats = iterate_return_map(&rs, 2.5, &cfg)?;
    println!(
        "{} iterates: lyapunov = {:.4}, mean D = {:.4} (arith), {:.4} (geom)",
        stats.n_iterates, stats.lyapunov, stats.mean_d_arith, stats.mean_d_geom
    );
    Ok(())
}
