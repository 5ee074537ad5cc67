//! The planar system whose full dynamics are stable while its reduced
//! system has a vanishing normal component, so the reduction says nothing.

use filippov_lab::builtin::{self, DEFAULT_NU};
use filippov_lab::reduction::{
    linearize_at_origin, probe_system, stability_probe, ProbeConfig, DEFAULT_FD_STEP,
};

fn main() -> anyhow::Result<()> {
    let full = builtin::paper_planar_c10(DEFAULT_NU);
    let reduced = linearize_at_origin(&full, DEFAULT_FD_STEP)?;
    println!("A = {:?}", reduced.a().to_rows());
    println!("c = {:?}", reduced.c());

    let cfg = ProbeConfig {
        radius: 0.01,
        ..Default::default()
    };
    let full_verdict = probe_system(&full, &cfg)?;
    let reduced_verdict = stability_probe(&reduced, &ProbeConfig::default())?;
    println!("full:    {}", serde_json::to_string(&full_verdict)?);
    println!("reduced: {}", serde_json::to_string(&reduced_verdict)?);
    Ok(())
}
