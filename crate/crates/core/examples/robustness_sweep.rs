//! Perturbs the constant right field of the 4d system and reruns the
//! stability probe for each draw.

use filippov_lab::builtin;
use filippov_lab::reduction::{robustness_sweep, ProbeConfig};

fn main() -> anyhow::Result<()> {
    let rs = builtin::paper_4d();
    let cfg = ProbeConfig {
        n_samples: 40,
        seed: 7,
        ..Default::default()
    };
    let report = robustness_sweep(&rs, 1e-3, 8, &cfg)?;
    println!("base: {}", report.base_verdict.kind());
    for t in &report.trials {
        println!("trial {:2}: c1 = {:+.6}  {}", t.index, t.c1, t.verdict.kind());
    }
    println!("stable fraction: {}", report.stable_fraction);
    Ok(())
}
