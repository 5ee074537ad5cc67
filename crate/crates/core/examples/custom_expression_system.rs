//! Builds a nonlinear system from a JSON config, reduces it at the origin
//! and checks the uniqueness condition on the surface.

use filippov_lab::config::SystemConfig;
use filippov_lab::reduction::{check_uniqueness_condition, linearize_at_origin, DEFAULT_FD_STEP};

const CONFIG: &str = r#"{
  "dimension": 3,
  "left": {"expressions": [
    "-x1 + x2 + x1^2",
    "-x1 - x2 + sin(x3)",
    "-x3 + x1*x2"
  ]},
  "right": {"expressions": ["-1 + x2^2", "0.5", "0.2*cos(x1)"]}
}"#;

fn main() -> anyhow::Result<()> {
    let config = SystemConfig::from_json(CONFIG)?;
    println!("digest {}", config.digest());
    let def = config.resolve()?;

    let rs = linearize_at_origin(&def.system, DEFAULT_FD_STEP)?;
    for row in rs.a().to_rows() {
        println!("A  {:+.6?}", row);
    }
    println!("c  {:+.6?}", rs.c());

    let check = check_uniqueness_condition(&def.system, 5, 0.5)?;
    println!("uniqueness holds on the grid: {}", check.holds);

    println!("{}", config.expanded()?.to_json_pretty());
    Ok(())
}
