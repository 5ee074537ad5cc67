//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 the simulated
//! orbit escaped, 3 it stopped at a two-fold or repelling point.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{RunManifest, SystemConfig, SystemDefinition};
use crate::integrator::export::{fmt_f64, write_events_csv, write_trajectory_csv};
use crate::integrator::{integrate, verify_time_scaling, EventKind, IntegratorConfig};
use crate::reduction::{
    check_uniqueness_condition, linearize_at_origin, probe_system, robustness_sweep,
    stability_probe, ProbeConfig, DEFAULT_FD_STEP,
};
use crate::sphere::{
    find_fixed_points, iterate_return_map, scan_return_map, section_grid, statistics_json,
    write_orbit_csv, write_return_map_csv, SectionConfig,
};
use crate::system::ReducedSystem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ESCAPED: i32 = 2;
pub const EXIT_STOPPED: i32 = 3;

/// Sampling radius for probes of systems that are not in reduced form,
/// small enough that higher-order terms stay minor.
pub const FULL_SYSTEM_RADIUS: f64 = 0.01;

/// Starting angle of the return-map orbit unless the config overrides it.
pub const DEFAULT_THETA0: f64 = 2.5;

#[derive(Debug, Parser)]
#[command(name = "filippov-lab", version, about = "Filippov system simulation and stability analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one Filippov solution and write trajectory.csv / events.csv.
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        /// Initial state, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
    },
    /// Simulation-based stability verdicts for the system and its reduction.
    Probe {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 200.0)]
        t_max: f64,
    },
    /// Return map on the projected tangency section of a 4-d reduced system.
    ReturnMap {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        iterates: usize,
        #[arg(long, default_value_t = 100)]
        transient: usize,
    },
    /// Check the discontinuous time reparameterization against the scaled system.
    VerifyScaling {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
    },
    /// Probe random perturbations of the reduced system.
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// JSON system definition.
    #[arg(long, conflicts_with = "builtin")]
    pub config: Option<PathBuf>,
    /// paper-4d, paper-planar-c10 or paper-planar-c10-reduced.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Print the expanded system definition as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SystemArgs {
    fn load(&self) -> Result<SystemConfig> {
        match (&self.config, &self.builtin) {
            (Some(path), _) => Ok(SystemConfig::load(path)?),
            (None, Some(name)) => Ok(SystemConfig::builtin(name)),
            (None, None) => bail!("one of --config or --builtin is required"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

struct Session {
    command: &'static str,
    config: SystemConfig,
    def: SystemDefinition,
    out: PathBuf,
    seed: Option<u64>,
    outputs: Vec<String>,
    started: Instant,
}

impl Session {
    fn start(command: &'static str, args: &SystemArgs, seeded: bool) -> Result<Option<Self>> {
        let config = args.load()?;
        if args.dump_config {
            println!("{}", config.expanded()?.to_json_pretty());
            return Ok(None);
        }
        let def = config.resolve()?;
        fs::create_dir_all(&args.out)
            .with_context(|| format!("cannot create {}", args.out.display()))?;
        Ok(Some(Self {
            command,
            config,
            def,
            out: args.out.clone(),
            seed: seeded.then_some(args.seed),
            outputs: Vec::new(),
            started: Instant::now(),
        }))
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn reduced(&self) -> Result<ReducedSystem> {
        match &self.def.reduced {
            Some(r) => Ok(r.clone()),
            None => Ok(linearize_at_origin(&self.def.system, DEFAULT_FD_STEP)?),
        }
    }

    fn finish(self) -> Result<()> {
        RunManifest {
            command: self.command.to_string(),
            system: self.def.name.clone(),
            config_digest: self.config.digest(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
        .write(&self.out)
        .context("cannot write manifest.json")
    }
}

fn check_x0(x0: &[f64], n: usize) -> Result<()> {
    if x0.len() != n {
        bail!("--x0 needs {n} comma-separated values, got {}", x0.len());
    }
    Ok(())
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Simulate { system, x0, t_max } => simulate(&system, &x0, t_max),
        Command::Probe { system, t_max } => probe(&system, t_max),
        Command::ReturnMap {
            system,
            grid,
            iterates,
            transient,
        } => return_map(&system, grid, iterates, transient),
        Command::VerifyScaling {
            system,
            gamma,
            x0,
            t_max,
        } => verify_scaling(&system, gamma, &x0, t_max),
        Command::Sweep {
            system,
            delta,
            trials,
        } => sweep(&system, delta, trials),
    }
}

fn simulate(args: &SystemArgs, x0: &[f64], t_max: f64) -> Result<i32> {
    let Some(mut s) = Session::start("simulate", args, false)? else {
        return Ok(EXIT_OK);
    };
    check_x0(x0, s.def.system.dimension())?;
    let cfg = IntegratorConfig {
        t_max,
        ..Default::default()
    };
    let traj = integrate(&s.def.system, x0, &cfg)?;
    let mut w = s.create("trajectory.csv")?;
    write_trajectory_csv(&traj, &mut w)?;
    w.flush()?;
    let mut w = s.create("events.csv")?;
    write_events_csv(&traj, &mut w)?;
    w.flush()?;
    let ev = &traj.final_event;
    println!(
        "{} at t = {} after {} segments",
        ev.kind.name(),
        fmt_f64(ev.time),
        traj.segments.len()
    );
    s.finish()?;
    Ok(match ev.kind {
        EventKind::Escaped => EXIT_ESCAPED,
        EventKind::TwoFoldReached | EventKind::RepellingEncountered => EXIT_STOPPED,
        _ => EXIT_OK,
    })
}

fn probe(args: &SystemArgs, t_max: f64) -> Result<i32> {
    let Some(mut s) = Session::start("probe", args, true)? else {
        return Ok(EXIT_OK);
    };
    let cfg = ProbeConfig {
        t_max,
        seed: args.seed,
        ..Default::default()
    };
    let rs = s.reduced()?;
    let reduced = stability_probe(&rs, &cfg)?;
    let full = match s.def.reduced {
        Some(_) => None,
        None => Some(probe_system(
            &s.def.system,
            &ProbeConfig {
                radius: FULL_SYSTEM_RADIUS,
                ..cfg.clone()
            },
        )?),
    };
    let uniqueness = check_uniqueness_condition(&rs.to_system(), 9, 1.0)?;
    if let Some(v) = &full {
        println!("full system:    {}", v.kind());
    }
    println!("reduced system: {}", reduced.kind());
    let value = serde_json::json!({
        "system": s.def.name,
        "full": full,
        "reduced": reduced,
        "reduced_system": { "A": rs.a().to_rows(), "c": rs.c() },
        "uniqueness": uniqueness,
        "probe": cfg,
    });
    s.write_json("verdicts.json", &value)?;
    s.finish()?;
    Ok(EXIT_OK)
}

fn section_config(def: &SystemDefinition, iterates: usize, transient: usize) -> Result<(SectionConfig, f64)> {
    let mut cfg = SectionConfig {
        n_iterates: iterates,
        transient,
        ..Default::default()
    };
    let default = SectionConfig::default();
    let mut theta0 = DEFAULT_THETA0;
    if let Some(o) = def.section {
        cfg.theta_lo = o.theta_lo.unwrap_or(cfg.theta_lo);
        cfg.theta_hi = o.theta_hi.unwrap_or(cfg.theta_hi);
        theta0 = o.theta0.unwrap_or(theta0);
    }
    if cfg.theta_lo < default.theta_lo || cfg.theta_hi > default.theta_hi || cfg.theta_lo >= cfg.theta_hi {
        bail!(
            "section interval ({}, {}) must be a non-empty part of (pi/2, 3pi/2)",
            cfg.theta_lo,
            cfg.theta_hi
        );
    }
    cfg.validate()?;
    if !cfg.contains(theta0) {
        bail!("theta0 = {theta0} lies outside the section interval");
    }
    Ok((cfg, theta0))
}

fn return_map(args: &SystemArgs, grid: usize, iterates: usize, transient: usize) -> Result<i32> {
    let Some(mut s) = Session::start("return-map", args, false)? else {
        return Ok(EXIT_OK);
    };
    if grid < 2 {
        bail!("--grid must be at least 2");
    }
    let rs = s.reduced()?;
    if rs.dimension() != 4 {
        bail!("the return map needs a four-dimensional system, got {}", rs.dimension());
    }
    let (cfg, theta0) = section_config(&s.def, iterates, transient)?;

    let thetas = section_grid(&cfg, grid);
    let samples = scan_return_map(&rs, &thetas, &cfg);
    let returned = samples.iter().filter(|r| r.is_ok()).count();
    let mut w = s.create("return_map.csv")?;
    write_return_map_csv(&thetas, &samples, &mut w)?;
    w.flush()?;

    let fixed = find_fixed_points(&rs, &cfg, grid)?;
    let stats = iterate_return_map(&rs, theta0, &cfg)?;
    let mut w = s.create("orbit.csv")?;
    write_orbit_csv(&stats, &mut w)?;
    w.flush()?;
    s.write_json("statistics.json", &statistics_json(&stats, &fixed))?;

    println!("lyapunov      {:.6}", stats.lyapunov);
    println!("mean D arith  {:.6}", stats.mean_d_arith);
    println!("mean D geom   {:.6}", stats.mean_d_geom);
    println!("fixed points  {}", fixed.len());
    println!("returned      {returned}/{grid}");
    if let Some(f) = &stats.failure {
        eprintln!("orbit stopped early: {f}");
    }
    s.finish()?;
    if 10 * returned < 9 * grid {
        eprintln!("error: fewer than 90% of grid points returned to the section");
        return Ok(EXIT_INPUT);
    }
    Ok(EXIT_OK)
}

fn verify_scaling(args: &SystemArgs, gamma: f64, x0: &[f64], t_max: f64) -> Result<i32> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        bail!("--gamma must lie in (0, 1], got {gamma}");
    }
    let Some(mut s) = Session::start("verify-scaling", args, false)? else {
        return Ok(EXIT_OK);
    };
    check_x0(x0, s.def.system.dimension())?;
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-12,
        max_step: 0.01,
        t_max,
        ..Default::default()
    };
    let result = verify_time_scaling(&s.def.system, x0, gamma, &cfg)?;
    let deviation = result.max_deviation.unwrap_or(f64::INFINITY);
    let mut w = s.create("time_scaling.csv")?;
    writeln!(w, "t,p")?;
    for (t, p) in &result.p_samples {
        writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*p))?;
    }
    w.flush()?;
    println!("max deviation {deviation:.3e}");
    println!("gamma*t <= p(t) <= t and p increasing: ok");
    s.finish()?;
    Ok(if deviation < 1e-5 { EXIT_OK } else { EXIT_INPUT })
}

fn sweep(args: &SystemArgs, delta: f64, trials: usize) -> Result<i32> {
    let Some(mut s) = Session::start("sweep", args, true)? else {
        return Ok(EXIT_OK);
    };
    let cfg = ProbeConfig {
        seed: args.seed,
        ..Default::default()
    };
    let rs = s.reduced()?;
    let report = robustness_sweep(&rs, delta, trials, &cfg)?;
    println!("base verdict     {}", report.base_verdict.kind());
    println!("stable fraction  {}", report.stable_fraction);
    s.write_json("sweep.json", &report.to_json())?;
    s.finish()?;
    Ok(EXIT_OK)
}
