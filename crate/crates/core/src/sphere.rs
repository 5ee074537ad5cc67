//! One-dimensional return map of a four-dimensional reduced system on the
//! projected tangency section.
//!
//! Orbits of the reduced system slide on `{x1 = 0, x2 > 0}` until they reach
//! `x2 = 0` with `x3 < 0`, leave into `x1 < 0` and come back to the sliding
//! region. Projected to the unit sphere the departure points form the curve
//! `ζ(θ) = (0, 0, cos θ, sin θ)`, `θ ∈ (π/2, 3π/2)`. Since the system is
//! homogeneous, one excursion is summarised by the next angle `G(θ)`, the
//! flight time `T(θ)` and the change in norm `D(θ)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::export::fmt_f64;
use crate::integrator::{integrate_until, EventKind, IntegrationError, IntegratorConfig, Trajectory};
use crate::linalg::norm;
use crate::parallel::par_map;
use crate::system::{PiecewiseSystem, ReducedSystem};

/// Fixed points are refined until `|G(θ) − θ|` drops below this.
pub const FIXED_POINT_TOL: f64 = 1e-9;
/// Refined roots closer than this are merged.
pub const FIXED_POINT_MERGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphereError {
    #[error("theta = {theta} lies outside the section interval ({lo}, {hi})")]
    OutOfInterval { theta: f64, lo: f64, hi: f64 },
    #[error("the section is defined for four-dimensional systems, got dimension {0}")]
    Dimension(usize),
    #[error("trajectory passes through the origin at t = {0}")]
    ZeroState(f64),
    #[error("no return to the section from theta = {theta}: {kind} at t = {time}")]
    NoReturn {
        theta: f64,
        kind: &'static str,
        time: f64,
    },
    #[error("two-fold point reached at t = {0}")]
    TwoFold(f64),
    #[error("invalid section configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionConfig {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub transient: usize,
    pub n_iterates: usize,
    /// Step of the central difference used for `G′`.
    pub fd_theta: f64,
    pub integrator: IntegratorConfig,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            theta_lo: PI / 2.0,
            theta_hi: 3.0 * PI / 2.0,
            transient: 100,
            n_iterates: 10_000,
            fd_theta: 1e-6,
            integrator: IntegratorConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-12,
                event_tol: 1e-13,
                max_step: 0.1,
                t_max: 1e3,
                r_escape: 1e6,
                r_converge: 1e-9,
                ..Default::default()
            },
        }
    }
}

impl SectionConfig {
    pub fn validate(&self) -> Result<(), SphereError> {
        if !(self.theta_lo < self.theta_hi) {
            return Err(SphereError::InvalidConfig(format!(
                "theta_lo = {} must be below theta_hi = {}",
                self.theta_lo, self.theta_hi
            )));
        }
        if self.n_iterates == 0 {
            return Err(SphereError::InvalidConfig("n_iterates must be >= 1".into()));
        }
        if !(self.fd_theta > 0.0) {
            return Err(SphereError::InvalidConfig("fd_theta must be positive".into()));
        }
        self.integrator.validate()?;
        Ok(())
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta > self.theta_lo && theta < self.theta_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub theta_in: f64,
    pub theta_out: f64,
    pub flight_time: f64,
    pub radial_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub theta: f64,
    #[serde(rename = "D")]
    pub radial_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitStatistics {
    pub theta0: f64,
    pub transient: usize,
    pub n_iterates: usize,
    /// Post-transient iterates `θ_k`.
    pub thetas: Vec<f64>,
    /// `D(θ_k)` for the same iterates.
    pub radial_factors: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub lyapunov: f64,
    pub mean_d_arith: f64,
    pub mean_d_geom: f64,
    /// False when an excursion failed; the statistics then cover only the
    /// iterates computed before the failure.
    pub valid: bool,
    pub failure: Option<String>,
}

/// Projects each sample of `traj` onto the unit sphere.
pub fn project_to_sphere(traj: &Trajectory) -> Result<Vec<(f64, Vec<f64>)>, SphereError> {
    traj.samples()
        .map(|(t, x, _)| {
            let r = norm(x);
            if r == 0.0 {
                Err(SphereError::ZeroState(t))
            } else {
                Ok((t, x.iter().map(|v| v / r).collect()))
            }
        })
        .collect()
}

/// `ζ(θ) = (0, 0, cos θ, sin θ)`.
pub fn section_point(theta: f64, cfg: &SectionConfig) -> Result<Vec<f64>, SphereError> {
    if !cfg.contains(theta) {
        return Err(SphereError::OutOfInterval {
            theta,
            lo: cfg.theta_lo,
            hi: cfg.theta_hi,
        });
    }
    Ok(vec![0.0, 0.0, theta.cos(), theta.sin()])
}

/// Section angle of a point on the tangency surface, in `(π/2, 3π/2)` when
/// `x3 < 0`.
pub fn section_angle(x: &[f64]) -> f64 {
    let a = x[3].atan2(x[2]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// One excursion from `x0` to the next departure from the sliding region
/// through `x2 = 0` with `x3 < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Excursion {
    pub time: f64,
    pub arrival: Vec<f64>,
    pub trajectory: Trajectory,
}

pub fn excursion(
    system: &PiecewiseSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Excursion, SphereError> {
    if system.dimension() != 4 {
        return Err(SphereError::Dimension(system.dimension()));
    }
    let traj = integrate_until(system, x0, cfg, |ev| {
        ev.kind == EventKind::SlidingExitLeft && ev.state[2] < 0.0
    })?;
    let ev = &traj.final_event;
    match ev.kind {
        EventKind::SlidingExitLeft => Ok(Excursion {
            time: ev.time,
            arrival: ev.state.clone(),
            trajectory: traj,
        }),
        EventKind::TwoFoldReached => Err(SphereError::TwoFold(ev.time)),
        other => Err(SphereError::NoReturn {
            theta: section_angle(x0),
            kind: other.name(),
            time: ev.time,
        }),
    }
}

/// `(G(θ), T(θ), D(θ))`.
pub fn return_map(
    rs: &ReducedSystem,
    theta: f64,
    cfg: &SectionConfig,
) -> Result<ReturnSample, SphereError> {
    return_map_with(&rs.to_system(), theta, cfg)
}

fn return_map_with(
    system: &PiecewiseSystem,
    theta: f64,
    cfg: &SectionConfig,
) -> Result<ReturnSample, SphereError> {
    let x0 = section_point(theta, cfg)?;
    let ex = excursion(system, &x0, &cfg.integrator)?;
    Ok(ReturnSample {
        theta_in: theta,
        theta_out: section_angle(&ex.arrival),
        flight_time: ex.time,
        radial_factor: norm(&ex.arrival),
    })
}

/// Iterates `θ_{k+1} = G(θ_k)` and collects the Lyapunov exponent and the
/// mean radial factors over the post-transient part of the orbit.
pub fn iterate_return_map(
    rs: &ReducedSystem,
    theta0: f64,
    cfg: &SectionConfig,
) -> Result<OrbitStatistics, SphereError> {
    cfg.validate()?;
    section_point(theta0, cfg)?;
    let system = rs.to_system();

    let total = cfg.transient + cfg.n_iterates;
    let mut thetas = Vec::with_capacity(cfg.n_iterates);
    let mut ds = Vec::with_capacity(cfg.n_iterates);
    let mut failure = None;
    let mut theta = theta0;
    for k in 0..total {
        match return_map_with(&system, theta, cfg) {
            Ok(s) => {
                if k >= cfg.transient {
                    thetas.push(theta);
                    ds.push(s.radial_factor);
                }
                theta = s.theta_out;
            }
            Err(e) => {
                failure = Some(format!("iterate {k}: {e}"));
                break;
            }
        }
    }

    let h = cfg.fd_theta;
    let derivatives: Vec<Result<f64, SphereError>> = par_map(&thetas, |&th| {
        let plus = return_map_with(&system, th + h, cfg)?.theta_out;
        let minus = return_map_with(&system, th - h, cfg)?.theta_out;
        Ok((plus - minus) / (2.0 * h))
    });
    let mut slopes = Vec::with_capacity(derivatives.len());
    for (k, d) in derivatives.into_iter().enumerate() {
        match d {
            Ok(v) => slopes.push(v),
            Err(e) => {
                failure.get_or_insert_with(|| format!("derivative at iterate {k}: {e}"));
                break;
            }
        }
    }
    let m = slopes.len();

    let mean = |v: &mut dyn Iterator<Item = f64>, count: usize| {
        if count == 0 {
            f64::NAN
        } else {
            v.sum::<f64>() / count as f64
        }
    };
    let lyapunov = mean(&mut slopes.iter().map(|g| g.abs().ln()), m);
    let mean_d_arith = mean(&mut ds.iter().copied(), ds.len());
    let mean_d_geom = mean(&mut ds.iter().map(|d| d.ln()), ds.len()).exp();
    Ok(OrbitStatistics {
        theta0,
        transient: cfg.transient,
        n_iterates: cfg.n_iterates,
        valid: failure.is_none(),
        failure,
        thetas,
        radial_factors: ds,
        derivatives: slopes,
        lyapunov,
        mean_d_arith,
        mean_d_geom,
    })
}

/// Grid `θ_i = lo + (i + 1)(hi − lo)/(n + 1)`, `i = 0..n`, strictly inside
/// the section interval.
pub fn section_grid(cfg: &SectionConfig, n: usize) -> Vec<f64> {
    let w = (cfg.theta_hi - cfg.theta_lo) / (n as f64 + 1.0);
    (0..n).map(|i| cfg.theta_lo + (i as f64 + 1.0) * w).collect()
}

/// Evaluates the return map at every grid angle.
pub fn scan_return_map(
    rs: &ReducedSystem,
    thetas: &[f64],
    cfg: &SectionConfig,
) -> Vec<Result<ReturnSample, SphereError>> {
    let system = rs.to_system();
    par_map(thetas, |&th| return_map_with(&system, th, cfg))
}

/// Roots of `G(θ) − θ` from the sign changes on a grid of `grid_n` points,
/// refined by bisection. Sign changes across jumps of `G` are discarded.
pub fn find_fixed_points(
    rs: &ReducedSystem,
    cfg: &SectionConfig,
    grid_n: usize,
) -> Result<Vec<FixedPoint>, SphereError> {
    cfg.validate()?;
    if grid_n < 2 {
        return Err(SphereError::InvalidConfig("grid_n must be >= 2".into()));
    }
    let system = rs.to_system();
    let grid = section_grid(cfg, grid_n);
    let h: Vec<Option<f64>> = par_map(&grid, |&th| {
        return_map_with(&system, th, cfg).ok().map(|s| s.theta_out - th)
    });
    let brackets: Vec<(f64, f64, f64)> = (0..grid_n - 1)
        .filter_map(|i| match (h[i], h[i + 1]) {
            (Some(a), Some(b)) if a == 0.0 || a * b < 0.0 => Some((grid[i], grid[i + 1], a)),
            _ => None,
        })
        .collect();
    let refined = par_map(&brackets, |&(lo, hi, h_lo)| refine_fixed_point(&system, cfg, lo, hi, h_lo));

    let mut out: Vec<FixedPoint> = Vec::new();
    for fp in refined.into_iter().flatten() {
        match out.last() {
            Some(last) if (fp.theta - last.theta).abs() < FIXED_POINT_MERGE => {}
            _ => out.push(fp),
        }
    }
    Ok(out)
}

fn refine_fixed_point(
    system: &PiecewiseSystem,
    cfg: &SectionConfig,
    mut lo: f64,
    mut hi: f64,
    mut h_lo: f64,
) -> Option<FixedPoint> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = return_map_with(system, mid, cfg).ok()?;
        let h_mid = s.theta_out - mid;
        if h_mid.abs() < FIXED_POINT_TOL {
            return Some(FixedPoint {
                theta: mid,
                radial_factor: s.radial_factor,
            });
        }
        if mid <= lo || mid >= hi {
            return None;
        }
        if (h_mid < 0.0) == (h_lo < 0.0) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// Number of interior local extrema of a sampled function: consecutive
/// differences below `noise_floor` in magnitude are ignored and direction
/// changes between the remaining monotone runs are counted.
pub fn count_local_extrema(values: &[f64], noise_floor: f64) -> usize {
    let mut last_sign = 0.0;
    let mut count = 0;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= noise_floor {
            continue;
        }
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign {
            count += 1;
        }
        last_sign = s;
    }
    count
}

/// Columns `theta_in, theta_out, T, D, status`; failed evaluations leave the
/// numeric columns empty and report the error in `status`.
pub fn write_return_map_csv<W: Write>(
    thetas: &[f64],
    samples: &[Result<ReturnSample, SphereError>],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "theta_in,theta_out,T,D,status")?;
    for (th, s) in thetas.iter().zip(samples) {
        match s {
            Ok(s) => writeln!(
                out,
                "{},{},{},{},ok",
                fmt_f64(s.theta_in),
                fmt_f64(s.theta_out),
                fmt_f64(s.flight_time),
                fmt_f64(s.radial_factor)
            )?,
            Err(e) => writeln!(out, "{},,,,\"{}\"", fmt_f64(*th), e.to_string().replace('"', "'"))?,
        }
    }
    Ok(())
}

/// Columns `k, theta, D`, with `k` counted from the end of the transient.
pub fn write_orbit_csv<W: Write>(stats: &OrbitStatistics, mut out: W) -> io::Result<()> {
    writeln!(out, "k,theta,D")?;
    for (k, (th, d)) in stats.thetas.iter().zip(&stats.radial_factors).enumerate() {
        writeln!(out, "{k},{},{}", fmt_f64(*th), fmt_f64(*d))?;
    }
    Ok(())
}

pub fn statistics_json(stats: &OrbitStatistics, fixed_points: &[FixedPoint]) -> serde_json::Value {
    serde_json::json!({
        "lyapunov": stats.lyapunov,
        "mean_D_arith": stats.mean_d_arith,
        "mean_D_geom": stats.mean_d_geom,
        "n_iterates": stats.n_iterates,
        "transient": stats.transient,
        "theta0": stats.theta0,
        "valid": stats.valid,
        "failure": stats.failure,
        "fixed_points": fixed_points,
    })
}
