//! Discontinuous time reparameterization.
//!
//! Scaling the right piece by `1/γ` changes Filippov solutions only by a
//! change of clock: if `φ` solves the original system then `φ(p⁻¹(s))`
//! solves the scaled one, where `p' = 1` on the left, `γ` on the right and
//! `(γ f^L_1 − f^R_1) / (f^L_1 − f^R_1)` while sliding.

use thiserror::Error;

use super::stepper::hermite;
use super::{integrate, FieldEval, IntegrationError, IntegratorConfig, Mode, Trajectory};
use crate::linalg::{distance, norm};
use crate::system::{PiecewiseSystem, ReducedSystem, SystemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeScalingError {
    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("sliding clock rate undefined at a two-fold point (t = {0})")]
    Degenerate(f64),
    #[error("clock bound violated at t = {t}: p = {p}, gamma = {gamma}")]
    BoundsViolated { t: f64, p: f64, gamma: f64 },
    #[error("clock is not strictly increasing at t = {0}")]
    NotMonotone(f64),
    #[error("inapplicable: {0}")]
    Inapplicable(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Sampled clock `p(t)` for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScalingResult {
    pub gamma: f64,
    pub p_samples: Vec<(f64, f64)>,
    /// Filled in by [`verify_time_scaling`].
    pub max_deviation: Option<f64>,
}

impl TimeScalingResult {
    /// `p(t)` by linear interpolation of the samples.
    pub fn p(&self, t: f64) -> f64 {
        interpolate(&self.p_samples, t, |s| s.0, |s| s.1)
    }

    /// `p⁻¹(s)` by linear interpolation of the inverted sample graph.
    pub fn inverse(&self, s: f64) -> f64 {
        interpolate(&self.p_samples, s, |q| q.1, |q| q.0)
    }

    pub fn end(&self) -> (f64, f64) {
        *self.p_samples.last().unwrap()
    }
}

fn interpolate(
    samples: &[(f64, f64)],
    at: f64,
    key: impl Fn(&(f64, f64)) -> f64,
    value: impl Fn(&(f64, f64)) -> f64,
) -> f64 {
    let i = samples.partition_point(|s| key(s) <= at);
    if i == 0 {
        return value(&samples[0]);
    }
    if i >= samples.len() {
        return value(samples.last().unwrap());
    }
    let (a, b) = (&samples[i - 1], &samples[i]);
    let w = (at - key(a)) / (key(b) - key(a));
    value(a) + w * (value(b) - value(a))
}

fn sliding_rate(eval: &mut FieldEval<'_>, gamma: f64, x: &[f64], t: f64) -> Result<f64, TimeScalingError> {
    let (fl1, fr1) = eval.normal_components(x)?;
    let denom = fl1 - fr1;
    if denom == 0.0 {
        return Err(TimeScalingError::Degenerate(t));
    }
    Ok((gamma * fl1 - fr1) / denom)
}

/// Computes `p(t) = ∫ a(φ(s)) ds` along `traj`, segment by segment.
pub fn reparameterize_time(
    system: &PiecewiseSystem,
    traj: &Trajectory,
    gamma: f64,
) -> Result<TimeScalingResult, TimeScalingError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(TimeScalingError::InvalidGamma(gamma));
    }
    let n = system.dimension();
    let mut eval = FieldEval::new(system);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut p = 0.0;
    let (mut f0, mut f1, mut mid) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    for seg in &traj.segments {
        if samples.is_empty() {
            samples.push((seg.times[0], 0.0));
        }
        for i in 1..seg.times.len() {
            let (t0, t1) = (seg.times[i - 1], seg.times[i]);
            let dt = t1 - t0;
            p += match seg.mode {
                Mode::Left => dt,
                Mode::Right => gamma * dt,
                Mode::Sliding => {
                    // Simpson's rule with the midpoint from the step interpolant
                    let (x0, x1) = (&seg.states[i - 1], &seg.states[i]);
                    eval.mode_field(Mode::Sliding, x0, &mut f0)?;
                    eval.mode_field(Mode::Sliding, x1, &mut f1)?;
                    hermite(x0, &f0, x1, &f1, dt, 0.5, &mut mid);
                    mid[0] = 0.0;
                    let a0 = sliding_rate(&mut eval, gamma, x0, t0)?;
                    let am = sliding_rate(&mut eval, gamma, &mid, t0 + 0.5 * dt)?;
                    let a1 = sliding_rate(&mut eval, gamma, x1, t1)?;
                    dt * (a0 + 4.0 * am + a1) / 6.0
                }
            };
            samples.push((t1, p));
        }
    }

    let slack = |t: f64| 1e-12 * (1.0 + t.abs());
    for w in samples.windows(2) {
        if !(w[1].1 > w[0].1) {
            return Err(TimeScalingError::NotMonotone(w[1].0));
        }
    }
    for &(t, pt) in &samples {
        if pt < gamma * t - slack(t) || pt > t + slack(t) {
            return Err(TimeScalingError::BoundsViolated { t, p: pt, gamma });
        }
    }
    Ok(TimeScalingResult {
        gamma,
        p_samples: samples,
        max_deviation: None,
    })
}

/// Returns a surface point inside the ball of `radius` where `f^R_1 >= 0`,
/// scanning a grid with `n_grid` points per axis.
pub(crate) fn right_normal_violation(
    system: &PiecewiseSystem,
    n_grid: usize,
    radius: f64,
) -> Result<Option<Vec<f64>>, SystemError> {
    let mut found = None;
    crate::reduction::for_each_surface_grid_point(system.dimension(), n_grid, radius, |x| {
        if found.is_some() {
            return Ok(());
        }
        let fr = system.eval_field(crate::system::Side::Right, x)?;
        if fr[0] >= -crate::system::sign_threshold(x) {
            found = Some(x.to_vec());
        }
        Ok(())
    })?;
    Ok(found)
}

/// Checks numerically that `φ(p⁻¹(s))` matches the directly integrated
/// solution of the system whose right piece is scaled by `1/γ`.
pub fn verify_time_scaling(
    system: &PiecewiseSystem,
    x0: &[f64],
    gamma: f64,
    cfg: &IntegratorConfig,
) -> Result<TimeScalingResult, TimeScalingError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(TimeScalingError::InvalidGamma(gamma));
    }
    let radius = 2.0 * (1.0 + norm(x0));
    if let Some(w) = right_normal_violation(system, 9, radius)? {
        return Err(TimeScalingError::Inapplicable(format!(
            "f^R_1 >= 0 at surface point {w:?}"
        )));
    }
    let phi = integrate(system, x0, cfg)?;
    let scaled = system.with_right_scaled(1.0 / gamma);
    let psi = integrate(&scaled, x0, cfg)?;
    let mut result = reparameterize_time(system, &phi, gamma)?;

    let horizon = result.end().1.min(psi.end_time());
    let mut deviation: f64 = 0.0;
    for (t, x, _) in phi.samples() {
        let s = result.p(t);
        if s > horizon {
            break;
        }
        let y = psi.state_at(&scaled, s)?;
        deviation = deviation.max(distance(x, &y));
    }
    result.max_deviation = Some(deviation);
    Ok(result)
}

/// Homogeneity check for a reduced system: the solution from `γ z`, shrunk
/// by `1/γ`, should equal the solution from `z` read on the clock `p`.
/// Returns the largest deviation over the common horizon.
pub fn scale_covariance_deviation(
    rs: &ReducedSystem,
    z: &[f64],
    gamma: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, TimeScalingError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(TimeScalingError::InvalidGamma(gamma));
    }
    let system = rs.to_system();
    let phi = integrate(&system, z, cfg)?;
    let start: Vec<f64> = z.iter().map(|v| gamma * v).collect();
    let psi = integrate(&system, &start, cfg)?;
    let clock = reparameterize_time(&system, &phi, gamma)?;
    let horizon = clock.end().1.min(psi.end_time());
    let mut deviation: f64 = 0.0;
    for (t, x, _) in phi.samples() {
        let s = clock.p(t);
        if s > horizon {
            break;
        }
        let y = psi.state_at(&system, s)?;
        let d = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b / gamma).powi(2))
            .sum::<f64>()
            .sqrt();
        deviation = deviation.max(d);
    }
    Ok(deviation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::linalg::Matrix;
    use crate::system::VectorFieldSpec;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_step: 0.01,
            t_max: 10.0,
            ..Default::default()
        }
    }

    #[test]
    fn left_only_clock_is_identity() {
        let sys = PiecewiseSystem::new(
            VectorFieldSpec::linear(Matrix::identity(2).scale(-1.0)),
            VectorFieldSpec::constant(vec![-1.0, 0.0]),
        )
        .unwrap();
        let traj = integrate(&sys, &[-1.0, 0.5], &cfg()).unwrap();
        let r = reparameterize_time(&sys, &traj, 0.3).unwrap();
        for &(t, p) in &r.p_samples {
            assert!((p - t).abs() < 1e-12);
        }
        let v = verify_time_scaling(&sys, &[-1.0, 0.5], 0.3, &cfg()).unwrap();
        assert!(v.max_deviation.unwrap() < 1e-8);
    }

    #[test]
    fn right_only_clock_is_gamma_t() {
        let sys = PiecewiseSystem::new(
            VectorFieldSpec::constant(vec![1.0, 0.0]),
            VectorFieldSpec::constant(vec![1.0, 1.0]),
        )
        .unwrap();
        let traj = integrate(&sys, &[1.0, 0.0], &cfg()).unwrap();
        let r = reparameterize_time(&sys, &traj, 0.4).unwrap();
        for &(t, p) in &r.p_samples {
            assert!((p - 0.4 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn sliding_rate_at_unit_x2() {
        let sys = builtin::paper_4d().to_system();
        let mut eval = FieldEval::new(&sys);
        let a = sliding_rate(&mut eval, 0.5, &[0.0, 1.0, 0.0, 0.0], 0.0).unwrap();
        assert!((a - 0.75).abs() < 1e-15);
    }

    #[test]
    fn inverse_and_bounds() {
        let sys = builtin::paper_4d().to_system();
        let traj = integrate(&sys, &[0.0, 1.0, 0.0, 0.0], &cfg()).unwrap();
        let r = reparameterize_time(&sys, &traj, 0.5).unwrap();
        for &(t, p) in r.p_samples.iter().step_by(7) {
            assert!((r.inverse(p) - t).abs() < 1e-12);
            assert!(0.5 * t <= p + 1e-12 && p <= t + 1e-12);
        }
        assert!(matches!(
            reparameterize_time(&sys, &traj, 1.5),
            Err(TimeScalingError::InvalidGamma(_))
        ));
    }

    #[test]
    fn hypothesis_failure_is_inapplicable() {
        let rs = builtin::paper_planar_c10_reduced(0.2).to_system();
        assert!(matches!(
            verify_time_scaling(&rs, &[0.0, 1.0], 0.5, &cfg()),
            Err(TimeScalingError::Inapplicable(_))
        ));
    }
}
