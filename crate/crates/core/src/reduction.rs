//! Reduction to the leading-order system at a boundary equilibrium, the
//! hypothesis checks that go with it, and simulation-based stability probes.
//!
//! The reduced system `F` is positively homogeneous up to a change of time
//! scale, so orbits started on the unit half sphere `{‖z‖ = 1, z1 <= 0}`
//! describe the behaviour at every scale. The probe integrates a
//! quasi-uniform set of such orbits and asks whether all of them contract by
//! a fixed factor `κ`. The verdicts are evidence, not proofs: a finite sample
//! can miss exceptional orbits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{integrate, EventKind, IntegrationError, IntegratorConfig};
use crate::linalg::{norm, Matrix};
use crate::parallel::par_map;
use crate::system::{sign_threshold, PiecewiseSystem, ReducedSystem, Side, SystemError, VectorFieldSpec};

/// Tolerance on `‖f^L(0)‖` for the boundary-equilibrium hypothesis.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// `|c1|` at or below this counts as `c1 = 0`.
pub const C1_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("origin is not a boundary equilibrium: |f^L(0)| = {0:e}")]
    NotBoundaryEquilibrium(f64),
    #[error("perturbation radius {delta} must be smaller than |c1| = {c1_abs}")]
    InvalidDelta { delta: f64, c1_abs: f64 },
    #[error("invalid probe configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// `A = Df^L(0)`, `c = f^R(0)`.
///
/// The Jacobian comes from the analytic map when one is attached, from the
/// matrix of an affine left piece, and otherwise from central differences.
pub fn linearize_at_origin(
    system: &PiecewiseSystem,
    fd_step: f64,
) -> Result<ReducedSystem, ReductionError> {
    let n = system.dimension();
    let origin = vec![0.0; n];
    let f0 = system.eval_field(Side::Left, &origin)?;
    let residual = norm(&f0);
    if residual > EQUILIBRIUM_TOL {
        return Err(ReductionError::NotBoundaryEquilibrium(residual));
    }
    let a = if let Some(jac) = system.left_jacobian() {
        jac(&origin)
    } else {
        match system.piece(Side::Left) {
            VectorFieldSpec::Affine { matrix, .. } => matrix.clone(),
            VectorFieldSpec::Expression(_) => {
                let mut a = Matrix::zeros(n, n);
                let mut x = origin.clone();
                for j in 0..n {
                    x[j] = fd_step;
                    let plus = system.eval_field(Side::Left, &x)?;
                    x[j] = -fd_step;
                    let minus = system.eval_field(Side::Left, &x)?;
                    x[j] = 0.0;
                    for i in 0..n {
                        a[(i, j)] = (plus[i] - minus[i]) / (2.0 * fd_step);
                    }
                }
                a
            }
        }
    };
    let c = system.eval_field(Side::Right, &origin)?;
    Ok(ReducedSystem::new(a, c)?)
}

/// Visits surface points `(0, y2, …, yn)` on a uniform grid of `n_grid`
/// values per axis over `[-radius, radius]`, keeping those in the ball.
pub(crate) fn for_each_surface_grid_point<F>(
    n: usize,
    n_grid: usize,
    radius: f64,
    mut f: F,
) -> Result<(), SystemError>
where
    F: FnMut(&[f64]) -> Result<(), SystemError>,
{
    let axis: Vec<f64> = if n_grid <= 1 {
        vec![0.0]
    } else {
        (0..n_grid)
            .map(|i| -radius + 2.0 * radius * i as f64 / (n_grid - 1) as f64)
            .collect()
    };
    let free = n - 1;
    let total = axis.len().pow(free as u32);
    let mut x = vec![0.0; n];
    for mut k in 0..total {
        for coord in x.iter_mut().skip(1) {
            *coord = axis[k % axis.len()];
            k /= axis.len();
        }
        if norm(&x) <= radius * (1.0 + 1e-12) {
            f(&x)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCheck {
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
}

/// Grid test of the forward-uniqueness condition: at every surface point
/// near the origin either `f^L_1 > 0` or `f^R_1 < 0`.
pub fn check_uniqueness_condition(
    system: &PiecewiseSystem,
    n_grid: usize,
    radius: f64,
) -> Result<UniquenessCheck, SystemError> {
    let mut witness = None;
    for_each_surface_grid_point(system.dimension(), n_grid, radius, |x| {
        if witness.is_some() {
            return Ok(());
        }
        let tol = sign_threshold(x);
        let fl1 = system.eval_field(Side::Left, x)?[0];
        let fr1 = system.eval_field(Side::Right, x)?[0];
        if fl1 <= tol && fr1 >= -tol {
            witness = Some(x.to_vec());
        }
        Ok(())
    })?;
    Ok(UniquenessCheck {
        holds: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Orbits started on the closed left half sphere; 10% more are added
    /// just to the right of the surface.
    pub n_samples: usize,
    /// Required contraction factor.
    pub kappa: f64,
    pub t_max: f64,
    /// Escape radius, in units of `radius`. Must clear the transient growth
    /// of stable systems (about 21 for paper-4d).
    pub r_escape: f64,
    pub seed: u64,
    /// Radius of the sampling sphere. The reduced system is homogeneous so
    /// 1 is as good as any value. For other systems the verdict depends on
    /// the radius.
    pub radius: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            kappa: 0.5,
            t_max: 200.0,
            r_escape: 50.0,
            seed: 0,
            radius: 1.0,
            integrator: IntegratorConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                max_step: 0.1,
                ..Default::default()
            },
        }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<(), ReductionError> {
        if self.n_samples == 0 {
            return Err(ReductionError::InvalidConfig("n_samples must be >= 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(ReductionError::InvalidConfig(format!(
                "kappa must lie in (0, 1), got {}",
                self.kappa
            )));
        }
        if !(self.radius > 0.0 && self.r_escape > 1.0 && self.t_max > 0.0) {
            return Err(ReductionError::InvalidConfig(
                "radius and t_max must be positive and r_escape > 1".into(),
            ));
        }
        Ok(())
    }

    /// Integrator settings for one probe orbit.
    pub fn orbit_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            t_max: self.t_max,
            r_escape: self.r_escape * self.radius,
            r_converge: self.kappa * self.radius,
            ..self.integrator.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnstableBehavior {
    Escaped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InapplicableReason {
    /// `c1 = 0`: the reduced system is not asymptotically stable, although
    /// the full system may still be.
    C1Zero,
    /// `c1 > 0`: the origin is unstable.
    C1Positive,
    HypothesisFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StabilityVerdict {
    /// Every sampled orbit contracted by `κ` within `T`; suggests
    /// `‖φ(t)‖ <= α e^{-βt} ‖φ(0)‖`.
    StableEvidence {
        #[serde(rename = "T")]
        t: f64,
        alpha: f64,
        beta: f64,
    },
    UnstableEvidence {
        witness: Vec<f64>,
        behavior: UnstableBehavior,
    },
    Inconclusive {
        detail: String,
    },
    Inapplicable {
        reason: InapplicableReason,
    },
}

impl StabilityVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            StabilityVerdict::StableEvidence { .. } => "StableEvidence",
            StabilityVerdict::UnstableEvidence { .. } => "UnstableEvidence",
            StabilityVerdict::Inconclusive { .. } => "Inconclusive",
            StabilityVerdict::Inapplicable { .. } => "Inapplicable",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::StableEvidence { .. })
    }
}

/// Golden-ratio generalisation for `d` dimensions: the root of `x^{d+1} = x + 1`.
fn generalized_golden_ratio(d: usize) -> f64 {
    let mut x: f64 = 2.0;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// Quasi-uniform unit vectors: a Kronecker (generalised Fibonacci) lattice
/// pushed through the Gaussian quantile map and normalised. The seed
/// shifts the lattice.
fn lattice_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = generalized_golden_ratio(n);
    let steps: Vec<f64> = (1..=n).map(|i| phi.powi(-(i as i32))).collect();
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    (0..count)
        .map(|k| {
            let g: Vec<f64> = (0..n)
                .map(|i| {
                    let u = (shift[i] + (k as f64 + 1.0) * steps[i]).fract();
                    let u = u.clamp(1e-12, 1.0 - 1e-12);
                    std::f64::consts::SQRT_2 * statrs::function::erf::erf_inv(2.0 * u - 1.0)
                })
                .collect();
            let r = norm(&g);
            g.into_iter().map(|v| v / r).collect()
        })
        .collect()
}

/// Starting directions of a probe: `n_samples` on the closed left half
/// sphere followed by `ceil(n_samples / 10)` just right of the surface.
pub fn probe_directions(n: usize, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let extra = n_samples.div_ceil(10);
    let mut dirs = lattice_directions(n, n_samples + extra, seed);
    for (k, d) in dirs.iter_mut().enumerate() {
        d[0] = if k < n_samples {
            -d[0].abs()
        } else {
            0.05 * d[0].abs()
        };
        let r = norm(d);
        if r > 0.0 {
            d.iter_mut().for_each(|v| *v /= r);
        }
    }
    dirs
}

#[derive(Debug, Clone, PartialEq)]
enum OrbitOutcome {
    Contracted { time: f64, sup_norm: f64 },
    Escaped,
    Failed(String),
}

fn probe_orbit(system: &PiecewiseSystem, start: &[f64], cfg: &ProbeConfig) -> OrbitOutcome {
    let traj = match integrate(system, start, &cfg.orbit_config()) {
        Ok(t) => t,
        Err(e) => return OrbitOutcome::Failed(e.to_string()),
    };
    match traj.final_event.kind {
        EventKind::Converged => OrbitOutcome::Contracted {
            time: traj.final_event.time,
            sup_norm: traj
                .samples()
                .map(|(_, x, _)| norm(x))
                .fold(0.0, f64::max)
                / cfg.radius,
        },
        EventKind::Escaped => OrbitOutcome::Escaped,
        other => OrbitOutcome::Failed(format!(
            "orbit ended with {} at t = {}",
            other.name(),
            traj.final_event.time
        )),
    }
}

/// Probes an arbitrary system on the sphere of radius `cfg.radius`, without
/// the `c1` gate of [`stability_probe`].
pub fn probe_system(
    system: &PiecewiseSystem,
    cfg: &ProbeConfig,
) -> Result<StabilityVerdict, ReductionError> {
    cfg.validate()?;
    let dirs = probe_directions(system.dimension(), cfg.n_samples, cfg.seed);
    let starts: Vec<Vec<f64>> = dirs
        .iter()
        .map(|d| d.iter().map(|v| v * cfg.radius).collect())
        .collect();
    let outcomes = par_map(&starts, |x| probe_orbit(system, x, cfg));

    if let Some(i) = outcomes.iter().position(|o| *o == OrbitOutcome::Escaped) {
        return Ok(StabilityVerdict::UnstableEvidence {
            witness: starts[i].clone(),
            behavior: UnstableBehavior::Escaped,
        });
    }
    if let Some((i, OrbitOutcome::Failed(why))) = outcomes
        .iter()
        .enumerate()
        .find(|(_, o)| matches!(o, OrbitOutcome::Failed(_)))
    {
        return Ok(StabilityVerdict::Inconclusive {
            detail: format!("no contraction from {:?}: {why}", starts[i]),
        });
    }
    let (mut t_max, mut alpha) = (0.0f64, 1.0f64);
    for o in &outcomes {
        if let OrbitOutcome::Contracted { time, sup_norm } = o {
            t_max = t_max.max(*time);
            alpha = alpha.max(*sup_norm);
        }
    }
    if t_max <= 0.0 {
        return Ok(StabilityVerdict::Inconclusive {
            detail: "all orbits started inside the contraction radius".into(),
        });
    }
    Ok(StabilityVerdict::StableEvidence {
        t: t_max,
        alpha,
        beta: (1.0 / cfg.kappa).ln() / t_max,
    })
}

/// Stability probe of a reduced system. Returns `Inapplicable` unless
/// `c1 < 0`.
pub fn stability_probe(
    rs: &ReducedSystem,
    cfg: &ProbeConfig,
) -> Result<StabilityVerdict, ReductionError> {
    let c1 = rs.c1();
    if c1.abs() <= C1_ZERO_TOL {
        return Ok(StabilityVerdict::Inapplicable {
            reason: InapplicableReason::C1Zero,
        });
    }
    if c1 > 0.0 {
        return Ok(StabilityVerdict::Inapplicable {
            reason: InapplicableReason::C1Positive,
        });
    }
    probe_system(&rs.to_system(), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub c1: f64,
    pub verdict: StabilityVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub base: ReducedSystem,
    pub base_verdict: StabilityVerdict,
    pub delta: f64,
    pub trials: Vec<TrialRecord>,
    pub stable_fraction: f64,
}

impl SweepReport {
    pub fn verdicts(&self) -> impl Iterator<Item = &StabilityVerdict> {
        self.trials.iter().map(|t| &t.verdict)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": {
                "A": self.base.a().to_rows(),
                "c": self.base.c(),
            },
            "base_verdict": self.base_verdict,
            "delta": self.delta,
            "trials": self.trials,
            "stable_fraction": self.stable_fraction,
        })
    }
}

/// Probes `trials` entrywise perturbations of `(A, c)` with entries uniform
/// in `[-δ, δ]`.
pub fn robustness_sweep(
    rs: &ReducedSystem,
    delta: f64,
    trials: usize,
    cfg: &ProbeConfig,
) -> Result<SweepReport, ReductionError> {
    let c1 = rs.c1();
    if !(delta >= 0.0) || c1 >= 0.0 || delta >= c1.abs() {
        return Err(ReductionError::InvalidDelta {
            delta,
            c1_abs: c1.abs(),
        });
    }
    let base_verdict = stability_probe(rs, cfg)?;
    let n = rs.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draw = |rng: &mut ChaCha8Rng| {
        if delta == 0.0 {
            0.0
        } else {
            rng.gen_range(-delta..=delta)
        }
    };
    let mut systems = Vec::with_capacity(trials);
    while systems.len() < trials {
        let mut a = rs.a().clone();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += draw(&mut rng);
            }
        }
        let c: Vec<f64> = rs.c().iter().map(|v| v + draw(&mut rng)).collect();
        // keep the sign hypothesis c1 < 0
        if c[0] < -C1_ZERO_TOL {
            systems.push(ReducedSystem::new(a, c)?);
        }
    }
    let verdicts = par_map(&systems, |s| stability_probe(s, cfg));
    let mut records = Vec::with_capacity(trials);
    for (index, (s, v)) in systems.iter().zip(verdicts).enumerate() {
        records.push(TrialRecord {
            index,
            c1: s.c1(),
            verdict: v?,
        });
    }
    let stable = records.iter().filter(|r| r.verdict.is_stable()).count();
    Ok(SweepReport {
        base: rs.clone(),
        base_verdict,
        delta,
        stable_fraction: if trials == 0 {
            0.0
        } else {
            stable as f64 / trials as f64
        },
        trials: records,
    })
}
