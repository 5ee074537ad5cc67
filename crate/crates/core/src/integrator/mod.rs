//! Event-driven computation of Filippov solutions.
//!
//! A solution is built from segments: smooth flow in `x1 < 0` (Left) or
//! `x1 > 0` (Right), and sliding motion on the surface. Smooth segments end
//! when `x1` reaches zero; the hit point is classified and the solution
//! either crosses, starts sliding, or stops (repelling sliding, two-fold).
//! Sliding segments end where the convex weight `λ` leaves `[0, 1]`: at
//! `λ = 0` the solution continues in the left region, at `λ = 1` in the right.

mod events;
pub mod export;
mod stepper;
mod timescale;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::norm;
use crate::system::{
    on_surface, sign_threshold, sliding_combination_into, BoundaryPointClass, PiecewiseSystem,
    Side, SystemError,
};

pub use events::{locate_surface_event, RootError, MAX_ROOT_ITERATIONS};
pub use timescale::{
    reparameterize_time, scale_covariance_deviation, verify_time_scaling, TimeScalingError, TimeScalingResult,
};

use events::{bisect_oriented, secant_polish};
use stepper::{hermite, initial_step, Stepper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Localization width on the event function (`x1` for surface hits).
    pub event_tol: f64,
    pub max_step: f64,
    pub t_max: f64,
    pub r_escape: f64,
    pub r_converge: f64,
    pub max_events: usize,
    /// Treat repelling sliding and two-fold points as errors instead of
    /// terminal events.
    #[serde(default)]
    pub strict: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            event_tol: 1e-12,
            max_step: 0.1,
            t_max: 100.0,
            r_escape: 1e6,
            r_converge: 1e-9,
            max_events: 100_000,
            strict: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("event_tol", self.event_tol),
            ("max_step", self.max_step),
            ("t_max", self.t_max),
            ("r_escape", self.r_escape),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(IntegrationError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.r_converge >= 0.0 && self.r_converge < self.r_escape) {
            return Err(IntegrationError::InvalidConfig(format!(
                "need 0 <= r_converge < r_escape, got {} and {}",
                self.r_converge, self.r_escape
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state must be finite with dimension {0}")]
    InvalidInitialState(usize),
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("event localization failed at t = {time}: {source}")]
    Localization { time: f64, source: RootError },
    #[error("more than {0} events")]
    TooManyEvents(usize),
    #[error("repelling sliding reached at t = {0}: forward solution is not unique")]
    Repelling(f64),
    #[error("two-fold point reached at t = {0}")]
    TwoFold(f64),
    #[error("sliding segment requested from a point that is not attracting sliding ({0:?})")]
    NotSliding(BoundaryPointClass),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Left,
    Right,
    Sliding,
}

impl Mode {
    pub fn code(self) -> char {
        match self {
            Mode::Left => 'L',
            Mode::Right => 'R',
            Mode::Sliding => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    SurfaceHit,
    SlidingExitLeft,
    SlidingExitRight,
    Converged,
    Escaped,
    HorizonReached,
    TwoFoldReached,
    RepellingEncountered,
}

impl EventKind {
    pub fn is_terminal(self) -> bool {
        !matches!(
            self,
            EventKind::SurfaceHit | EventKind::SlidingExitLeft | EventKind::SlidingExitRight
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::SurfaceHit => "SurfaceHit",
            EventKind::SlidingExitLeft => "SlidingExitLeft",
            EventKind::SlidingExitRight => "SlidingExitRight",
            EventKind::Converged => "Converged",
            EventKind::Escaped => "Escaped",
            EventKind::HorizonReached => "HorizonReached",
            EventKind::TwoFoldReached => "TwoFoldReached",
            EventKind::RepellingEncountered => "RepellingEncountered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub time: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentEnd {
    Event(EventRecord),
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySegment {
    pub mode: Mode,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub terminal_event: SegmentEnd,
}

impl TrajectorySegment {
    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }
}

/// A Filippov solution as a chain of mode-labelled segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub segments: Vec<TrajectorySegment>,
    pub initial_state: Vec<f64>,
    pub final_event: EventRecord,
}

impl Trajectory {
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end_time())
    }

    /// Transition events (surface hits and sliding exits) in time order.
    pub fn events(&self) -> Vec<&EventRecord> {
        self.segments
            .iter()
            .filter_map(|s| match &s.terminal_event {
                SegmentEnd::Event(e) if !e.kind.is_terminal() => Some(e),
                _ => None,
            })
            .collect()
    }

    /// Every sample `(t, x, mode)` in order; states shared at segment joins
    /// appear once per segment.
    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64], Mode)> {
        self.segments.iter().flat_map(|seg| {
            seg.times
                .iter()
                .zip(&seg.states)
                .map(move |(t, x)| (*t, x.as_slice(), seg.mode))
        })
    }

    /// Interpolated state at time `t`, using cubic Hermite interpolation
    /// between the recorded samples of the segment containing `t`.
    pub fn state_at(&self, system: &PiecewiseSystem, t: f64) -> Result<Vec<f64>, SystemError> {
        let seg = self
            .segments
            .iter()
            .find(|s| t <= s.end_time())
            .or(self.segments.last())
            .expect("trajectories have at least one segment");
        let i = seg.times.partition_point(|&s| s <= t);
        if i == 0 {
            return Ok(seg.states[0].clone());
        }
        if i >= seg.times.len() {
            return Ok(seg.last_state().to_vec());
        }
        let (t0, t1) = (seg.times[i - 1], seg.times[i]);
        let (x0, x1) = (&seg.states[i - 1], &seg.states[i]);
        let mut eval = FieldEval::new(system);
        let n = x0.len();
        let (mut f0, mut f1) = (vec![0.0; n], vec![0.0; n]);
        eval.mode_field(seg.mode, x0, &mut f0)?;
        eval.mode_field(seg.mode, x1, &mut f1)?;
        let h = t1 - t0;
        let mut out = vec![0.0; n];
        hermite(x0, &f0, x1, &f1, h, (t - t0) / h, &mut out);
        Ok(out)
    }
}

/// Field evaluation with scratch buffers.
pub(crate) struct FieldEval<'a> {
    system: &'a PiecewiseSystem,
    fl: Vec<f64>,
    fr: Vec<f64>,
    z: Vec<f64>,
}

impl<'a> FieldEval<'a> {
    pub fn new(system: &'a PiecewiseSystem) -> Self {
        let n = system.dimension();
        Self {
            system,
            fl: vec![0.0; n],
            fr: vec![0.0; n],
            z: vec![0.0; n],
        }
    }

    /// Normal components `(f^L_1, f^R_1)` evaluated on the surface above `x`.
    pub fn normal_components(&mut self, x: &[f64]) -> Result<(f64, f64), SystemError> {
        self.z.copy_from_slice(x);
        self.z[0] = 0.0;
        self.system.eval_into(Side::Left, &self.z, &mut self.fl)?;
        self.system.eval_into(Side::Right, &self.z, &mut self.fr)?;
        Ok((self.fl[0], self.fr[0]))
    }

    pub fn mode_field(&mut self, mode: Mode, x: &[f64], out: &mut [f64]) -> Result<(), SystemError> {
        match mode {
            Mode::Left => self.system.eval_into(Side::Left, x, out),
            Mode::Right => self.system.eval_into(Side::Right, x, out),
            Mode::Sliding => {
                let (a, b) = self.normal_components(x)?;
                if a - b == 0.0 {
                    return Err(SystemError::TwoFold);
                }
                sliding_combination_into(&self.fl, &self.fr, out);
                Ok(())
            }
        }
    }
}

/// Where a solution goes from a point on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Departure {
    Flow(Mode),
    Repelling,
    TwoFold,
}

/// Rate of change of the `side` normal component along the `side` flow.
fn normal_lie_derivative(
    system: &PiecewiseSystem,
    side: Side,
    x: &[f64],
) -> Result<f64, SystemError> {
    let v = system.eval_field(side, x)?;
    if side == Side::Left {
        if let Some(jac) = system.left_jacobian() {
            let j = jac(x);
            return Ok(crate::linalg::dot(j.row(0), &v));
        }
    }
    let speed = norm(&v);
    if speed == 0.0 {
        return Ok(0.0);
    }
    let h = 1e-6 * (1.0 + norm(x)) / speed;
    let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
    let fp = system.eval_field(side, &plus)?[0];
    let fm = system.eval_field(side, &minus)?[0];
    Ok((fp - fm) / (2.0 * h))
}

fn departure(system: &PiecewiseSystem, x: &[f64]) -> Result<Departure, SystemError> {
    let mut eval = FieldEval::new(system);
    let (fl1, fr1) = eval.normal_components(x)?;
    let class = BoundaryPointClass::from_normal_components(fl1, fr1, sign_threshold(x));
    Ok(match class {
        BoundaryPointClass::Crossing => {
            Departure::Flow(if fl1 > 0.0 { Mode::Right } else { Mode::Left })
        }
        BoundaryPointClass::AttractingSliding => Departure::Flow(Mode::Sliding),
        BoundaryPointClass::RepellingSliding => Departure::Repelling,
        BoundaryPointClass::TwoFold => Departure::TwoFold,
        BoundaryPointClass::TangencyLeft => {
            if fr1 > 0.0 {
                Departure::Flow(Mode::Right)
            } else if normal_lie_derivative(system, Side::Left, x)? > 0.0 {
                // f^L_1 turns positive: sliding becomes attracting
                Departure::Flow(Mode::Sliding)
            } else {
                Departure::Flow(Mode::Left)
            }
        }
        BoundaryPointClass::TangencyRight => {
            if fl1 < 0.0 {
                Departure::Flow(Mode::Left)
            } else if normal_lie_derivative(system, Side::Right, x)? < 0.0 {
                Departure::Flow(Mode::Sliding)
            } else {
                Departure::Flow(Mode::Right)
            }
        }
    })
}

/// How a segment ended.
enum SegmentOutcome {
    Transition(EventRecord),
    Terminal(EventRecord),
}

struct Engine<'a> {
    system: &'a PiecewiseSystem,
    cfg: &'a IntegratorConfig,
    stepper: Stepper,
}

impl<'a> Engine<'a> {
    fn new(system: &'a PiecewiseSystem, cfg: &'a IntegratorConfig) -> Self {
        Self {
            system,
            cfg,
            stepper: Stepper::new(system.dimension()),
        }
    }

    /// Event functions for `mode`, oriented so that the segment interior is
    /// negative. Smooth modes have one function, sliding has two.
    fn event_values(
        eval: &mut FieldEval<'_>,
        mode: Mode,
        x: &[f64],
    ) -> Result<[f64; 2], SystemError> {
        Ok(match mode {
            Mode::Left => [x[0], f64::NEG_INFINITY],
            Mode::Right => [-x[0], f64::NEG_INFINITY],
            Mode::Sliding => {
                let (fl1, fr1) = eval.normal_components(x)?;
                [-fl1, fr1]
            }
        })
    }

    fn run_segment(
        &mut self,
        mode: Mode,
        t0: f64,
        x0: Vec<f64>,
    ) -> Result<(TrajectorySegment, SegmentOutcome), IntegrationError> {
        let cfg = self.cfg;
        let system = self.system;
        let mut eval = FieldEval::new(system);
        let mut field = |x: &[f64], out: &mut [f64]| eval.mode_field(mode, x, out);

        let n = x0.len();
        let mut times = vec![t0];
        let mut states = vec![x0.clone()];
        let mut t = t0;
        let mut x = x0;
        let mut f = vec![0.0; n];
        field(&x, &mut f)?;
        let mut h = initial_step(&mut field, &x, &f, cfg.rel_tol, cfg.abs_tol, cfg.max_step)?;
        let mut last_rejected = false;
        let mut probe = FieldEval::new(system);

        let segment = |times: Vec<f64>, states: Vec<Vec<f64>>, end: SegmentEnd| TrajectorySegment {
            mode,
            times,
            states,
            terminal_event: end,
        };

        loop {
            if t >= cfg.t_max {
                let ev = EventRecord {
                    kind: EventKind::HorizonReached,
                    time: t,
                    state: x.clone(),
                };
                return Ok((
                    segment(times, states, SegmentEnd::Event(ev.clone())),
                    SegmentOutcome::Terminal(ev),
                ));
            }
            h = h.min(cfg.max_step);
            let clipped = t + h >= cfg.t_max;
            if clipped {
                h = cfg.t_max - t;
            }
            let step = self
                .stepper
                .step(&mut field, &x, &f, h, cfg.rel_tol, cfg.abs_tol)?;
            if !(step.error <= 1.0) {
                let factor = if step.error.is_finite() {
                    (0.9 * step.error.powf(-0.2)).clamp(0.2, 1.0)
                } else {
                    0.2
                };
                h *= factor;
                last_rejected = true;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(IntegrationError::StepSizeUnderflow(t));
                }
                continue;
            }
            let mut x_new = step.x;
            let mut f_new = step.f;
            if mode == Mode::Sliding {
                x_new[0] = 0.0;
                field(&x_new, &mut f_new)?;
            }
            let t_new = if clipped { cfg.t_max } else { t + h };

            let g_new = Self::event_values(&mut probe, mode, &x_new)?;
            if g_new.iter().any(|&v| v >= 0.0) {
                let (time, state, which) =
                    self.localize(mode, t, &x, &f, t_new, &x_new, &f_new, g_new)?;
                let kind = match (mode, which) {
                    (Mode::Left | Mode::Right, _) => EventKind::SurfaceHit,
                    (Mode::Sliding, Exit::Left) => EventKind::SlidingExitLeft,
                    (Mode::Sliding, Exit::Right) => EventKind::SlidingExitRight,
                    (Mode::Sliding, Exit::Both) => EventKind::TwoFoldReached,
                };
                if time > *times.last().unwrap() {
                    times.push(time);
                    states.push(state.clone());
                }
                let ev = EventRecord { kind, time, state };
                let outcome = if kind.is_terminal() {
                    SegmentOutcome::Terminal(ev.clone())
                } else {
                    SegmentOutcome::Transition(ev.clone())
                };
                return Ok((segment(times, states, SegmentEnd::Event(ev)), outcome));
            }

            t = t_new;
            x = x_new;
            f = f_new;
            times.push(t);
            states.push(x.clone());

            let r = norm(&x);
            let terminal = if r <= cfg.r_converge {
                Some(EventKind::Converged)
            } else if r >= cfg.r_escape {
                Some(EventKind::Escaped)
            } else {
                None
            };
            if let Some(kind) = terminal {
                let ev = EventRecord {
                    kind,
                    time: t,
                    state: x.clone(),
                };
                return Ok((
                    segment(times, states, SegmentEnd::Event(ev.clone())),
                    SegmentOutcome::Terminal(ev),
                ));
            }

            let factor = (0.9 * step.error.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h *= if last_rejected { factor.min(1.0) } else { factor };
            last_rejected = false;
        }
    }

    /// Finds the first event inside an accepted step `[t0, t1]`.
    #[allow(clippy::too_many_arguments)]
    fn localize(
        &mut self,
        mode: Mode,
        t0: f64,
        x0: &[f64],
        f0: &[f64],
        t1: f64,
        x1: &[f64],
        f1: &[f64],
        g1: [f64; 2],
    ) -> Result<(f64, Vec<f64>, Exit), IntegrationError> {
        let cfg = self.cfg;
        let tol = cfg.event_tol;
        let system = self.system;
        let h = t1 - t0;
        let n = x0.len();

        let mut located: Vec<(f64, usize)> = Vec::new();
        for (idx, &gv) in g1.iter().enumerate() {
            if gv < 0.0 {
                continue;
            }
            // Coarse root on the Hermite interpolant of the accepted step.
            let mut eval = FieldEval::new(system);
            let mut buf = vec![0.0; n];
            let coarse = bisect_oriented(
                |t| {
                    hermite(x0, f0, x1, f1, h, (t - t0) / h, &mut buf);
                    if mode == Mode::Sliding {
                        buf[0] = 0.0;
                    }
                    Self::event_values(&mut eval, mode, &buf).map(|g| g[idx])
                },
                t0,
                t1,
                tol,
            )?
            .map_err(|source| IntegrationError::Localization { time: t0, source })?;

            // Refine against the actual Runge–Kutta map from the step start.
            let mut refine_eval = FieldEval::new(system);
            let mut sub = Stepper::new(n);
            let mut g_true = |t: f64| -> Result<f64, SystemError> {
                let x = self_substep(&mut sub, system, mode, x0, f0, t - t0)?;
                Self::event_values(&mut refine_eval, mode, &x).map(|g| g[idx])
            };
            let root = match secant_polish(&mut g_true, coarse, t0, t1, tol)? {
                Some((t, _)) => t,
                None => bisect_oriented(&mut g_true, t0, t1, tol)?
                    .map_err(|source| IntegrationError::Localization { time: t0, source })?,
            };
            located.push((root, idx));
        }
        located.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (time, idx) = located[0];
        let mut sub = Stepper::new(n);
        let mut state = self_substep(&mut sub, system, mode, x0, f0, time - t0)?;
        let which = match mode {
            Mode::Left | Mode::Right => {
                state[0] = 0.0;
                Exit::Left
            }
            Mode::Sliding => {
                let mut eval = FieldEval::new(system);
                let (fl1, fr1) = eval.normal_components(&state)?;
                let zero = tol.max(sign_threshold(&state));
                if fl1.abs() <= zero && fr1.abs() <= zero {
                    Exit::Both
                } else if idx == 0 {
                    Exit::Left
                } else {
                    Exit::Right
                }
            }
        };
        Ok((time, state, which))
    }
}

#[derive(Debug, Clone, Copy)]
enum Exit {
    Left,
    Right,
    Both,
}

/// State after a Runge–Kutta sub-step of size `dt` from `x0`.
fn self_substep(
    stepper: &mut Stepper,
    system: &PiecewiseSystem,
    mode: Mode,
    x0: &[f64],
    f0: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SystemError> {
    if dt == 0.0 {
        return Ok(x0.to_vec());
    }
    let mut eval = FieldEval::new(system);
    let mut field = |x: &[f64], out: &mut [f64]| eval.mode_field(mode, x, out);
    let mut x = stepper.step(&mut field, x0, f0, dt, 1.0, 1.0)?.x;
    if mode == Mode::Sliding {
        x[0] = 0.0;
    }
    Ok(x)
}

/// Integrates the Filippov solution from `x0` until a terminal event.
pub fn integrate(
    system: &PiecewiseSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationError> {
    integrate_until(system, x0, cfg, |_| false)
}

/// Like [`integrate`], but also stops at the first transition event
/// (surface hit or sliding exit) for which `stop` returns true.
pub fn integrate_until<P>(
    system: &PiecewiseSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
    mut stop: P,
) -> Result<Trajectory, IntegrationError>
where
    P: FnMut(&EventRecord) -> bool,
{
    cfg.validate()?;
    let n = system.dimension();
    if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
        return Err(IntegrationError::InvalidInitialState(n));
    }
    let mut engine = Engine::new(system, cfg);
    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut x = x0.to_vec();

    let mut mode = if on_surface(&x) {
        x[0] = 0.0;
        match departure(system, &x)? {
            Departure::Flow(m) => m,
            other => {
                let ev = terminal_departure(other, t, &x, cfg)?;
                return Ok(single_point(x0, x, Mode::Sliding, ev));
            }
        }
    } else if x[0] < 0.0 {
        Mode::Left
    } else {
        Mode::Right
    };

    if norm(&x) <= cfg.r_converge {
        let ev = EventRecord {
            kind: EventKind::Converged,
            time: 0.0,
            state: x.clone(),
        };
        return Ok(single_point(x0, x, mode, ev));
    }

    let mut n_events = 0usize;
    loop {
        let (segment, outcome) = engine.run_segment(mode, t, x)?;
        segments.push(segment);
        let ev = match outcome {
            SegmentOutcome::Terminal(ev) => {
                if cfg.strict {
                    match ev.kind {
                        EventKind::TwoFoldReached => return Err(IntegrationError::TwoFold(ev.time)),
                        EventKind::RepellingEncountered => {
                            return Err(IntegrationError::Repelling(ev.time))
                        }
                        _ => {}
                    }
                }
                return Ok(Trajectory {
                    segments,
                    initial_state: x0.to_vec(),
                    final_event: ev,
                });
            }
            SegmentOutcome::Transition(ev) => ev,
        };
        n_events += 1;
        if n_events > cfg.max_events {
            return Err(IntegrationError::TooManyEvents(cfg.max_events));
        }
        if stop(&ev) {
            return Ok(Trajectory {
                segments,
                initial_state: x0.to_vec(),
                final_event: ev,
            });
        }
        t = ev.time;
        x = ev.state.clone();
        let next = match ev.kind {
            EventKind::SlidingExitLeft => Departure::Flow(Mode::Left),
            EventKind::SlidingExitRight => Departure::Flow(Mode::Right),
            _ => departure(system, &x)?,
        };
        mode = match next {
            Departure::Flow(m) => m,
            other => {
                let ev = terminal_departure(other, t, &x, cfg)?;
                let last = segments.last_mut().unwrap();
                last.terminal_event = SegmentEnd::Event(ev.clone());
                return Ok(Trajectory {
                    segments,
                    initial_state: x0.to_vec(),
                    final_event: ev,
                });
            }
        };
    }
}

fn terminal_departure(
    d: Departure,
    t: f64,
    x: &[f64],
    cfg: &IntegratorConfig,
) -> Result<EventRecord, IntegrationError> {
    let kind = match d {
        Departure::Repelling if cfg.strict => return Err(IntegrationError::Repelling(t)),
        Departure::TwoFold if cfg.strict => return Err(IntegrationError::TwoFold(t)),
        Departure::Repelling => EventKind::RepellingEncountered,
        Departure::TwoFold => EventKind::TwoFoldReached,
        Departure::Flow(_) => unreachable!("flow departures are not terminal"),
    };
    Ok(EventRecord {
        kind,
        time: t,
        state: x.to_vec(),
    })
}

fn single_point(x0: &[f64], x: Vec<f64>, mode: Mode, ev: EventRecord) -> Trajectory {
    Trajectory {
        segments: vec![TrajectorySegment {
            mode,
            times: vec![ev.time],
            states: vec![x],
            terminal_event: SegmentEnd::Event(ev.clone()),
        }],
        initial_state: x0.to_vec(),
        final_event: ev,
    }
}

/// Integrates a single sliding segment from an attracting sliding point.
pub fn integrate_sliding(
    system: &PiecewiseSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TrajectorySegment, IntegrationError> {
    cfg.validate()?;
    let mut x = x0.to_vec();
    x[0] = 0.0;
    let class = system.classify_boundary_point(&x)?;
    if class != BoundaryPointClass::AttractingSliding || !on_surface(x0) {
        return Err(IntegrationError::NotSliding(class));
    }
    let mut engine = Engine::new(system, cfg);
    let (segment, outcome) = engine.run_segment(Mode::Sliding, 0.0, x)?;
    if cfg.strict {
        if let SegmentOutcome::Terminal(ev) = &outcome {
            if ev.kind == EventKind::TwoFoldReached {
                return Err(IntegrationError::TwoFold(ev.time));
            }
        }
    }
    Ok(segment)
}
