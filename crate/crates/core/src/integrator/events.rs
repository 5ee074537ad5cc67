//! Root localization for surface and sliding-exit events.

use thiserror::Error;

/// Iteration cap for every localization loop.
pub const MAX_ROOT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}]: g(a) = {ga}, g(b) = {gb}")]
    NoSignChange { a: f64, b: f64, ga: f64, gb: f64 },
    #[error("root localization did not converge within {MAX_ROOT_ITERATIONS} iterations")]
    ConvergenceFailure,
}

/// Locates a zero of `g` on `[a, b]` to `|g(t*)| <= tol`.
///
/// `g(a)` and `g(b)` must have opposite signs (or one of them be zero).
pub fn locate_surface_event<G>(mut g: G, a: f64, b: f64, tol: f64) -> Result<f64, RootError>
where
    G: FnMut(f64) -> f64,
{
    let ga = g(a);
    let gb = g(b);
    if ga.abs() <= tol {
        return Ok(a);
    }
    if gb.abs() <= tol {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(RootError::NoSignChange { a, b, ga, gb });
    }
    // orient so that the negative end plays the role of "inside"
    let (inside, outside) = if ga < 0.0 { (a, b) } else { (b, a) };
    let flip = ga > 0.0;
    bisect_oriented(
        |t| {
            let v = g(t);
            Ok::<_, RootError>(if flip { -v } else { v })
        },
        inside,
        outside,
        tol,
    )?
}

/// Bisection where `inside` is taken to satisfy `g < 0` without being
/// evaluated and `g(outside) >= 0`. Returns a point on the outside branch
/// with `|g| <= tol`, or the outside end of a bracket that has collapsed to
/// floating-point resolution.
pub(crate) fn bisect_oriented<G, E>(
    mut g: G,
    mut inside: f64,
    mut outside: f64,
    tol: f64,
) -> Result<Result<f64, RootError>, E>
where
    G: FnMut(f64) -> Result<f64, E>,
{
    for _ in 0..MAX_ROOT_ITERATIONS {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            return Ok(Ok(outside));
        }
        let v = g(mid)?;
        if v.abs() <= tol {
            return Ok(Ok(mid));
        }
        if v < 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(Err(RootError::ConvergenceFailure))
}

/// Secant refinement of a nearby root estimate, confined to `[lo, hi]`.
/// Returns `None` when the iteration leaves the interval or stalls.
pub(crate) fn secant_polish<G, E>(
    mut g: G,
    guess: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Option<(f64, f64)>, E>
where
    G: FnMut(f64) -> Result<f64, E>,
{
    let mut t1 = guess;
    let mut g1 = g(t1)?;
    if g1.abs() <= tol {
        return Ok(Some((t1, g1)));
    }
    let delta = 1e-7 * (hi - lo).max(f64::EPSILON);
    let mut t0 = if t1 - delta >= lo { t1 - delta } else { t1 + delta };
    let mut g0 = g(t0)?;
    for _ in 0..20 {
        if g1 == g0 {
            return Ok(None);
        }
        let t2 = t1 - g1 * (t1 - t0) / (g1 - g0);
        if !(lo..=hi).contains(&t2) || !t2.is_finite() {
            return Ok(None);
        }
        let g2 = g(t2)?;
        if g2.abs() <= tol {
            return Ok(Some((t2, g2)));
        }
        (t0, g0, t1, g1) = (t1, g1, t2, g2);
    }
    Ok(None)
}
