//! Adaptive Simpson quadrature for smooth 1-D integrands.
//!
//! The interval is split recursively until the two-panel Simpson estimate
//! agrees with the one-panel estimate to the local tolerance; the returned
//! value includes the Richardson correction term `(s2 - s1) / 15`.

use std::fmt;

/// Errors from the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadError {
    /// The integrand produced a non-finite value.
    NonFiniteIntegrand,
    /// The recursion depth limit was reached before convergence.
    NonConvergence,
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::NonFiniteIntegrand => write!(f, "integrand returned a non-finite value"),
            QuadError::NonConvergence => write!(f, "quadrature failed to converge"),
        }
    }
}

impl std::error::Error for QuadError {}

const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to roughly `rel_tol` relative accuracy.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    if !whole.is_finite() {
        return Err(QuadError::NonFiniteIntegrand);
    }
    // Absolute budget derived from the first estimate, floored so that
    // integrals near zero still terminate.
    let tol = (rel_tol * whole.abs()).max(1e-12);
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let split = left + right;
    if !split.is_finite() {
        return Err(QuadError::NonFiniteIntegrand);
    }
    if (split - whole).abs() <= 15.0 * tol {
        return Ok(split + (split - whole) / 15.0);
    }
    if depth == 0 {
        return Err(QuadError::NonConvergence);
    }
    let half_tol = 0.5 * tol;
    Ok(recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}
