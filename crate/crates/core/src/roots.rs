//! Safeguarded Newton root finding with a bisection fallback.

use crate::error::CoreError;

/// Find a root of `f` inside the bracket `[lo, hi]` (f(lo)·f(hi) ≤ 0),
/// starting Newton from `guess`. Steps that leave the bracket or fail to
/// shrink it fall back to bisection; the bracket is tightened every
/// iteration so the method cannot cycle.
pub fn newton_bisection<F, D>(
    mut f: F,
    mut df: D,
    mut lo: f64,
    mut hi: f64,
    guess: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64, CoreError>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(CoreError::Convergence {
            what: format!("no sign change on bracket [{lo}, {hi}]"),
            t_ns: f64::NAN,
        });
    }

    let mut x = guess.clamp(lo, hi);
    for _ in 0..max_iter {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        // Tighten the bracket around the sign change.
        if fx * flo < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }

        let dfx = df(x);
        let newton = x - fx / dfx;
        let x_new = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };

        if (x_new - x).abs() <= x_tol {
            return Ok(x_new);
        }
        x = x_new;
    }
    Err(CoreError::Convergence { what: format!("budget exhausted near x = {x}"), t_ns: f64::NAN })
}
