//! Safeguarded Newton iteration for scalar, monotone increasing equations.
//!
//! Every caller in this crate solves `g(x) = target` where `g` is strictly
//! increasing on a known bracket, so the root is unique. Newton steps are
//! taken when they land strictly inside the current bracket; otherwise the
//! bracket is bisected. The bracket shrinks on every iteration, so the
//! method cannot diverge.

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `f(x) = 0` for an increasing `f` on `[lo, hi]`.
///
/// `f` returns the value and derivative. Requires `f(lo) <= 0 <= f(hi)`.
/// Stops once `|f(x)| <= tol` or the bracket has collapsed to adjacent
/// floating-point numbers; the best iterate seen is returned.
pub fn increasing_root<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Root
where
    F: Fn(f64) -> (f64, f64),
{
    debug_assert!(lo <= hi);
    let mut x = 0.5 * (lo + hi);
    let mut best = Root {
        x,
        residual: f64::INFINITY,
        iterations: 0,
    };
    for it in 1..=max_iter {
        let (fx, dfx) = f(x);
        if fx.abs() < best.residual.abs() || !best.residual.is_finite() {
            best = Root {
                x,
                residual: fx,
                iterations: it,
            };
        }
        if fx.abs() <= tol {
            best.iterations = it;
            return best;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            best.iterations = it;
            return best;
        }
        x = next;
    }
    best.iterations = max_iter;
    best
}

/// Pure bisection on an increasing function; used where no derivative is
/// available (nested inverses).
pub fn increasing_bisect<F>(f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = increasing_root(|x| (x * x * x - 8.0, 3.0 * x * x), 0.0, 10.0, 1e-14, 200);
        assert!((r.x - 2.0).abs() < 1e-14);
    }

    #[test]
    fn infinite_derivative_at_origin_falls_back_to_bisection() {
        // sqrt has an unbounded slope at 0; the bracket keeps Newton honest.
        let f = |x: f64| (x.sqrt() + x - 0.5, 0.5 / x.sqrt() + 1.0);
        let r = increasing_root(f, 0.0, 0.5, 1e-15, 200);
        assert!(r.residual.abs() <= 1e-15);
    }

    #[test]
    fn bisection_matches_closed_form() {
        let x = increasing_bisect(|x| x * x - 2.0, 0.0, 2.0, 200);
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }
}
