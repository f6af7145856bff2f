//! Scalar root finding on bracketing intervals.

use crate::error::{Error, Result};

/// Bisection down to an interval of width `tol`, returning the midpoint.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    // 200 halvings exhaust any finite f64 interval.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Brent's method (inverse quadratic interpolation, secant and bisection).
pub fn brent<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}

/// Root of a decreasing function by Newton's method, bracketing on the fly.
///
/// Every evaluated point narrows the bracket on its side of the root. A Newton
/// update that leaves the bracket is replaced by bisection once both sides are
/// known, or by a geometric search step of `search_step · 4^k` before that.
/// `fdf` returns the value and derivative at a point.
pub fn decreasing_root<F>(mut fdf: F, x0: f64, search_step: f64, xtol: f64, max_expansions: usize) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut below = f64::NEG_INFINITY; // f > 0 here
    let mut above = f64::INFINITY; // f < 0 here
    let mut x = x0;
    let mut step = search_step;
    let mut expansions = 0;
    for _ in 0..200 {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(Error::NoBracket { lo: below, hi: above, f_lo: fx, f_hi: fx });
        }
        if fx > 0.0 {
            below = x;
        } else {
            above = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx < 0.0 && newton > below && newton < above {
            newton
        } else if below.is_finite() && above.is_finite() {
            0.5 * (below + above)
        } else {
            if expansions == max_expansions {
                return Err(Error::NoBracket { lo: below, hi: above, f_lo: fx, f_hi: fx });
            }
            expansions += 1;
            let jump = if fx > 0.0 { x + step } else { x - step };
            step *= 4.0;
            jump
        };
        if (next - x).abs() <= xtol || above - below <= xtol {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
