//! Scalar bracketing root finders.

use crate::error::{Error, Result};

/// Brent's method on `[a, b]`. Stops when the bracket is narrower than
/// `xtol` or `|f| <= ftol` at the current best point.
pub fn brent(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
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
        if m.abs() <= tol || fb.abs() <= ftol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
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
        if fb == 0.0 {
            return Ok(b);
        }
    }
    Ok(b)
}

/// Plain bisection until the bracket is narrower than `xtol`. Returns the
/// midpoint of the final bracket.
pub fn bisect(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, xtol: f64) -> Result<f64> {
    bisect_by(|x| f(x) > 0.0, a, b, xtol)
}

/// Bisection on a boolean predicate that differs at the two ends.
pub fn bisect_by(mut pred: impl FnMut(f64) -> bool, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let p_lo = pred(lo);
    if p_lo == pred(hi) {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fallible predicate variant of [`bisect_by`].
pub fn try_bisect_by(
    mut pred: impl FnMut(f64) -> Result<bool>,
    a: f64,
    b: f64,
    xtol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let p_lo = pred(lo)?;
    if p_lo == pred(hi)? {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid)? == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0 * x - 5.0, 2.0, 3.0, 1e-14, 0.0).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-12);
    }

    #[test]
    fn brent_requires_sign_change() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn bisect_on_predicate() {
        let r = bisect_by(|x| x > 0.3, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
        let r = bisect(|x| x.cos(), 0.0, 3.0, 1e-13).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
