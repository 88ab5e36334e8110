//! Scalar root finding on bracketing intervals.

/// Sign of a sample, with `NaN` mapped to `None`.
pub(crate) fn sign_of(v: f64) -> Option<i8> {
    if v.is_nan() {
        None
    } else if v > 0.0 {
        Some(1)
    } else if v < 0.0 {
        Some(-1)
    } else {
        Some(0)
    }
}

/// Bisects `f` on `(a, b)` where `f` has sign `sign_a` at (or just inside) `a`
/// and the opposite sign at `b`. The endpoints themselves are never
/// evaluated, so singular ends are fine as long as their limiting sign is
/// known. Returns the final midpoint once the bracket stops shrinking.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, sign_a: i8) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a.min(b) || mid >= a.max(b) {
            break;
        }
        match sign_of(f(mid)) {
            Some(0) => return mid,
            Some(s) if s == sign_a => a = mid,
            Some(_) => b = mid,
            // a NaN only shows up next to the singular end the bracket started from
            None => a = mid,
        }
    }
    let mid = 0.5 * (a + b);
    if mid > a.min(b) && mid < a.max(b) {
        mid
    } else if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Newton iteration kept inside `[lo, hi]`, falling back to bisection of
/// the current bracket whenever a step would leave it.
pub(crate) fn safeguarded_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    let lo_negative = f_lo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !next.is_finite() || next <= lo.min(hi) || next >= lo.max(hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= rel_tol * x.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
    }
    x
}

/// Unique positive root of `lambda^2 z^3 - 3 z^2 - 1`.
///
/// The polynomial is `-1` at the origin and increasing for
/// `z > 2 / lambda^2`, so a doubling search finds the bracket.
pub(crate) fn critical_cubic_root(lambda_ratio: f64) -> f64 {
    let l2 = lambda_ratio * lambda_ratio;
    let f = |z: f64| l2 * z * z * z - 3.0 * z * z - 1.0;
    let df = |z: f64| 3.0 * l2 * z * z - 6.0 * z;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    // coarse bisection until the bracket sits where f is monotone
    let mut lo = 0.0;
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    safeguarded_newton(f, df, lo, hi, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, -1);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_tolerates_singular_endpoint() {
        // 1/x - 2 is +inf at 0 and never evaluated there
        let r = bisect(|x| 1.0 / x - 2.0, 0.0, 1.0, 1);
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cubic_roots() {
        assert!((critical_cubic_root(6.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((critical_cubic_root(2.0) - 1.0).abs() < 1e-15);
        for l in [0.1, 0.5, 1.0, 3.0, 50.0, 5000.0] {
            let z = critical_cubic_root(l);
            let scale = l * l * z.powi(3) + 3.0 * z * z + 1.0;
            assert!((l * l * z.powi(3) - 3.0 * z * z - 1.0).abs() <= 1e-12 * scale, "{l}");
        }
    }
}
