use crate::error::{domain, Error, Result};

/// Finds a zero of a monotone function on `[lo, hi]` by bisection.
///
/// Stops when `|f(x)| ≤ tol` or the bracket is narrower than `tol`.
pub fn bisect_monotone<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return domain("bisection needs tol > 0 and lo <= hi");
    }
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let rising = fb > 0.0;
    // 2000 halvings exhausts any f64 interval
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= tol || (b - a) <= tol || mid == a || mid == b {
            return Ok(mid);
        }
        if (fm > 0.0) == rising {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// All real roots of `c3 x³ + c2 x² + c1 x + c0`, ascending, Newton-polished.
pub fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<Vec<f64>> {
    if c3 == 0.0 || !c3.is_finite() {
        return domain("cubic leading coefficient must be nonzero");
    }
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    // depressed cubic t³ + pt + q with x = t - a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if p == 0.0 && q == 0.0 {
        vec![0.0]
    } else if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else {
        // three real roots (possibly repeated): trigonometric form
        let r = (-p / 3.0).sqrt();
        let arg = if r == 0.0 { 0.0 } else { (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0) };
        let phi = arg.acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
            .collect()
    };
    for t in roots.iter_mut() {
        *t -= shift;
    }
    let poly = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let deriv = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    for x in roots.iter_mut() {
        for _ in 0..50 {
            let d = deriv(*x);
            if d == 0.0 {
                break;
            }
            let step = poly(*x) / d;
            let next = *x - step;
            if !next.is_finite() || poly(next).abs() >= poly(*x).abs() {
                break;
            }
            *x = next;
        }
    }
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::Numeric("cubic root is not finite".into()));
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Largest real root of a cubic. Callers check positivity themselves.
pub fn cubic_positive_root(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<f64> {
    let roots = cubic_real_roots(c3, c2, c1, c0)?;
    let root = *roots
        .last()
        .ok_or_else(|| Error::Numeric("cubic has no real root".into()))?;
    let scale = [c3, c2, c1, c0].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let residual = (((c3 * root + c2) * root + c1) * root + c0).abs();
    // residual is relative to the coefficient scale and the root magnitude
    if residual > 1e-9 * scale * root.abs().max(1.0).powi(3) {
        return Err(Error::Numeric(format!("cubic residual {residual:e} too large")));
    }
    Ok(root)
}
