use crate::error::{domain, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximizer of a concave function on `[lo, hi]`.
///
/// Returns `(argmax, max)`. The endpoints are compared at the end so boundary
/// maxima (e.g. monotone `g`) are reported exactly. A smooth interior argmax
/// is only resolvable to about `√ε` (~1e-8) in double precision.
pub fn maximize_concave_1d<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    G: FnMut(f64) -> f64,
{
    if !(lo < hi) {
        return domain(format!("maximize_concave_1d needs lo < hi, got [{lo}, {hi}]"));
    }
    if !(tol > 0.0) {
        return domain("maximize_concave_1d needs tol > 0");
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while b - a > tol {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, g(mid));
    for x in [lo, hi] {
        let v = g(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}
