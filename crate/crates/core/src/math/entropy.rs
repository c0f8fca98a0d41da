use crate::error::{domain, Result};

/// Number of nats in one bit (`ln 2`).
pub const NATS_PER_BIT: f64 = std::f64::consts::LN_2;

#[inline]
pub fn log2(x: f64) -> f64 {
    x.log2()
}

/// Binary entropy `H(q)` in bits, with `0 log 0 = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("binary entropy needs q in [0, 1], got {q}"));
    }
    Ok(binary_entropy_unchecked(q))
}

/// Binary entropy for callers that have already validated `q`.
#[inline]
pub fn binary_entropy_unchecked(q: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(q) + term(1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn anchors() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // high-precision value 0.468995593589281
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), 0.468_995_593_589_281, epsilon = 1e-14);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(binary_entropy(-1e-9).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(q in 0.0f64..=1.0) {
            let h = binary_entropy(q).unwrap();
            prop_assert!((h - binary_entropy(1.0 - q).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&h));
        }
    }
}
