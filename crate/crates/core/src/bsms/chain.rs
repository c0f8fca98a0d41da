use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{source_kernel, BsmsDesign};
use crate::error::{domain, Error, Result};
use crate::math::{is_irreducible, NATS_PER_BIT};

const COLUMN_TOL: f64 = 1e-12;

/// Finite Markov chain with a distortion label per state.
///
/// `transition[(i, j)]` is the probability of moving to state `i` from state
/// `j`, so every column sums to one. For BSMS chains the states are
/// `(x, y) = (0,0), (0,1), (1,0), (1,1)` and the labels are `x ⊕ y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointChain {
    pub transition: DMatrix<f64>,
    pub stationary: DVector<f64>,
    pub f: Vec<f64>,
    pub design: Option<BsmsDesign>,
}

impl JointChain {
    /// Validates a column-stochastic irreducible matrix and solves for its
    /// stationary vector.
    pub fn new(transition: DMatrix<f64>, f: Vec<f64>) -> Result<Self> {
        let n = transition.nrows();
        if !transition.is_square() || n == 0 || f.len() != n {
            return domain("chain needs a square transition matrix and one label per state");
        }
        if transition.iter().any(|v| !(0.0..=1.0 + COLUMN_TOL).contains(v)) {
            return domain("transition entries must be probabilities");
        }
        for (j, col) in transition.column_iter().enumerate() {
            if (col.sum() - 1.0).abs() > COLUMN_TOL {
                return domain(format!("column {j} sums to {}", col.sum()));
            }
        }
        if !is_irreducible(&transition) {
            return domain("chain is reducible");
        }
        let stationary = stationary_vector(&transition)?;
        Ok(Self { transition, stationary, f, design: None })
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Stationary mean of the distortion labels.
    pub fn mean_f(&self) -> f64 {
        self.stationary.iter().zip(&self.f).map(|(p, f)| p * f).sum()
    }

    /// Largest absolute value of the labels (`‖f‖`).
    pub fn f_norm(&self) -> f64 {
        self.f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn stationary_vector(pi: &DMatrix<f64>) -> Result<DVector<f64>> {
    // (Π − I)π = 0 with the last equation replaced by Σπ = 1
    let n = pi.nrows();
    let mut lhs = pi - DMatrix::<f64>::identity(n, n);
    lhs.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("stationary system is singular".into()))?;
    Ok(sol.map(|v| v.max(0.0)))
}

#[inline]
pub(crate) fn state_index(x: u8, y: u8) -> usize {
    2 * x as usize + y as usize
}

/// Joint chain of `(X_i, Y_i)` under BSMS(p) and the optimal kernel.
pub fn joint_chain(design: &BsmsDesign) -> Result<JointChain> {
    let (p, a, b) = (design.p, design.alpha, design.beta);
    let q = 1.0 - p;
    #[rustfmt::skip]
    let transition = DMatrix::from_row_slice(4, 4, &[
        a * q,         b * q,         a * p,         b * p,
        (1.0 - a) * q, (1.0 - b) * q, (1.0 - a) * p, p * (1.0 - b),
        (1.0 - b) * p, (1.0 - a) * p, (1.0 - b) * q, (1.0 - a) * q,
        b * p,         a * p,         b * q,         a * q,
    ]);
    let mut chain = JointChain::new(transition, vec![0.0, 1.0, 1.0, 0.0])?;
    chain.design = Some(*design);
    Ok(chain)
}

/// Stationary `P(x_i, y_i, y_{i-1})`, indexed `[x][y][y_prev]`.
fn triple_marginal(chain: &JointChain, design: &BsmsDesign) -> [[[f64; 2]; 2]; 2] {
    let mut out = [[[0.0; 2]; 2]; 2];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for yp in 0..2u8 {
                out[x as usize][y as usize][yp as usize] = (0..2u8)
                    .map(|xp| {
                        chain.stationary[state_index(xp, yp)]
                            * source_kernel(design.p, x, xp)
                            * design.kernel(y, yp, x)
                    })
                    .sum();
            }
        }
    }
    out
}

/// Directed information rate `Σ P(x, y, y') log₂(Q*(y|y',x) / P*(y|y'))` in bits.
pub fn directed_info_rate(chain: &JointChain, design: &BsmsDesign) -> f64 {
    let joint = triple_marginal(chain, design);
    let mut rate = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            for yp in 0..2u8 {
                let w = joint[x as usize][y as usize][yp as usize];
                if w > 0.0 {
                    rate += w * (design.kernel(y, yp, x) / design.marginal_kernel(y, yp)).log2();
                }
            }
        }
    }
    rate
}

/// Outcome of checking the optimal kernel against its exponential-tilt form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedFormCheck {
    /// Lagrange multiplier `s ≤ 0` (nats per unit distortion).
    pub s: f64,
    /// Largest relative deviation between the kernel and `e^{sρ} P*(y|y') / Z`.
    pub max_deviation: f64,
    /// Largest `|Σₓ e^{sρ(x,y)} λ(x,y') P(x|y') − 1|` over `(y, y')`.
    pub lagrange_residual: f64,
    /// Dual value `sD + E[log λ(X_i, Y_{i-1})]`, converted to bits.
    pub dual_rate: f64,
}

/// Recovers `s` from the kernel and checks every cell against the tilted form.
pub fn verify_tilted_form(design: &BsmsDesign) -> Result<TiltedFormCheck> {
    let p = design.p;
    // α = (1−p) / ((1−p) + eˢ p)
    let es = (1.0 - design.alpha) * (1.0 - p) / (design.alpha * p);
    let s = es.ln();
    let tilt = |x: u8, y: u8| if x == y { 1.0 } else { es };

    let mut max_deviation = 0.0f64;
    for yp in 0..2u8 {
        for x in 0..2u8 {
            let z: f64 = (0..2u8).map(|y| tilt(x, y) * design.marginal_kernel(y, yp)).sum();
            for y in 0..2u8 {
                let predicted = tilt(x, y) * design.marginal_kernel(y, yp) / z;
                let actual = design.kernel(y, yp, x);
                max_deviation = max_deviation.max((predicted - actual).abs() / actual);
            }
        }
    }

    let chain = joint_chain(design)?;
    let st = &chain.stationary;
    // λ(x, y') = 1 / Σ_y e^{sρ(x,y)} P*(y|y')
    let lambda = |x: u8, yp: u8| {
        1.0 / (0..2u8).map(|y| tilt(x, y) * design.marginal_kernel(y, yp)).sum::<f64>()
    };
    // P(x_i = x, y_{i-1} = y') from the stationary chain
    let joint_x_yp = |x: u8, yp: u8| -> f64 {
        (0..2u8)
            .map(|xp| st[state_index(xp, yp)] * source_kernel(p, x, xp))
            .sum()
    };
    let mut lagrange_residual = 0.0f64;
    let mut expected_log_lambda = 0.0;
    for yp in 0..2u8 {
        let p_yp: f64 = (0..2u8).map(|x| joint_x_yp(x, yp)).sum();
        for y in 0..2u8 {
            let total: f64 = (0..2u8)
                .map(|x| tilt(x, y) * lambda(x, yp) * joint_x_yp(x, yp) / p_yp)
                .sum();
            lagrange_residual = lagrange_residual.max((total - 1.0).abs());
        }
        for x in 0..2u8 {
            expected_log_lambda += joint_x_yp(x, yp) * lambda(x, yp).ln();
        }
    }
    let dual_rate = (s * design.d + expected_log_lambda) / NATS_PER_BIT;

    if !(s <= 0.0) || max_deviation > 1e-8 || lagrange_residual > 1e-8 {
        return Err(Error::Consistency(format!(
            "kernel is not of tilted form: s = {s}, deviation {max_deviation:e}, residual {lagrange_residual:e}"
        )));
    }
    Ok(TiltedFormCheck { s, max_deviation, lagrange_residual, dual_rate })
}

#[cfg(test)]
mod tests {
    use super::super::{optimal_reproduction, rna_bsms};
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chain_matches_kernel_product() {
        // independent construction: P(x,y | x',y') = P(x|x') Q*(y|y',x)
        for (p, d) in [(0.25, 0.1), (0.3, 0.1), (0.1, 0.3), (0.5, 0.2)] {
            let design = optimal_reproduction(p, d).unwrap();
            let chain = joint_chain(&design).unwrap();
            for xp in 0..2u8 {
                for yp in 0..2u8 {
                    for x in 0..2u8 {
                        for y in 0..2u8 {
                            let oracle = source_kernel(p, x, xp) * design.kernel(y, yp, x);
                            let entry = chain.transition[(state_index(x, y), state_index(xp, yp))];
                            assert_abs_diff_eq!(entry, oracle, epsilon = 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chain_invariants() {
        let design = optimal_reproduction(0.25, 0.1).unwrap();
        let chain = joint_chain(&design).unwrap();
        for col in chain.transition.column_iter() {
            assert_abs_diff_eq!(col.sum(), 1.0, epsilon = 1e-12);
        }
        let moved = &chain.transition * &chain.stationary;
        assert!((moved - &chain.stationary).amax() < 1e-10);
        assert_abs_diff_eq!(chain.mean_f(), 0.1, epsilon = 1e-9);
    }

    #[test]
    fn iid_chain_factorizes() {
        // p = 1/2: next x is a fair coin whatever the current state
        let design = optimal_reproduction(0.5, 0.3).unwrap();
        let chain = joint_chain(&design).unwrap();
        for j in 0..4 {
            let col = chain.transition.column(j);
            assert_abs_diff_eq!(col[0] + col[1], 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(col[2] + col[3], 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn reproduction_marginal_is_source_kernel() {
        for (p, d) in [(0.25, 0.1), (0.3, 0.1), (0.1, 0.45), (0.7, 0.2)] {
            let design = optimal_reproduction(p, d).unwrap();
            let chain = joint_chain(&design).unwrap();
            for yp in 0..2u8 {
                let p_yp: f64 = (0..2u8).map(|xp| chain.stationary[state_index(xp, yp)]).sum();
                for y in 0..2u8 {
                    let mut joint = 0.0;
                    for xp in 0..2u8 {
                        for x in 0..2u8 {
                            joint += chain.transition[(state_index(x, y), state_index(xp, yp))]
                                * chain.stationary[state_index(xp, yp)];
                        }
                    }
                    assert_abs_diff_eq!(joint / p_yp, source_kernel(p, y, yp), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn directed_information_examples() {
        for (p, d) in [(0.25, 0.1), (0.1, 0.3)] {
            let design = optimal_reproduction(p, d).unwrap();
            let chain = joint_chain(&design).unwrap();
            assert_abs_diff_eq!(directed_info_rate(&chain, &design), rna_bsms(p, d).unwrap(), epsilon = 1e-9);
        }
        let design = optimal_reproduction(0.5, 0.2).unwrap();
        let chain = joint_chain(&design).unwrap();
        assert_abs_diff_eq!(directed_info_rate(&chain, &design), 0.278_071_905_112_638, epsilon = 1e-9);
    }

    #[test]
    fn tilted_form_iid_closed_form() {
        let design = optimal_reproduction(0.5, 0.25).unwrap();
        let check = verify_tilted_form(&design).unwrap();
        assert_abs_diff_eq!(check.s, (0.25f64 / 0.75).ln(), epsilon = 1e-12);
        assert!(check.max_deviation < 1e-12);
    }

    #[test]
    fn tilted_form_memory_cases() {
        for (p, d) in [(0.25, 0.1), (0.3, 0.1)] {
            let design = optimal_reproduction(p, d).unwrap();
            let check = verify_tilted_form(&design).unwrap();
            assert!(check.s < 0.0);
            assert!(check.max_deviation < 1e-10);
            assert!(check.lagrange_residual < 1e-10);
            assert_abs_diff_eq!(check.dual_rate, design.rate, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_bad_chains() {
        let not_stochastic = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.5]);
        assert!(JointChain::new(not_stochastic, vec![0.0, 1.0]).is_err());
        let reducible = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.5]);
        assert!(JointChain::new(reducible, vec![0.0, 1.0]).is_err());
    }
}
