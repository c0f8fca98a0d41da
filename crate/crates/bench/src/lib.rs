//! Fixtures shared by the benchmarks.

use rdna_core::bsms::{joint_chain, optimal_reproduction};
use rdna_core::{GaussModel, JointChain};

pub const TWO_STATE: &str = "dims = 2 2 2 2\nA = 0.8 0.2\n    -0.1 0.5\nB = 1 0\n    0.3 0.7\nC = 1 0.4\n    0 1\nN = 0.5 0\n    0 0.3\n";

pub fn two_state_model() -> GaussModel {
    TWO_STATE.parse().expect("fixture parses")
}

/// Block-diagonal copies of the two-state model: a `2k`-state source.
pub fn stacked_model(k: usize) -> GaussModel {
    let base = two_state_model();
    let n = 2 * k;
    let mut text = format!("dims = {n} {n} {n} {n}\n");
    for (name, m) in [("A", &base.a), ("B", &base.b), ("C", &base.c), ("N", &base.n)] {
        let mut vals = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let same = i / 2 == j / 2;
                vals.push(if same { m[(i % 2, j % 2)] } else { 0.0 });
            }
        }
        let row: Vec<String> = vals.iter().map(f64::to_string).collect();
        text.push_str(&format!("{name} = {}\n", row.join(" ")));
    }
    text.parse().expect("stacked fixture parses")
}

pub fn reference_chain() -> JointChain {
    joint_chain(&optimal_reproduction(0.3, 0.1).expect("valid design")).expect("valid chain")
}
