//! Inputs shared by the benchmarks.

use num_bigint::BigInt;
use pisot_core::{generate, LinearRecurrence, Offset, PisotParams};

pub fn params(x: u64, y: u64) -> PisotParams {
    PisotParams::new(x, y, Offset::half()).expect("valid parameters")
}

/// A known recurrence for `E(x, y)` with initial terms taken from the sequence.
pub fn recurrence(x: u64, y: u64, coefficients: &[i64]) -> LinearRecurrence {
    let initial = generate(&params(x, y), coefficients.len().max(2))
        .expect("sequence generates")
        .terms[..coefficients.len()]
        .to_vec();
    LinearRecurrence::new(coefficients.iter().map(|&a| BigInt::from(a)).collect(), initial).expect("valid recurrence")
}

/// `(label, x, y, coefficients)` for the benchmark cases.
pub const CASES: [(&str, u64, u64, &[i64]); 3] = [
    ("E(4,7)", 4, 7, &[2, -1, 1]),
    ("E(5,17)", 5, 17, &[4, -2]),
    ("E(10,219)", 10, 219, &[22, -3, 18, -11]),
];
