#![allow(dead_code)]

use netvar::CovMatrix;

pub const SAMPLE_SIZES: [usize; 5] = [10, 20, 50, 100, 200];

/// The three 2x2 example covariances as exact integer numerators over a
/// common denominator: `(a, b, c, denominator)` for `[[a, b], [b, c]]`.
pub const EXAMPLES: [(i64, i64, i64, i64); 3] = [(6, 1, 6, 25), (66, -21, 126, 625), (66, 91, 126, 625)];

pub fn example(i: usize) -> CovMatrix {
    let (a, b, c, d) = EXAMPLES[i];
    let d = d as f64;
    CovMatrix::from_rows(&[[a as f64 / d, b as f64 / d], [b as f64 / d, c as f64 / d]]).unwrap()
}

pub fn examples() -> [CovMatrix; 3] {
    [example(0), example(1), example(2)]
}
