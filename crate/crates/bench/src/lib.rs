//! Fixed inputs shared by the benchmarks.

use uniclass_core::generate::{block_diag_a, haar_unitary, mixed_4x2};
use uniclass_core::BipartiteOperator;

/// `(label, operator)` pairs for the classification benchmarks.
pub fn classify_inputs() -> Vec<(&'static str, BipartiteOperator)> {
    vec![
        ("block_diag_A_2x3", block_diag_a(2, 3, 3, 1).expect("valid shape")),
        ("block_diag_A_3x3", block_diag_a(3, 3, 3, 1).expect("valid shape")),
        ("haar_3x3", BipartiteOperator::from_dims(3, 3, haar_unitary(9, 1)).expect("valid shape")),
        ("mixed_4x2", mixed_4x2()),
    ]
}

/// Block-diagonal operators of growing size, `(n, k)` with `n = k`.
pub fn block_diag_ladder() -> Vec<((usize, usize), BipartiteOperator)> {
    [2, 3, 4]
        .into_iter()
        .map(|d| ((d, d), block_diag_a(d, d, d, 7).expect("valid shape")))
        .collect()
}
