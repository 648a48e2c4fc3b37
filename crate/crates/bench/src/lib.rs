//! Shared inputs for the kernel benchmarks in `benches/`.

use fracfit::{BalParams, TapeParams};

/// Fractional blood alcohol parameters near the best fit.
pub fn bal_fractional_params() -> BalParams {
    BalParams {
        a0: 373.0295,
        k1: 0.0643,
        k2: 0.0088,
        alpha: 1.1771,
        beta: 1.0052,
    }
}

pub fn tape_params() -> TapeParams {
    TapeParams {
        p: 2.5,
        b: 0.05,
        alpha: 0.9,
    }
}

/// Observation times of the bundled blood alcohol series.
pub const BAL_TIMES: [f64; 9] = [0.0, 10.0, 20.0, 30.0, 45.0, 80.0, 90.0, 110.0, 170.0];
