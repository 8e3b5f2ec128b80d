//! Fixtures shared by the benchmarks.

use pdtp_core::{CtParams, Graph, PdtpParams};

/// `ξ < 1`, served by the low closed-form branch.
pub fn low_branch() -> PdtpParams {
    PdtpParams::new(0.7, 1.754, 0.2).expect("valid parameters")
}

/// `ξ > 1`, served by the high closed-form branch.
pub fn high_branch() -> PdtpParams {
    PdtpParams::new(0.7, 1.754, 5.0).expect("valid parameters")
}

/// `ξ = 1`, oracle only.
pub fn band() -> PdtpParams {
    PdtpParams::new(0.5, 0.5, 1.0).expect("valid parameters")
}

pub fn continuous() -> CtParams {
    CtParams::new(0.5, 0.5, 1.0).expect("valid parameters")
}

pub fn ring(n: usize) -> Graph {
    Graph::cycle(n).expect("n >= 3")
}
