//! Closed-form operation and memory counts per method.
//!
//! A multiply-add counts as two FLOPs. Peak is the largest single buffer a
//! forward pass allocates, in scalar elements. Both models describe exactly
//! what the kernels in [`crate::tensor`] report to the probe.

use crate::blocks::Method;

/// FLOPs of one core forward pass on an `n × c` input (`d` is the latent
/// width and is ignored by methods without one).
pub fn flop_model(method: Method, n: u64, c: u64, d: u64) -> u64 {
    match method {
        // X·W_f, (·)·Xᵀ, (·)·X, (·)·W_g
        Method::Nl => 4 * n * n * c + 4 * n * c * c,
        // X·W_g, Xᵀ·(·), W_f·(·), X·(·)
        Method::Enl => 6 * n * c * c + 2 * c * c * c,
        // three N×C by C×C products, two Hadamards, pooling sums, expansion multiply
        Method::PolyNl => 6 * n * c * c + 4 * n * c,
        // X·W_enc, Eᵀ·X, G·L, X·W_dec, D·L'
        Method::LatentGnn => 8 * n * d * c + 2 * d * d * c,
        Method::Conv1x1 => 2 * n * c * c,
    }
}

/// Largest live intermediate of one core forward pass, in elements.
pub fn peak_model(method: Method, n: u64, c: u64, d: u64) -> u64 {
    match method {
        Method::Nl => (n * n).max(n * c),
        Method::Enl => (n * c).max(c * c),
        Method::PolyNl => n * c,
        Method::LatentGnn => (n * c).max(n * d).max(d * c),
        Method::Conv1x1 => n * c,
    }
}
