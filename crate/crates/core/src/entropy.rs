//! Entropy helpers. All entropies are in bits, with `0 log 0 = 0`.

/// `-x log2 x`, taken as 0 for `x <= 0`.
pub fn neg_xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Shannon entropy of a probability vector.
pub fn shannon_bits(probs: &[f64]) -> f64 {
    probs.iter().copied().map(neg_xlog2x).sum()
}

/// Binary entropy `h(x) = -x log2 x - (1 - x) log2 (1 - x)`.
pub fn binary_entropy_bits(x: f64) -> f64 {
    neg_xlog2x(x) + neg_xlog2x(1.0 - x)
}
