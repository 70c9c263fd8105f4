//! Monte-Carlo error bars.

use serde::Serialize;

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Number of jackknife blocks. Blocks absorb the autocorrelation of chain output.
pub const JACKKNIFE_BLOCKS: usize = 100;

/// Block sums of `values` over `blocks` contiguous, nearly equal blocks.
pub(crate) fn block_partition(n: usize, blocks: usize) -> Vec<(usize, usize)> {
    let b = blocks.clamp(1, n.max(1));
    (0..b).map(|i| (i * n / b, (i + 1) * n / b)).collect()
}

/// Mean of `values` with a delete-one-block jackknife standard error.
pub fn jackknife_mean(values: &[f64]) -> FunctionalEstimate {
    jackknife_mean_blocks(values, JACKKNIFE_BLOCKS)
}

pub fn jackknife_mean_blocks(values: &[f64], blocks: usize) -> FunctionalEstimate {
    let n = values.len();
    if n == 0 {
        return FunctionalEstimate { value: f64::NAN, std_error: f64::NAN, n_samples: 0 };
    }
    let parts = block_partition(n, blocks);
    let sums: Vec<(f64, usize)> = parts
        .iter()
        .map(|&(a, b)| (values[a..b].iter().sum::<f64>(), b - a))
        .collect();
    jackknife_from_block_sums(&sums, n)
}

/// Jackknife from precomputed `(block sum, block length)` pairs.
pub(crate) fn jackknife_from_block_sums(sums: &[(f64, usize)], n: usize) -> FunctionalEstimate {
    let total: f64 = sums.iter().map(|s| s.0).sum();
    let mean = total / n as f64;
    let b = sums.len();
    if b < 2 {
        return FunctionalEstimate { value: mean, std_error: 0.0, n_samples: n };
    }
    let leave_out: Vec<f64> = sums
        .iter()
        .map(|&(s, len)| (total - s) / (n - len) as f64)
        .collect();
    let avg = leave_out.iter().sum::<f64>() / b as f64;
    let var = leave_out.iter().map(|t| (t - avg).powi(2)).sum::<f64>() * (b as f64 - 1.0) / b as f64;
    FunctionalEstimate { value: mean, std_error: var.sqrt(), n_samples: n }
}
