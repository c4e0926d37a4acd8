use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per parallel block; fixed so sums do not depend on thread count.
const BLOCK: usize = 2048;

/// Σ s sᵀ over the rows of a row-major `m × k` score matrix, summed in row
/// order block by block.
fn outer_sum(scores: &[f64], k: usize) -> DMatrix<f64> {
    let parts: Vec<Vec<f64>> = scores
        .par_chunks(BLOCK * k)
        .map(|chunk| {
            let mut acc = vec![0.0; k * k];
            for s in chunk.chunks_exact(k) {
                for a in 0..k {
                    let sa = s[a];
                    for b in a..k {
                        acc[a * k + b] += sa * s[b];
                    }
                }
            }
            acc
        })
        .collect();
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for p in parts {
        for a in 0..k {
            for b in a..k {
                meat[(a, b)] += p[a * k + b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            meat[(a, b)] = meat[(b, a)];
        }
    }
    meat
}

fn sandwich(bread: &DMatrix<f64>, meat: &DMatrix<f64>, factor: f64) -> DMatrix<f64> {
    let v = bread * meat * bread * factor;
    (&v + v.transpose()) * 0.5
}

/// Cluster-robust covariance `B (Σ_g s_g s_gᵀ) B · G/(G−1) · (n−1)/(n−k)`.
///
/// `scores` holds one row of `k` score contributions per entry of
/// `clusters`; `n` is the observation count used in the correction. Cluster
/// sums are formed in order of first appearance, so relabeling clusters
/// leaves the result bit-identical.
pub fn clustered_sandwich(bread: &DMatrix<f64>, scores: &[f64], clusters: &[u32], n: usize) -> Result<DMatrix<f64>> {
    let k = bread.nrows();
    if bread.ncols() != k || scores.len() != clusters.len() * k {
        return Err(Error::invalid("score matrix does not match bread or cluster ids"));
    }
    let mut slot: HashMap<u32, usize> = HashMap::new();
    let mut sums: Vec<f64> = Vec::new();
    for (i, c) in clusters.iter().enumerate() {
        let g = *slot.entry(*c).or_insert_with(|| {
            sums.extend(std::iter::repeat_n(0.0, k));
            sums.len() / k - 1
        });
        let s = &scores[i * k..(i + 1) * k];
        for (acc, v) in sums[g * k..(g + 1) * k].iter_mut().zip(s) {
            *acc += v;
        }
    }
    let g = slot.len();
    if g < 2 {
        return Err(Error::invalid("clustered covariance needs at least two clusters"));
    }
    if n <= k {
        return Err(Error::invalid("clustered covariance needs more observations than parameters"));
    }
    let factor = g as f64 / (g as f64 - 1.0) * (n as f64 - 1.0) / (n as f64 - k as f64);
    Ok(sandwich(bread, &outer_sum(&sums, k), factor))
}

/// Heteroskedasticity-robust covariance `B (Σ_i s_i s_iᵀ) B · n/(n−k)`.
pub fn robust_sandwich(bread: &DMatrix<f64>, scores: &[f64], n: usize) -> Result<DMatrix<f64>> {
    let k = bread.nrows();
    if scores.len() != n * k {
        return Err(Error::invalid("score matrix does not match bread"));
    }
    if n <= k {
        return Err(Error::invalid("robust covariance needs more observations than parameters"));
    }
    Ok(sandwich(bread, &outer_sum(scores, k), n as f64 / (n as f64 - k as f64)))
}
