//! Pairwise-kernel U-statistics and the within/between decomposition.
//!
//! With the kernel `g(x, y) = (x - y)^2 / 2`:
//!
//! * `U_i` averages `g` over pairs inside group `i` (the sample variance),
//! * `U_ii'` averages `g` over one observation from each of groups `i`, `i'`,
//! * `U_n^0` averages `g` over all pairs of the pooled sample,
//!
//! and `U_n^0 = W_n + B_n` splits the pooled statistic into a within part
//! `W_n = sum_i (n_i / n) U_i` and a between part `B_n`, which has mean zero
//! exactly when the between-treatment variance is zero.

use serde::{Deserialize, Serialize};

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::weights::EtaWeights;

/// Mean and centered sum of squares of one group, from a two-pass sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub len: usize,
    pub mean: f64,
    /// `sum_j (y_j - mean)^2`
    pub css: f64,
}

impl GroupSummary {
    pub fn of(values: &[f64]) -> Self {
        let len = values.len();
        let mean = values.iter().sum::<f64>() / len as f64;
        let css = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Self { len, mean, css }
    }

    /// Unbiased sample variance, i.e. `U_i`.
    pub fn variance(&self) -> f64 {
        self.css / (self.len - 1) as f64
    }
}

pub(crate) fn summaries(ds: &Dataset) -> Vec<GroupSummary> {
    ds.groups().map(GroupSummary::of).collect()
}

fn pair_u(a: &GroupSummary, b: &GroupSummary) -> f64 {
    let dm = a.mean - b.mean;
    0.5 * (a.css / a.len as f64 + b.css / b.len as f64 + dm * dm)
}

/// `U_i` for group `i` (0-based): the within-group U-statistic, equal to the
/// unbiased sample variance of that group.
pub fn within_u(ds: &Dataset, i: usize) -> Result<f64> {
    Ok(GroupSummary::of(ds.group(i)?).variance())
}

/// `U_ii'`: the generalized (1,1) U-statistic over groups `i` and `i2`.
///
/// Computed from `2 U_ii' = q_i/n_i + q_i'/n_i' + (m_i - m_i')^2`, where `m`
/// and `q` are the group mean and centered sum of squares.
pub fn between_pair_u(ds: &Dataset, i: usize, i2: usize) -> Result<f64> {
    if i == i2 {
        return Err(Error::SameGroup(i));
    }
    let a = GroupSummary::of(ds.group(i)?);
    let b = GroupSummary::of(ds.group(i2)?);
    Ok(pair_u(&a, &b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `U_1, ..., U_k`
    pub u_within: Vec<f64>,
    /// `U_n^0`, the sample variance of all `n` observations.
    pub u_pooled: f64,
    pub w_n: f64,
    pub b_n: f64,
}

/// Computes `U_i`, `U_n^0`, `W_n` and `B_n` in `O(n + k^2)`.
pub fn decompose(ds: &Dataset) -> Decomposition {
    let groups = summaries(ds);
    let n = ds.n() as f64;

    let u_pooled = GroupSummary::of(ds.values()).variance();
    let u_within: Vec<f64> = groups.iter().map(GroupSummary::variance).collect();
    let w_n = groups.iter().zip(&u_within).map(|(g, u)| g.len as f64 / n * u).sum();

    let norm = n * (n - 1.0);
    let mut b_n = 0.0;
    for (i, a) in groups.iter().enumerate() {
        for (j, b) in groups.iter().enumerate().skip(i + 1) {
            let weight = (a.len * b.len) as f64 / norm;
            b_n += weight * (2.0 * pair_u(a, b) - u_within[i] - u_within[j]);
        }
    }

    Decomposition {
        u_within,
        u_pooled,
        w_n,
        b_n,
    }
}

/// `B_n` as the weighted quadratic form
/// `C(n,2)^{-1} sum_{r<s} eta_rs (Y_r - c)(Y_s - c)`.
///
/// The eta weights have vanishing row sums, so the value does not depend on
/// `center`. This is an `O(n^2)` evaluation kept as an independent route to
/// the `B_n` of [`decompose`].
pub fn b_n_centered(ds: &Dataset, center: f64) -> f64 {
    let eta = EtaWeights::new(ds.design().clone());
    let y: Vec<f64> = ds.values().iter().map(|v| v - center).collect();
    let n = y.len();
    let mut total = 0.0;
    for r in 0..n {
        let mut row = 0.0;
        for (s, ys) in y.iter().enumerate().skip(r + 1) {
            row += eta.eta(r, s) * ys;
        }
        total += y[r] * row;
    }
    let pairs = (n * (n - 1)) as f64 / 2.0;
    total / pairs
}
