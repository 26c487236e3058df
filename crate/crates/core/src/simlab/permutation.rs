//! Permutation calibration of `J_n`.
//!
//! Under the null all `n` observations are exchangeable, so reassigning them
//! to groups of the same sizes leaves the null distribution of `J_n`
//! unchanged. Large `J_n` is evidence against the null.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::{check_alpha, j_statistic, Method, TestResult};
use crate::randgen::SeedSpec;

/// Largest number of assignments [`permutation_exact`] will enumerate.
pub const MAX_EXACT_ASSIGNMENTS: u64 = 5_000_000;

/// Relative slack when comparing a permuted statistic with the observed one,
/// so that relabelings reproducing the observed partition count as ties.
const TIE_TOL: f64 = 1e-12;

fn permuted_j(ds: &Dataset) -> f64 {
    j_statistic(ds).map(|(j, ..)| j).unwrap_or(f64::NEG_INFINITY)
}

fn at_least(j: f64, observed: f64) -> bool {
    j >= observed - TIE_TOL * observed.abs().max(1.0)
}

fn result(observed: f64, exceed: u64, draws: u64, alpha: f64, extras_key: &str) -> TestResult {
    let p_value = (1 + exceed) as f64 / (draws + 1) as f64;
    TestResult {
        method: Method::Perm,
        statistic: observed,
        p_value,
        reject: p_value <= alpha,
        alpha,
        df: None,
        extras: BTreeMap::from([
            (extras_key.to_string(), draws as f64),
            ("exceedances".to_string(), exceed as f64),
        ]),
    }
}

/// Monte Carlo permutation p-value `(1 + #{J* >= J_obs}) / (n_perm + 1)`.
///
/// Permutations whose within-treatment variance vanishes count as
/// `J* = -inf`.
pub fn permutation_pvalue(ds: &Dataset, alpha: f64, n_perm: usize, seed: SeedSpec) -> Result<TestResult> {
    check_alpha(alpha)?;
    if n_perm == 0 {
        return Err(Error::Config("n_perm must be >= 1".into()));
    }
    let (observed, ..) = j_statistic(ds)?;
    let mut rng = seed.rng();
    let mut perm = ds.clone();
    let mut exceed = 0u64;
    for _ in 0..n_perm {
        perm.values_mut().shuffle(&mut rng);
        if at_least(permuted_j(&perm), observed) {
            exceed += 1;
        }
    }
    Ok(result(observed, exceed, n_perm as u64, alpha, "n_perm"))
}

fn assignment_count(sizes: &[usize]) -> Option<u64> {
    // multinomial n! / prod n_i!, built as a product of binomials
    let mut total: u64 = 1;
    let mut placed = 0u64;
    for &s in sizes {
        for j in 1..=s as u64 {
            placed += 1;
            total = total.checked_mul(placed)? / j;
        }
    }
    Some(total)
}

/// Exhaustive version of [`permutation_pvalue`]: every distinct assignment of
/// the observations to groups of the observed sizes is evaluated once
/// (the observed assignment included), and the same plus-one correction is
/// applied with the number of assignments in place of `n_perm`.
pub fn permutation_exact(ds: &Dataset, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let sizes = ds.design().sizes().to_vec();
    let count = assignment_count(&sizes).filter(|&c| c <= MAX_EXACT_ASSIGNMENTS);
    if count.is_none() {
        return Err(Error::Config(format!(
            "exhaustive permutation needs at most {MAX_EXACT_ASSIGNMENTS} assignments"
        )));
    }
    let (observed, ..) = j_statistic(ds)?;

    let offsets: Vec<usize> = std::iter::once(0)
        .chain(sizes.iter().scan(0, |acc, &s| {
            *acc += s;
            Some(*acc)
        }))
        .collect();
    let mut walker = Enumerator {
        source: ds.values(),
        fill: vec![0; sizes.len()],
        sizes: &sizes,
        offsets: &offsets,
        scratch: ds.clone(),
        observed,
        visited: 0,
        exceed: 0,
    };
    walker.descend(0);
    Ok(result(observed, walker.exceed, walker.visited, alpha, "assignments"))
}

struct Enumerator<'a> {
    source: &'a [f64],
    sizes: &'a [usize],
    offsets: &'a [usize],
    fill: Vec<usize>,
    scratch: Dataset,
    observed: f64,
    visited: u64,
    exceed: u64,
}

impl Enumerator<'_> {
    fn descend(&mut self, idx: usize) {
        if idx == self.source.len() {
            self.visited += 1;
            if at_least(permuted_j(&self.scratch), self.observed) {
                self.exceed += 1;
            }
            return;
        }
        for g in 0..self.sizes.len() {
            if self.fill[g] < self.sizes[g] {
                let slot = self.offsets[g] + self.fill[g];
                self.scratch.values_mut()[slot] = self.source[idx];
                self.fill[g] += 1;
                self.descend(idx + 1);
                self.fill[g] -= 1;
            }
        }
    }
}
