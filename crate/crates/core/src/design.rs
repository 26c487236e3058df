//! Group-size designs and grouped observations.
//!
//! A [`Design`] is the vector of group sizes `(n_1, ..., n_k)`. Every weight
//! and moment formula in this crate depends on the data only through it.
//! A [`Dataset`] stores the observations flat, in lexicographic order
//! (group 1 first, then group 2, ...), with offsets into each group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Design {
    sizes: Vec<usize>,
    n: usize,
}

impl Design {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::TooFewGroups(sizes.len()));
        }
        if let Some((group, &size)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
            return Err(Error::GroupTooSmall { group, size });
        }
        let n = sizes.iter().sum();
        Ok(Self { sizes, n })
    }

    pub fn balanced(k: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; k])
    }

    /// Number of groups `k`.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of observations `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn is_balanced(&self) -> bool {
        self.sizes.iter().all(|&s| s == self.sizes[0])
    }

    /// `sum_i n_i^2`.
    pub fn sum_sq_sizes(&self) -> f64 {
        self.sizes.iter().map(|&s| (s * s) as f64).sum()
    }

    /// Group index of every observation in lexicographic order.
    pub fn labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
            .collect()
    }

    pub(crate) fn offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.k() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in &self.sizes {
            acc += s;
            offsets.push(acc);
        }
        offsets
    }
}

impl TryFrom<Vec<usize>> for Design {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<Design> for Vec<usize> {
    fn from(d: Design) -> Self {
        d.sizes
    }
}

/// Grouped observations `Y_ij`, stored flat in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    offsets: Vec<usize>,
    design: Design,
}

impl Dataset {
    pub fn from_groups(groups: Vec<Vec<f64>>) -> Result<Self> {
        let design = Design::new(groups.iter().map(Vec::len).collect())?;
        Self::from_flat(design, groups.into_iter().flatten().collect())
    }

    /// Observations already laid out group after group according to `design`.
    pub fn from_flat(design: Design, values: Vec<f64>) -> Result<Self> {
        if values.len() != design.n() {
            return Err(Error::LengthMismatch {
                expected: design.n(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        let offsets = design.offsets();
        Ok(Self {
            values,
            offsets,
            design,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn k(&self) -> usize {
        self.design.k()
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    /// All observations, relabelled `Y_1, ..., Y_n`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observations of group `i` (0-based).
    pub fn group(&self, i: usize) -> Result<&[f64]> {
        if i >= self.k() {
            return Err(Error::GroupIndex { index: i, k: self.k() });
        }
        Ok(&self.values[self.offsets[i]..self.offsets[i + 1]])
    }

    pub fn groups(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.offsets.windows(2).map(move |w| &self.values[w[0]..w[1]])
    }

    /// In-place access for reassigning observations under a fixed design.
    /// Callers must keep every value finite.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}
