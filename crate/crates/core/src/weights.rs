//! Pair weights `eta_rs` that write `B_n` as a centered quadratic form, and
//! their squared sum `M_n`, the null variance scale of `B_n`.

use crate::design::Design;

/// `M_n = sum_{r<s} eta_rs^2` from its closed form
/// `C(n,2) (k-1) {1 + (1/n) sum_i (n - n_i) / ((n_i - 1)(k - 1))}`.
pub fn m_n(design: &Design) -> f64 {
    let n = design.n() as f64;
    let km1 = (design.k() - 1) as f64;
    let correction: f64 = design
        .sizes()
        .iter()
        .map(|&ni| {
            let ni = ni as f64;
            (n - ni) / ((ni - 1.0) * km1)
        })
        .sum();
    n * (n - 1.0) / 2.0 * km1 * (1.0 + correction / n)
}

/// Weights for every pair of observations of a design, addressed by the
/// lexicographic observation index `0..n`.
#[derive(Debug, Clone)]
pub struct EtaWeights {
    design: Design,
    labels: Vec<usize>,
    same_group: Vec<f64>,
    m_n: f64,
}

impl EtaWeights {
    pub fn new(design: Design) -> Self {
        let n = design.n() as f64;
        let same_group = design
            .sizes()
            .iter()
            .map(|&ni| (n - ni as f64) / (ni as f64 - 1.0))
            .collect();
        let labels = design.labels();
        let m_n = m_n(&design);
        Self {
            design,
            labels,
            same_group,
            m_n,
        }
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    /// `(n - n_i)/(n_i - 1)` when observations `r` and `s` share group `i`,
    /// `-1` otherwise. Symmetric; `r == s` is not a pair and yields 0.
    pub fn eta(&self, r: usize, s: usize) -> f64 {
        if r == s {
            0.0
        } else if self.labels[r] == self.labels[s] {
            self.same_group[self.labels[r]]
        } else {
            -1.0
        }
    }

    /// Weight shared by all pairs inside group `i`.
    pub fn within_weight(&self, i: usize) -> f64 {
        self.same_group[i]
    }

    pub fn m_n(&self) -> f64 {
        self.m_n
    }

    /// `sum_{s != r} eta_rs`; zero for every `r`.
    pub fn row_sum(&self, r: usize) -> f64 {
        (0..self.labels.len()).map(|s| self.eta(r, s)).sum()
    }

    /// `sum_{r<s} eta_rs` by enumeration.
    pub fn total_sum(&self) -> f64 {
        self.pairs().map(|(_, _, w)| w).sum()
    }

    /// `sum_{r<s} eta_rs^2` by enumeration.
    pub fn direct_m_n(&self) -> f64 {
        self.pairs().map(|(_, _, w)| w * w).sum()
    }

    /// Every pair `r < s` with its weight.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.labels.len();
        (0..n).flat_map(move |r| ((r + 1)..n).map(move |s| (r, s, self.eta(r, s))))
    }
}

/// Builds the weights for `design`.
pub fn eta_weights(design: &Design) -> EtaWeights {
    EtaWeights::new(design.clone())
}
