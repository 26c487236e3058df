use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::permutation::permutation_pvalue;
use super::table::{RejectionCell, RejectionTable};
use crate::design::{Dataset, Design};
use crate::error::{Error, Result};
use crate::hypothesis::{check_alpha, f_test, u_test, Method, TestResult};
use crate::randgen::{DesignGen, NoiseFamily, NoiseSampler, NoiseSpec, SeedSpec};

/// Child stream used for the design when it is drawn once per scenario.
const FIXED_DESIGN_STREAM: u64 = u64::MAX;
/// Child stream of a replicate used by the permutation test.
const PERM_STREAM: u64 = u64::MAX - 1;

fn default_n_perm() -> usize {
    199
}

/// A full simulation configuration: one block of a rejection-rate table.
///
/// Each entry of `designs` is one column group of the table, and the random
/// effects use `b_noise` rescaled to every variance in `sigma_b2_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub designs: Vec<DesignGen>,
    #[serde(default)]
    pub redraw_design_per_replicate: bool,
    pub b_noise: NoiseFamily,
    pub e_noise: NoiseSpec,
    pub mu: f64,
    pub sigma_b2_grid: Vec<f64>,
    pub alpha: f64,
    pub replicates: u64,
    pub seed: SeedSpec,
    pub methods: Vec<Method>,
    /// Permutations per replicate when `methods` contains `PERM`.
    #[serde(default = "default_n_perm")]
    pub n_perm: usize,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("scenario {:?}: {msg}", self.name)));
        if self.replicates == 0 {
            return bad("replicates must be >= 1".into());
        }
        if check_alpha(self.alpha).is_err() {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.designs.is_empty() || self.methods.is_empty() || self.sigma_b2_grid.is_empty() {
            return bad("designs, methods and sigma_b2_grid must be non-empty".into());
        }
        if let Some(v) = self.sigma_b2_grid.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return bad(format!("sigma_b2 grid values must be finite and >= 0, got {v}"));
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite".into());
        }
        if self.methods.contains(&Method::Perm) && self.n_perm == 0 {
            return bad("n_perm must be >= 1".into());
        }
        for gen in &self.designs {
            gen.validate()?;
        }
        self.e_noise.sampler()?;
        for &v in &self.sigma_b2_grid {
            self.b_noise.with_variance(v).sampler()?;
        }
        Ok(())
    }
}

/// One draw of `Y_ij = mu + b_i + e_ij` for the given design.
pub fn simulate_dataset<R: Rng + ?Sized>(
    design: &Design,
    b: &NoiseSampler,
    e: &NoiseSampler,
    mu: f64,
    rng: &mut R,
) -> Result<Dataset> {
    let mut values = Vec::with_capacity(design.n());
    for &ni in design.sizes() {
        let effect = mu + b.sample(rng);
        values.extend((0..ni).map(|_| effect + e.sample(rng)));
    }
    Dataset::from_flat(design.clone(), values)
}

#[derive(Debug, Clone, Default)]
struct Tally {
    rejections: Vec<u64>,
    degenerate: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        if self.rejections.is_empty() {
            return other;
        }
        for (a, b) in self.rejections.iter_mut().zip(&other.rejections) {
            *a += b;
        }
        self.degenerate += other.degenerate;
        self
    }
}

fn run_method(method: Method, ds: &Dataset, alpha: f64, n_perm: usize, seed: SeedSpec) -> Result<TestResult> {
    match method {
        Method::U => u_test(ds, alpha),
        Method::F => f_test(ds, alpha),
        Method::Perm => permutation_pvalue(ds, alpha, n_perm, seed.child(PERM_STREAM)),
    }
}

/// Runs every (design, sigma_b^2) cell of the scenario.
///
/// Replicate `r` of cell `(d, g)` uses the stream `seed.child(d).child(g).child(r)`,
/// and the per-cell counts are integer sums, so the table does not depend on
/// the number of worker threads.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<RejectionTable> {
    spec.validate()?;
    let e = spec.e_noise.sampler()?;
    let mut table = RejectionTable::default();

    for (di, gen) in spec.designs.iter().enumerate() {
        let design_seed = spec.seed.child(di as u64);
        let fixed = if spec.redraw_design_per_replicate {
            None
        } else {
            Some(gen.sample(&mut design_seed.child(FIXED_DESIGN_STREAM).rng())?)
        };

        for (gi, &sigma_b2) in spec.sigma_b2_grid.iter().enumerate() {
            let b = spec.b_noise.with_variance(sigma_b2).sampler()?;
            let cell_seed = design_seed.child(gi as u64);

            let tally = (0..spec.replicates)
                .into_par_iter()
                .map(|r| -> Result<Tally> {
                    let rep_seed = cell_seed.child(r);
                    let mut rng = rep_seed.rng();
                    let design = match &fixed {
                        Some(d) => d.clone(),
                        None => gen.sample(&mut rng)?,
                    };
                    let ds = simulate_dataset(&design, &b, &e, spec.mu, &mut rng)?;
                    let mut tally = Tally {
                        rejections: vec![0; spec.methods.len()],
                        degenerate: 0,
                    };
                    for (slot, &method) in tally.rejections.iter_mut().zip(&spec.methods) {
                        match run_method(method, &ds, spec.alpha, spec.n_perm, rep_seed) {
                            Ok(res) => *slot += u64::from(res.reject),
                            Err(Error::DegenerateWithinVariance) => {
                                tally.degenerate += 1;
                            }
                            Err(other) => return Err(other),
                        }
                    }
                    Ok(tally)
                })
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

            table.degenerate_replicates += tally.degenerate;
            for (&method, &count) in spec.methods.iter().zip(&tally.rejections) {
                table.cells.push(RejectionCell::from_count(
                    &spec.name,
                    gen,
                    sigma_b2,
                    method,
                    count,
                    spec.replicates,
                ));
            }
        }
    }
    Ok(table)
}
