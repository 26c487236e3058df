//! Monte Carlo size/power studies and permutation calibration of `J_n`.

mod permutation;
mod presets;
mod scenario;
mod table;

pub use permutation::{permutation_exact, permutation_pvalue};
pub use presets::{preset, PRESET_NAMES};
pub use scenario::{run_scenario, simulate_dataset, ScenarioSpec};
pub use table::{RejectionCell, RejectionTable};

use crate::error::{domain, Result};

/// Monte Carlo standard error `sqrt(rate (1 - rate) / n)` of a rejection rate.
pub fn mc_se(rate: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return domain(format!("rate must lie in [0, 1], got {rate}"));
    }
    if n == 0 {
        return domain("replicate count must be >= 1");
    }
    Ok((rate * (1.0 - rate) / n as f64).sqrt())
}
