//! Closed-form moments of the statistics, the local-alternative drift, and
//! two descriptive summaries (intraclass correlation and design imbalance).

use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{domain, Result};
use crate::weights::m_n;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentOracle {
    /// `E[B_n] = sigma_b^2 (n^2 - sum n_i^2) / (n (n - 1))`
    pub e_bn: f64,
    /// `Var[B_n]` under the null: `sigma_e^4 M_n / C(n,2)^2`
    pub var_bn_null: f64,
    /// `Var[U_i] = E[e^4]/n_i - (n_i - 3) sigma_e^4 / ((n_i - 1) n_i)` per group
    pub var_ui: Vec<f64>,
    /// Finite-n plug-in `M_n / n^3` for the limit `lambda`.
    pub lambda_n: f64,
    /// Mean of the limiting normal for `J_n` when `sigma_b^2 = delta^2/sqrt(n)`,
    /// evaluated at the `delta` implied by the given `sigma_b^2`.
    pub shift: f64,
}

pub fn moment_oracle(design: &Design, sigma_b2: f64, sigma_e2: f64, e4: f64) -> Result<MomentOracle> {
    if sigma_b2.is_nan() || sigma_b2 < 0.0 {
        return domain(format!("sigma_b^2 must be >= 0, got {sigma_b2}"));
    }
    if sigma_e2.is_nan() || sigma_e2 <= 0.0 {
        return domain(format!("sigma_e^2 must be > 0, got {sigma_e2}"));
    }
    let sigma_e4 = sigma_e2 * sigma_e2;
    if e4.is_nan() || e4 < sigma_e4 {
        return domain(format!("fourth moment {e4} is below sigma_e^4 = {sigma_e4}"));
    }
    let n = design.n() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let mn = m_n(design);
    let lambda_n = mn / n.powi(3);

    let var_ui = design
        .sizes()
        .iter()
        .map(|&ni| {
            let ni = ni as f64;
            e4 / ni - (ni - 3.0) * sigma_e4 / ((ni - 1.0) * ni)
        })
        .collect();

    Ok(MomentOracle {
        e_bn: sigma_b2 * (n * n - design.sum_sq_sizes()) / (n * (n - 1.0)),
        var_bn_null: sigma_e4 * mn / (pairs * pairs),
        var_ui,
        lambda_n,
        shift: sigma_b2 * n.sqrt() / (2.0 * sigma_e2 * lambda_n.sqrt()),
    })
}

/// Asymptotic mean `delta^2 / (2 sigma_e^2 sqrt(lambda_n))` of `J_n` under
/// the local alternatives `sigma_b^2 = delta^2 / sqrt(n)`.
pub fn local_shift(design: &Design, delta: f64, sigma_e2: f64) -> Result<f64> {
    if sigma_e2.is_nan() || sigma_e2 <= 0.0 {
        return domain(format!("sigma_e^2 must be > 0, got {sigma_e2}"));
    }
    let n = design.n() as f64;
    let lambda_n = m_n(design) / n.powi(3);
    Ok(delta * delta / (2.0 * sigma_e2 * lambda_n.sqrt()))
}

/// Intraclass correlation `sigma_b^2 / (sigma_b^2 + sigma_e^2)`.
pub fn icc(sigma_b2: f64, sigma_e2: f64) -> Result<f64> {
    if sigma_e2.is_nan() || sigma_e2 <= 0.0 {
        return domain(format!("sigma_e^2 must be > 0, got {sigma_e2}"));
    }
    if sigma_b2.is_nan() || sigma_b2 < 0.0 {
        return domain(format!("sigma_b^2 must be >= 0, got {sigma_b2}"));
    }
    Ok(sigma_b2 / (sigma_b2 + sigma_e2))
}

/// Imbalance `1 / (1 + cv^2)` of the group sizes, with the coefficient of
/// variation taken over the population standard deviation (divisor `k`).
pub fn kappa(design: &Design) -> f64 {
    let sizes: Vec<f64> = design.sizes().iter().map(|&s| s as f64).collect();
    let k = sizes.len() as f64;
    let mean = sizes.iter().sum::<f64>() / k;
    let var = sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / k;
    1.0 / (1.0 + var / (mean * mean))
}
