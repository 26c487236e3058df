//! The U-test and the classical F-test for `H0: sigma_b^2 = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::Dataset;
use crate::error::{domain, Error, Result};
use crate::special::{f_sf, normal_sf};
use crate::ustat::{decompose, summaries, Decomposition};
use crate::weights::m_n;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    U,
    F,
    Perm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::U => "U",
            Method::F => "F",
            Method::Perm => "PERM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "U" => Ok(Method::U),
            "F" => Ok(Method::F),
            "PERM" => Ok(Method::Perm),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    /// Numerator and denominator degrees of freedom (F only).
    pub df: Option<(f64, f64)>,
    pub extras: BTreeMap<String, f64>,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// `J_n = C(n,2) B_n / (W_n sqrt(M_n))`.
pub fn j_statistic(ds: &Dataset) -> Result<(f64, Decomposition, f64)> {
    let dec = decompose(ds);
    if dec.w_n <= 0.0 {
        return Err(Error::DegenerateWithinVariance);
    }
    let n = ds.n() as f64;
    let mn = m_n(ds.design());
    let j = n * (n - 1.0) / 2.0 * dec.b_n / (dec.w_n * mn.sqrt());
    Ok((j, dec, mn))
}

/// Asymptotic U-test: reject when `J_n >= z_alpha`, i.e. when the upper
/// standard normal tail at `J_n` is at most `alpha`.
pub fn u_test(ds: &Dataset, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (j, dec, mn) = j_statistic(ds)?;
    let p_value = normal_sf(j);
    let extras = BTreeMap::from([
        ("w_n".to_string(), dec.w_n),
        ("b_n".to_string(), dec.b_n),
        ("m_n".to_string(), mn),
    ]);
    Ok(TestResult {
        method: Method::U,
        statistic: j,
        p_value,
        reject: p_value <= alpha,
        alpha,
        df: None,
        extras,
    })
}

/// Between- and within-treatment sums of squares `(SQ(b), SQ(e))`.
pub fn sums_of_squares(ds: &Dataset) -> (f64, f64) {
    let groups = summaries(ds);
    let grand = ds.values().iter().sum::<f64>() / ds.n() as f64;
    let sq_b = groups.iter().map(|g| g.len as f64 * (g.mean - grand).powi(2)).sum();
    let sq_e = groups.iter().map(|g| g.css).sum();
    (sq_b, sq_e)
}

/// Classical one-way ANOVA F-test with `(k - 1, n - k)` degrees of freedom.
pub fn f_test(ds: &Dataset, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (sq_b, sq_e) = sums_of_squares(ds);
    if sq_e <= 0.0 {
        return Err(Error::DegenerateWithinVariance);
    }
    let d1 = (ds.k() - 1) as f64;
    let d2 = (ds.n() - ds.k()) as f64;
    let f = (sq_b / d1) / (sq_e / d2);
    let p_value = f_sf(f, d1, d2)?;
    let extras = BTreeMap::from([
        ("sq_b".to_string(), sq_b),
        ("sq_e".to_string(), sq_e),
        ("df1".to_string(), d1),
        ("df2".to_string(), d2),
    ]);
    Ok(TestResult {
        method: Method::F,
        statistic: f,
        p_value,
        reject: p_value <= alpha,
        alpha,
        df: Some((d1, d2)),
        extras,
    })
}
