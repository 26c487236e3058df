//! Reproducible random variates for the simulation designs.
//!
//! Every stream is a ChaCha8 generator keyed by a master seed and selected by
//! a 64-bit stream id, so streams are deterministic and independent without
//! any shared state. Child streams are derived by mixing an index into the
//! parent's stream id.

use libm::lgamma as ln_gamma;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Geometric, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{domain, Error, Result};

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    #[serde(default)]
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn from_master(master_seed: u64) -> Self {
        Self::new(master_seed, 0)
    }

    /// Deterministic sub-stream `index` of this stream.
    pub fn child(&self, index: u64) -> Self {
        let stream_id = mix64(self.stream_id.wrapping_mul(GOLDEN) ^ mix64(index.wrapping_add(GOLDEN)));
        Self {
            master_seed: self.master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Normal,
    /// Student t with `df` degrees of freedom, rescaled to the target variance.
    ScaledT {
        df: f64,
    },
    /// Azzalini skew-t (location 0, dispersion 1), standardized with its exact
    /// mean and variance, then rescaled to the target variance.
    SkewTStd {
        df: f64,
        asymmetry: f64,
    },
}

impl NoiseFamily {
    pub fn with_variance(self, target_variance: f64) -> NoiseSpec {
        NoiseSpec {
            family: self,
            target_variance,
        }
    }

    pub fn label(&self) -> String {
        match self {
            NoiseFamily::Normal => "normal".to_string(),
            NoiseFamily::ScaledT { df } => format!("t{df}"),
            NoiseFamily::SkewTStd { df, asymmetry } => format!("skew-t{df}(lambda={asymmetry})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub target_variance: f64,
}

impl NoiseSpec {
    pub fn normal(variance: f64) -> Self {
        NoiseFamily::Normal.with_variance(variance)
    }

    pub fn scaled_t(df: f64, variance: f64) -> Self {
        NoiseFamily::ScaledT { df }.with_variance(variance)
    }

    pub fn skew_t(df: f64, asymmetry: f64, variance: f64) -> Self {
        NoiseFamily::SkewTStd { df, asymmetry }.with_variance(variance)
    }

    /// `E[X^4]` of the generated variate, when finite.
    pub fn fourth_moment(&self) -> Option<f64> {
        let v2 = self.target_variance * self.target_variance;
        match self.family {
            NoiseFamily::Normal => Some(3.0 * v2),
            NoiseFamily::ScaledT { df } if df > 4.0 => Some(3.0 * (df - 2.0) / (df - 4.0) * v2),
            _ => None,
        }
    }

    pub fn sampler(&self) -> Result<NoiseSampler> {
        NoiseSampler::new(self)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Zero,
    Normal {
        sd: f64,
    },
    T {
        chi2: ChiSquared<f64>,
        df: f64,
        scale: f64,
    },
    SkewT {
        chi2: ChiSquared<f64>,
        df: f64,
        delta: f64,
        ortho: f64,
        mean: f64,
        scale: f64,
    },
}

/// Validated, precomputed sampler for one [`NoiseSpec`].
#[derive(Debug, Clone, Copy)]
pub struct NoiseSampler {
    kind: Kind,
}

fn chi2(df: f64) -> Result<ChiSquared<f64>> {
    ChiSquared::new(df).map_err(|e| Error::Domain(format!("chi-square({df}): {e}")))
}

impl NoiseSampler {
    pub fn new(spec: &NoiseSpec) -> Result<Self> {
        let v = spec.target_variance;
        if !(v >= 0.0 && v.is_finite()) {
            return domain(format!("target variance must be finite and >= 0, got {v}"));
        }
        let kind = match spec.family {
            NoiseFamily::ScaledT { df } | NoiseFamily::SkewTStd { df, .. } if df.is_nan() || df <= 2.0 => {
                return domain(format!("t families need df > 2 for a finite variance, got {df}"));
            }
            _ if v == 0.0 => Kind::Zero,
            NoiseFamily::Normal => Kind::Normal { sd: v.sqrt() },
            NoiseFamily::ScaledT { df } => Kind::T {
                chi2: chi2(df)?,
                df,
                scale: (v * (df - 2.0) / df).sqrt(),
            },
            NoiseFamily::SkewTStd { df, asymmetry } => {
                let m = skew_t_moments(asymmetry, df)?;
                let delta = asymmetry / (1.0 + asymmetry * asymmetry).sqrt();
                Kind::SkewT {
                    chi2: chi2(df)?,
                    df,
                    delta,
                    ortho: (1.0 - delta * delta).sqrt(),
                    mean: m.mean,
                    scale: (v / m.variance).sqrt(),
                }
            }
        };
        Ok(Self { kind })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            Kind::Zero => 0.0,
            Kind::Normal { sd } => sd * rng.sample::<f64, _>(StandardNormal),
            Kind::T { chi2, df, scale } => {
                let z: f64 = rng.sample(StandardNormal);
                let w = chi2.sample(rng);
                scale * z / (w / df).sqrt()
            }
            Kind::SkewT {
                chi2,
                df,
                delta,
                ortho,
                mean,
                scale,
            } => {
                let u0: f64 = rng.sample(StandardNormal);
                let u1: f64 = rng.sample(StandardNormal);
                let z = delta * u0.abs() + ortho * u1;
                let w = chi2.sample(rng);
                scale * (z / (w / df).sqrt() - mean)
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}

/// `count` i.i.d. draws from `spec`, using the stream selected by `seed`.
pub fn sample_noise(spec: &NoiseSpec, count: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    let sampler = spec.sampler()?;
    let mut rng = seed.rng();
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewTMoments {
    pub mean: f64,
    pub variance: f64,
    /// Only finite for `df > 3`.
    pub skewness: Option<f64>,
}

/// Mean, variance and skewness of the skew-t with location 0, dispersion 1,
/// asymmetry `lambda` and `df` degrees of freedom.
pub fn skew_t_moments(lambda: f64, df: f64) -> Result<SkewTMoments> {
    if df.is_nan() || df <= 2.0 {
        return domain(format!("skew-t variance needs df > 2, got {df}"));
    }
    let delta = lambda / (1.0 + lambda * lambda).sqrt();
    let b = ((df / std::f64::consts::PI).ln() / 2.0 + ln_gamma((df - 1.0) / 2.0) - ln_gamma(df / 2.0)).exp();
    let mean = b * delta;
    let variance = df / (df - 2.0) - mean * mean;
    let skewness = (df > 3.0).then(|| {
        mean * (df * (3.0 - delta * delta) / (df - 3.0) - 3.0 * df / (df - 2.0) + 2.0 * mean * mean)
            / variance.powf(1.5)
    });
    Ok(SkewTMoments {
        mean,
        variance,
        skewness,
    })
}

/// How group sizes are chosen for a simulated study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignGen {
    Balanced {
        k: usize,
        m: usize,
    },
    /// `n_i = G_i + shift`, `G_i` geometric on `{0, 1, ...}` with success probability `p`.
    Geometric {
        k: usize,
        p: f64,
        shift: usize,
    },
    /// `n_i` uniform on `{lo, ..., hi}`.
    UniformSet {
        k: usize,
        lo: usize,
        hi: usize,
    },
}

impl DesignGen {
    pub fn k(&self) -> usize {
        match *self {
            DesignGen::Balanced { k, .. } | DesignGen::Geometric { k, .. } | DesignGen::UniformSet { k, .. } => k,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            DesignGen::Balanced { m, .. } => format!("balanced(m={m})"),
            DesignGen::Geometric { p, shift, .. } => format!("geometric(p={p},shift={shift})"),
            DesignGen::UniformSet { lo, hi, .. } => format!("uniform({lo}..{hi})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::TooFewGroups(self.k()));
        }
        match *self {
            DesignGen::Balanced { m, .. } if m < 2 => domain(format!("balanced m must be >= 2, got {m}")),
            DesignGen::Geometric { shift, .. } if shift < 2 => {
                domain(format!("geometric shift must be >= 2, got {shift}"))
            }
            DesignGen::Geometric { p, .. } if !(p > 0.0 && p <= 1.0) => {
                domain(format!("geometric p must lie in (0, 1], got {p}"))
            }
            DesignGen::UniformSet { lo, .. } if lo < 2 => domain(format!("uniform lo must be >= 2, got {lo}")),
            DesignGen::UniformSet { lo, hi, .. } if hi < lo => domain(format!("uniform range is empty: {lo}..{hi}")),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Design> {
        self.validate()?;
        let sizes = match *self {
            DesignGen::Balanced { k, m } => vec![m; k],
            DesignGen::Geometric { k, p, shift } => {
                let geo = Geometric::new(p).map_err(|e| Error::Domain(format!("geometric({p}): {e}")))?;
                (0..k).map(|_| geo.sample(rng) as usize + shift).collect()
            }
            DesignGen::UniformSet { k, lo, hi } => (0..k).map(|_| rng.random_range(lo..=hi)).collect(),
        };
        Design::new(sizes)
    }

    /// Imbalance `1/(1 + cv^2)` of the generating distribution of `n_i`.
    pub fn population_kappa(&self) -> f64 {
        let (mean, var) = match *self {
            DesignGen::Balanced { m, .. } => (m as f64, 0.0),
            DesignGen::Geometric { p, shift, .. } => {
                let q = 1.0 - p;
                (shift as f64 + q / p, q / (p * p))
            }
            DesignGen::UniformSet { lo, hi, .. } => {
                let width = (hi - lo + 1) as f64;
                ((lo + hi) as f64 / 2.0, (width * width - 1.0) / 12.0)
            }
        };
        1.0 / (1.0 + var / (mean * mean))
    }
}

pub fn gen_design(gen: &DesignGen, seed: SeedSpec) -> Result<Design> {
    gen.sample(&mut seed.rng())
}
