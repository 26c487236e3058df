//! U-statistic test for the between-treatment variance component in the
//! one-way random effects model `Y_ij = mu + b_i + e_ij`, alongside the
//! classical F-test, the random variate generators used to study both, and
//! a Monte Carlo engine for size/power tables.
//!
//! ```
//! use uvartest::{u_test, f_test, Dataset};
//!
//! let ds = Dataset::from_groups(vec![vec![0.0, 2.0], vec![1.0, 3.0]]).unwrap();
//! let u = u_test(&ds, 0.05).unwrap();
//! assert!((u.statistic + 0.2887).abs() < 1e-4);
//! let f = f_test(&ds, 0.05).unwrap();
//! assert_eq!(f.statistic, 0.5);
//! ```

pub mod design;
pub mod error;
pub mod hypothesis;
pub mod moments;
pub mod randgen;
pub mod simlab;
pub mod special;
pub mod ustat;
pub mod weights;

pub use design::{Dataset, Design};
pub use error::{Error, Result};
pub use hypothesis::{f_test, j_statistic, sums_of_squares, u_test, Method, TestResult};
pub use moments::{icc, kappa, local_shift, moment_oracle, MomentOracle};
pub use randgen::{
    gen_design, sample_noise, skew_t_moments, DesignGen, NoiseFamily, NoiseSampler, NoiseSpec, SeedSpec, SkewTMoments,
};
pub use special::{f_sf, normal_sf};
pub use ustat::{b_n_centered, between_pair_u, decompose, within_u, Decomposition};
pub use weights::{eta_weights, m_n, EtaWeights};
