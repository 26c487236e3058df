//! Independent brute-force oracles shared by the integration tests. Nothing
//! here calls into the crate's statistics code.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal, StudentT, Uniform};
use uvartest::{Dataset, SeedSpec};

/// U-statistic with kernel `(x - y)^2 / 2` over all pairs of one sample,
/// i.e. its sample variance.
pub fn pair_u(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for a in 0..xs.len() {
        for b in a + 1..xs.len() {
            sum += 0.5 * (xs[a] - xs[b]).powi(2);
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// Two-sample U-statistic with kernel `(x - y)^2 / 2` over all cross pairs.
pub fn cross_u(xs: &[f64], ys: &[f64]) -> f64 {
    let mut sum = 0.0;
    for x in xs {
        for y in ys {
            sum += 0.5 * (x - y).powi(2);
        }
    }
    sum / (xs.len() * ys.len()) as f64
}

/// `(W_n, B_n)` assembled from pairwise enumeration.
pub fn brute_w_b(groups: &[Vec<f64>]) -> (f64, f64) {
    let n: usize = groups.iter().map(Vec::len).sum();
    let nf = n as f64;
    let u: Vec<f64> = groups.iter().map(|g| pair_u(g)).collect();
    let w = groups.iter().zip(&u).map(|(g, ui)| g.len() as f64 / nf * ui).sum();
    let mut b = 0.0;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let weight = (groups[i].len() * groups[j].len()) as f64 / (nf * (nf - 1.0));
            b += weight * (2.0 * cross_u(&groups[i], &groups[j]) - u[i] - u[j]);
        }
    }
    (w, b)
}

/// `sum_{r<s} eta_rs^2` by a double loop over observation pairs.
pub fn brute_m_n(sizes: &[usize]) -> f64 {
    let n: usize = sizes.iter().sum();
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
        .collect();
    let mut total = 0.0;
    for r in 0..n {
        for s in r + 1..n {
            let eta = if labels[r] == labels[s] {
                let ni = sizes[labels[r]] as f64;
                (n as f64 - ni) / (ni - 1.0)
            } else {
                -1.0
            };
            total += eta * eta;
        }
    }
    total
}

pub fn groups_of(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.groups().map(<[f64]>::to_vec).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance and the standard error of that variance,
/// `sqrt((m4 - s^4) / N)` with central sample moments.
pub fn var_with_se(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let len = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / len;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / len;
    let s2 = m2 * len / (len - 1.0);
    (s2, ((m4 - m2 * m2) / len).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub enum Source {
    Normal,
    T3,
    Uniform,
    Exponential,
    Rounded,
    Contaminated,
}

const SOURCES: [Source; 6] = [
    Source::Normal,
    Source::T3,
    Source::Uniform,
    Source::Exponential,
    Source::Rounded,
    Source::Contaminated,
];

fn draw<R: Rng>(src: Source, rng: &mut R) -> f64 {
    match src {
        Source::Normal => 2.0 + 1.5 * rng.sample::<f64, _>(StandardNormal),
        Source::T3 => StudentT::new(3.0).unwrap().sample(rng),
        Source::Uniform => Uniform::new(0.0, 10.0).unwrap().sample(rng),
        Source::Exponential => Exp::new(0.5).unwrap().sample(rng),
        // Integer values, so ties within and across groups are common.
        Source::Rounded => (3.0 * rng.sample::<f64, _>(StandardNormal)).round(),
        Source::Contaminated => {
            let z: f64 = rng.sample(StandardNormal);
            if rng.random_bool(0.1) {
                8.0 * z
            } else {
                z
            }
        }
    }
}

/// Deterministic corpus of small datasets: `k` in `2..=12`, `n_i` in
/// `2..=10`, values from a per-dataset mix of distributions, with a random
/// per-group shift on half of the datasets.
pub fn random_corpus(count: usize, seed: u64) -> Vec<Dataset> {
    let root = SeedSpec::from_master(seed);
    (0..count as u64)
        .map(|idx| {
            let mut rng = root.child(idx).rng();
            let k = rng.random_range(2..=12);
            let shifted = rng.random_bool(0.5);
            let groups = (0..k)
                .map(|_| {
                    let ni = rng.random_range(2..=10);
                    let src = SOURCES[rng.random_range(0..SOURCES.len())];
                    let shift = if shifted {
                        2.0 * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    (0..ni).map(|_| shift + draw(src, &mut rng)).collect()
                })
                .collect();
            Dataset::from_groups(groups).unwrap()
        })
        .collect()
}

/// Upper-tail quantile of the Kolmogorov distribution,
/// `P(K > x) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2)`, by bisection.
pub fn kolmogorov_quantile(tail: f64) -> f64 {
    let sf = |x: f64| {
        2.0 * (1..=100)
            .map(|j| {
                let j = j as f64;
                let sign = if j as i64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * j * j * x * x).exp()
            })
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.3, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal CDF by composite Simpson integration of the density on
/// `[0, |x|]`.
pub fn normal_cdf(x: f64) -> f64 {
    let a = x.abs();
    let steps = 2000;
    let h = a / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(a);
    for i in 1..steps {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half = s * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// `sup |F_n - Phi|` for the sample.
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / len).abs().max(((i + 1) as f64 / len - f).abs())
        })
        .fold(0.0, f64::max)
}
