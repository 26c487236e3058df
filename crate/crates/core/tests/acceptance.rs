//! Acceptance gate. Runs every check, prints one PASS/FAIL line per check,
//! and exits non-zero if any failed.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use rayon::prelude::*;
use uvartest::simlab::{
    mc_se, permutation_exact, preset, run_scenario, simulate_dataset, RejectionTable, ScenarioSpec,
};
use uvartest::{
    b_n_centered, between_pair_u, decompose, eta_weights, f_test, j_statistic, local_shift, m_n, moment_oracle,
    sample_noise, skew_t_moments, within_u, Dataset, Design, DesignGen, Method, NoiseFamily, NoiseSpec, SeedSpec,
};

const SEED: u64 = 20_080_101;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn max_rel(acc: &mut f64, a: f64, b: f64) {
    let scale = a.abs().max(b.abs());
    if scale > 0.0 {
        *acc = acc.max((a - b).abs() / scale);
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Adds `p/q` to the reduced fraction `acc`.
fn add_frac(acc: (i128, i128), p: i128, q: i128) -> (i128, i128) {
    let num = acc.0 * q + p * acc.1;
    let den = acc.1 * q;
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

/// Row sums and total of the pair weights as exact fractions, enumerating
/// every pair. Returns true if all of them are zero.
fn eta_sums_exactly_zero(sizes: &[usize]) -> bool {
    let n: usize = sizes.iter().sum();
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
        .collect();
    let mut total = (0i128, 1i128);
    for r in 0..n {
        let mut row = (0i128, 1i128);
        for s in 0..n {
            if s == r {
                continue;
            }
            row = if labels[r] == labels[s] {
                let ni = sizes[labels[r]] as i128;
                add_frac(row, n as i128 - ni, ni - 1)
            } else {
                add_frac(row, -1, 1)
            };
        }
        if row.0 != 0 {
            return false;
        }
        total = add_frac(total, row.0, row.1);
    }
    total.0 == 0
}

fn algebraic_identities() -> Check {
    let corpus = random_corpus(1000, SEED);
    let (mut dev_u0, mut dev_center, mut dev_mn, mut dev_eta_float) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut exact_ok = true;
    for ds in &corpus {
        let d = decompose(ds);
        let u0 = pair_u(ds.values());
        max_rel(&mut dev_u0, d.w_n + d.b_n, u0);
        max_rel(&mut dev_u0, d.u_pooled, u0);
        let mean = ds.values().iter().sum::<f64>() / ds.n() as f64;
        for c in [0.0, mean, 17.3] {
            max_rel(&mut dev_center, b_n_centered(ds, c), d.b_n);
        }
        let sizes = ds.design().sizes();
        let eta = eta_weights(ds.design());
        max_rel(&mut dev_mn, m_n(ds.design()), brute_m_n(sizes));
        max_rel(&mut dev_mn, eta.direct_m_n(), brute_m_n(sizes));
        let scale = ds.n() as f64 * ds.n() as f64;
        dev_eta_float = dev_eta_float.max(eta.total_sum().abs() / scale);
        for r in 0..ds.n() {
            dev_eta_float = dev_eta_float.max(eta.row_sum(r).abs() / scale);
        }
        exact_ok &= eta_sums_exactly_zero(sizes);
    }
    check(
        dev_u0 <= 1e-10 && dev_center <= 1e-10 && dev_mn <= 1e-9 && exact_ok && dev_eta_float <= 1e-12,
        format!(
            "{} datasets; max rel dev U0=W+B {dev_u0:.1e}, centered B_n {dev_center:.1e}, M_n {dev_mn:.1e}; \
             eta sums exactly zero: {exact_ok}, float eta sums {dev_eta_float:.1e}",
            corpus.len()
        ),
    )
}

fn brute_force_oracles() -> Check {
    let corpus = random_corpus(1000, SEED);
    let small: Vec<&Dataset> = corpus.iter().filter(|ds| ds.n() <= 20).collect();
    let (mut dev_w, mut dev_pair, mut dev_b) = (0.0f64, 0.0f64, 0.0f64);
    for ds in &small {
        let groups = groups_of(ds);
        for i in 0..ds.k() {
            max_rel(&mut dev_w, within_u(ds, i).unwrap(), pair_u(&groups[i]));
            for j in 0..ds.k() {
                if i != j {
                    max_rel(
                        &mut dev_pair,
                        between_pair_u(ds, i, j).unwrap(),
                        cross_u(&groups[i], &groups[j]),
                    );
                }
            }
        }
        let mean = ds.values().iter().sum::<f64>() / ds.n() as f64;
        let (_, b) = brute_w_b(&groups);
        max_rel(&mut dev_b, b_n_centered(ds, mean), b);
    }
    check(
        !small.is_empty() && dev_w <= 1e-12 && dev_pair <= 1e-12 && dev_b <= 1e-12,
        format!(
            "{} datasets with n <= 20; max rel dev U_i {dev_w:.1e}, U_ii' {dev_pair:.1e}, quadratic-form B_n {dev_b:.1e}",
            small.len()
        ),
    )
}

struct Draws {
    b_n: Vec<f64>,
    u_i: Vec<f64>,
}

fn draw_balanced(k: usize, m: usize, b: NoiseSpec, e: NoiseSpec, reps: u64, seed: SeedSpec) -> Draws {
    let design = Design::balanced(k, m).unwrap();
    let (bs, es) = (b.sampler().unwrap(), e.sampler().unwrap());
    let per_rep: Vec<(f64, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let ds = simulate_dataset(&design, &bs, &es, 2.0, &mut seed.child(r).rng()).unwrap();
            let u: Vec<f64> = (0..k).map(|i| within_u(&ds, i).unwrap()).collect();
            (decompose(&ds).b_n, u)
        })
        .collect();
    Draws {
        b_n: per_rep.iter().map(|p| p.0).collect(),
        u_i: per_rep.into_iter().flat_map(|p| p.1).collect(),
    }
}

fn moment_oracles() -> Check {
    let (k, m, reps) = (20, 5, 100_000u64);
    let design = Design::balanced(k, m).unwrap();
    let n = design.n() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let root = SeedSpec::from_master(SEED).child(3);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut within = |label: &str, est: f64, se: f64, target: f64| {
        let z = (est - target) / se;
        pass &= z.abs() <= 6.0;
        lines.push(format!("{label} {est:.5} vs {target:.5} ({z:+.2} se)"));
    };

    let null = draw_balanced(
        k,
        m,
        NoiseSpec::normal(0.0),
        NoiseSpec::normal(1.0),
        reps,
        root.child(0),
    );
    let se_mean = |xs: &[f64]| var_with_se(xs).0.sqrt() / (xs.len() as f64).sqrt();
    within("E[B_n|0]", mean(&null.b_n), se_mean(&null.b_n), 0.0);
    let (v, v_se) = var_with_se(&null.b_n);
    let var_target = brute_m_n(design.sizes()) / (pairs * pairs);
    within("Var[B_n|0]", v, v_se, var_target);

    let alt = draw_balanced(
        k,
        m,
        NoiseSpec::normal(0.5),
        NoiseSpec::normal(1.0),
        reps,
        root.child(1),
    );
    let e_target = 0.5 * (n * n - design.sum_sq_sizes()) / (n * (n - 1.0));
    within("E[B_n|0.5]", mean(&alt.b_n), se_mean(&alt.b_n), e_target);

    let var_ui = |e4: f64| e4 / m as f64 - (m as f64 - 3.0) / ((m as f64 - 1.0) * m as f64);
    let (v, v_se) = var_with_se(&null.u_i);
    within("Var[U_i] normal", v, v_se, var_ui(3.0));
    let t5 = draw_balanced(
        k,
        m,
        NoiseSpec::normal(0.0),
        NoiseSpec::scaled_t(5.0, 1.0),
        reps,
        root.child(2),
    );
    let (v, v_se) = var_with_se(&t5.u_i);
    within("Var[U_i] t5", v, v_se, var_ui(9.0));

    let lib = moment_oracle(&design, 0.5, 1.0, 9.0).unwrap();
    let lib_ok = rel_close(lib.e_bn, e_target, 1e-12)
        && rel_close(lib.var_bn_null, var_target, 1e-12)
        && lib.var_ui.iter().all(|&x| rel_close(x, var_ui(9.0), 1e-12));
    lines.push(format!("closed forms agree: {lib_ok}"));
    check(
        pass && lib_ok,
        format!("{reps} replicates, k={k}, m={m}; {}", lines.join("; ")),
    )
}

fn within_band(
    table: &RejectionTable,
    k: usize,
    design: &str,
    s: f64,
    method: Method,
    reference: f64,
) -> (bool, String) {
    let Some(cell) = table.find(k, design, s, method) else {
        return (false, format!("missing cell k={k} {design} {s} {method}"));
    };
    let tol = 0.015f64.max(3.0 * std::f64::consts::SQRT_2 * cell.se);
    let ok = (cell.rate - reference).abs() <= tol;
    (
        ok,
        format!(
            "k={k} {design} s={s} {method}: {:.2}% vs {:.1}% (tol {:.2} pp)",
            100.0 * cell.rate,
            100.0 * reference,
            100.0 * tol
        ),
    )
}

fn band_check(table: &RejectionTable, cells: &[(usize, &str, f64, Method, f64)]) -> Check {
    let results: Vec<(bool, String)> = cells
        .iter()
        .map(|&(k, d, s, method, p)| within_band(table, k, d, s, method, p))
        .collect();
    check(
        results.iter().all(|r| r.0),
        results.into_iter().map(|r| r.1).collect::<Vec<_>>().join("; "),
    )
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn table1_reproduction(table: &RejectionTable) -> Check {
    band_check(
        table,
        &[
            (100, "balanced(m=10)", 0.0, Method::U, 0.054),
            (10, "balanced(m=2)", 0.0, Method::U, 0.14),
            (30, "balanced(m=10)", 0.2, Method::U, 0.93),
        ],
    )
}

fn table2_reproduction() -> Check {
    let normal = run_scenario(&preset("table2-balanced-normal").unwrap()).unwrap();
    let skew = run_scenario(&preset("table2-skew").unwrap()).unwrap();
    let a = band_check(
        &normal,
        &[
            (10, "balanced(m=5)", 0.0, Method::F, 0.049),
            (10, "balanced(m=5)", 0.0, Method::U, 0.077),
        ],
    );
    let b = band_check(
        &skew,
        &[
            (100, "balanced(m=5)", 0.0, Method::F, 0.046),
            (100, "balanced(m=5)", 0.0, Method::U, 0.052),
        ],
    );
    check(a.pass && b.pass, format!("normal: {}; skew-t: {}", a.detail, b.detail))
}

fn null_calibration() -> Check {
    let (k, m, reps) = (100, 10, 10_000u64);
    let design = Design::balanced(k, m).unwrap();
    let b = NoiseSpec::normal(0.0).sampler().unwrap();
    let e = NoiseSpec::normal(1.0).sampler().unwrap();
    let seed = SeedSpec::from_master(SEED).child(6);
    let draws: Vec<(f64, bool)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let ds = simulate_dataset(&design, &b, &e, 2.0, &mut seed.child(r).rng()).unwrap();
            (j_statistic(&ds).unwrap().0, f_test(&ds, 0.05).unwrap().reject)
        })
        .collect();
    let j: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let ks = ks_distance_normal(&j);
    let crit = kolmogorov_quantile(0.01) / (reps as f64).sqrt();
    let f_rate = draws.iter().filter(|d| d.1).count() as f64 / reps as f64;
    let f_tol = 3.0 * mc_se(0.05, reps).unwrap();
    let ks_ok = ks < crit;
    let f_ok = (f_rate - 0.05).abs() <= f_tol;
    check(
        ks_ok && f_ok,
        format!(
            "k={k}, m={m}, {reps} replicates; KS(J_n, N(0,1)) = {ks:.5} vs 1% critical {crit:.5} [{}]; \
             F size {:.2}% vs 5% +/- {:.2} pp [{}]",
            if ks_ok { "ok" } else { "exceeded" },
            100.0 * f_rate,
            100.0 * f_tol,
            if f_ok { "ok" } else { "outside" }
        ),
    )
}

fn local_drift() -> Check {
    let (k, m, reps, delta) = (200, 10, 10_000u64, 1.0);
    let design = Design::balanced(k, m).unwrap();
    let n = design.n() as f64;
    let sigma_b2 = delta * delta / n.sqrt();
    let b = NoiseSpec::normal(sigma_b2).sampler().unwrap();
    let e = NoiseSpec::normal(1.0).sampler().unwrap();
    let seed = SeedSpec::from_master(SEED).child(7);
    let j: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let ds = simulate_dataset(&design, &b, &e, 2.0, &mut seed.child(r).rng()).unwrap();
            j_statistic(&ds).unwrap().0
        })
        .collect();
    let est = mean(&j);
    let se = var_with_se(&j).0.sqrt() / (reps as f64).sqrt();
    let lambda_n = brute_m_n(design.sizes()) / n.powi(3);
    let target = delta * delta / (2.0 * lambda_n.sqrt());
    let lib = local_shift(&design, delta, 1.0).unwrap();
    let z = (est - target) / se;
    check(
        z.abs() <= 3.0 && rel_close(lib, target, 1e-12),
        format!(
            "k={k}, m={m}, delta={delta}; mean J_n {est:.4} vs shift {target:.4} ({z:+.2} se); library shift {lib:.6}"
        ),
    )
}

fn skew_t_generator() -> Check {
    let mom = skew_t_moments(1.0, 4.1).unwrap();
    let skew = mom.skewness.unwrap_or(f64::NAN);
    let skew_ok = (skew - 1.77).abs() <= 0.02;
    // Reference values from 50-digit arithmetic.
    let exact_ok = rel_close(mom.mean, 0.7024449227260943, 1e-10)
        && rel_close(mom.variance, 1.458952082917284, 1e-10)
        && rel_close(skew, 1.772986495317173, 1e-10);

    let target_var = 1.0;
    let count = 1_000_000;
    let xs = sample_noise(
        &NoiseSpec::skew_t(4.1, 1.0, target_var),
        count,
        SeedSpec::from_master(SEED).child(8),
    )
    .unwrap();
    let m = mean(&xs);
    let (v, v_se) = var_with_se(&xs);
    let z_mean = m / (v.sqrt() / (count as f64).sqrt());
    let z_var = (v - target_var) / v_se;
    check(
        skew_ok && exact_ok && z_mean.abs() <= 5.0 && z_var.abs() <= 5.0,
        format!(
            "skewness(1, 4.1) = {skew:.6}; exact moments match: {exact_ok}; {count} draws: mean {m:+.5} ({z_mean:+.2} se), \
             variance {v:.5} ({z_var:+.2} se)"
        ),
    )
}

/// `J_n` from pairwise enumeration, `None` when the within part vanishes.
fn brute_j(groups: &[Vec<f64>]) -> Option<f64> {
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let n: usize = sizes.iter().sum();
    let (w, b) = brute_w_b(groups);
    (w > 0.0).then(|| (n * (n - 1)) as f64 / 2.0 * b / (w * brute_m_n(&sizes).sqrt()))
}

fn permutation_validity() -> Check {
    let spec = ScenarioSpec {
        name: "perm-null".into(),
        designs: vec![DesignGen::Balanced { k: 10, m: 5 }],
        redraw_design_per_replicate: false,
        b_noise: NoiseFamily::Normal,
        e_noise: NoiseSpec::normal(1.0),
        mu: 2.0,
        sigma_b2_grid: vec![0.0],
        alpha: 0.05,
        replicates: 2000,
        seed: SeedSpec::from_master(SEED).child(9),
        methods: vec![Method::Perm],
        n_perm: 199,
    };
    let rate = run_scenario(&spec).unwrap().cells[0].rate;
    let rate_ok = (0.035..=0.065).contains(&rate);

    let observed = [vec![0.0, 2.0], vec![1.0, 3.0]];
    let pooled = [0.0, 2.0, 1.0, 3.0];
    let j_obs = brute_j(&observed).unwrap();
    let mut assignments = 0u64;
    let mut exceed = 0u64;
    for a in 0..4 {
        for b in a + 1..4 {
            let first: Vec<f64> = vec![pooled[a], pooled[b]];
            let second: Vec<f64> = (0..4).filter(|&i| i != a && i != b).map(|i| pooled[i]).collect();
            assignments += 1;
            if brute_j(&[first, second]).is_some_and(|j| j >= j_obs - 1e-12) {
                exceed += 1;
            }
        }
    }
    let expected = (1 + exceed) as f64 / (assignments + 1) as f64;
    let ds = Dataset::from_groups(observed.to_vec()).unwrap();
    let exact = permutation_exact(&ds, 0.05).unwrap().p_value;
    let exact_ok = (exact - expected).abs() <= 1e-15;
    check(
        rate_ok && exact_ok,
        format!(
            "2000 null datasets (k=10, m=5, 199 permutations): rejection rate {:.2}% in [3.5%, 6.5%]: {rate_ok}; \
             exhaustive p on the 4-point example {exact:.6} vs enumerated {expected:.6}",
            100.0 * rate
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut failed = 0;
    let mut report = |name: &str, f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let c = f();
        if !c.pass {
            failed += 1;
        }
        println!(
            "[{}] {name} ({:.1}s): {}",
            if c.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            c.detail
        );
    };

    report("algebraic identities", &algebraic_identities);
    report("brute-force oracles", &brute_force_oracles);
    report("moment oracles", &moment_oracles);

    let table1 = preset("table1-normal").unwrap();
    let t = Instant::now();
    let four = in_pool(4, || run_scenario(&table1).unwrap());
    let one = in_pool(1, || run_scenario(&table1).unwrap());
    let secs = t.elapsed().as_secs_f64() / 2.0;
    report("table 1 reproduction", &|| {
        let mut c = table1_reproduction(&four);
        c.detail = format!("{} ({secs:.1}s per run)", c.detail);
        c
    });
    report("table 2 reproduction", &table2_reproduction);
    report("null calibration", &null_calibration);
    report("local alternative drift", &local_drift);
    report("skew-t generator", &skew_t_generator);
    report("permutation validity", &permutation_validity);
    report("determinism across thread counts", &|| {
        let (a, b) = (four.to_csv_string(), one.to_csv_string());
        check(
            a.as_bytes() == b.as_bytes(),
            format!(
                "table1-normal CSV with 4 vs 1 worker threads: {} bytes, identical: {}",
                a.len(),
                a == b
            ),
        )
    });

    println!("{failed} failed; total {:.1}s", started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
