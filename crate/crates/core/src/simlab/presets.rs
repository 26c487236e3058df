//! Scenario presets for the standard size and power tables.

use super::scenario::ScenarioSpec;
use crate::error::{Error, Result};
use crate::hypothesis::Method;
use crate::randgen::{DesignGen, NoiseFamily, NoiseSpec, SeedSpec};

pub const PRESET_NAMES: [&str; 6] = [
    "table1-normal",
    "table1-t5",
    "table2-balanced-normal",
    "table2-geometric",
    "table2-uniform-t",
    "table2-skew",
];

const DEFAULT_SEED: u64 = 20_080_101;
const TABLE1_K: [usize; 3] = [10, 30, 100];
const TABLE1_M: [usize; 4] = [2, 4, 5, 10];
const TABLE2_K: [usize; 5] = [10, 20, 30, 50, 100];

fn base(name: &str, designs: Vec<DesignGen>, b: NoiseFamily, e: NoiseSpec, methods: Vec<Method>) -> ScenarioSpec {
    ScenarioSpec {
        name: name.to_string(),
        designs,
        redraw_design_per_replicate: false,
        b_noise: b,
        e_noise: e,
        mu: 2.0,
        sigma_b2_grid: vec![0.0, 0.2, 0.5, 1.0],
        alpha: 0.05,
        replicates: 10_000,
        seed: SeedSpec::from_master(DEFAULT_SEED),
        methods,
        n_perm: 199,
    }
}

fn table1_designs() -> Vec<DesignGen> {
    TABLE1_K
        .iter()
        .flat_map(|&k| TABLE1_M.iter().map(move |&m| DesignGen::Balanced { k, m }))
        .collect()
}

fn table2_designs(f: impl Fn(usize) -> DesignGen) -> Vec<DesignGen> {
    TABLE2_K.iter().map(|&k| f(k)).collect()
}

/// The scenario behind one named table block.
pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let t3 = NoiseFamily::ScaledT { df: 3.0 };
    let t41 = NoiseFamily::ScaledT { df: 4.1 };
    let skew = NoiseFamily::SkewTStd {
        df: 4.1,
        asymmetry: 1.0,
    };
    let both = vec![Method::F, Method::U];
    let balanced5 = |k| DesignGen::Balanced { k, m: 5 };

    let spec = match name {
        "table1-normal" => base(name, table1_designs(), t3, NoiseSpec::normal(1.0), vec![Method::U]),
        "table1-t5" => base(
            name,
            table1_designs(),
            t3,
            NoiseSpec::scaled_t(5.0, 1.0),
            vec![Method::U],
        ),
        "table2-balanced-normal" => base(
            name,
            table2_designs(balanced5),
            NoiseFamily::Normal,
            NoiseSpec::normal(1.0),
            both,
        ),
        "table2-geometric" => ScenarioSpec {
            redraw_design_per_replicate: true,
            ..base(
                name,
                table2_designs(|k| DesignGen::Geometric { k, p: 0.15, shift: 2 }),
                NoiseFamily::Normal,
                NoiseSpec::normal(1.0),
                both,
            )
        },
        "table2-uniform-t" => ScenarioSpec {
            redraw_design_per_replicate: true,
            ..base(
                name,
                table2_designs(|k| DesignGen::UniformSet { k, lo: 5, hi: 10 }),
                t41,
                t41.with_variance(1.0),
                both,
            )
        },
        "table2-skew" => base(name, table2_designs(balanced5), skew, skew.with_variance(1.0), both),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(spec)
}
