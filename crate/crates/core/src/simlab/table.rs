use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::mc_se;
use crate::error::{Error, Result};
use crate::hypothesis::Method;
use crate::randgen::DesignGen;

/// One estimated rejection rate. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionCell {
    pub scenario: String,
    pub k: usize,
    pub design: String,
    pub sigma_b2: f64,
    pub method: Method,
    pub rate: f64,
    pub se: f64,
    pub replicates: u64,
}

impl RejectionCell {
    pub(crate) fn from_count(
        scenario: &str,
        gen: &DesignGen,
        sigma_b2: f64,
        method: Method,
        rejections: u64,
        replicates: u64,
    ) -> Self {
        let rate = rejections as f64 / replicates as f64;
        Self {
            scenario: scenario.to_string(),
            k: gen.k(),
            design: gen.label(),
            sigma_b2,
            method,
            rate,
            se: mc_se(rate, replicates).unwrap_or(f64::NAN),
            replicates,
        }
    }

    /// Number of rejections behind `rate`.
    pub fn rejections(&self) -> u64 {
        (self.rate * self.replicates as f64).round() as u64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RejectionTable {
    pub cells: Vec<RejectionCell>,
    /// Replicate/method pairs whose test had zero within-treatment variance.
    /// These count as non-rejections. Not part of the CSV.
    pub degenerate_replicates: u64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

impl RejectionTable {
    pub fn find(&self, k: usize, design: &str, sigma_b2: f64, method: Method) -> Option<&RejectionCell> {
        self.cells
            .iter()
            .find(|c| c.k == k && c.design == design && c.sigma_b2 == sigma_b2 && c.method == method)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for cell in &self.cells {
            w.serialize(cell).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(csv_err)?.clone();
        let expected = [
            "scenario",
            "k",
            "design",
            "sigma_b2",
            "method",
            "rate",
            "se",
            "replicates",
        ];
        if headers.iter().ne(expected) {
            return Err(Error::Config(format!("unexpected csv header: {headers:?}")));
        }
        let cells = r
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Self {
            cells,
            degenerate_replicates: 0,
        })
    }

    /// Rates in percent, one row per `sigma_b^2` and one column per
    /// (k, design, method) in order of first appearance, grouped by scenario.
    pub fn to_markdown(&self) -> String {
        let mut scenarios: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !scenarios.contains(&c.scenario.as_str()) {
                scenarios.push(&c.scenario);
            }
        }
        let mut out = String::new();
        for (i, name) in scenarios.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let cells: Vec<&RejectionCell> = self.cells.iter().filter(|c| c.scenario == *name).collect();
            markdown_block(name, &cells, &mut out);
        }
        out
    }
}

fn markdown_block(name: &str, cells: &[&RejectionCell], out: &mut String) {
    let mut columns: Vec<(usize, &str, Method)> = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for c in cells {
        let col = (c.k, c.design.as_str(), c.method);
        if !columns.contains(&col) {
            columns.push(col);
        }
        if !rows.contains(&c.sigma_b2) {
            rows.push(c.sigma_b2);
        }
    }
    let many_designs = columns.iter().any(|a| columns.iter().any(|b| a.1 != b.1));
    let many_methods = columns.iter().any(|a| columns.iter().any(|b| a.2 != b.2));

    let replicates = cells.first().map_or(0, |c| c.replicates);
    out.push_str(&format!(
        "### {name}\n\nRejection rates (%), {replicates} replicates\n\n| sigma_b2 |"
    ));
    for (k, design, method) in &columns {
        out.push_str(&format!(" k={k}"));
        if many_designs {
            out.push_str(&format!(" {design}"));
        }
        if many_methods {
            out.push_str(&format!(" {method}"));
        }
        out.push_str(" |");
    }
    out.push_str("\n|---:|");
    out.push_str(&"---:|".repeat(columns.len()));
    out.push('\n');
    for s in rows {
        out.push_str(&format!("| {s} |"));
        for (k, design, method) in &columns {
            let cell = cells
                .iter()
                .find(|c| c.k == *k && c.design == *design && c.method == *method && c.sigma_b2 == s);
            match cell {
                Some(c) => out.push_str(&format!(" {:.1} |", 100.0 * c.rate)),
                None => out.push_str("  |"),
            }
        }
        out.push('\n');
    }
}
