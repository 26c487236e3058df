//! Input parsing and report formatting for the `uvartest` command line tool.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use uvartest::{kappa, Dataset, Error, TestResult};

pub const INPUT_HEADER: &str = "treatment,value";

/// A malformed input file, with the 1-based line it was detected on.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for InputError {}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedInput {
    /// Treatment labels in order of first appearance.
    pub labels: Vec<String>,
    pub dataset: Dataset,
}

fn input_err(line: usize, message: impl Into<String>) -> InputError {
    InputError {
        line,
        message: message.into(),
    }
}

/// Parses long-form `treatment,value` CSV. LF and CRLF line endings are
/// accepted; a single trailing newline is allowed, blank lines are not.
pub fn parse_input(text: &str) -> Result<GroupedInput, InputError> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let mut lines = lines.into_iter().map(|l| l.strip_suffix('\r').unwrap_or(l));

    match lines.next() {
        Some(INPUT_HEADER) => {}
        Some(other) => {
            return Err(input_err(
                1,
                format!("expected header {INPUT_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(input_err(1, "empty input; expected a header line")),
    }

    let mut labels: Vec<String> = Vec::new();
    let mut first_line: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        if line.is_empty() {
            return Err(input_err(lineno, "blank line"));
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [treatment, value] = fields[..] else {
            return Err(input_err(
                lineno,
                format!("expected 2 comma-separated fields, found {}", fields.len()),
            ));
        };
        if treatment.is_empty() {
            return Err(input_err(lineno, "empty treatment label"));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| input_err(lineno, format!("value {value:?} is not a number")))?;
        if !value.is_finite() {
            return Err(input_err(lineno, format!("value {value} is not finite")));
        }
        let g = *index.entry(treatment.to_string()).or_insert_with(|| {
            labels.push(treatment.to_string());
            first_line.push(lineno);
            groups.push(Vec::new());
            labels.len() - 1
        });
        groups[g].push(value);
    }

    if let Some(g) = groups.iter().position(|g| g.len() < 2) {
        return Err(input_err(
            first_line[g],
            format!(
                "treatment {:?} has {} observation(s); every treatment needs n_i >= 2",
                labels[g],
                groups[g].len()
            ),
        ));
    }
    let dataset = Dataset::from_groups(groups).map_err(|e| match e {
        Error::TooFewGroups(k) => input_err(1, format!("need at least 2 treatments, found {k}")),
        other => input_err(1, other.to_string()),
    })?;
    Ok(GroupedInput { labels, dataset })
}

/// Machine-readable result of one test. Keys are the same for every method;
/// method-specific values go in `extras`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub k: usize,
    pub n: usize,
    pub group_sizes: Vec<usize>,
    pub kappa: f64,
    pub extras: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(ds: &Dataset, result: TestResult) -> Self {
        Self {
            method: result.method.to_string(),
            statistic: result.statistic,
            p_value: result.p_value,
            reject: result.reject,
            alpha: result.alpha,
            k: ds.k(),
            n: ds.n(),
            group_sizes: ds.design().sizes().to_vec(),
            kappa: kappa(ds.design()),
            extras: result.extras,
        }
    }
}
