//! Report structure, status aggregation and the JSON/CSV writers.

use std::io::Write;

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    CrossMethod,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    /// Reported evidence that decides nothing.
    Info,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Info => "INFO",
            Self::Inconclusive => "INCONCLUSIVE",
            Self::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub index: usize,
    pub value: f64,
    pub reference: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub provenance: Provenance,
    /// Formula or method the reference comes from; empty only without a reference.
    pub formula: String,
    pub converged: bool,
}

impl Comparison {
    pub fn bare(quantity: impl Into<String>, index: usize, value: f64, converged: bool) -> Self {
        Self {
            quantity: quantity.into(),
            index,
            value,
            reference: None,
            abs_err: None,
            rel_err: None,
            provenance: Provenance::None,
            formula: String::new(),
            converged,
        }
    }

    pub fn against(
        quantity: impl Into<String>,
        index: usize,
        value: f64,
        reference: f64,
        provenance: Provenance,
        formula: impl Into<String>,
        converged: bool,
    ) -> Self {
        let abs = (value - reference).abs();
        let rel = if reference == 0.0 { abs } else { abs / reference.abs() };
        Self {
            quantity: quantity.into(),
            index,
            value,
            reference: Some(reference),
            abs_err: Some(abs),
            rel_err: Some(rel),
            provenance,
            formula: formula.into(),
            converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub formula: String,
    pub max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub note: Option<String>,
}

impl Criterion {
    /// PASS iff `deviation < tolerance`; a missing or NaN deviation is inconclusive.
    pub fn threshold(name: impl Into<String>, formula: impl Into<String>, deviation: Option<f64>, tolerance: f64) -> Self {
        let status = match deviation {
            Some(d) if d < tolerance => Status::Pass,
            Some(d) if d.is_nan() => Status::Inconclusive,
            Some(_) => Status::Fail,
            None => Status::Inconclusive,
        };
        Self {
            name: name.into(),
            formula: formula.into(),
            max_deviation: deviation,
            tolerance: Some(tolerance),
            status,
            note: None,
        }
    }

    pub fn flag(name: impl Into<String>, formula: impl Into<String>, status: Status) -> Self {
        Self {
            name: name.into(),
            formula: formula.into(),
            max_deviation: None,
            tolerance: None,
            status,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Criterion over the converged comparisons whose reference came from `formula`.
    pub fn over(name: impl Into<String>, formula: &str, comparisons: &[Comparison], tolerance: f64) -> Self {
        let devs: Vec<f64> = comparisons
            .iter()
            .filter(|c| c.converged && c.formula == formula)
            .filter_map(|c| c.rel_err)
            .collect();
        let dev = if devs.is_empty() {
            None
        } else {
            Some(devs.iter().copied().fold(0.0, f64::max))
        };
        Self::threshold(name, formula, dev, tolerance)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub status: Status,
    pub comparisons: Vec<Comparison>,
    pub criteria: Vec<Criterion>,
    pub warnings: Vec<String>,
    /// Experiment-specific tables (orbit membership, probe rows).
    pub details: serde_json::Value,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.to_string(),
            seed: config.seed,
            config,
            status: Status::Pass,
            comparisons: Vec::new(),
            criteria: Vec::new(),
            warnings: Vec::new(),
            details: serde_json::Value::Null,
            wall_time_s: 0.0,
        }
    }

    /// Overall status: any fail, else any inconclusive, else pass.
    pub fn finish(&mut self, wall_time_s: f64) {
        self.wall_time_s = wall_time_s;
        self.status = self
            .criteria
            .iter()
            .map(|c| c.status)
            .filter(|s| *s != Status::Info)
            .max()
            .unwrap_or(Status::Pass);
    }

    /// A report is well formed when every reference names its source.
    pub fn is_well_formed(&self) -> bool {
        self.comparisons
            .iter()
            .all(|c| c.reference.is_none() || (!c.formula.is_empty() && c.provenance != Provenance::None))
            && self.criteria.iter().all(|c| !c.formula.is_empty())
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass | Status::Info => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> anyhow::Result<()> {
        match format {
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["index", "value", "reference", "abs_err", "rel_err", "converged"])?;
                let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
                for c in &self.comparisons {
                    w.write_record([
                        c.index.to_string(),
                        format!("{:e}", c.value),
                        opt(c.reference),
                        opt(c.abs_err),
                        opt(c.rel_err),
                        c.converged.to_string(),
                    ])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    /// One line per criterion, naming the formula it tested.
    pub fn summary_lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                let mut line = format!("{} {} [{}]", c.status.label(), c.name, c.formula);
                if let (Some(d), Some(t)) = (c.max_deviation, c.tolerance) {
                    line.push_str(&format!(" max deviation {d:.3e} (tol {t:.0e})"));
                }
                if let Some(n) = &c.note {
                    line.push_str(&format!(": {n}"));
                }
                line
            })
            .collect()
    }
}
