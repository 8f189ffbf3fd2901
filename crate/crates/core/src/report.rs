//! Residual reports: named sup-norm checks with optional tolerances, rendered as
//! line-oriented text (and JSON) with a frozen schema version, plus observed
//! convergence orders from refinement series.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub sup_norm: f64,
    /// Multi-index of the node where the sup is attained.
    pub location: Option<Vec<usize>>,
    pub tolerance: Option<f64>,
    pub order: Option<f64>,
}

impl Check {
    pub fn new(name: impl Into<String>, sup_norm: f64) -> Self {
        Self { name: name.into(), sup_norm, location: None, tolerance: None, order: None }
    }

    pub fn at(mut self, location: Option<Vec<usize>>) -> Self {
        self.location = location;
        self
    }

    pub fn tol(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    /// Passes when no tolerance is set or the sup norm is within it (NaN fails).
    pub fn passed(&self) -> bool {
        match self.tolerance {
            None => !self.sup_norm.is_nan(),
            Some(t) => self.sup_norm <= t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub schema_version: u32,
    pub title: String,
    pub checks: Vec<Check>,
    /// Free-form lines rendered as `# …` after the checks.
    pub notes: Vec<String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:e}"))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "-" {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| Error::Parse(format!("bad number {s:?} in report")))
}

impl ResidualReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self { schema_version: SCHEMA_VERSION, title: title.into(), checks: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One header line, then one whitespace-separated line per check:
    /// `check <name> <sup> <location> <tol> <order> <PASS|FAIL>`.
    pub fn to_text(&self) -> String {
        let mut s = format!("# g2flat-report v{} {}\n", self.schema_version, self.title);
        for c in &self.checks {
            let loc = c
                .location
                .as_ref()
                .map_or_else(|| "-".to_string(), |l| l.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","));
            let _ = writeln!(
                s,
                "check {} {:e} {} {} {} {}",
                c.name,
                c.sup_norm,
                loc,
                fmt_opt(c.tolerance),
                fmt_opt(c.order),
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty report".into()))?;
        let rest = header
            .strip_prefix("# g2flat-report v")
            .ok_or_else(|| Error::Parse("missing report header".into()))?;
        let (ver, title) = rest.split_once(' ').unwrap_or((rest, ""));
        let schema_version: u32 = ver.parse().map_err(|_| Error::Parse(format!("bad schema version {ver:?}")))?;
        if schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported report schema v{schema_version}")));
        }
        let mut report = Self::new(title);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            if let Some(note) = line.strip_prefix("# ") {
                report.note(note);
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 || f[0] != "check" {
                return Err(Error::Parse(format!("bad report line {line:?}")));
            }
            let location = if f[3] == "-" {
                None
            } else {
                Some(
                    f[3].split(',')
                        .map(|i| i.parse::<usize>().map_err(|_| Error::Parse(format!("bad location {:?}", f[3]))))
                        .collect::<Result<_>>()?,
                )
            };
            let sup_norm = f[2].parse::<f64>().map_err(|_| Error::Parse(format!("bad sup norm {:?}", f[2])))?;
            report.push(Check {
                name: f[1].to_string(),
                sup_norm,
                location,
                tolerance: parse_opt(f[4])?,
                order: parse_opt(f[5])?,
            });
        }
        Ok(report)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Observed order `log₂(e_k / e_{k+1})` per check and refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub name: String,
    pub orders: Vec<f64>,
    /// Final observed order below 1 (or undefined).
    pub non_converging: bool,
}

/// Orders from reports at `h, h/2, h/4, …` with identical check sets.
pub fn order_estimate(reports: &[ResidualReport]) -> Result<Vec<OrderEstimate>> {
    if reports.len() < 2 {
        return Err(Error::ReportMismatch("need at least two reports".into()));
    }
    let names: Vec<&str> = reports[0].checks.iter().map(|c| c.name.as_str()).collect();
    for r in &reports[1..] {
        let other: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        if other != names {
            return Err(Error::ReportMismatch(format!("check sets differ: {names:?} vs {other:?}")));
        }
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let orders: Vec<f64> = reports
                .windows(2)
                .map(|w| {
                    let (a, b) = (w[0].checks[k].sup_norm, w[1].checks[k].sup_norm);
                    if a == b {
                        0.0
                    } else {
                        (a / b).log2()
                    }
                })
                .collect();
            let last = *orders.last().expect("at least one step");
            OrderEstimate { name: name.to_string(), non_converging: !(last >= 1.0), orders }
        })
        .collect())
}

/// Attach the last observed order of each check to the finest report.
pub fn with_orders(mut finest: ResidualReport, orders: &[OrderEstimate]) -> ResidualReport {
    for (c, o) in finest.checks.iter_mut().zip(orders) {
        c.order = o.orders.last().copied();
    }
    finest
}
