//! TOML problem files for `toda solve`.

use std::path::Path;

use g2flat::exterior::GridField;
use g2flat::poly::Polynomial;
use g2flat::toda::{manufactured_toda, manufactured_tzitzeica, Domain, NewtonControls, System, TodaProblem};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Toda,
    Tzitzeica,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum DomainConfig {
    Rectangle,
    Annulus { r0: f64, r1: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// On-disk form of a [`TodaProblem`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TodaConfig {
    pub system: SystemKind,
    /// `μ₁ … μ_{r+1}`; `r = 2` with `(1, −1, 1)` when omitted.
    pub mu: Option<Vec<i32>>,
    /// Polynomial in `z`, e.g. `"z"` or `"1+2i z^3"`.
    pub q: Option<String>,
    pub shape: Option<[usize; 2]>,
    pub lower: Option<[f64; 2]>,
    pub upper: Option<[f64; 2]>,
    /// Constant Dirichlet value per field.
    pub boundary: Option<Vec<f64>>,
    /// Replace geometry and data by the built-in manufactured problem on `shape`.
    #[serde(default)]
    pub manufactured: bool,
    pub domain: Option<DomainConfig>,
    pub newton: Option<NewtonConfig>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl TodaConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let at = e.span().map(|s| format!(" at byte {}", s.start)).unwrap_or_default();
            bad(format!("{}{at}", e.message().replace('\n', " ")))
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The problem, plus the exact solution for manufactured runs.
    pub fn problem(&self) -> Result<(TodaProblem, Option<GridField>), CliError> {
        let newton = NewtonControls {
            tol: self.newton.as_ref().and_then(|n| n.tol).unwrap_or(NewtonControls::default().tol),
            max_iter: self.newton.as_ref().and_then(|n| n.max_iter).unwrap_or(NewtonControls::default().max_iter),
        };
        if !(newton.tol > 0.0) || newton.max_iter == 0 {
            return Err(bad("newton.tol must be positive and newton.max_iter at least 1"));
        }
        if self.manufactured {
            let [nx, ny] = self.shape.ok_or_else(|| bad("manufactured run needs shape"))?;
            if nx != ny {
                return Err(bad(format!("manufactured run needs a square shape, got {nx}x{ny}")));
            }
            let (mut p, exact) = match self.system {
                SystemKind::Toda => manufactured_toda(nx)?,
                SystemKind::Tzitzeica => manufactured_tzitzeica(nx)?,
            };
            p.newton = newton;
            return Ok((p, Some(exact)));
        }
        let system = match self.system {
            SystemKind::Toda => System::Toda { mu: self.mu.clone().unwrap_or_else(|| vec![1, -1, 1]) },
            SystemKind::Tzitzeica => {
                if self.mu.is_some() {
                    return Err(bad("mu is not used by the tzitzeica system"));
                }
                System::Tzitzeica
            }
        };
        let rank = match &system {
            System::Toda { mu } => mu.len().saturating_sub(1),
            System::Tzitzeica => 1,
        };
        let shape = self.shape.ok_or_else(|| bad("missing field `shape`"))?;
        let lower = self.lower.ok_or_else(|| bad("missing field `lower`"))?;
        let upper = self.upper.ok_or_else(|| bad("missing field `upper`"))?;
        let values = self.boundary.clone().unwrap_or_else(|| vec![0.0; rank]);
        if values.len() != rank {
            return Err(bad(format!("boundary has {} values, system has {rank} fields", values.len())));
        }
        let q: Polynomial = self.q.as_deref().unwrap_or("1").parse()?;
        let domain = match self.domain {
            None | Some(DomainConfig::Rectangle) => Domain::Rectangle,
            Some(DomainConfig::Annulus { r0, r1 }) => Domain::Annulus { r0, r1 },
        };
        let boundary = GridField::from_bounds(&lower, &upper, &shape, rank, |_, o| o.copy_from_slice(&values))?;
        let p = TodaProblem { system, domain, q, boundary, forcing: None, newton };
        p.validate()?;
        Ok((p, None))
    }
}
