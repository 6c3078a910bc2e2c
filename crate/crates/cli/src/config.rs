//! Job files: TOML with `[job]`, `[exprs]`, `[domain]` and `[tolerances]`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use paracr::expr::{parse_expr, Expr};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("job kind {kind} requires expression `{name}`")]
    MissingExpr { kind: &'static str, name: &'static str },
    #[error("job kind {kind} does not take expression `{name}`")]
    UnexpectedExpr { kind: &'static str, name: String },
    #[error("expression `{name}`: {message}")]
    BadExpr { name: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    PdeInvariants,
    PdeMetric,
    #[serde(rename = "ode-112")]
    Ode112,
    #[serde(rename = "ode-111")]
    Ode111,
    FlatModel,
    SiFamily,
    Ppwave,
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::PdeInvariants => "pde-invariants",
            JobKind::PdeMetric => "pde-metric",
            JobKind::Ode112 => "ode-112",
            JobKind::Ode111 => "ode-111",
            JobKind::FlatModel => "flat-model",
            JobKind::SiFamily => "si-family",
            JobKind::Ppwave => "ppwave",
        }
    }

    /// (required, optional) expression keys.
    fn exprs(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            JobKind::PdeInvariants => (&["R", "T"], &["psi"]),
            JobKind::PdeMetric => (&["R", "T"], &[]),
            JobKind::Ode112 => (&["p"], &["F", "psi"]),
            JobKind::Ode111 => (&["p"], &[]),
            JobKind::FlatModel | JobKind::SiFamily => (&[], &[]),
            JobKind::Ppwave => (&["r", "t"], &[]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSection {
    pub kind: JobKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Invariants that must vanish (fail otherwise).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect_zero: Vec<String>,
    /// Invariants that must not vanish.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect_nonzero: Vec<String>,
    /// pde-metric: which degenerate metrics to build.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<String>,
    /// si-family parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// ode-112: expected branch of I (generic or degenerate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_branch: Option<String>,
    /// ode-112: starting value for the a2 root finder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2_seed: Option<f64>,
    /// flat-model: run the single-form mutation sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutations: Option<bool>,
    /// ppwave: integrate the Ricci-flat gauge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge_step: Option<f64>,
    /// ppwave: (s0, h(s0), h'(s0)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge_initial: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// Accepted points per zero test or residual check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Points for curvature, reduction and Newman sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Default half-width of every coordinate interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_floor: Option<f64>,
    /// Per-coordinate `[lo, hi]` overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub intervals: BTreeMap<String, [f64; 2]>,
    /// Extra nonvanishing conditions, in the expr grammar.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guards: Vec<String>,
    /// pde-metric: the (x, y) of the transversal slice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<[f64; 2]>,
    /// ppwave: the s interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newman: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ricci: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl_relative: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nabla: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_weyl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub job: JobSection,
    #[serde(default)]
    pub exprs: BTreeMap<String, String>,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

pub const DEFAULT_SEED: u64 = 42;

impl JobConfig {
    pub fn parse(text: &str) -> Result<JobConfig, ConfigError> {
        let cfg: JobConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<JobConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        JobConfig::parse(&text)
    }

    pub fn seed(&self) -> u64 {
        self.job.seed.unwrap_or(DEFAULT_SEED)
    }

    /// The parsed expression `name`; only valid after [`JobConfig::validate`].
    pub fn expr(&self, name: &str) -> Result<Option<Expr>, ConfigError> {
        self.exprs
            .get(name)
            .map(|s| {
                parse_expr(s).map_err(|err| ConfigError::BadExpr {
                    name: name.to_string(),
                    message: err.to_string(),
                })
            })
            .transpose()
    }

    pub fn guards(&self) -> Result<Vec<Expr>, ConfigError> {
        self.domain
            .guards
            .iter()
            .enumerate()
            .map(|(i, g)| {
                parse_expr(g).map_err(|err| ConfigError::BadExpr {
                    name: format!("domain.guards[{i}]"),
                    message: err.to_string(),
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let kind = self.job.kind;
        let (required, optional) = kind.exprs();
        for name in required {
            if !self.exprs.contains_key(*name) {
                return Err(ConfigError::MissingExpr { kind: kind.name(), name });
            }
        }
        for name in self.exprs.keys() {
            if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
                return Err(ConfigError::UnexpectedExpr {
                    kind: kind.name(),
                    name: name.clone(),
                });
            }
            self.expr(name)?;
        }
        self.guards()?;
        if kind == JobKind::Ode112 && self.exprs.contains_key("psi") && !self.exprs.contains_key("F") {
            return Err(ConfigError::Invalid("ode-112: `psi` needs `F`".into()));
        }
        if kind == JobKind::SiFamily && self.job.kappa.is_none() {
            return Err(ConfigError::Invalid("si-family requires job.kappa".into()));
        }
        for (var, [lo, hi]) in &self.domain.intervals {
            if !(lo <= hi) {
                return Err(ConfigError::Invalid(format!("empty interval for {var}")));
            }
        }
        if self.domain.samples == Some(0) || self.domain.points == Some(0) {
            return Err(ConfigError::Invalid("sample counts must be positive".into()));
        }
        for m in &self.job.metrics {
            if m != "mne1" && m != "mne2" {
                return Err(ConfigError::Invalid(format!("unknown metric {m}")));
            }
        }
        if let Some(b) = &self.job.expect_branch {
            if b != "generic" && b != "degenerate" {
                return Err(ConfigError::Invalid(format!("unknown branch {b}")));
            }
        }
        if self.job.gauge_step.is_some_and(|h| !(h > 0.0)) {
            return Err(ConfigError::Invalid("gauge_step must be positive".into()));
        }
        let known = known_invariants(kind);
        for name in self.job.expect_zero.iter().chain(&self.job.expect_nonzero) {
            if !known.contains(&name.as_str()) {
                return Err(ConfigError::Invalid(format!(
                    "{} has no invariant `{name}` (known: {})",
                    kind.name(),
                    known.join(", ")
                )));
            }
        }
        if let Some(n) = self.job.expect_zero.iter().find(|n| self.job.expect_nonzero.contains(n)) {
            return Err(ConfigError::Invalid(format!("`{n}` expected both zero and nonzero")));
        }
        Ok(())
    }
}

/// Names usable in `expect_zero` / `expect_nonzero`.
pub fn known_invariants(kind: JobKind) -> &'static [&'static str] {
    match kind {
        JobKind::PdeInvariants => &["integrability", "J1", "J2", "K1pt", "K2pt", "K1ct", "K2ct"],
        JobKind::PdeMetric => &["slice-riemann", "slice-weyl"],
        JobKind::Ode111 => &["Jnum", "Knum"],
        JobKind::Ppwave => &["Z1", "Z2"],
        JobKind::Ode112 | JobKind::FlatModel | JobKind::SiFamily => &[],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = JobConfig::parse("[job]\nkind = \"pde-invariants\"\n[exprs]\nR = \"0\"\nT = \"0\"\n").unwrap();
        assert_eq!(cfg.job.kind, JobKind::PdeInvariants);
        assert_eq!(cfg.seed(), DEFAULT_SEED);
    }

    #[test]
    fn rejections() {
        let bad = [
            "[job]\nkind = \"nope\"\n",
            "[job]\nkind = \"pde-invariants\"\n[exprs]\nR = \"0\"\n",
            "[job]\nkind = \"ode-111\"\n[exprs]\np = \"a1 +\"\n",
            "[job]\nkind = \"ode-111\"\n[exprs]\np = \"a1\"\nq = \"1\"\n",
            "[job]\nkind = \"ode-111\"\ncolour = 1\n[exprs]\np = \"a1\"\n",
            "[job]\nkind = \"si-family\"\n",
            "[job]\nkind = \"ode-111\"\nexpect_zero = [\"J1\"]\n[exprs]\np = \"a1\"\n",
            "[job]\nkind = \"ppwave\"\ngauge_step = 0\n[exprs]\nr = \"s\"\nt = \"s\"\n",
        ];
        for text in bad {
            assert!(JobConfig::parse(text).is_err(), "{text}");
        }
    }
}
