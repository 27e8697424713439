//! Flat `section.key = value` configuration files.

use std::collections::BTreeMap;
use std::str::FromStr;

use fowler_core::experiments::{Bump, ConvergenceConfig, TruncationConfig};
use fowler_core::nonlocal::{Boundary, ConvolutionMethod, DiscretizationKind, TruncationPolicy};
use fowler_core::schemes::{FluxKind, SchemeConfig};
use fowler_core::{GridSpec, PhysicalParams};

use crate::error::CliError;

const KNOWN_KEYS: &[&str] = &[
    "model.v",
    "model.epsilon",
    "model.eta",
    "grid.dx",
    "grid.dt",
    "grid.n_cells",
    "grid.domain_length",
    "grid.t_final",
    "scheme.kind",
    "scheme.flux",
    "scheme.memory",
    "scheme.terms",
    "scheme.tail_tolerance",
    "scheme.boundary",
    "scheme.method",
    "initial.center",
    "initial.width",
    "initial.height",
    "output.dir",
    "output.snapshot_every",
    "analyze.theta0",
    "analyze.samples",
    "converge.dx_values",
    "converge.domain_length",
    "converge.t_final",
    "converge.dt_scale",
    "converge.df",
    "truncation.dx_values",
    "truncation.x0",
    "truncation.dt_scale",
    "truncation.memory",
    "truncation.rate",
    "truncation.width",
    "truncation.sweep_dx",
    "truncation.sweep_memories",
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed key/value pairs with their line numbers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| CliError::Config {
                line,
                key: content.to_string(),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config {
                    line,
                    key,
                    message: "unknown key".into(),
                });
            }
            if value.is_empty() {
                return Err(CliError::Config {
                    line,
                    key,
                    message: "missing value".into(),
                });
            }
            if let Some(prev) = entries.get(&key) {
                let prev: &Entry = prev;
                return Err(CliError::Config {
                    line,
                    key,
                    message: format!("duplicate key (first set on line {})", prev.line),
                });
            }
            entries.insert(key, Entry { line, value });
        }
        Ok(Self { entries })
    }

    pub fn output_dir(&self) -> Option<String> {
        self.entries.get("output.dir").map(|e| e.value.clone())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err: T::Err| CliError::Config {
                    line: e.line,
                    key: key.to_string(),
                    message: format!("cannot parse `{}`: {err}", e.value),
                }),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_value(key)
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_value(key)?.ok_or_else(|| CliError::Config {
            line: 0,
            key: key.to_string(),
            message: "required key is missing".into(),
        })
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|err| CliError::Config {
                    line: e.line,
                    key: key.to_string(),
                    message: format!("cannot parse list item `{}`: {err}", s.trim()),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Wrap a core validation error with the line of `key`.
    fn at(&self, key: &str, err: fowler_core::Error) -> CliError {
        CliError::Config {
            line: self.entries.get(key).map_or(0, |e| e.line),
            key: key.to_string(),
            message: err.to_string(),
        }
    }
}

fn parsed<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

/// A validated simulation or analysis configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    /// True when no truncation key was given.
    pub default_truncation: bool,
    pub initial: Bump,
    pub output_dir: Option<String>,
    pub snapshot_every: usize,
    pub theta0: Option<f64>,
    pub samples: Option<usize>,
}

fn params(raw: &RawConfig, base: Option<PhysicalParams>) -> Result<PhysicalParams, CliError> {
    let pick = |key: &str, fallback: Option<f64>| -> Result<f64, CliError> {
        match (raw.get::<f64>(key)?, fallback) {
            (Some(v), _) => Ok(v),
            (None, Some(v)) => Ok(v),
            (None, None) => raw.require(key),
        }
    };
    let v = pick("model.v", base.map(|p| p.v))?;
    let epsilon = pick("model.epsilon", base.map(|p| p.epsilon))?;
    let eta = pick("model.eta", base.map(|p| p.eta))?;
    PhysicalParams::new(v, epsilon, eta).map_err(|e| {
        let key = match &e {
            fowler_core::Error::InvalidParameter {
                name: "epsilon", ..
            } => "model.epsilon",
            fowler_core::Error::InvalidParameter { name: "eta", .. } => "model.eta",
            _ => "model.v",
        };
        raw.at(key, e)
    })
}

fn kind(raw: &RawConfig, cli: Option<DiscretizationKind>) -> Result<DiscretizationKind, CliError> {
    match cli {
        Some(k) => Ok(k),
        None => Ok(raw
            .get::<DiscretizationKind>("scheme.kind")?
            .unwrap_or(DiscretizationKind::I1)),
    }
}

fn truncation(raw: &RawConfig) -> Result<Option<TruncationPolicy>, CliError> {
    let given: Vec<&str> = ["scheme.memory", "scheme.terms", "scheme.tail_tolerance"]
        .into_iter()
        .filter(|k| raw.contains(k))
        .collect();
    if given.len() > 1 {
        let e = &raw.entries[given[1]];
        return Err(CliError::Config {
            line: e.line,
            key: given[1].to_string(),
            message: format!("conflicts with `{}`; give one truncation key", given[0]),
        });
    }
    if let Some(l) = raw.get::<f64>("scheme.memory")? {
        return Ok(Some(TruncationPolicy::Memory(l)));
    }
    if let Some(a) = raw.get::<usize>("scheme.terms")? {
        return Ok(Some(TruncationPolicy::Terms(a)));
    }
    if let Some(t) = raw.get::<f64>("scheme.tail_tolerance")? {
        return Ok(Some(TruncationPolicy::TailTolerance(t)));
    }
    Ok(None)
}

impl RunConfig {
    pub fn from_text(
        text: &str,
        kind_override: Option<DiscretizationKind>,
    ) -> Result<Self, CliError> {
        Self::from_raw(&RawConfig::parse(text)?, kind_override)
    }

    pub fn from_raw(
        raw: &RawConfig,
        kind_override: Option<DiscretizationKind>,
    ) -> Result<Self, CliError> {
        let params = params(raw, None)?;
        let dx: f64 = raw.require("grid.dx")?;
        let dt: f64 = raw.require("grid.dt")?;
        let t_final: f64 = raw.require("grid.t_final")?;
        let n_cells = match (
            raw.get::<usize>("grid.n_cells")?,
            raw.get::<f64>("grid.domain_length")?,
        ) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config {
                    line: raw.entries["grid.domain_length"].line,
                    key: "grid.domain_length".into(),
                    message: "conflicts with `grid.n_cells`; give one".into(),
                })
            }
            (Some(n), None) => n,
            (None, Some(d)) => {
                let n = (d / dx).round();
                if !(n.is_finite() && (d / dx - n).abs() < 1e-9 * n.max(1.0)) {
                    return Err(CliError::Config {
                        line: raw.entries["grid.domain_length"].line,
                        key: "grid.domain_length".into(),
                        message: format!("{d} is not a whole number of cells of size {dx}"),
                    });
                }
                n as usize
            }
            (None, None) => raw.require::<usize>("grid.n_cells")?,
        };
        let grid = GridSpec::new(dx, dt, n_cells, t_final).map_err(|e| {
            let key = match &e {
                fowler_core::Error::InvalidParameter { name: "dx", .. } => "grid.dx",
                fowler_core::Error::InvalidParameter { name: "dt", .. } => "grid.dt",
                fowler_core::Error::InvalidParameter {
                    name: "t_final", ..
                } => "grid.t_final",
                _ if raw.contains("grid.domain_length") => "grid.domain_length",
                _ => "grid.n_cells",
            };
            raw.at(key, e)
        })?;
        let kind = kind(raw, kind_override)?;
        let given = truncation(raw)?;
        let truncation = given.unwrap_or(TruncationPolicy::Memory(grid.domain_length()));
        truncation.terms(grid.dx()).map_err(|e| {
            let key = ["scheme.memory", "scheme.terms", "scheme.tail_tolerance"]
                .into_iter()
                .find(|k| raw.contains(k))
                .unwrap_or("scheme.memory");
            raw.at(key, e)
        })?;
        let scheme = SchemeConfig {
            kind,
            flux: raw
                .get::<FluxKind>("scheme.flux")?
                .unwrap_or(FluxKind::LinearUpwind),
            params,
            grid,
            truncation,
            boundary: raw.get::<Boundary>("scheme.boundary")?.unwrap_or_default(),
            method: raw
                .get::<ConvolutionMethod>("scheme.method")?
                .unwrap_or_default(),
        };
        let d = grid.domain_length();
        let initial = Bump {
            center: raw.get("initial.center")?.unwrap_or(0.25 * d),
            width: raw.get("initial.width")?.unwrap_or(0.2 * d),
            height: raw.get("initial.height")?.unwrap_or(1.0),
        };
        fowler_core::schemes::make_initial_bump(
            &grid,
            initial.center,
            initial.width,
            initial.height,
        )
        .map_err(|e| raw.at("initial.center", e))?;
        let theta0: Option<f64> = raw.get("analyze.theta0")?;
        if let Some(t) = theta0 {
            if !(0.0..std::f64::consts::PI).contains(&t) {
                return Err(raw.at(
                    "analyze.theta0",
                    fowler_core::Error::InvalidParameter {
                        name: "theta0",
                        reason: "must lie in [0, pi)".into(),
                    },
                ));
            }
        }
        let samples: Option<usize> = raw.get("analyze.samples")?;
        if samples.is_some_and(|s| s < 2) {
            return Err(CliError::Config {
                line: raw.entries["analyze.samples"].line,
                key: "analyze.samples".into(),
                message: "need at least 2".into(),
            });
        }
        Ok(Self {
            scheme,
            default_truncation: given.is_none(),
            initial,
            output_dir: raw.get("output.dir")?,
            snapshot_every: raw.get("output.snapshot_every")?.unwrap_or(0),
            theta0,
            samples,
        })
    }
}

/// Refinement study settings: defaults of the standard study, overridden by
/// `model.*`, `scheme.*`, `initial.*` and `converge.*` keys.
pub fn convergence_config(
    text: &str,
    kind_override: Option<DiscretizationKind>,
) -> Result<ConvergenceConfig, CliError> {
    let raw = RawConfig::parse(text)?;
    let mut c = ConvergenceConfig::standard(kind(&raw, kind_override)?);
    c.params = params(&raw, Some(c.params))?;
    if let Some(f) = raw.get::<FluxKind>("scheme.flux")? {
        c.flux = f;
    }
    if let Some(b) = raw.get::<Boundary>("scheme.boundary")? {
        c.boundary = b;
    }
    if let Some(m) = raw.get::<ConvolutionMethod>("scheme.method")? {
        c.method = m;
    }
    if let Some(l) = raw.get::<f64>("scheme.memory")? {
        c.memory = Some(l);
    }
    if let Some(v) = raw.list("converge.dx_values")? {
        c.dx_values = v;
    }
    if let Some(d) = raw.get("converge.domain_length")? {
        c.domain_length = d;
    }
    if let Some(t) = raw.get("converge.t_final")? {
        c.t_final = t;
    }
    c.bump.center = raw.get("initial.center")?.unwrap_or(c.bump.center);
    c.bump.width = raw.get("initial.width")?.unwrap_or(c.bump.width);
    c.bump.height = raw.get("initial.height")?.unwrap_or(c.bump.height);
    if raw.contains("converge.dt_scale") && raw.contains("converge.df") {
        return Err(CliError::Config {
            line: raw.entries["converge.df"].line,
            key: "converge.df".into(),
            message: "conflicts with `converge.dt_scale`; give one".into(),
        });
    }
    if let Some(s) = raw.get("converge.dt_scale")? {
        c.dt_scale = s;
    }
    if let Some(df) = raw.get::<f64>("converge.df")? {
        c = c.with_df(df).map_err(|e| raw.at("converge.df", e))?;
    }
    validate_convergence(&raw, &c)?;
    Ok(c)
}

fn validate_convergence(raw: &RawConfig, c: &ConvergenceConfig) -> Result<(), CliError> {
    let bad = |key: &str, message: String| CliError::Config {
        line: raw.entries.get(key).map_or(0, |e| e.line),
        key: key.to_string(),
        message,
    };
    if c.dx_values.len() < 3 {
        return Err(bad(
            "converge.dx_values",
            "need at least 3 refinement levels".into(),
        ));
    }
    if c.dx_values.windows(2).any(|w| !(w[1] < w[0])) || c.dx_values.iter().any(|&d| !(d > 0.0)) {
        return Err(bad(
            "converge.dx_values",
            "must be positive and strictly decreasing".into(),
        ));
    }
    for &dx in &c.dx_values {
        let n = c.domain_length / (dx / 4.0);
        if (n - n.round()).abs() > 1e-6 * n {
            return Err(bad(
                "converge.dx_values",
                format!(
                    "dx/4 = {} does not divide the domain length {}",
                    dx / 4.0,
                    c.domain_length
                ),
            ));
        }
    }
    if !(c.t_final > 0.0) {
        return Err(bad("converge.t_final", "must be > 0".into()));
    }
    if !(c.dt_scale > 0.0 && c.dt_scale.is_finite()) {
        return Err(bad("converge.dt_scale", "must be > 0".into()));
    }
    Ok(())
}

/// Local-error study settings and the memory sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRun {
    pub config: TruncationConfig,
    pub width: f64,
    pub sweep_dx: f64,
    pub sweep_memories: Vec<f64>,
}

pub fn truncation_config(
    text: &str,
    kind_override: Option<DiscretizationKind>,
) -> Result<TruncationRun, CliError> {
    let raw = RawConfig::parse(text)?;
    let mut c = TruncationConfig::standard(kind(&raw, kind_override)?);
    c.params = params(&raw, Some(c.params))?;
    if let Some(v) = raw.list("truncation.dx_values")? {
        c.dx_values = v;
    }
    c.x0 = raw.get("truncation.x0")?.unwrap_or(c.x0);
    c.dt_scale = raw.get("truncation.dt_scale")?.unwrap_or(c.dt_scale);
    c.memory = raw.get("truncation.memory")?.unwrap_or(c.memory);
    c.rate = raw.get("truncation.rate")?.unwrap_or(c.rate);
    let width: f64 = raw.get("truncation.width")?.unwrap_or(1.0);
    let sweep_dx: f64 = raw.get("truncation.sweep_dx")?.unwrap_or(0.0125);
    let sweep_memories = raw
        .list("truncation.sweep_memories")?
        .unwrap_or_else(|| vec![6.0, 4.0, 3.0, 2.0, 1.0]);
    let bad = |key: &str, message: &str| CliError::Config {
        line: raw.entries.get(key).map_or(0, |e| e.line),
        key: key.to_string(),
        message: message.to_string(),
    };
    if c.dx_values.len() < 2 || c.dx_values.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(bad(
            "truncation.dx_values",
            "need at least 2 positive steps",
        ));
    }
    for (key, v) in [
        ("truncation.dt_scale", c.dt_scale),
        ("truncation.memory", c.memory),
        ("truncation.width", width),
        ("truncation.sweep_dx", sweep_dx),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad(key, "must be > 0"));
        }
    }
    if sweep_memories.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(bad("truncation.sweep_memories", "must be positive"));
    }
    Ok(TruncationRun {
        config: c,
        width,
        sweep_dx,
        sweep_memories,
    })
}

/// Parse a discretization name for `--kind`.
pub fn parse_kind(s: &str) -> Result<DiscretizationKind, String> {
    parsed(s)
}
