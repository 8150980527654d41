//! TOML experiment configuration.
//!
//! Two kinds of document are accepted. A sweep (the default) looks like
//!
//! ```toml
//! name = "example"
//! axis = "transmit_power_dbw"   # or ris_receiver_distance_m, element_count, reflection_factor
//! start = -80.0
//! stop = -50.0
//! points = 31
//! modes = ["analytic_lb", "mc_ub"]
//!
//! [fixed]                       # any SystemParams field, plus the dBW shorthands
//! n_elements = 10
//! ris_noise = "aggregate"
//! sigma_d2_dbw = -128.0
//!
//! [monte_carlo]
//! trials = 1000000
//! seed = 7
//! ```
//!
//! and `kind = "table2"` (optionally with `boltzmann = ...`) selects the
//! RIS-noise power table instead. Every problem found is reported with the
//! line it sits on, not just the first one.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue, ValueDeserializer};
use toml::Spanned;

use crate::error::{ConfigIssue, Error, Result};
use crate::mc::McConfig;
use crate::noise::{db_to_linear, SystemParams, BOLTZMANN_ROUNDED};

/// Swept variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    TransmitPowerDbw,
    RisReceiverDistanceM,
    ElementCount,
    ReflectionFactor,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::TransmitPowerDbw => "transmit_power_dbw",
            Axis::RisReceiverDistanceM => "ris_receiver_distance_m",
            Axis::ElementCount => "element_count",
            Axis::ReflectionFactor => "reflection_factor",
        }
    }

    /// `base` with the swept variable set to `value`.
    pub fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self {
            Axis::TransmitPowerDbw => p.tx_power_w = db_to_linear(value),
            Axis::RisReceiverDistanceM => p.d_nd = value,
            Axis::ElementCount => p.n_elements = value.round() as u32,
            Axis::ReflectionFactor => p.alpha = value,
        }
        p
    }
}

/// Quantity reported on a CSV row. The declaration order is the row order
/// within each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Closed-form outage of the upper SINR bound (a lower bound on outage).
    AnalyticLb,
    /// Closed-form outage of the lower SINR bound.
    AnalyticUb,
    Asymptotic,
    McExact,
    McLb,
    McUb,
    /// Closed-form outage with the surface noise switched off.
    NoiselessVariant,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::AnalyticLb,
        Mode::AnalyticUb,
        Mode::Asymptotic,
        Mode::McExact,
        Mode::McLb,
        Mode::McUb,
        Mode::NoiselessVariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::AnalyticLb => "analytic_lb",
            Mode::AnalyticUb => "analytic_ub",
            Mode::Asymptotic => "asymptotic",
            Mode::McExact => "mc_exact",
            Mode::McLb => "mc_lb",
            Mode::McUb => "mc_ub",
            Mode::NoiselessVariant => "noiseless_variant",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s.trim())
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Mode::McExact | Mode::McLb | Mode::McUb)
    }
}

/// Parses a comma-separated mode list such as `analytic_lb,mc_ub`.
pub fn parse_mode_list(list: &str) -> Result<Vec<Mode>> {
    let mut modes = Vec::new();
    let mut issues = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match Mode::parse(item) {
            Some(m) => modes.push(m),
            None => issues.push(ConfigIssue { line: None, message: unknown_mode(item) }),
        }
    }
    if modes.is_empty() && issues.is_empty() {
        issues.push(ConfigIssue { line: None, message: "at least one mode must be selected".into() });
    }
    if issues.is_empty() {
        Ok(normalize_modes(modes))
    } else {
        Err(Error::Config(issues))
    }
}

fn unknown_mode(item: &str) -> String {
    let known: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
    format!("unknown mode `{item}` (expected one of {})", known.join(", "))
}

fn normalize_modes(mut modes: Vec<Mode>) -> Vec<Mode> {
    modes.sort();
    modes.dedup();
    modes
}

/// A one-dimensional parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub name: String,
    pub description: String,
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Parameters held fixed; the swept field is overwritten per point.
    pub fixed: SystemParams,
    /// Sorted, without duplicates.
    pub modes: Vec<Mode>,
    pub monte_carlo: McConfig,
}

impl SweepGrid {
    pub fn new(axis: Axis, start: f64, stop: f64, points: usize, fixed: SystemParams, modes: Vec<Mode>) -> Self {
        Self {
            name: String::new(),
            description: String::new(),
            axis,
            start,
            stop,
            points,
            fixed,
            modes: normalize_modes(modes),
            monte_carlo: McConfig::default(),
        }
    }

    pub fn with_modes(mut self, modes: Vec<Mode>) -> Self {
        self.modes = normalize_modes(modes);
        self
    }

    /// Axis values, evenly spaced and including both ends.
    pub fn axis_values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points.max(2) - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 })
            .map(|v| if self.axis == Axis::ElementCount { v.round() } else { v })
            .collect()
    }

    pub fn grid_params(&self) -> Vec<SystemParams> {
        self.axis_values().into_iter().map(|v| self.axis.apply(&self.fixed, v)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let issues: Vec<_> = self
            .issues()
            .into_iter()
            .map(|(_, message)| ConfigIssue { line: None, message })
            .collect();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Semantic problems, each tagged with the top-level key it concerns.
    fn issues(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start >= self.stop {
            out.push(("stop", format!("start ({}) must be smaller than stop ({})", self.start, self.stop)));
        }
        if self.points < 2 {
            out.push(("points", format!("points must be at least 2, got {}", self.points)));
        }
        if self.modes.is_empty() {
            out.push(("modes", "at least one mode must be selected".into()));
        }
        let (lo_ok, what) = match self.axis {
            Axis::TransmitPowerDbw => (true, ""),
            Axis::RisReceiverDistanceM => (self.start > 0.0, "distances must be positive"),
            Axis::ElementCount => (self.start >= 1.0, "element counts must be at least 1"),
            Axis::ReflectionFactor => (self.start > 0.0 && self.stop <= 1.0, "reflection factors must lie in (0, 1]"),
        };
        if !lo_ok {
            out.push(("start", format!("{what} (range {}..{})", self.start, self.stop)));
        }
        if lo_ok && self.points >= 2 && self.start < self.stop {
            // Both ends cover the extremes of every swept field.
            for v in [self.start, self.stop] {
                if let Err(Error::Domain(msg)) = self.axis.apply(&self.fixed, v).validate() {
                    out.push(("fixed", msg));
                    break;
                }
            }
        }
        if self.modes.iter().any(|m| m.is_monte_carlo()) {
            if let Err(Error::Config(issues)) = self.monte_carlo.validate() {
                out.extend(issues.into_iter().map(|i| ("monte_carlo", i.message)));
            }
        }
        out
    }
}

/// A parsed configuration document.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Sweep(SweepGrid),
    /// The α × N table of re-radiated surface noise in dBW.
    Table2 { boltzmann: f64 },
}

/// Keys accepted in `[fixed]` on top of the [`SystemParams`] fields.
const FIXED_SHORTHANDS: [&str; 2] = ["tx_power_dbw", "sigma_d2_dbw"];

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Collector<'s> {
    src: &'s str,
    issues: Vec<ConfigIssue>,
}

impl Collector<'_> {
    fn push(&mut self, span: Option<Range<usize>>, message: impl Into<String>) {
        let line = span.map(|s| line_of(self.src, s.start));
        self.issues.push(ConfigIssue { line, message: message.into() });
    }

    /// Issues in document order; those without a line go last.
    fn sorted(mut self) -> Vec<ConfigIssue> {
        self.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        self.issues
    }

    fn value<T: DeserializeOwned>(&mut self, key: &str, v: &Spanned<DeValue<'_>>) -> Option<T> {
        match T::deserialize(ValueDeserializer::from(v.clone())) {
            Ok(t) => Some(t),
            Err(e) => {
                self.push(Some(v.span()), format!("`{key}`: {}", e.message()));
                None
            }
        }
    }
}

fn sub_table<'a, 'i>(c: &mut Collector<'_>, key: &str, v: &'a Spanned<DeValue<'i>>) -> Option<&'a DeTable<'i>> {
    let t = v.get_ref().as_table();
    if t.is_none() {
        c.push(Some(v.span()), format!("`{key}` must be a table"));
    }
    t
}

fn parse_fixed(c: &mut Collector<'_>, table: &DeTable<'_>) -> SystemParams {
    let mut accepted = toml::Table::new();
    let mut tx_dbw = None;
    let mut sigma_dbw = None;
    for (k, v) in table {
        let key = k.get_ref().as_ref();
        let span = Some(k.span());
        if FIXED_SHORTHANDS.contains(&key) {
            let val = c.value::<f64>(key, v);
            if key == "tx_power_dbw" {
                tx_dbw = val.map(|x| (x, span));
            } else {
                sigma_dbw = val.map(|x| (x, span));
            }
            continue;
        }
        let Some(val) = c.value::<toml::Value>(key, v) else { continue };
        let mut single = toml::Table::new();
        single.insert(key.to_string(), val.clone());
        match single.try_into::<SystemParams>() {
            Ok(_) => {
                accepted.insert(key.to_string(), val);
            }
            Err(e) => c.push(span, format!("[fixed] `{key}`: {}", e.message())),
        }
    }
    let mut p: SystemParams = accepted.try_into().expect("every accepted key deserialized on its own");
    if let Some((dbw, span)) = tx_dbw {
        if table.contains_key("tx_power_w") {
            c.push(span, "[fixed] give either tx_power_dbw or tx_power_w, not both");
        }
        p.tx_power_w = db_to_linear(dbw);
    }
    if let Some((dbw, span)) = sigma_dbw {
        if table.contains_key("sigma_d2_override_w") {
            c.push(span, "[fixed] give either sigma_d2_dbw or sigma_d2_override_w, not both");
        }
        p.sigma_d2_override_w = Some(db_to_linear(dbw));
    }
    p
}

fn parse_monte_carlo(c: &mut Collector<'_>, table: &DeTable<'_>) -> McConfig {
    let mut mc = McConfig::default();
    for (k, v) in table {
        let key = k.get_ref().as_ref();
        match key {
            "trials" => mc.trials = c.value(key, v).unwrap_or(mc.trials),
            "seed" => mc.seed = c.value(key, v).unwrap_or(mc.seed),
            "batch" => mc.batch = c.value(key, v).unwrap_or(mc.batch),
            "ci_level" => mc.ci_level = c.value(key, v).unwrap_or(mc.ci_level),
            other => c.push(
                Some(k.span()),
                format!("[monte_carlo] unknown key `{other}` (expected trials, seed, batch, ci_level)"),
            ),
        }
    }
    mc
}

/// Parses a configuration document, reporting every problem found.
pub fn parse_experiment(src: &str) -> Result<Experiment> {
    let (doc, syntax) = DeTable::parse_recoverable(src);
    let mut c = Collector { src, issues: Vec::new() };
    for e in &syntax {
        c.push(e.span(), e.message().to_string());
    }
    if !c.issues.is_empty() {
        return Err(Error::Config(c.issues));
    }
    let doc = doc.into_inner();

    let kind = match doc.get("kind") {
        Some(v) => c.value::<String>("kind", v),
        None => Some("sweep".to_string()),
    };
    let mut spans: BTreeMap<&'static str, Range<usize>> = BTreeMap::new();

    if kind.as_deref() == Some("table2") {
        let mut boltzmann = BOLTZMANN_ROUNDED;
        for (k, v) in &doc {
            match k.get_ref().as_ref() {
                "kind" | "name" | "description" => {}
                "boltzmann" => match c.value::<f64>("boltzmann", v) {
                    Some(b) if b > 0.0 && b.is_finite() => boltzmann = b,
                    Some(b) => c.push(Some(v.span()), format!("`boltzmann` must be positive, got {b}")),
                    None => {}
                },
                other => c.push(Some(k.span()), format!("unknown key `{other}` in a table2 document")),
            }
        }
        return if c.issues.is_empty() { Ok(Experiment::Table2 { boltzmann }) } else { Err(Error::Config(c.sorted())) };
    }
    if let Some(k) = kind.as_deref().filter(|k| *k != "sweep") {
        c.push(doc.get("kind").map(|v| v.span()), format!("unknown kind `{k}` (expected sweep or table2)"));
    }

    let mut grid = SweepGrid::new(Axis::TransmitPowerDbw, f64::NAN, f64::NAN, 0, SystemParams::default(), Vec::new());
    let mut seen_modes = false;
    for (k, v) in &doc {
        let key = k.get_ref().as_ref();
        match key {
            "kind" => {}
            "name" => grid.name = c.value(key, v).unwrap_or_default(),
            "description" => grid.description = c.value(key, v).unwrap_or_default(),
            "axis" => {
                spans.insert("axis", v.span());
                if let Some(a) = c.value(key, v) {
                    grid.axis = a;
                }
            }
            "start" => {
                spans.insert("start", v.span());
                grid.start = c.value(key, v).unwrap_or(f64::NAN);
            }
            "stop" => {
                spans.insert("stop", v.span());
                grid.stop = c.value(key, v).unwrap_or(f64::NAN);
            }
            "points" => {
                spans.insert("points", v.span());
                grid.points = c.value::<usize>(key, v).unwrap_or(0);
            }
            "modes" => {
                seen_modes = true;
                spans.insert("modes", v.span());
                if let Some(list) = c.value::<Vec<String>>(key, v) {
                    let mut modes = Vec::new();
                    for item in &list {
                        match Mode::parse(item) {
                            Some(m) => modes.push(m),
                            None => c.push(Some(v.span()), unknown_mode(item)),
                        }
                    }
                    grid.modes = normalize_modes(modes);
                }
            }
            "fixed" => {
                spans.insert("fixed", k.span());
                if let Some(t) = sub_table(&mut c, key, v) {
                    grid.fixed = parse_fixed(&mut c, t);
                }
            }
            "monte_carlo" => {
                spans.insert("monte_carlo", k.span());
                if let Some(t) = sub_table(&mut c, key, v) {
                    grid.monte_carlo = parse_monte_carlo(&mut c, t);
                }
            }
            other => c.push(
                Some(k.span()),
                format!("unknown key `{other}` (expected name, description, kind, axis, start, stop, points, modes, fixed, monte_carlo)"),
            ),
        }
    }
    for required in ["axis", "start", "stop", "points"] {
        if !spans.contains_key(required) {
            c.push(None, format!("missing required key `{required}`"));
        }
    }
    if !seen_modes {
        c.push(None, "missing required key `modes`");
    }
    if c.issues.is_empty() {
        for (key, message) in grid.issues() {
            let span = spans.get(key).cloned();
            c.push(span, message);
        }
    }
    if c.issues.is_empty() {
        Ok(Experiment::Sweep(grid))
    } else {
        Err(Error::Config(c.sorted()))
    }
}

/// Parses a document that must describe a sweep.
pub fn parse_sweep(src: &str) -> Result<SweepGrid> {
    match parse_experiment(src)? {
        Experiment::Sweep(g) => Ok(g),
        Experiment::Table2 { .. } => Err(Error::config("expected a sweep document, found kind = \"table2\"")),
    }
}
