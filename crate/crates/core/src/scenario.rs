//! Scenario configuration files.
//!
//! A scenario is a TOML document with one table per subsystem:
//!
//! ```toml
//! [scenario]
//! model = "drone"          # pulse | reference_swarmalator | drone
//! n = 5
//! duration = 60.0
//! dt = 0.001
//! seed = 0
//! formation = "quincunx"   # quincunx | random | line | ring
//! events = [{ t = 30.0, action = "despawn", target = "nearest_centroid" }]
//!
//! [drone]
//! k_visible = 0.05
//!
//! [smoothing]
//! mode = "moving_average"
//! window = 10
//! ```
//!
//! Every key is optional except `scenario.model`; unknown keys are rejected
//! with the line they appear on.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use crate::drone::DroneParams;
use crate::error::ConfigError;
use crate::math::{SimRng, Vec2};
use crate::netsim::CollisionPolicy;
use crate::smoothing::SmoothingMode;
use crate::swarmalator::SwarmParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Pulse,
    ReferenceSwarmalator,
    Drone,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::Pulse => "pulse",
            Model::ReferenceSwarmalator => "reference_swarmalator",
            Model::Drone => "drone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formation {
    /// Corners of a square plus its centre (n = 5).
    Quincunx,
    /// Uniform in a square of side `extent` centred on the origin.
    Random,
    /// Evenly spaced along the x axis, `extent` apart end to end.
    Line,
    /// Regular polygon of diameter `extent`.
    Ring,
}

impl Formation {
    pub fn label(self) -> &'static str {
        match self {
            Formation::Quincunx => "quincunx",
            Formation::Random => "random",
            Formation::Line => "line",
            Formation::Ring => "ring",
        }
    }

    /// Initial positions; only [`Formation::Random`] consumes randomness.
    pub fn positions(self, n: usize, extent: f64, rng: &mut SimRng) -> Vec<Vec2> {
        let half = extent / 2.0;
        match self {
            Formation::Quincunx => vec![
                Vec2::new(-half, -half),
                Vec2::new(half, -half),
                Vec2::new(half, half),
                Vec2::new(-half, half),
                Vec2::ZERO,
            ],
            Formation::Random => {
                (0..n).map(|_| Vec2::new(rng.uniform(-half, half), rng.uniform(-half, half))).collect()
            }
            Formation::Line => {
                let step = if n > 1 { extent / (n - 1) as f64 } else { 0.0 };
                (0..n).map(|i| Vec2::new(-half + step * i as f64, 0.0)).collect()
            }
            Formation::Ring => (0..n).map(|i| Vec2::from_polar(half, TAU * i as f64 / n as f64)).collect(),
        }
    }
}

/// How the drones' hidden phases are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenInit {
    Random,
    /// Every drone starts with the same hidden phase.
    Aligned,
    /// Initial drones start with hidden phases evenly spread over the cycle.
    Staggered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "target", content = "id")]
pub enum DespawnTarget {
    Id(usize),
    /// The live agent closest to the swarm centroid.
    NearestCentroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "action")]
pub enum EventAction {
    Spawn {
        id: Option<usize>,
        pos: Option<Vec2>,
        /// Visible phase offset from the swarm's mean phase; random if unset.
        theta_offset: Option<f64>,
    },
    Despawn {
        target: DespawnTarget,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioEvent {
    pub t: f64,
    #[serde(flatten)]
    pub action: EventAction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSettings {
    pub k: f64,
    /// Phase units per second.
    pub rate: f64,
    /// Spread below which the population counts as synchronised.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumSettings {
    pub airtime: f64,
    pub collision_policy: CollisionPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub model: Model,
    pub n: usize,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub formation: Formation,
    pub extent: f64,
    pub events: Vec<ScenarioEvent>,
    pub pulse: PulseSettings,
    pub swarm: SwarmParams,
    pub drone: DroneParams,
    pub hidden_init: HiddenInit,
    pub medium: MediumSettings,
    /// Trace sampling rate in simulated Hz.
    pub trace_hz: f64,
}

const BUNDLED: &[(&str, &str)] = &[
    ("pulse_n9", include_str!("../scenarios/pulse_n9.toml")),
    ("table1_static_sync", include_str!("../scenarios/table1_static_sync.toml")),
    ("table2_rainbow", include_str!("../scenarios/table2_rainbow.toml")),
    ("sync_k000", include_str!("../scenarios/sync_k000.toml")),
    ("sync_k005", include_str!("../scenarios/sync_k005.toml")),
    ("sync_k025", include_str!("../scenarios/sync_k025.toml")),
    ("medium_dual_phase", include_str!("../scenarios/medium_dual_phase.toml")),
    ("medium_no_hidden", include_str!("../scenarios/medium_no_hidden.toml")),
    ("quincunx_nosmooth", include_str!("../scenarios/quincunx_nosmooth.toml")),
    ("quincunx_exp08", include_str!("../scenarios/quincunx_exp08.toml")),
    ("quincunx_ma10", include_str!("../scenarios/quincunx_ma10.toml")),
    ("quincunx_ma20", include_str!("../scenarios/quincunx_ma20.toml")),
    ("dropout_mid", include_str!("../scenarios/dropout_mid.toml")),
    ("join_mid", include_str!("../scenarios/join_mid.toml")),
];

/// Names of the scenarios shipped with the crate.
pub fn list_scenarios() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Source text of a bundled scenario.
pub fn bundled_source(name: &str) -> Result<&'static str, ConfigError> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| ConfigError::UnknownScenario(name.to_string()))
}

pub fn bundled(name: &str) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::parse(bundled_source(name)?, name)
}

/// Human-readable summary of a bundled scenario followed by its source.
pub fn describe(name: &str) -> Result<String, ConfigError> {
    let cfg = bundled(name)?;
    let mut out = cfg.summary_text();
    out.push_str("\n--- source ---\n");
    out.push_str(bundled_source(name)?);
    Ok(out)
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::parse(&text, stem)
    }

    /// Parses and validates a scenario. `default_name` is used when the file
    /// has no `scenario.name`.
    pub fn parse(text: &str, default_name: &str) -> Result<Self, ConfigError> {
        let mut doc = Doc::new(text)?;
        let cfg = Self::read(&mut doc, default_name)?;
        doc.reject_unused()?;
        cfg.validate().map_err(|e| doc.locate(e))?;
        Ok(cfg)
    }

    fn read(doc: &mut Doc, default_name: &str) -> Result<Self, ConfigError> {
        let model = match doc.string("scenario.model")?.as_deref() {
            Some("pulse") => Model::Pulse,
            Some("reference_swarmalator") => Model::ReferenceSwarmalator,
            Some("drone") => Model::Drone,
            Some(other) => return Err(doc.err("scenario.model", format!("unknown model `{other}`"))),
            None => return Err(doc.err("scenario.model", "missing required key")),
        };
        let n_default = match model {
            Model::Pulse => 9,
            Model::ReferenceSwarmalator => 20,
            Model::Drone => 5,
        };
        let formation = match doc.string("scenario.formation")?.as_deref() {
            None | Some("random") => Formation::Random,
            Some("quincunx") => Formation::Quincunx,
            Some("line") => Formation::Line,
            Some("ring") => Formation::Ring,
            Some(other) => return Err(doc.err("scenario.formation", format!("unknown formation `{other}`"))),
        };
        let smoothing = match doc.string("smoothing.mode")?.as_deref() {
            None | Some("none") => {
                doc.touch("smoothing.window");
                doc.touch("smoothing.alpha");
                SmoothingMode::None
            }
            Some("moving_average") => {
                doc.touch("smoothing.alpha");
                SmoothingMode::MovingAverage { window: doc.usize_or("smoothing.window", 10)? }
            }
            Some("exponential") => {
                doc.touch("smoothing.window");
                SmoothingMode::Exponential { alpha: doc.f64_or("smoothing.alpha", 0.8)? }
            }
            Some(other) => return Err(doc.err("smoothing.mode", format!("unknown mode `{other}`"))),
        };
        let collision_policy = match doc.string("medium.collision_policy")?.as_deref() {
            None => CollisionPolicy::DropAll,
            Some(s) => CollisionPolicy::parse(s)
                .ok_or_else(|| doc.err("medium.collision_policy", format!("unknown policy `{s}`")))?,
        };
        let hidden_init = match doc.string("drone.hidden_init")?.as_deref() {
            None | Some("random") => HiddenInit::Random,
            Some("aligned") => HiddenInit::Aligned,
            Some("staggered") => HiddenInit::Staggered,
            Some(other) => return Err(doc.err("drone.hidden_init", format!("unknown mode `{other}`"))),
        };
        let n = doc.usize_or("scenario.n", n_default)?;
        let drone_defaults = DroneParams::default();
        let omega = doc.f64_or("drone.omega", drone_defaults.omega)?;
        let drone = DroneParams {
            k_visible: doc.f64_or("drone.k_visible", drone_defaults.k_visible)?,
            k_hidden: doc.f64_or("drone.k_hidden", drone_defaults.k_hidden)?,
            j: doc.f64_or("drone.j", drone_defaults.j)?,
            a: doc.f64_or("drone.a", drone_defaults.a)?,
            b: doc.f64_or("drone.b", drone_defaults.b)?,
            omega,
            hidden_omega: doc.f64_or("drone.hidden_omega", omega)?,
            freq_var: doc.f64_or("drone.freq_var", drone_defaults.freq_var)?,
            speed_cap: doc.f64_or("drone.speed_cap", drone_defaults.speed_cap)?,
            hidden_phase_in_payload: doc.bool_or("drone.hidden_phase_in_payload", false)?,
            smoothing,
        };
        let swarm_defaults = SwarmParams::static_sync();
        let swarm = SwarmParams {
            n,
            k: doc.f64_or("swarm.k", swarm_defaults.k)?,
            j: doc.f64_or("swarm.j", swarm_defaults.j)?,
            a: doc.f64_or("swarm.a", swarm_defaults.a)?,
            b: doc.f64_or("swarm.b", swarm_defaults.b)?,
            omega: doc.f64_or("swarm.omega", swarm_defaults.omega)?,
            freq_var: doc.f64_or("swarm.freq_var", swarm_defaults.freq_var)?,
        };
        let dt_default = match model {
            Model::Drone => 1e-3,
            _ => 1e-2,
        };
        let events = doc.events("scenario.events")?;
        Ok(ScenarioConfig {
            name: doc.string("scenario.name")?.unwrap_or_else(|| default_name.to_string()),
            description: doc.string("scenario.description")?.unwrap_or_default(),
            model,
            n,
            duration: doc.f64_or("scenario.duration", 60.0)?,
            dt: doc.f64_or("scenario.dt", dt_default)?,
            seed: doc.u64_or("scenario.seed", 0)?,
            formation,
            extent: doc.f64_or("scenario.extent", 2.0)?,
            events,
            pulse: PulseSettings {
                k: doc.f64_or("pulse.k", 0.05)?,
                rate: doc.f64_or("pulse.rate", 1.0)?,
                tol: doc.f64_or("pulse.tol", 0.01)?,
            },
            swarm,
            drone,
            hidden_init,
            medium: MediumSettings { airtime: doc.f64_or("medium.airtime", 0.005)?, collision_policy },
            trace_hz: doc.f64_or("output.trace_hz", 50.0)?,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ConfigError::invalid("scenario.dt", "must be finite and > 0"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(ConfigError::invalid("scenario.duration", "must be finite and > 0"));
        }
        if self.duration / self.dt > 1e9 {
            return Err(ConfigError::invalid("scenario.dt", "more than 1e9 ticks requested"));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(ConfigError::invalid("scenario.extent", "must be finite and > 0"));
        }
        if !(self.trace_hz > 0.0 && self.trace_hz.is_finite()) {
            return Err(ConfigError::invalid("output.trace_hz", "must be finite and > 0"));
        }
        if self.n == 0 {
            return Err(ConfigError::invalid("scenario.n", "must be >= 1"));
        }
        if self.formation == Formation::Quincunx && self.n != 5 {
            return Err(ConfigError::invalid("scenario.n", "quincunx formation needs n = 5"));
        }
        match self.model {
            Model::Pulse => {
                if !(self.pulse.k >= 0.0 && self.pulse.k.is_finite()) {
                    return Err(ConfigError::invalid("pulse.k", "must be finite and >= 0"));
                }
                if !(self.pulse.rate > 0.0 && self.pulse.rate.is_finite()) {
                    return Err(ConfigError::invalid("pulse.rate", "must be finite and > 0"));
                }
                if !(self.pulse.tol > 0.0 && self.pulse.tol < 0.5) {
                    return Err(ConfigError::invalid("pulse.tol", "must lie in (0, 0.5)"));
                }
            }
            Model::ReferenceSwarmalator => self.swarm.validate()?,
            Model::Drone => {
                self.drone.validate()?;
                self.drone.smoothing.build()?;
                if !(self.medium.airtime >= 0.0 && self.medium.airtime.is_finite()) {
                    return Err(ConfigError::invalid("medium.airtime", "must be finite and >= 0"));
                }
                if self.drone.hidden_omega * self.dt >= std::f64::consts::PI {
                    return Err(ConfigError::invalid("scenario.dt", "too coarse for drone.hidden_omega"));
                }
            }
        }
        for ev in &self.events {
            if !(ev.t >= 0.0 && ev.t.is_finite()) {
                return Err(ConfigError::invalid("scenario.events", "event times must be finite and >= 0"));
            }
        }
        if self.model != Model::Drone && !self.events.is_empty() {
            return Err(ConfigError::invalid("scenario.events", "events are only supported by the drone model"));
        }
        Ok(())
    }

    /// Nominal visible-phase period of the configured model.
    pub fn period(&self) -> f64 {
        match self.model {
            Model::Pulse => 1.0 / self.pulse.rate,
            Model::ReferenceSwarmalator => TAU / self.swarm.omega.abs().max(1e-12),
            Model::Drone => self.drone.period(),
        }
    }

    /// Time of the first despawn event, if any.
    pub fn first_despawn(&self) -> Option<f64> {
        self.events
            .iter()
            .filter(|e| matches!(e.action, EventAction::Despawn { .. }))
            .map(|e| e.t)
            .min_by(f64::total_cmp)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.name);
        if !self.description.is_empty() {
            let _ = writeln!(s, "  {}", self.description);
        }
        let _ = writeln!(s, "model: {}", self.model.label());
        let _ = writeln!(s, "N_o = {}", self.n);
        let _ = writeln!(s, "duration = {} s, dt = {} s, seed = {}", self.duration, self.dt, self.seed);
        match self.model {
            Model::Pulse => {
                let _ = writeln!(s, "K_C = {}", self.pulse.k);
                let _ = writeln!(
                    s,
                    "rate = {} per s (period {} s), sync tolerance = {}",
                    self.pulse.rate,
                    crate::trace::fmt_sig(1.0 / self.pulse.rate),
                    self.pulse.tol
                );
            }
            Model::ReferenceSwarmalator => {
                let p = &self.swarm;
                let _ = writeln!(s, "K_C = {}", p.k);
                let _ = writeln!(s, "J = {}, A = {}, B = {}", p.j, p.a, p.b);
                let _ = writeln!(s, "omega = {}, frequency variation = {}", p.omega, p.freq_var);
                if p.j_exceeds_a() {
                    let _ = writeln!(s, "warning: |J| > A");
                }
            }
            Model::Drone => {
                let p = &self.drone;
                let _ = writeln!(s, "K_C (visible) = {}, K (hidden) = {}", p.k_visible, p.k_hidden);
                let _ = writeln!(s, "J = {}, A = {}, B = {}", p.j, p.a, p.b);
                let _ = writeln!(
                    s,
                    "omega = {} rad/s (period {} s), hidden omega = {} rad/s, frequency variation = {}",
                    p.omega,
                    crate::trace::fmt_sig(p.period()),
                    p.hidden_omega,
                    p.freq_var
                );
                let _ = writeln!(s, "speed cap = {} m/s", p.speed_cap);
                let smoothing = match p.smoothing {
                    SmoothingMode::None => "none".to_string(),
                    SmoothingMode::MovingAverage { window } => format!("moving_average (window N={window})"),
                    SmoothingMode::Exponential { alpha } => format!("exponential (alpha={alpha})"),
                };
                let _ = writeln!(s, "smoothing: {smoothing}");
                let _ =
                    writeln!(s, "medium: airtime {} s, {}", self.medium.airtime, self.medium.collision_policy.label());
                let _ = writeln!(s, "formation: {} (extent {} m)", self.formation.label(), self.extent);
            }
        }
        for ev in &self.events {
            let frac = ev.t / self.duration;
            let at = if (frac - 0.5).abs() < 1e-12 {
                format!("t = {} s (duration/2)", ev.t)
            } else {
                format!("t = {} s", ev.t)
            };
            match ev.action {
                EventAction::Despawn { target: DespawnTarget::NearestCentroid } => {
                    let _ = writeln!(s, "event: despawn agent nearest centroid at {at}");
                }
                EventAction::Despawn { target: DespawnTarget::Id(id) } => {
                    let _ = writeln!(s, "event: despawn agent {id} at {at}");
                }
                EventAction::Spawn { id, theta_offset, .. } => {
                    let who = id.map_or("new agent".to_string(), |i| format!("agent {i}"));
                    let phase = theta_offset.map_or("random phase".to_string(), |o| format!("phase offset {o} rad"));
                    let _ = writeln!(s, "event: spawn {who} with {phase} at {at}");
                }
            }
        }
        s
    }
}

/// Parsed TOML plus the bookkeeping needed for line-level diagnostics.
struct Doc {
    values: BTreeMap<String, Value>,
    lines: BTreeMap<String, usize>,
    used: BTreeSet<String>,
}

impl Doc {
    fn new(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let mut values = BTreeMap::new();
        for (section, v) in table {
            match v {
                Value::Table(t) => {
                    for (k, v) in t {
                        values.insert(format!("{section}.{k}"), v);
                    }
                }
                other => {
                    values.insert(section, other);
                }
            }
        }
        Ok(Doc { values, lines: key_lines(text), used: BTreeSet::new() })
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.lines.get(key).copied()
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { key: key.to_string(), line: self.line(key), message: message.into() }
    }

    /// Fills in the line of a validation error raised without one.
    fn locate(&self, e: ConfigError) -> ConfigError {
        match e {
            ConfigError::Invalid { key, line: None, message } => {
                let line = self.line(&key);
                ConfigError::Invalid { key, line, message }
            }
            other => other,
        }
    }

    fn touch(&mut self, key: &str) {
        self.used.insert(key.to_string());
    }

    fn get(&mut self, key: &str) -> Option<Value> {
        self.used.insert(key.to_string());
        self.values.get(key).cloned()
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Float(f)) => Ok(f),
            Some(Value::Integer(i)) => Ok(i as f64),
            Some(_) => Err(self.err(key, "expected a number")),
        }
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if i >= 0 => Ok(i as u64),
            Some(_) => Err(self.err(key, "expected a non-negative integer")),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.u64_or(key, default as u64).map(|v| v as usize)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(b),
            Some(_) => Err(self.err(key, "expected true or false")),
        }
    }

    fn events(&mut self, key: &str) -> Result<Vec<ScenarioEvent>, ConfigError> {
        let Some(v) = self.get(key) else { return Ok(Vec::new()) };
        let Value::Array(items) = v else {
            return Err(self.err(key, "expected an array of event tables"));
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let Value::Table(t) = item else {
                return Err(self.err(key, format!("event {i}: expected a table")));
            };
            out.push(parse_event(t).map_err(|m| self.err(key, format!("event {i}: {m}")))?);
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(out)
    }

    fn reject_unused(&self) -> Result<(), ConfigError> {
        match self.values.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(self.err(k, "unknown key")),
            None => Ok(()),
        }
    }
}

fn num(t: &Table, k: &str) -> Result<Option<f64>, String> {
    match t.get(k) {
        None => Ok(None),
        Some(Value::Float(f)) => Ok(Some(*f)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(format!("`{k}` must be a number")),
    }
}

fn parse_event(t: &Table) -> Result<ScenarioEvent, String> {
    const KNOWN: &[&str] = &["t", "action", "target", "id", "x", "y", "theta_offset"];
    if let Some(k) = t.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(format!("unknown field `{k}`"));
    }
    let time = num(t, "t")?.ok_or("missing `t`")?;
    let id = match t.get("id") {
        None => None,
        Some(Value::Integer(i)) if *i >= 0 => Some(*i as usize),
        Some(_) => return Err("`id` must be a non-negative integer".into()),
    };
    let action = match t.get("action").and_then(Value::as_str) {
        Some("despawn") => {
            let target = match (t.get("target").and_then(Value::as_str), id) {
                (Some("nearest_centroid"), None) | (None, None) => DespawnTarget::NearestCentroid,
                (None, Some(id)) => DespawnTarget::Id(id),
                (Some(other), _) => return Err(format!("unknown despawn target `{other}`")),
            };
            EventAction::Despawn { target }
        }
        Some("spawn") => {
            let pos = match (num(t, "x")?, num(t, "y")?) {
                (Some(x), Some(y)) => Some(Vec2::new(x, y)),
                (None, None) => None,
                _ => return Err("spawn needs both `x` and `y` or neither".into()),
            };
            EventAction::Spawn { id, pos, theta_offset: num(t, "theta_offset")? }
        }
        Some(other) => return Err(format!("unknown action `{other}`")),
        None => return Err("missing `action`".into()),
    };
    Ok(ScenarioEvent { t: time, action })
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Maps `section.key` to the 1-based line that assigns it.
fn key_lines(text: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            if let Some(name) = rest.strip_suffix(']') {
                section = name.trim().to_string();
            }
            continue;
        }
        if let Some((key, _)) = line.split_once('=') {
            let key = key.trim().trim_matches('"');
            if key.is_empty() || key.contains(char::is_whitespace) {
                continue;
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            out.entry(full).or_insert(i + 1);
        }
    }
    out
}
