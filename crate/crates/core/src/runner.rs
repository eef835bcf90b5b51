//! Runs a [`ScenarioConfig`] to completion and collects its traces.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{SimError, TraceError};
use crate::math::{seeded_rng, Angle, SimRng, Vec2};
use crate::metrics::{
    broadcast_spacing_stats, max_pair_diff, mean_phase, order_parameter, pairwise_spacing, rainbow_correlation,
    BroadcastSpacing, SpacingSample,
};
use crate::netsim::MediumStats;
use crate::pulse::PulsePopulation;
use crate::scenario::{DespawnTarget, EventAction, HiddenInit, Model, ScenarioConfig};
use crate::swarm::{DroneSwarm, FireRecord};
use crate::swarmalator::{self, assign_frequencies, Swarmalator};
use crate::trace::{fmt_opt, fmt_sig, write_csv, METRICS_HEADER, PHASE_HEADER, POSITION_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentSample {
    pub id: usize,
    /// Visible phase in radians.
    pub theta: f64,
    pub hidden: Option<f64>,
    pub pos: Option<Vec2>,
    pub vel: Option<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricRow {
    pub order_param: f64,
    pub max_pair_diff: f64,
    pub spacing: Option<SpacingSample>,
    pub collisions_cum: u64,
}

/// Every live agent at one trace instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub t: f64,
    pub agents: Vec<AgentSample>,
    pub metrics: MetricRow,
}

impl Frame {
    pub fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().filter_map(|a| a.pos).collect()
    }

    pub fn thetas(&self) -> Vec<Angle> {
        self.agents.iter().map(|a| Angle::new(a.theta)).collect()
    }

    pub fn agent(&self, id: usize) -> Option<&AgentSample> {
        self.agents.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppliedEvent {
    pub t: f64,
    pub action: &'static str,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub model: Model,
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
    pub ticks: u64,
    pub n_initial: usize,
    pub n_final: usize,
    pub final_order_param: f64,
    pub final_max_pair_diff: f64,
    pub final_spacing: Option<SpacingSample>,
    pub final_max_speed: Option<f64>,
    pub final_rainbow_correlation: Option<f64>,
    /// Pulse model: first fire instant at which the spread fell below tolerance.
    pub sync_time: Option<f64>,
    pub collisions: u64,
    pub medium: Option<MediumStats>,
    pub broadcast_spacing: Option<BroadcastSpacing>,
    pub events: Vec<AppliedEvent>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub frames: Vec<Frame>,
    pub fires: Vec<FireRecord>,
    pub summary: RunSummary,
}

impl RunOutput {
    /// Last frame at or before `t`.
    pub fn frame_at(&self, t: f64) -> &Frame {
        let idx = self.frames.partition_point(|f| f.t <= t + 1e-9);
        &self.frames[idx.saturating_sub(1)]
    }

    pub fn phase_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.frames.iter().flat_map(|f| {
            f.agents
                .iter()
                .map(move |a| format!("{},{},{},{}", fmt_sig(f.t), a.id, fmt_sig(a.theta), fmt_opt(a.hidden)))
        })
    }

    pub fn position_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.frames.iter().flat_map(|f| {
            f.agents.iter().filter_map(move |a| {
                let p = a.pos?;
                let v = a.vel.unwrap_or(Vec2::ZERO);
                Some(format!(
                    "{},{},{},{},{},{}",
                    fmt_sig(f.t),
                    a.id,
                    fmt_sig(p.x),
                    fmt_sig(p.y),
                    fmt_sig(v.x),
                    fmt_sig(v.y)
                ))
            })
        })
    }

    pub fn metric_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.frames.iter().map(|f| {
            let m = &f.metrics;
            let s = m.spacing;
            format!(
                "{},{},{},{},{},{},{},{}",
                fmt_sig(f.t),
                fmt_sig(m.order_param),
                fmt_sig(m.max_pair_diff),
                fmt_opt(s.map(|s| s.am)),
                fmt_opt(s.map(|s| s.gm)),
                fmt_opt(s.map(|s| s.min)),
                fmt_opt(s.map(|s| s.max)),
                m.collisions_cum
            )
        })
    }

    /// Writes `phases.csv`, `positions.csv`, `metrics.csv` and `summary.json`
    /// into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, TraceError> {
        std::fs::create_dir_all(dir).map_err(|e| TraceError::io(dir, e))?;
        let phases = dir.join("phases.csv");
        let positions = dir.join("positions.csv");
        let metrics = dir.join("metrics.csv");
        let summary = dir.join("summary.json");
        write_csv(&phases, PHASE_HEADER, self.phase_rows())?;
        write_csv(&positions, POSITION_HEADER, self.position_rows())?;
        write_csv(&metrics, METRICS_HEADER, self.metric_rows())?;
        let mut json = serde_json::to_string_pretty(&self.summary).expect("summary serialises");
        json.push('\n');
        std::fs::write(&summary, json).map_err(|e| TraceError::io(&summary, e))?;
        Ok(vec![phases, positions, metrics, summary])
    }
}

fn metric_row(agents: &[AgentSample], collisions_cum: u64) -> MetricRow {
    let thetas: Vec<Angle> = agents.iter().map(|a| Angle::new(a.theta)).collect();
    let positions: Vec<Vec2> = agents.iter().filter_map(|a| a.pos).collect();
    MetricRow {
        order_param: order_parameter(&thetas).unwrap_or(f64::NAN),
        max_pair_diff: max_pair_diff(&thetas),
        spacing: pairwise_spacing(&positions).ok(),
        collisions_cum,
    }
}

fn frame(t: f64, agents: Vec<AgentSample>, collisions_cum: u64) -> Frame {
    let metrics = metric_row(&agents, collisions_cum);
    Frame { t, agents, metrics }
}

fn stride(cfg: &ScenarioConfig) -> u64 {
    ((1.0 / (cfg.trace_hz * cfg.dt)).round() as u64).max(1)
}

fn tick_count(cfg: &ScenarioConfig) -> u64 {
    (cfg.duration / cfg.dt).round().max(1.0) as u64
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    match cfg.model {
        Model::Pulse => Ok(run_pulse(cfg)),
        Model::ReferenceSwarmalator => run_reference(cfg),
        Model::Drone => run_drone(cfg),
    }
}

fn run_pulse(cfg: &ScenarioConfig) -> RunOutput {
    let mut rng = seeded_rng(cfg.seed);
    let mut pop =
        PulsePopulation::random(cfg.n, cfg.pulse.k, cfg.pulse.rate, &mut rng).expect("validated pulse settings");
    let sample = |pop: &PulsePopulation| -> Vec<AgentSample> {
        pop.oscillators()
            .iter()
            .map(|o| AgentSample { id: o.id, theta: TAU * o.phase.value(), hidden: None, pos: None, vel: None })
            .collect()
    };
    let tol = cfg.pulse.tol;
    let mut sync_time = (pop.spread() < tol).then_some(0.0);
    let ticks = tick_count(cfg);
    let stride = stride(cfg);
    let mut frames = vec![frame(0.0, sample(&pop), 0)];
    let mut fires = Vec::new();
    for tick in 1..=ticks {
        pop.advance_observed(cfg.dt, |p, cascade| {
            fires.extend(cascade.iter().map(|e| FireRecord { t: e.time, id: e.id }));
            if sync_time.is_none() && p.spread() < tol {
                sync_time = Some(p.time());
            }
        });
        if tick % stride == 0 || tick == ticks {
            frames.push(frame(tick as f64 * cfg.dt, sample(&pop), 0));
        }
    }
    let summary = summarise(cfg, &frames, ticks, sync_time, None, None, Vec::new(), None);
    RunOutput { config: cfg.clone(), frames, fires, summary }
}

fn run_reference(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let mut rng = seeded_rng(cfg.seed);
    let params = &cfg.swarm;
    let positions = cfg.formation.positions(cfg.n, cfg.extent, &mut rng);
    let thetas: Vec<Angle> = (0..cfg.n).map(|_| rng.angle()).collect();
    let omegas = assign_frequencies(cfg.n, params.omega, params.freq_var, &mut rng);
    let mut state: Vec<Swarmalator> = positions
        .into_iter()
        .zip(thetas)
        .zip(omegas)
        .map(|((pos, theta), omega)| Swarmalator { pos, theta, omega })
        .collect();

    // Velocities for the trace use a copy of the generator so that the
    // trace rate cannot perturb the simulation stream.
    let sample = |state: &[Swarmalator], rng: &SimRng| -> Vec<AgentSample> {
        let vel = swarmalator::velocities(state, params, &mut rng.clone());
        state
            .iter()
            .zip(vel)
            .enumerate()
            .map(|(id, (s, v))| AgentSample {
                id,
                theta: s.theta.value(),
                hidden: None,
                pos: Some(s.pos),
                vel: Some(v),
            })
            .collect()
    };
    let ticks = tick_count(cfg);
    let stride = stride(cfg);
    let mut frames = vec![frame(0.0, sample(&state, &rng), 0)];
    for tick in 1..=ticks {
        swarmalator::step(&mut state, params, cfg.dt, &mut rng);
        if let Some(id) = state.iter().position(|s| !(s.pos.is_finite() && s.theta.value().is_finite())) {
            return Err(SimError::NonFinite { tick, agent: id, what: "position" });
        }
        if tick % stride == 0 || tick == ticks {
            frames.push(frame(tick as f64 * cfg.dt, sample(&state, &rng), 0));
        }
    }
    let summary = summarise(cfg, &frames, ticks, None, None, None, Vec::new(), None);
    Ok(RunOutput { config: cfg.clone(), frames, fires: Vec::new(), summary })
}

fn drone_sample(swarm: &DroneSwarm) -> Vec<AgentSample> {
    swarm
        .alive()
        .map(|d| AgentSample {
            id: d.id,
            theta: d.theta.value(),
            hidden: Some(d.hidden.value()),
            pos: Some(d.pos),
            vel: Some(d.command),
        })
        .collect()
}

/// Live agent closest to the centroid of the live agents; ties go to the
/// lower id.
fn nearest_centroid(swarm: &DroneSwarm) -> Option<usize> {
    let alive: Vec<_> = swarm.alive().collect();
    if alive.is_empty() {
        return None;
    }
    let centroid = alive.iter().map(|d| d.pos).sum::<Vec2>() / alive.len() as f64;
    let mut best: Option<(f64, usize)> = None;
    for d in alive {
        let dist = (d.pos - centroid).norm();
        if best.is_none_or(|(bd, _)| dist < bd) {
            best = Some((dist, d.id));
        }
    }
    best.map(|(_, id)| id)
}

fn apply_event(swarm: &mut DroneSwarm, action: EventAction) -> Result<Option<AppliedEvent>, SimError> {
    let t = swarm.time();
    match action {
        EventAction::Despawn { target } => {
            let id = match target {
                DespawnTarget::Id(id) => Some(id),
                DespawnTarget::NearestCentroid => nearest_centroid(swarm),
            };
            Ok(id.filter(|&id| swarm.despawn(id)).map(|id| AppliedEvent { t, action: "despawn", id }))
        }
        EventAction::Spawn { id, pos, theta_offset } => {
            let id = id.unwrap_or_else(|| swarm.next_free_id());
            let alive: Vec<(Vec2, Angle)> = swarm.alive().map(|d| (d.pos, d.theta)).collect();
            let pos = pos.unwrap_or_else(|| {
                // Just outside the current swarm, on the +x side.
                if alive.is_empty() {
                    return Vec2::ZERO;
                }
                let c = alive.iter().map(|a| a.0).sum::<Vec2>() / alive.len() as f64;
                let reach = alive.iter().map(|a| (a.0 - c).norm()).fold(0.0, f64::max);
                c + Vec2::new(reach + swarm.params().equilibrium_distance(), 0.0)
            });
            swarm.spawn(id, pos)?;
            if let Some(offset) = theta_offset {
                let thetas: Vec<Angle> = alive.iter().map(|a| a.1).collect();
                let base = mean_phase(&thetas).unwrap_or(Angle::ZERO);
                if let Some(d) = swarm.get_mut(id) {
                    d.theta = base.shifted(offset);
                }
            }
            Ok(Some(AppliedEvent { t, action: "spawn", id }))
        }
    }
}

fn run_drone(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let mut rng = seeded_rng(cfg.seed);
    let positions = cfg.formation.positions(cfg.n, cfg.extent, &mut rng);
    let mut swarm = DroneSwarm::new(cfg.drone.clone(), cfg.medium.airtime, cfg.medium.collision_policy, cfg.dt, rng)?;
    for (id, pos) in positions.into_iter().enumerate() {
        swarm.spawn(id, pos)?;
    }
    // Phases are drawn either way so the generator stream does not depend
    // on the initialisation mode.
    match cfg.hidden_init {
        HiddenInit::Random => {}
        HiddenInit::Aligned => {
            let common = swarm.get(0).map(|d| d.hidden).unwrap_or(Angle::ZERO);
            for id in 0..cfg.n {
                if let Some(d) = swarm.get_mut(id) {
                    d.hidden = common;
                }
            }
        }
        HiddenInit::Staggered => {
            for id in 0..cfg.n {
                if let Some(d) = swarm.get_mut(id) {
                    d.hidden = Angle::new(TAU * id as f64 / cfg.n as f64);
                }
            }
        }
    }

    let ticks = tick_count(cfg);
    let stride = stride(cfg);
    let mut events = cfg.events.iter().peekable();
    let mut applied = Vec::new();
    let mut frames = Vec::new();
    for tick in 0..ticks {
        let now = tick as f64 * cfg.dt;
        while let Some(ev) = events.next_if(|e| e.t <= now + 0.5 * cfg.dt) {
            applied.extend(apply_event(&mut swarm, ev.action)?);
        }
        if tick == 0 {
            frames.push(frame(0.0, drone_sample(&swarm), swarm.collision_count()));
        }
        swarm.step()?;
        let done = tick + 1;
        if done % stride == 0 || done == ticks {
            frames.push(frame(swarm.time(), drone_sample(&swarm), swarm.collision_count()));
        }
    }

    let fires = swarm.fire_log().to_vec();
    let settle = cfg.duration / 3.0;
    let late: Vec<Vec<f64>> =
        swarm.fire_times_by_agent().into_values().map(|v| v.into_iter().filter(|&t| t >= settle).collect()).collect();
    let spacing = broadcast_spacing_stats(&late).ok();
    let summary = summarise(cfg, &frames, ticks, None, Some(swarm.medium_stats()), spacing, applied, Some(&swarm));
    Ok(RunOutput { config: cfg.clone(), frames, fires, summary })
}

#[allow(clippy::too_many_arguments)]
fn summarise(
    cfg: &ScenarioConfig,
    frames: &[Frame],
    ticks: u64,
    sync_time: Option<f64>,
    medium: Option<MediumStats>,
    broadcast_spacing: Option<BroadcastSpacing>,
    events: Vec<AppliedEvent>,
    swarm: Option<&DroneSwarm>,
) -> RunSummary {
    let last = frames.last().expect("at least one frame");
    let state: Vec<(Vec2, Angle)> =
        last.agents.iter().filter_map(|a| a.pos.map(|p| (p, Angle::new(a.theta)))).collect();
    let rainbow = if state.is_empty() { None } else { rainbow_correlation(&state).ok().flatten() };
    let max_speed = last
        .agents
        .iter()
        .filter_map(|a| a.vel)
        .map(|v| v.norm())
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))));
    RunSummary {
        scenario: cfg.name.clone(),
        model: cfg.model,
        seed: cfg.seed,
        duration: cfg.duration,
        dt: cfg.dt,
        ticks,
        n_initial: cfg.n,
        n_final: last.agents.len(),
        final_order_param: last.metrics.order_param,
        final_max_pair_diff: last.metrics.max_pair_diff,
        final_spacing: last.metrics.spacing,
        final_max_speed: max_speed,
        final_rainbow_correlation: rainbow,
        sync_time,
        collisions: swarm.map_or(0, |s| s.collision_count()),
        medium,
        broadcast_spacing,
        events,
    }
}
