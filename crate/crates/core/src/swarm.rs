//! Tick-driven engine for a swarm of drones sharing one broadcast medium.
//!
//! Each tick of length `dt`:
//! 1. every live drone advances its clocks; hidden-phase wraps become
//!    broadcasts stamped at the crossing instant;
//! 2. the medium releases every message due by the end of the tick, and each
//!    recipient applies it in delivery order (ties by ascending id);
//! 3. every live drone moves with its held command.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::drone::{self, DroneParams, DroneState};
use crate::error::{ConfigError, SimError};
use crate::math::{SimRng, Vec2};
use crate::netsim::{BroadcastMedium, CollisionPolicy, MediumStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FireRecord {
    pub t: f64,
    pub id: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TickReport {
    pub broadcasts: usize,
    pub deliveries: usize,
}

#[derive(Debug, Clone)]
pub struct DroneSwarm {
    params: DroneParams,
    agents: BTreeMap<usize, DroneState>,
    medium: BroadcastMedium,
    rng: SimRng,
    dt: f64,
    tick: u64,
    fires: Vec<FireRecord>,
}

impl DroneSwarm {
    pub fn new(
        params: DroneParams,
        airtime: f64,
        policy: CollisionPolicy,
        dt: f64,
        rng: SimRng,
    ) -> Result<Self, ConfigError> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ConfigError::invalid("scenario.dt", "must be finite and > 0"));
        }
        if params.hidden_omega * dt >= std::f64::consts::PI {
            return Err(ConfigError::invalid(
                "scenario.dt",
                "too coarse: the hidden phase may not advance by more than pi per tick",
            ));
        }
        if !(airtime >= 0.0 && airtime.is_finite()) {
            return Err(ConfigError::invalid("medium.airtime", "must be finite and >= 0"));
        }
        Ok(DroneSwarm {
            params,
            agents: BTreeMap::new(),
            medium: BroadcastMedium::new(airtime, policy),
            rng,
            dt,
            tick: 0,
            fires: Vec::new(),
        })
    }

    pub fn params(&self) -> &DroneParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt
    }

    pub fn rng_mut(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    /// Inserts a fully specified drone; it starts listening immediately.
    pub fn insert(&mut self, drone: DroneState) -> Result<(), ConfigError> {
        if self.agents.contains_key(&drone.id) {
            return Err(ConfigError::DuplicateId(drone.id));
        }
        self.medium.join(drone.id, self.time());
        self.agents.insert(drone.id, drone);
        Ok(())
    }

    /// Spawns a drone with random phases at `pos`.
    pub fn spawn(&mut self, id: usize, pos: Vec2) -> Result<&DroneState, ConfigError> {
        if self.agents.contains_key(&id) {
            return Err(ConfigError::DuplicateId(id));
        }
        let d = drone::spawn(id, pos, &mut self.rng, &self.params)?;
        self.insert(d)?;
        Ok(&self.agents[&id])
    }

    /// Takes a drone out of the swarm. Returns false if it was not alive.
    pub fn despawn(&mut self, id: usize) -> bool {
        match self.agents.get_mut(&id) {
            Some(d) if d.alive => {
                drone::despawn(d);
                self.medium.leave(id, self.time());
                true
            }
            _ => false,
        }
    }

    pub fn next_free_id(&self) -> usize {
        self.agents.keys().next_back().map_or(0, |k| k + 1)
    }

    /// Live drones in ascending id order.
    pub fn alive(&self) -> impl Iterator<Item = &DroneState> + '_ {
        self.agents.values().filter(|d| d.alive)
    }

    /// Every drone ever added, including despawned ones.
    pub fn all(&self) -> impl Iterator<Item = &DroneState> + '_ {
        self.agents.values()
    }

    pub fn get(&self, id: usize) -> Option<&DroneState> {
        self.agents.get(&id)
    }

    pub fn get_mut(&mut self, id: usize) -> Option<&mut DroneState> {
        self.agents.get_mut(&id)
    }

    pub fn medium(&self) -> &BroadcastMedium {
        &self.medium
    }

    pub fn medium_stats(&self) -> MediumStats {
        self.medium.stats()
    }

    pub fn collision_count(&self) -> u64 {
        self.medium.collision_count()
    }

    pub fn fire_log(&self) -> &[FireRecord] {
        &self.fires
    }

    /// Broadcast instants grouped per drone id.
    pub fn fire_times_by_agent(&self) -> BTreeMap<usize, Vec<f64>> {
        let mut out: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for f in &self.fires {
            out.entry(f.id).or_default().push(f.t);
        }
        out
    }

    pub fn step(&mut self) -> Result<TickReport, SimError> {
        let now = self.time();
        let dt = self.dt;
        let carry_hidden = self.params.hidden_phase_in_payload;
        let mut report = TickReport::default();

        let mut outgoing = Vec::new();
        for d in self.agents.values_mut().filter(|d| d.alive) {
            if let Some(ev) = drone::advance_clock(d, now, dt) {
                outgoing.push(ev.into_message(d.id, carry_hidden));
            }
        }
        // Transmit in time order so the medium sees a monotone timeline.
        outgoing.sort_by(|a, b| a.sent_at.total_cmp(&b.sent_at).then(a.sender.cmp(&b.sender)));
        for msg in outgoing {
            self.fires.push(FireRecord { t: msg.sent_at, id: msg.sender });
            self.medium.broadcast(msg);
            report.broadcasts += 1;
        }

        let end = (self.tick + 1) as f64 * dt;
        for delivery in self.medium.poll_deliveries(end) {
            report.deliveries += 1;
            for rx in &delivery.recipients {
                if let Some(d) = self.agents.get_mut(rx).filter(|d| d.alive) {
                    drone::on_pulse_received(d, &delivery.msg, end, &self.params, &mut self.rng);
                }
            }
        }

        for d in self.agents.values_mut().filter(|d| d.alive) {
            drone::apply_motion(d, dt);
        }
        self.tick += 1;

        for d in self.agents.values().filter(|d| d.alive) {
            if !d.is_finite() {
                return Err(SimError::NonFinite { tick: self.tick, agent: d.id, what: "position" });
            }
        }
        Ok(report)
    }

    /// Steps until `t` (inclusive of the tick that reaches it).
    pub fn run_until(&mut self, t: f64) -> Result<(), SimError> {
        while self.time() + 0.5 * self.dt < t {
            self.step()?;
        }
        Ok(())
    }
}
