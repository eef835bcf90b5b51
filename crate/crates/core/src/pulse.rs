//! Mirollo–Strogatz style pulse-coupled oscillators.
//!
//! Each oscillator's phase climbs from 0 to 1 at a common rate. On reaching 1
//! it fires and resets; every other oscillator receiving the pulse jumps to
//! `(sqrt(theta) + k)^2`. A jump that reaches 1 makes the receiver fire in the
//! same cascade (absorption). Within a cascade an oscillator fires at most
//! once and ignores further pulses once it has fired.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::ConfigError;
use crate::math::{SimRng, UnitPhase};

/// Outcome of delivering one pulse to one oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseResponse {
    /// New sub-threshold phase.
    Advanced(UnitPhase),
    /// The jump reached threshold; the receiver fires immediately.
    Fire,
}

/// Phase response to a received pulse.
pub fn receive_pulse(theta: UnitPhase, k: f64) -> PulseResponse {
    let raw = (theta.value().sqrt() + k).powi(2);
    if raw >= 1.0 {
        PulseResponse::Fire
    } else {
        // (sqrt(x) + k)^2 >= x for k >= 0, but sqrt/square can round below.
        PulseResponse::Advanced(UnitPhase::wrapping(raw.max(theta.value())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseOscillator {
    pub id: usize,
    pub phase: UnitPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FireEvent {
    pub id: usize,
    pub time: f64,
    /// Fired because a received pulse pushed it over threshold.
    pub absorbed: bool,
}

/// A population of identical pulse-coupled oscillators.
#[derive(Debug, Clone)]
pub struct PulsePopulation {
    oscillators: Vec<PulseOscillator>,
    coupling: f64,
    rate: f64,
    time: f64,
}

impl PulsePopulation {
    pub fn new(phases: Vec<UnitPhase>, coupling: f64, rate: f64) -> Result<Self, ConfigError> {
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(ConfigError::invalid("pulse.k", "coupling must be finite and >= 0"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(ConfigError::invalid("pulse.rate", "rate must be finite and > 0"));
        }
        let oscillators = phases.into_iter().enumerate().map(|(id, phase)| PulseOscillator { id, phase }).collect();
        Ok(PulsePopulation { oscillators, coupling, rate, time: 0.0 })
    }

    /// `n` oscillators with phases drawn uniformly from `[0, 1)`.
    pub fn random(n: usize, coupling: f64, rate: f64, rng: &mut SimRng) -> Result<Self, ConfigError> {
        let phases = (0..n).map(|_| rng.unit_phase()).collect();
        Self::new(phases, coupling, rate)
    }

    pub fn oscillators(&self) -> &[PulseOscillator] {
        &self.oscillators
    }

    pub fn phases(&self) -> impl Iterator<Item = UnitPhase> + '_ {
        self.oscillators.iter().map(|o| o.phase)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn period(&self) -> f64 {
        1.0 / self.rate
    }

    /// Largest pairwise circular phase distance, in `[0, 0.5]`.
    pub fn spread(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.oscillators.iter().enumerate() {
            for b in &self.oscillators[i + 1..] {
                worst = worst.max(a.phase.circular_distance(b.phase));
            }
        }
        worst
    }

    /// Advances every phase by `rate * dt`, resolving fire events in
    /// crossing-time order (ties by ascending id).
    pub fn advance(&mut self, dt: f64) -> Vec<FireEvent> {
        let mut events = Vec::new();
        self.advance_observed(dt, |_, cascade| events.extend_from_slice(cascade));
        events
    }

    /// Like [`advance`](Self::advance) but calls `observe` after each cascade
    /// with the population state at the fire instant.
    pub fn advance_observed(&mut self, dt: f64, mut observe: impl FnMut(&Self, &[FireEvent])) {
        assert!(dt > 0.0, "dt must be positive");
        let end = self.time + dt;
        loop {
            let remaining = end - self.time;
            let Some(lead) = self.oscillators.iter().map(|o| o.phase.value()).max_by(|a, b| a.total_cmp(b)) else {
                self.time = end;
                return;
            };
            let to_fire = (1.0 - lead) / self.rate;
            if to_fire > remaining {
                let step = self.rate * remaining;
                for o in &mut self.oscillators {
                    o.phase = UnitPhase::wrapping(o.phase.value() + step);
                }
                self.time = end;
                return;
            }
            // Move everyone to the crossing instant. Oscillators tied with the
            // leader (within rounding) fire together.
            let step = self.rate * to_fire;
            let mut initiators = Vec::new();
            for o in &mut self.oscillators {
                let p = o.phase.value() + step;
                if p >= 1.0 - 1e-12 {
                    initiators.push(o.id);
                    o.phase = UnitPhase::ZERO;
                } else {
                    o.phase = UnitPhase::wrapping(p);
                }
            }
            self.time += to_fire;
            let cascade = self.cascade(initiators);
            observe(self, &cascade);
        }
    }

    fn cascade(&mut self, initiators: Vec<usize>) -> Vec<FireEvent> {
        let n = self.oscillators.len();
        let mut fired = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut events = Vec::new();
        for id in initiators {
            fired[id] = true;
            queue.push_back(id);
            events.push(FireEvent { id, time: self.time, absorbed: false });
        }
        while let Some(sender) = queue.pop_front() {
            for rx in 0..n {
                if rx == sender || fired[rx] {
                    continue;
                }
                match receive_pulse(self.oscillators[rx].phase, self.coupling) {
                    PulseResponse::Advanced(p) => self.oscillators[rx].phase = p,
                    PulseResponse::Fire => {
                        self.oscillators[rx].phase = UnitPhase::ZERO;
                        fired[rx] = true;
                        queue.push_back(rx);
                        events.push(FireEvent { id: rx, time: self.time, absorbed: true });
                    }
                }
            }
        }
        events
    }

    /// Runs until the phase spread drops below `tol` at a fire instant.
    /// Returns the elapsed time, or `None` if `max_time` passes first.
    pub fn run_to_sync(&mut self, max_time: f64, tol: f64) -> Option<f64> {
        assert!(tol > 0.0 && tol < 0.5, "tol must lie in (0, 0.5)");
        let start = self.time;
        if self.oscillators.len() <= 1 || self.spread() < tol {
            return Some(0.0);
        }
        let mut synced_at = None;
        let chunk = self.period();
        while synced_at.is_none() && self.time - start < max_time {
            let step = chunk.min(max_time - (self.time - start));
            self.advance_observed(step, |pop, _| {
                if synced_at.is_none() && pop.spread() < tol {
                    synced_at = Some(pop.time - start);
                }
            });
        }
        synced_at
    }
}
