//! Pulse-coupled swarmalator drone.
//!
//! A drone never sees the swarm as a whole. Each received pulse is treated as
//! a two-body system between the receiver and that one sender:
//!
//! ```text
//! θ_i ← θ_i + K sin(θ_j − θ_i)
//! m_i = û_ij (A + J cos(θ_j − θ_i)) − B (x_j − x_i)/|x_j − x_i|²
//! ```
//!
//! with no sum over peers and no division by swarm size. The movement command
//! `m_i` goes through the agent's smoothing filter, is capped at the speed
//! limit and then held as the drone's velocity until the next pulse.
//!
//! Broadcast timing is driven by a second, hidden phase: the drone transmits
//! whenever its hidden phase wraps through 2π. Receivers apply the same phase
//! update with a negative constant to their own hidden phase, which spreads
//! the swarm's transmissions apart in time.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::ConfigError;
use crate::math::{direction_or_random, Angle, SimRng, Vec2};
use crate::netsim::PulseMessage;
use crate::smoothing::{CommandFilter, SmoothingMode};

#[derive(Debug, Clone, PartialEq)]
pub struct DroneParams {
    pub k_visible: f64,
    /// Hidden-phase coupling; negative drives transmissions apart.
    pub k_hidden: f64,
    pub j: f64,
    pub a: f64,
    pub b: f64,
    /// Base visible-phase frequency (rad/s).
    pub omega: f64,
    /// Base hidden-phase frequency (rad/s); sets the broadcast rate.
    pub hidden_omega: f64,
    /// Half-width of the uniform frequency spread (rad/s).
    pub freq_var: f64,
    /// m/s
    pub speed_cap: f64,
    /// Carry the sender's hidden phase in each message instead of inferring
    /// it from the pulse timing.
    pub hidden_phase_in_payload: bool,
    pub smoothing: SmoothingMode,
}

impl Default for DroneParams {
    fn default() -> Self {
        DroneParams {
            k_visible: 0.05,
            k_hidden: -0.1,
            j: 0.8,
            a: 1.0,
            b: 3.0,
            omega: TAU,
            hidden_omega: TAU,
            freq_var: 0.0,
            speed_cap: 0.3,
            hidden_phase_in_payload: false,
            smoothing: SmoothingMode::None,
        }
    }
}

impl DroneParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.k_hidden <= 0.0) {
            return Err(ConfigError::invalid("drone.k_hidden", "hidden coupling must be <= 0"));
        }
        if !(self.speed_cap > 0.0 && self.speed_cap.is_finite()) {
            return Err(ConfigError::invalid("drone.speed_cap", "must be finite and > 0"));
        }
        if !(self.hidden_omega > 0.0 && self.hidden_omega.is_finite()) {
            return Err(ConfigError::invalid("drone.hidden_omega", "must be finite and > 0"));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(ConfigError::invalid("drone.omega", "must be finite and >= 0"));
        }
        if !(self.freq_var >= 0.0 && self.freq_var < self.hidden_omega) {
            return Err(ConfigError::invalid("drone.freq_var", "must be >= 0 and below drone.hidden_omega"));
        }
        for (key, v) in
            [("drone.k_visible", self.k_visible), ("drone.j", self.j), ("drone.a", self.a), ("drone.b", self.b)]
        {
            if !v.is_finite() {
                return Err(ConfigError::invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Nominal visible-phase period (s).
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// Nominal broadcast period of one drone (s).
    pub fn broadcast_period(&self) -> f64 {
        TAU / self.hidden_omega
    }

    /// Separation at which two in-phase drones neither attract nor repel.
    pub fn equilibrium_distance(&self) -> f64 {
        self.b / (self.a + self.j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroneState {
    pub id: usize,
    pub pos: Vec2,
    /// Visible phase, shared with peers.
    pub theta: Angle,
    /// Hidden phase, used only to time broadcasts.
    pub hidden: Angle,
    pub omega: f64,
    pub hidden_omega: f64,
    pub filter: CommandFilter,
    /// Smoothed, capped command currently held as velocity.
    pub command: Vec2,
    pub alive: bool,
}

/// A broadcast produced by [`advance_clock`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadcastEvent {
    pub at: f64,
    pub pos: Vec2,
    pub theta: Angle,
    pub hidden: Angle,
}

impl BroadcastEvent {
    pub fn into_message(self, sender: usize, carry_hidden: bool) -> PulseMessage {
        PulseMessage {
            sender,
            pos: self.pos,
            theta: self.theta,
            sent_at: self.at,
            hidden: carry_hidden.then_some(self.hidden),
        }
    }
}

impl DroneState {
    /// Drone with explicit phases and frequencies.
    pub fn new(id: usize, pos: Vec2, theta: Angle, hidden: Angle, params: &DroneParams) -> Result<Self, ConfigError> {
        Ok(DroneState {
            id,
            pos,
            theta,
            hidden,
            omega: params.omega,
            hidden_omega: params.hidden_omega,
            filter: params.smoothing.build()?,
            command: Vec2::ZERO,
            alive: true,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.command.is_finite()
    }
}

/// Brings a drone into the swarm with uniformly random phases and
/// frequencies drawn around the configured base rates.
pub fn spawn(id: usize, pos: Vec2, rng: &mut SimRng, params: &DroneParams) -> Result<DroneState, ConfigError> {
    let theta = rng.angle();
    let hidden = rng.angle();
    let mut drone = DroneState::new(id, pos, theta, hidden, params)?;
    if params.freq_var > 0.0 {
        drone.omega = rng.uniform(params.omega - params.freq_var, params.omega + params.freq_var);
        drone.hidden_omega = rng.uniform(params.hidden_omega - params.freq_var, params.hidden_omega + params.freq_var);
    }
    Ok(drone)
}

pub fn despawn(me: &mut DroneState) {
    me.alive = false;
    me.command = Vec2::ZERO;
}

/// Raw pairwise movement command towards/away from one sender.
pub fn movement_command(
    me_pos: Vec2,
    me_theta: Angle,
    msg: &PulseMessage,
    params: &DroneParams,
    rng: &mut SimRng,
) -> Vec2 {
    let (u, dist) = direction_or_random(me_pos, msg.pos, rng);
    let dtheta = msg.theta.value() - me_theta.value();
    u * (params.a + params.j * dtheta.cos()) - u * (params.b / dist)
}

/// Applies one received pulse at time `now`: visible and hidden phase
/// updates and a new held movement command.
///
/// The visible phase is compared at the send instant: the receiver winds its
/// own phase back by its rate times the message age, so airtime and tick
/// granularity do not read as a phase gap. Both phase updates and the command
/// use the receiver's state from before this pulse.
pub fn on_pulse_received(me: &mut DroneState, msg: &PulseMessage, now: f64, params: &DroneParams, rng: &mut SimRng) {
    debug_assert_ne!(msg.sender, me.id, "drones never hear their own pulse");
    let age = (now - msg.sent_at).max(0.0);
    let theta_then = me.theta.shifted(-me.omega * age);

    let dtheta = msg.theta.value() - theta_then.value();
    me.theta = me.theta.shifted(params.k_visible * dtheta.sin());

    // Without a payload the pulse itself marks the sender's hidden phase as 0.
    let sender_hidden = msg.hidden.unwrap_or(Angle::ZERO);
    let dhidden = sender_hidden.value() - me.hidden.value();
    me.hidden = me.hidden.shifted(params.k_hidden * dhidden.sin());

    let raw = movement_command(me.pos, theta_then, msg, params, rng);
    me.command = me.filter.push(raw).capped(params.speed_cap);
}

/// Advances both phases by `dt` starting at time `now`. Returns a broadcast
/// if the hidden phase wrapped through 2π, stamped at the crossing instant.
pub fn advance_clock(me: &mut DroneState, now: f64, dt: f64) -> Option<BroadcastEvent> {
    debug_assert!(dt > 0.0);
    let hidden_raw = me.hidden.value() + me.hidden_omega * dt;
    let event = if hidden_raw >= TAU {
        let lead = ((TAU - me.hidden.value()) / me.hidden_omega).clamp(0.0, dt);
        Some(BroadcastEvent {
            at: now + lead,
            pos: me.pos + me.command * lead,
            theta: me.theta.shifted(me.omega * lead),
            hidden: Angle::ZERO,
        })
    } else {
        None
    };
    me.theta = me.theta.shifted(me.omega * dt);
    me.hidden = Angle::new(hidden_raw);
    event
}

/// Integrates the held command over `dt`.
pub fn apply_motion(me: &mut DroneState, dt: f64) {
    me.pos += me.command * dt;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{circ_diff, seeded_rng};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn drone(id: usize, pos: Vec2, theta: f64, params: &DroneParams) -> DroneState {
        DroneState::new(id, pos, Angle::new(theta), Angle::new(1.0), params).unwrap()
    }

    fn msg_from(sender: usize, pos: Vec2, theta: f64) -> PulseMessage {
        PulseMessage { sender, pos, theta: Angle::new(theta), sent_at: 0.0, hidden: None }
    }

    #[test]
    fn equal_phases_leave_visible_phase() {
        let p = DroneParams::default();
        let mut rng = seeded_rng(0);
        let mut me = drone(0, Vec2::ZERO, 2.0, &p);
        on_pulse_received(&mut me, &msg_from(1, Vec2::new(1.0, 0.0), 2.0), 0.0, &p, &mut rng);
        assert_eq!(me.theta.value(), 2.0);
    }

    #[test]
    fn quarter_turn_pull() {
        let p = DroneParams { k_visible: 0.1, ..Default::default() };
        let mut rng = seeded_rng(0);
        let mut me = drone(0, Vec2::ZERO, 0.0, &p);
        on_pulse_received(&mut me, &msg_from(1, Vec2::new(1.0, 0.0), PI / 2.0), 0.0, &p, &mut rng);
        assert_abs_diff_eq!(me.theta.value(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_distance_gives_zero_command() {
        let p = DroneParams::default();
        let d = p.equilibrium_distance();
        assert_abs_diff_eq!(d, 5.0 / 3.0, epsilon = 1e-15);
        let mut rng = seeded_rng(0);
        let mut me = drone(0, Vec2::ZERO, 1.0, &p);
        on_pulse_received(&mut me, &msg_from(1, Vec2::new(0.0, d), 1.0), 0.0, &p, &mut rng);
        assert!(me.command.norm() < 1e-12);
    }

    #[test]
    fn hidden_phase_repelled_from_sender() {
        let p = DroneParams::default();
        let mut rng = seeded_rng(0);
        let mut me = DroneState::new(0, Vec2::ZERO, Angle::ZERO, Angle::new(0.5), &p).unwrap();
        on_pulse_received(&mut me, &msg_from(1, Vec2::new(1.0, 0.0), 0.0), 0.0, &p, &mut rng);
        assert_abs_diff_eq!(me.hidden.value(), 0.5 + 0.1 * 0.5f64.sin(), epsilon = 1e-15);
        me.hidden = Angle::new(TAU - 0.5);
        on_pulse_received(&mut me, &msg_from(1, Vec2::new(1.0, 0.0), 0.0), 0.0, &p, &mut rng);
        assert_abs_diff_eq!(me.hidden.value(), TAU - 0.5 - 0.1 * 0.5f64.sin(), epsilon = 1e-12);
    }

    #[test]
    fn hidden_payload_mode_uses_carried_phase() {
        let p = DroneParams { hidden_phase_in_payload: true, ..Default::default() };
        let mut rng = seeded_rng(0);
        let mut me = DroneState::new(0, Vec2::ZERO, Angle::ZERO, Angle::new(1.0), &p).unwrap();
        let mut m = msg_from(1, Vec2::new(1.0, 0.0), 0.0);
        m.hidden = Some(Angle::new(1.0));
        on_pulse_received(&mut me, &m, 0.0, &p, &mut rng);
        assert_eq!(me.hidden.value(), 1.0);
    }

    #[test]
    fn clock_crossing_emits_broadcast() {
        let p = DroneParams { omega: 1.0, hidden_omega: 1.0, ..Default::default() };
        let mut me = DroneState::new(3, Vec2::ZERO, Angle::new(0.5), Angle::new(TAU - 0.01), &p).unwrap();
        let ev = advance_clock(&mut me, 10.0, 0.02).expect("crossing");
        assert_abs_diff_eq!(ev.at, 10.01, epsilon = 1e-12);
        assert_abs_diff_eq!(ev.theta.value(), 0.51, epsilon = 1e-12);
        assert_abs_diff_eq!(me.hidden.value(), 0.01, epsilon = 1e-12);
        assert!(advance_clock(&mut me, 10.02, 0.02).is_none());
    }

    #[test]
    fn zero_omega_freezes_visible_phase() {
        let p = DroneParams { omega: 0.0, ..Default::default() };
        let mut me = drone(0, Vec2::ZERO, 1.234, &p);
        for i in 0..500 {
            advance_clock(&mut me, i as f64 * 0.01, 0.01);
        }
        assert_eq!(me.theta.value(), 1.234);
    }

    #[test]
    fn antiphase_hidden_clocks_alternate_evenly() {
        let p = DroneParams { hidden_omega: TAU, ..Default::default() };
        let mut a = DroneState::new(0, Vec2::ZERO, Angle::ZERO, Angle::new(0.05), &p).unwrap();
        let mut b = DroneState::new(1, Vec2::ZERO, Angle::ZERO, Angle::new(0.05 + PI), &p).unwrap();
        let dt = 1e-3;
        let mut fires = Vec::new();
        for i in 0..5000 {
            let t = i as f64 * dt;
            if let Some(e) = advance_clock(&mut a, t, dt) {
                fires.push((e.at, 0));
            }
            if let Some(e) = advance_clock(&mut b, t, dt) {
                fires.push((e.at, 1));
            }
        }
        fires.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in fires.windows(2) {
            assert_ne!(w[0].1, w[1].1);
            assert_abs_diff_eq!(w[1].0 - w[0].0, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn motion_holds_command() {
        let p = DroneParams::default();
        let mut me = drone(0, Vec2::new(1.0, 1.0), 0.0, &p);
        apply_motion(&mut me, 0.5);
        assert_eq!(me.pos, Vec2::new(1.0, 1.0));
        me.command = Vec2::new(1.0, 0.0);
        apply_motion(&mut me, 0.5);
        assert_eq!(me.pos, Vec2::new(1.5, 1.0));
    }

    #[test]
    fn command_is_capped() {
        let p = DroneParams { speed_cap: 0.3, ..Default::default() };
        let mut rng = seeded_rng(0);
        let mut me = drone(0, Vec2::ZERO, 0.0, &p);
        // Very close: repulsion dominates and far exceeds the cap.
        on_pulse_received(&mut me, &msg_from(1, Vec2::new(0.05, 0.0), 0.0), 0.0, &p, &mut rng);
        assert_abs_diff_eq!(me.command.norm(), 0.3, epsilon = 1e-12);
        assert!(me.command.x < 0.0);
    }

    #[test]
    fn spawn_draws_and_uncoupled_offset_holds() {
        let p = DroneParams { k_visible: 0.0, freq_var: 0.0, ..Default::default() };
        let mut rng = seeded_rng(9);
        let mut a = spawn(0, Vec2::ZERO, &mut rng, &p).unwrap();
        let mut b = spawn(1, Vec2::new(1.0, 0.0), &mut rng, &p).unwrap();
        let gap = circ_diff(a.theta, b.theta);
        for i in 0..1000 {
            let t = i as f64 * 0.01;
            let m = msg_from(1, b.pos, b.theta.value());
            on_pulse_received(&mut a, &m, 0.0, &p, &mut rng);
            advance_clock(&mut a, t, 0.01);
            advance_clock(&mut b, t, 0.01);
        }
        assert_abs_diff_eq!(circ_diff(a.theta, b.theta), gap, epsilon = 1e-9);
    }

    #[test]
    fn stale_pulse_is_compared_at_send_instant() {
        // Equal clocks: a pulse sent 0.2 s ago by an in-phase peer is no gap.
        let p = DroneParams { k_visible: 0.2, ..Default::default() };
        let mut rng = seeded_rng(0);
        let mut me = drone(0, Vec2::ZERO, 1.0 + p.omega * 0.2, &p);
        let before = me.theta;
        let m = PulseMessage { sent_at: 0.8, ..msg_from(1, Vec2::new(1.0, 0.0), 1.0) };
        on_pulse_received(&mut me, &m, 1.0, &p, &mut rng);
        assert_abs_diff_eq!(circ_diff(me.theta, before), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn spawn_spreads_frequencies() {
        let p = DroneParams { freq_var: 0.2, ..Default::default() };
        let mut rng = seeded_rng(2);
        for id in 0..50 {
            let d = spawn(id, Vec2::ZERO, &mut rng, &p).unwrap();
            assert!((d.omega - p.omega).abs() <= 0.2);
            assert!((d.hidden_omega - p.hidden_omega).abs() <= 0.2);
        }
    }

    #[test]
    fn positive_coupling_shrinks_gap_each_pulse() {
        let p = DroneParams { k_visible: 0.2, ..Default::default() };
        let mut rng = seeded_rng(0);
        let mut a = drone(0, Vec2::ZERO, 0.3, &p);
        let mut b = drone(1, Vec2::new(1.0, 0.0), 2.9, &p);
        let mut gap = circ_diff(b.theta, a.theta).abs();
        for i in 0..20 {
            if i % 2 == 0 {
                let m = msg_from(1, b.pos, b.theta.value());
                on_pulse_received(&mut a, &m, 0.0, &p, &mut rng);
            } else {
                let m = msg_from(0, a.pos, a.theta.value());
                on_pulse_received(&mut b, &m, 0.0, &p, &mut rng);
            }
            let g = circ_diff(b.theta, a.theta).abs();
            assert!(g < gap);
            gap = g;
        }
    }

    #[test]
    fn validation() {
        assert!(DroneParams::default().validate().is_ok());
        assert!(DroneParams { k_hidden: 0.1, ..Default::default() }.validate().is_err());
        assert!(DroneParams { k_hidden: 0.0, ..Default::default() }.validate().is_ok());
        assert!(DroneParams { speed_cap: 0.0, ..Default::default() }.validate().is_err());
        assert!(DroneParams { hidden_omega: -1.0, ..Default::default() }.validate().is_err());
    }
}
