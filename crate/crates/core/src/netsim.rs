//! Shared pulsed broadcast medium.
//!
//! A message occupies the channel for `airtime` seconds starting at its send
//! time and is delivered to every live agent except the sender when that
//! interval ends. Two messages whose airtime intervals overlap are both marked
//! collided; under [`CollisionPolicy::DropAll`] neither is delivered.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::math::{Angle, Vec2};

/// The only datum agents exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseMessage {
    pub sender: usize,
    pub pos: Vec2,
    /// Visible phase at the send instant.
    pub theta: Angle,
    pub sent_at: f64,
    /// Sender's hidden phase. Only populated when the swarm runs with the
    /// hidden phase carried in the payload; by default the hidden phase is
    /// private and the receiver infers it from the pulse timing.
    pub hidden: Option<Angle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionPolicy {
    DropAll,
    DeliverAll,
}

impl CollisionPolicy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "drop_all" => Some(CollisionPolicy::DropAll),
            "deliver_all" => Some(CollisionPolicy::DeliverAll),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CollisionPolicy::DropAll => "drop_all",
            CollisionPolicy::DeliverAll => "deliver_all",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    /// Ascending agent ids.
    pub recipients: Vec<usize>,
    pub msg: PulseMessage,
    pub delivered_at: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MediumStats {
    pub sent: u64,
    pub delivered: u64,
    /// Messages discarded because of a collision.
    pub dropped: u64,
    /// Messages that overlapped another on air, whatever the policy.
    pub collided: u64,
}

#[derive(Debug, Clone)]
struct InFlight {
    msg: PulseMessage,
    delivery_time: f64,
    collided: bool,
}

impl InFlight {
    fn overlaps(&self, other: &InFlight) -> bool {
        let (s1, e1) = (self.msg.sent_at, self.delivery_time);
        let (s2, e2) = (other.msg.sent_at, other.delivery_time);
        s1 == s2 || (s1 < e2 && s2 < e1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Membership {
    joined: f64,
    left: Option<f64>,
}

impl Membership {
    fn alive_at(&self, t: f64) -> bool {
        self.joined <= t && self.left.is_none_or(|l| t < l)
    }
}

#[derive(Debug, Clone)]
pub struct BroadcastMedium {
    airtime: f64,
    policy: CollisionPolicy,
    /// Sorted by (delivery_time, sender).
    in_flight: Vec<InFlight>,
    now: f64,
    members: BTreeMap<usize, Membership>,
    stats: MediumStats,
}

impl BroadcastMedium {
    pub fn new(airtime: f64, policy: CollisionPolicy) -> Self {
        assert!(airtime >= 0.0 && airtime.is_finite(), "airtime must be finite and >= 0");
        BroadcastMedium {
            airtime,
            policy,
            in_flight: Vec::new(),
            now: 0.0,
            members: BTreeMap::new(),
            stats: MediumStats::default(),
        }
    }

    pub fn airtime(&self) -> f64 {
        self.airtime
    }

    pub fn policy(&self) -> CollisionPolicy {
        self.policy
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// Registers `id` as a listener from time `at` on.
    pub fn join(&mut self, id: usize, at: f64) {
        self.members.insert(id, Membership { joined: at, left: None });
    }

    /// `id` stops receiving from time `at` on.
    pub fn leave(&mut self, id: usize, at: f64) {
        if let Some(m) = self.members.get_mut(&id) {
            m.left = Some(at);
        }
    }

    pub fn broadcast(&mut self, msg: PulseMessage) {
        assert!(msg.sent_at >= self.now, "message sent at {} before medium time {}", msg.sent_at, self.now);
        let mut entry = InFlight { msg, delivery_time: msg.sent_at + self.airtime, collided: false };
        let mut newly_collided = 0;
        for other in &mut self.in_flight {
            if other.overlaps(&entry) {
                if !other.collided {
                    other.collided = true;
                    newly_collided += 1;
                }
                if !entry.collided {
                    entry.collided = true;
                    newly_collided += 1;
                }
            }
        }
        for _ in 0..newly_collided {
            self.count_collision();
        }
        self.stats.sent += 1;
        let key = (entry.delivery_time, entry.msg.sender);
        let idx = self.in_flight.partition_point(|e| (e.delivery_time, e.msg.sender) <= key);
        self.in_flight.insert(idx, entry);
    }

    /// Removes and returns every message due by `now`, in delivery order.
    pub fn poll_deliveries(&mut self, now: f64) -> Vec<Delivery> {
        assert!(now >= self.now, "poll time went backwards");
        self.now = now;
        let due = self.in_flight.partition_point(|e| e.delivery_time <= now);
        let mut out = Vec::new();
        for entry in self.in_flight.drain(..due) {
            if entry.collided && self.policy == CollisionPolicy::DropAll {
                continue;
            }
            let recipients: Vec<usize> = self
                .members
                .iter()
                .filter(|(&id, m)| id != entry.msg.sender && m.alive_at(entry.delivery_time))
                .map(|(&id, _)| id)
                .collect();
            self.stats.delivered += 1;
            out.push(Delivery { recipients, msg: entry.msg, delivered_at: entry.delivery_time });
        }
        out
    }

    fn count_collision(&mut self) {
        self.stats.collided += 1;
        if self.policy == CollisionPolicy::DropAll {
            self.stats.dropped += 1;
        }
    }

    /// Messages that have collided since creation.
    pub fn collision_count(&self) -> u64 {
        self.stats.collided
    }

    /// Messages on air that will still be delivered.
    pub fn in_flight(&self) -> u64 {
        self.in_flight.iter().filter(|e| !(e.collided && self.policy == CollisionPolicy::DropAll)).count() as u64
    }

    pub fn stats(&self) -> MediumStats {
        self.stats
    }
}
