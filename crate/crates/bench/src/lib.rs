//! Fixtures shared by the engine benchmarks.

use swarmpulse::scenario::Formation;
use swarmpulse::smoothing::SmoothingMode;
use swarmpulse::swarmalator::{initial_state, SwarmParams};
use swarmpulse::{drone, seeded_rng, CollisionPolicy, DroneParams, DroneSwarm, PulsePopulation, Swarmalator};

pub fn pulse_population(n: usize) -> PulsePopulation {
    PulsePopulation::random(n, 0.05, 1.0, &mut seeded_rng(1)).expect("valid pulse settings")
}

pub fn reference_state(n: usize) -> (Vec<Swarmalator>, SwarmParams) {
    let params = SwarmParams { n, ..SwarmParams::static_sync() };
    (initial_state(&params, &mut seeded_rng(2)), params)
}

/// A ring of `n` drones with exponential smoothing at the default rates.
pub fn drone_swarm(n: usize) -> DroneSwarm {
    let params = DroneParams { smoothing: SmoothingMode::Exponential { alpha: 0.8 }, ..DroneParams::default() };
    let mut swarm = DroneSwarm::new(params, 0.005, CollisionPolicy::DropAll, 1e-3, seeded_rng(3)).expect("valid swarm");
    let mut rng = seeded_rng(4);
    for (id, pos) in Formation::Ring.positions(n, 1.6, &mut rng).into_iter().enumerate() {
        let d = drone::spawn(id, pos, &mut rng, swarm.params()).expect("valid drone");
        swarm.insert(d).expect("unique id");
    }
    swarm
}
