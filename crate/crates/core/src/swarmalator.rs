//! O'Keeffe swarmalators with global, continuous coupling.
//!
//! Every agent sees every other agent's position and phase at each step:
//!
//! ```text
//! dx_i/dt = 1/N Σ_{j≠i} [ û_ij (A + J cos(θ_j − θ_i)) − B (x_j − x_i)/|x_j − x_i|² ]
//! dθ_i/dt = ω_i + K/N Σ_{j≠i} sin(θ_j − θ_i) / |x_j − x_i|
//! ```
//!
//! integrated with explicit Euler from a synchronous snapshot. This is the
//! all-to-all oracle that the pairwise drone model is checked against.

use serde::Serialize;

use crate::error::ConfigError;
use crate::math::{direction_or_random, Angle, SimRng, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Swarmalator {
    pub pos: Vec2,
    pub theta: Angle,
    /// Natural frequency (rad per time unit).
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmParams {
    pub n: usize,
    pub k: f64,
    pub j: f64,
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub freq_var: f64,
}

impl SwarmParams {
    /// Static-sync parameter set (N=20, K=0.7, J=0.8, B=3, A=1).
    pub fn static_sync() -> Self {
        SwarmParams { n: 20, k: 0.7, j: 0.8, a: 1.0, b: 3.0, omega: 1.0, freq_var: 0.0 }
    }

    /// Same as [`static_sync`](Self::static_sync) with K = -0.7.
    pub fn rainbow() -> Self {
        SwarmParams { k: -0.7, ..Self::static_sync() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::invalid("scenario.n", "swarmalator model needs n >= 2"));
        }
        if !(self.a > 0.0) {
            return Err(ConfigError::invalid("swarm.a", "must be > 0"));
        }
        if !(self.b > 0.0) {
            return Err(ConfigError::invalid("swarm.b", "must be > 0"));
        }
        if !(self.freq_var >= 0.0) {
            return Err(ConfigError::invalid("swarm.freq_var", "must be >= 0"));
        }
        for (key, v) in [("swarm.k", self.k), ("swarm.j", self.j), ("swarm.omega", self.omega)] {
            if !v.is_finite() {
                return Err(ConfigError::invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// `|J| > A` lets like-phase attraction turn into net repulsion.
    pub fn j_exceeds_a(&self) -> bool {
        self.j.abs() > self.a
    }
}

/// Natural frequencies drawn uniformly from `[base - freq_var, base + freq_var]`.
pub fn assign_frequencies(n: usize, base_omega: f64, freq_var: f64, rng: &mut SimRng) -> Vec<f64> {
    (0..n)
        .map(|_| if freq_var > 0.0 { rng.uniform(base_omega - freq_var, base_omega + freq_var) } else { base_omega })
        .collect()
}

/// Positions uniform in the square `[-1, 1]²`, phases uniform, frequencies
/// from [`assign_frequencies`].
pub fn initial_state(params: &SwarmParams, rng: &mut SimRng) -> Vec<Swarmalator> {
    let positions: Vec<Vec2> =
        (0..params.n).map(|_| Vec2::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))).collect();
    let phases: Vec<Angle> = (0..params.n).map(|_| rng.angle()).collect();
    let omegas = assign_frequencies(params.n, params.omega, params.freq_var, rng);
    positions
        .into_iter()
        .zip(phases)
        .zip(omegas)
        .map(|((pos, theta), omega)| Swarmalator { pos, theta, omega })
        .collect()
}

/// Position derivatives and phase-coupling terms for the whole population,
/// evaluated from one snapshot. Each pair is visited once so that the
/// action–reaction symmetry holds exactly.
fn rates(state: &[Swarmalator], params: &SwarmParams, rng: &mut SimRng) -> (Vec<Vec2>, Vec<f64>) {
    let n = state.len();
    let inv_n = 1.0 / params.n.max(1) as f64;
    let mut vel = vec![Vec2::ZERO; n];
    let mut coupling = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (u, dist) = direction_or_random(state[i].pos, state[j].pos, rng);
            let dtheta = state[j].theta.value() - state[i].theta.value();
            let pull = u * (params.a + params.j * dtheta.cos()) - u * (params.b / dist);
            vel[i] += pull;
            vel[j] -= pull;
            let s = dtheta.sin() / dist;
            coupling[i] += s;
            coupling[j] -= s;
        }
    }
    for v in &mut vel {
        *v = *v * inv_n;
    }
    for c in &mut coupling {
        *c *= params.k * inv_n;
    }
    (vel, coupling)
}

/// Right-hand side of the position equation for each agent.
pub fn velocities(state: &[Swarmalator], params: &SwarmParams, rng: &mut SimRng) -> Vec<Vec2> {
    rates(state, params, rng).0
}

/// One Euler step of the position equation only.
pub fn step_positions(state: &mut [Swarmalator], params: &SwarmParams, dt: f64, rng: &mut SimRng) {
    let vel = velocities(state, params, rng);
    for (s, v) in state.iter_mut().zip(vel) {
        s.pos += v * dt;
    }
}

/// One Euler step of the phase equation only.
pub fn step_phases(state: &mut [Swarmalator], params: &SwarmParams, dt: f64, rng: &mut SimRng) {
    let (_, coupling) = rates(state, params, rng);
    for (s, c) in state.iter_mut().zip(coupling) {
        s.theta = s.theta.shifted((s.omega + c) * dt);
    }
}

/// Synchronous step of both equations from the same snapshot. Returns the
/// velocities that were applied.
pub fn step(state: &mut [Swarmalator], params: &SwarmParams, dt: f64, rng: &mut SimRng) -> Vec<Vec2> {
    let (vel, coupling) = rates(state, params, rng);
    for ((s, v), c) in state.iter_mut().zip(&vel).zip(coupling) {
        s.pos += *v * dt;
        s.theta = s.theta.shifted((s.omega + c) * dt);
    }
    vel
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSample {
    pub t: f64,
    pub agents: Vec<Swarmalator>,
    pub velocities: Vec<Vec2>,
}

/// Sampled time series of a reference run.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceTrace {
    pub samples: Vec<ReferenceSample>,
}

impl ReferenceTrace {
    pub fn last(&self) -> &ReferenceSample {
        self.samples.last().expect("trace always holds the initial sample")
    }
}

/// Integrates from `initial` for `duration`, recording every `record_every`
/// steps plus the final state.
pub fn run_from(
    mut state: Vec<Swarmalator>,
    params: &SwarmParams,
    duration: f64,
    dt: f64,
    record_every: usize,
    rng: &mut SimRng,
) -> ReferenceTrace {
    let steps = (duration / dt).round() as usize;
    let record_every = record_every.max(1);
    let mut samples = Vec::with_capacity(steps / record_every + 2);
    let v0 = velocities(&state, params, rng);
    samples.push(ReferenceSample { t: 0.0, agents: state.clone(), velocities: v0 });
    for step_idx in 1..=steps {
        let _ = step(&mut state, params, dt, rng);
        if step_idx % record_every == 0 || step_idx == steps {
            // Report the velocity field of the state being recorded.
            let v = velocities(&state, params, rng);
            samples.push(ReferenceSample { t: step_idx as f64 * dt, agents: state.clone(), velocities: v });
        }
    }
    ReferenceTrace { samples }
}

/// Random initial conditions followed by [`run_from`].
pub fn run_reference(
    params: &SwarmParams,
    duration: f64,
    dt: f64,
    record_every: usize,
    rng: &mut SimRng,
) -> ReferenceTrace {
    let state = initial_state(params, rng);
    run_from(state, params, duration, dt, record_every, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{circ_diff, seeded_rng};
    use crate::metrics::order_parameter;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn pair(d: f64, th_a: f64, th_b: f64) -> Vec<Swarmalator> {
        vec![
            Swarmalator { pos: Vec2::new(0.0, 0.0), theta: Angle::new(th_a), omega: 0.0 },
            Swarmalator { pos: Vec2::new(d, 0.0), theta: Angle::new(th_b), omega: 0.0 },
        ]
    }

    fn params2() -> SwarmParams {
        SwarmParams { n: 2, ..SwarmParams::static_sync() }
    }

    #[test]
    fn equilibrium_pair_is_stationary() {
        let p = params2();
        let d_star = p.b / (p.a + p.j);
        assert_abs_diff_eq!(d_star, 5.0 / 3.0, epsilon = 1e-15);
        let mut rng = seeded_rng(0);
        let v = velocities(&pair(d_star, 1.0, 1.0), &p, &mut rng);
        assert!(v[0].norm() < 1e-12 && v[1].norm() < 1e-12);
    }

    #[test]
    fn close_pair_repels() {
        let p = params2();
        let mut rng = seeded_rng(0);
        let v = velocities(&pair(1.0, 0.5, 0.5), &p, &mut rng);
        assert!(v[0].x < 0.0 && v[1].x > 0.0);
    }

    #[test]
    fn zero_j_ignores_phases() {
        let p = SwarmParams { j: 0.0, ..params2() };
        let mut rng = seeded_rng(0);
        let a = velocities(&pair(1.3, 0.0, 0.0), &p, &mut rng);
        let b = velocities(&pair(1.3, 0.4, 2.9), &p, &mut rng);
        assert_eq!(a, b);
    }

    #[test]
    fn phase_step_examples() {
        let p = SwarmParams { omega: 0.0, ..params2() };
        let mut rng = seeded_rng(0);
        let dt = 0.01;

        let mut equal = pair(1.0, 2.0, 2.0);
        step_phases(&mut equal, &p, dt, &mut rng);
        assert_abs_diff_eq!(circ_diff(equal[0].theta, equal[1].theta), 0.0, epsilon = 1e-15);

        let mut anti = pair(1.0, 0.0, PI);
        anti[0].omega = 0.3;
        anti[1].omega = 0.3;
        step_phases(&mut anti, &p, dt, &mut rng);
        assert_abs_diff_eq!(anti[0].theta.value(), 0.3 * dt, epsilon = 1e-15);

        let mut quarter = pair(1.0, 0.0, PI / 2.0);
        step_phases(&mut quarter, &p, dt, &mut rng);
        assert_abs_diff_eq!(quarter[0].theta.value(), p.k / 2.0 * dt, epsilon = 1e-15);
    }

    #[test]
    fn frequencies() {
        let mut rng = seeded_rng(4);
        assert!(assign_frequencies(10, 1.5, 0.0, &mut rng).iter().all(|&w| w == 1.5));
        let ws = assign_frequencies(10, 1.5, 0.1, &mut rng);
        assert!(ws.iter().all(|&w| (1.4..=1.6).contains(&w)));
        let mut again = seeded_rng(4);
        let _ = assign_frequencies(10, 1.5, 0.0, &mut again);
        assert_eq!(ws, assign_frequencies(10, 1.5, 0.1, &mut again));

        let n = 10_000;
        let big = assign_frequencies(n, 2.0, 0.1, &mut rng);
        let mean = big.iter().sum::<f64>() / n as f64;
        // Uniform on [b-v, b+v] has sd v/sqrt(3); allow three standard errors.
        let bound = 3.0 * 0.1 / (3.0 * n as f64).sqrt();
        assert!((mean - 2.0).abs() < bound, "mean {mean}");
    }

    #[test]
    fn symmetric_pair_stays_on_line() {
        let p = params2();
        let mut rng = seeded_rng(0);
        let mut s = vec![
            Swarmalator { pos: Vec2::new(-0.3, 0.2), theta: Angle::new(0.1), omega: 0.5 },
            Swarmalator { pos: Vec2::new(0.9, 0.2), theta: Angle::new(1.7), omega: 0.5 },
        ];
        for _ in 0..2000 {
            step(&mut s, &p, 0.01, &mut rng);
        }
        assert_abs_diff_eq!(s[0].pos.y, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1].pos.y, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn translation_and_rotation_equivariance() {
        let p = SwarmParams { n: 6, freq_var: 0.2, ..SwarmParams::static_sync() };
        let mut rng = seeded_rng(11);
        let base = initial_state(&p, &mut rng);
        let shift = Vec2::new(3.5, -1.25);
        let rot = 0.7;
        let moved: Vec<_> = base.iter().map(|s| Swarmalator { pos: s.pos + shift, ..*s }).collect();
        let turned: Vec<_> = base.iter().map(|s| Swarmalator { pos: s.pos.rotated(rot), ..*s }).collect();
        let run = |st: Vec<Swarmalator>| {
            let mut r = seeded_rng(0);
            run_from(st, &p, 5.0, 0.01, 500, &mut r).last().agents.clone()
        };
        let (a, b, c) = (run(base), run(moved), run(turned));
        for i in 0..a.len() {
            assert!((b[i].pos - (a[i].pos + shift)).norm() < 1e-9);
            assert!((c[i].pos - a[i].pos.rotated(rot)).norm() < 1e-9);
            assert_abs_diff_eq!(circ_diff(a[i].theta, b[i].theta), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn global_phase_shift_commutes() {
        let p = SwarmParams { n: 6, freq_var: 0.2, ..SwarmParams::static_sync() };
        let mut rng = seeded_rng(12);
        let base = initial_state(&p, &mut rng);
        let shifted: Vec<_> = base.iter().map(|s| Swarmalator { theta: s.theta.shifted(1.1), ..*s }).collect();
        let mut r1 = seeded_rng(0);
        let mut r2 = seeded_rng(0);
        let a = run_from(base, &p, 5.0, 0.01, 500, &mut r1);
        let b = run_from(shifted, &p, 5.0, 0.01, 500, &mut r2);
        for (x, y) in a.last().agents.iter().zip(&b.last().agents) {
            assert_abs_diff_eq!(circ_diff(y.theta, x.theta), 1.1, epsilon = 1e-9);
            assert!((x.pos - y.pos).norm() < 1e-9);
        }
    }

    #[test]
    fn centre_of_mass_is_conserved() {
        let p = SwarmParams { n: 12, freq_var: 0.3, ..SwarmParams::rainbow() };
        let mut rng = seeded_rng(5);
        let mut s = initial_state(&p, &mut rng);
        let com = |s: &[Swarmalator]| s.iter().map(|a| a.pos).sum::<Vec2>() / s.len() as f64;
        let c0 = com(&s);
        for _ in 0..1000 {
            step(&mut s, &p, 0.01, &mut rng);
        }
        assert!((com(&s) - c0).norm() < 1e-10);
    }

    #[test]
    fn positive_coupling_raises_order() {
        let p = SwarmParams { n: 10, ..SwarmParams::static_sync() };
        for seed in 0..20 {
            let mut rng = seeded_rng(seed);
            let tr = run_reference(&p, 40.0, 0.01, 4000, &mut rng);
            let r0 = order_parameter(&tr.samples[0].agents.iter().map(|a| a.theta).collect::<Vec<_>>()).unwrap();
            let r1 = order_parameter(&tr.last().agents.iter().map(|a| a.theta).collect::<Vec<_>>()).unwrap();
            assert!(r1 > r0, "seed {seed}: {r0} -> {r1}");
        }
    }
}
