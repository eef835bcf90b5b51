//! Property tests over the public API.

use proptest::prelude::*;
use swarmpulse::drone::on_pulse_received;
use swarmpulse::metrics::{order_parameter, pairwise_spacing};
use swarmpulse::swarmalator::{initial_state, run_from, SwarmParams};
use swarmpulse::{
    circ_diff, run_scenario, seeded_rng, Angle, BroadcastMedium, CollisionPolicy, DroneParams, DroneState,
    ExponentialFilter, MovingAverageFilter, PulseMessage, ScenarioConfig, Vec2,
};

fn vec2() -> impl Strategy<Value = Vec2> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| Vec2::new(x, y))
}

fn inside_box(y: Vec2, xs: &[Vec2]) -> bool {
    let tol = 1e-9;
    let lo_x = xs.iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
    let hi_x = xs.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max);
    let lo_y = xs.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
    let hi_y = xs.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max);
    y.x >= lo_x - tol && y.x <= hi_x + tol && y.y >= lo_y - tol && y.y <= hi_y + tol
}

proptest! {
    #[test]
    fn moving_average_stays_in_window_hull(xs in prop::collection::vec(vec2(), 1..80), window in 1usize..25) {
        let mut f = MovingAverageFilter::new(window).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let y = f.push(x);
            let lo = (i + 1).saturating_sub(window);
            prop_assert!(inside_box(y, &xs[lo..=i]));
        }
    }

    #[test]
    fn exponential_stays_in_history_hull(xs in prop::collection::vec(vec2(), 1..80), alpha in 0.01f64..=1.0) {
        let mut f = ExponentialFilter::new(alpha).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            prop_assert!(inside_box(f.push(x), &xs[..=i]));
        }
    }

    #[test]
    fn filters_are_linear(
        pairs in prop::collection::vec((vec2(), vec2()), 1..60),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        window in 1usize..15,
        alpha in 0.01f64..=1.0,
    ) {
        let mut ma = (MovingAverageFilter::new(window).unwrap(), MovingAverageFilter::new(window).unwrap());
        let mut ma_mix = MovingAverageFilter::new(window).unwrap();
        let mut ex = (ExponentialFilter::new(alpha).unwrap(), ExponentialFilter::new(alpha).unwrap());
        let mut ex_mix = ExponentialFilter::new(alpha).unwrap();
        for &(x, y) in &pairs {
            let mix = x * a + y * b;
            let want_ma = ma.0.push(x) * a + ma.1.push(y) * b;
            let want_ex = ex.0.push(x) * a + ex.1.push(y) * b;
            prop_assert!((ma_mix.push(mix) - want_ma).norm() < 1e-9);
            prop_assert!((ex_mix.push(mix) - want_ex).norm() < 1e-9);
        }
    }

    #[test]
    fn degenerate_filters_are_identity(xs in prop::collection::vec(vec2(), 1..50)) {
        let mut ma = MovingAverageFilter::new(1).unwrap();
        let mut ex = ExponentialFilter::new(1.0).unwrap();
        for &x in &xs {
            prop_assert_eq!(ma.push(x), x);
            prop_assert_eq!(ex.push(x), x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reference_translation_and_phase_shift(seed in 0u64..1000, dx in -5.0f64..5.0, dy in -5.0f64..5.0, shift in 0.0f64..6.0) {
        let params = SwarmParams { n: 6, ..SwarmParams::static_sync() };
        let base = initial_state(&params, &mut seeded_rng(seed));
        let moved: Vec<_> = base
            .iter()
            .map(|s| swarmpulse::Swarmalator { pos: s.pos + Vec2::new(dx, dy), theta: s.theta.shifted(shift), ..*s })
            .collect();
        let a = run_from(base, &params, 2.0, 0.01, 1000, &mut seeded_rng(1));
        let b = run_from(moved, &params, 2.0, 0.01, 1000, &mut seeded_rng(1));
        for (sa, sb) in a.last().agents.iter().zip(&b.last().agents) {
            prop_assert!((sb.pos - sa.pos - Vec2::new(dx, dy)).norm() < 1e-9);
            prop_assert!((circ_diff(sb.theta, sa.theta) - circ_diff(Angle::new(shift), Angle::ZERO)).abs() < 1e-9);
        }
    }

    #[test]
    fn positive_coupling_shrinks_gap(theta_i in 0.0f64..6.0, gap in -3.1f64..3.1, k in 0.001f64..0.5) {
        prop_assume!(gap.abs() > 1e-6);
        let p = DroneParams { k_visible: k, ..Default::default() };
        let mut me = DroneState::new(0, Vec2::ZERO, Angle::new(theta_i), Angle::ZERO, &p).unwrap();
        let msg = PulseMessage { sender: 1, pos: Vec2::new(1.0, 0.0), theta: Angle::new(theta_i + gap), sent_at: 0.0, hidden: None };
        on_pulse_received(&mut me, &msg, 0.0, &p, &mut seeded_rng(0));
        let after = circ_diff(msg.theta, me.theta).abs();
        prop_assert!(after < gap.abs());
    }

    #[test]
    fn deliveries_ordered_by_time_then_sender(sends in prop::collection::vec((0usize..5, 0.0f64..1.0), 1..40)) {
        let mut m = BroadcastMedium::new(0.0, CollisionPolicy::DeliverAll);
        for id in 0..5 {
            m.join(id, 0.0);
        }
        let mut sorted = sends.clone();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        for &(sender, t) in &sorted {
            m.broadcast(PulseMessage { sender, pos: Vec2::ZERO, theta: Angle::ZERO, sent_at: t, hidden: None });
        }
        let d = m.poll_deliveries(2.0);
        for w in d.windows(2) {
            let key = |x: &swarmpulse::netsim::Delivery| (x.delivered_at, x.msg.sender);
            prop_assert!(key(&w[0]).0 < key(&w[1]).0 || (key(&w[0]).0 == key(&w[1]).0 && key(&w[0]).1 <= key(&w[1]).1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn drone_runs_keep_metric_bounds(seed in 0u64..10_000) {
        let text = "[scenario]\nmodel = \"drone\"\nn = 5\nduration = 6.0\nformation = \"random\"\nextent = 2.0\n";
        let mut cfg = ScenarioConfig::parse(text, "prop").unwrap();
        cfg.seed = seed;
        let out = run_scenario(&cfg).unwrap();
        for f in &out.frames {
            let r = order_parameter(&f.thetas()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
            let s = pairwise_spacing(&f.positions()).unwrap();
            prop_assert!(s.min <= s.gm + 1e-12 && s.gm <= s.am + 1e-12 && s.am <= s.max + 1e-12);
            for a in &f.agents {
                prop_assert!((0.0..std::f64::consts::TAU).contains(&a.theta));
                prop_assert!(a.vel.unwrap().norm() <= DroneParams::default().speed_cap + 1e-12);
            }
        }
    }
}
