//! Observables used to judge synchrony, spacing and formation quality.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::MetricsError;
use crate::math::{circ_diff, Angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyncSample {
    pub t: f64,
    pub order_param: f64,
    pub max_pair_diff: f64,
}

/// Pairwise distance summary. `min <= gm <= am <= max` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingSample {
    pub am: f64,
    pub gm: f64,
    pub min: f64,
    pub max: f64,
}

/// Kuramoto order parameter `|mean(e^{iθ})|`.
pub fn order_parameter(thetas: &[Angle]) -> Result<f64, MetricsError> {
    if thetas.is_empty() {
        return Err(MetricsError::TooFew { need: 1, got: 0 });
    }
    let (s, c) = thetas.iter().fold((0.0, 0.0), |(s, c), t| (s + t.value().sin(), c + t.value().cos()));
    let n = thetas.len() as f64;
    Ok(((s / n).powi(2) + (c / n).powi(2)).sqrt().min(1.0))
}

/// Circular mean direction, `None` when the phasors cancel.
pub fn mean_phase(thetas: &[Angle]) -> Option<Angle> {
    let (s, c) = thetas.iter().fold((0.0, 0.0), |(s, c), t| (s + t.value().sin(), c + t.value().cos()));
    if s.hypot(c) < 1e-12 {
        None
    } else {
        Some(Angle::new(s.atan2(c)))
    }
}

/// Largest circular distance between any two phases (rad, in `[0, π]`).
pub fn max_pair_diff(thetas: &[Angle]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in thetas.iter().enumerate() {
        for b in &thetas[i + 1..] {
            worst = worst.max(circ_diff(*a, *b).abs());
        }
    }
    worst
}

pub fn pairwise_spacing(positions: &[Vec2]) -> Result<SpacingSample, MetricsError> {
    let n = positions.len();
    if n < 2 {
        return Err(MetricsError::TooFew { need: 2, got: n });
    }
    let mut sum = 0.0;
    let mut log_sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (positions[j] - positions[i]).norm();
            sum += d;
            log_sum += d.ln();
            min = min.min(d);
            max = max.max(d);
            pairs += 1;
        }
    }
    let m = pairs as f64;
    let am = sum / m;
    // exp(mean(ln d)) can land an ulp outside [min, am]; clamp to the bounds.
    let gm = (log_sum / m).exp().clamp(min, am);
    Ok(SpacingSample { am, gm, min, max })
}

/// Fisher–Lee circular correlation between the agents' angular position
/// about their centroid and their phase. `None` when either variable has no
/// circular spread (e.g. all phases equal, or all agents collinear through
/// the centroid).
pub fn rainbow_correlation(state: &[(Vec2, Angle)]) -> Result<Option<f64>, MetricsError> {
    let n = state.len();
    if n < 3 {
        return Err(MetricsError::TooFew { need: 3, got: n });
    }
    let centroid = state.iter().map(|(p, _)| *p).sum::<Vec2>() / n as f64;
    let angles: Vec<f64> = state.iter().map(|(p, _)| (*p - centroid).angle().value()).collect();
    let phases: Vec<f64> = state.iter().map(|(_, t)| t.value()).collect();
    Ok(fisher_lee(&angles, &phases))
}

/// Fisher–Lee circular–circular correlation coefficient.
pub fn fisher_lee(alpha: &[f64], beta: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..alpha.len() {
        for j in (i + 1)..alpha.len() {
            let sa = (alpha[i] - alpha[j]).sin();
            let sb = (beta[i] - beta[j]).sin();
            num += sa * sb;
            da += sa * sa;
            db += sb * sb;
        }
    }
    let den = (da * db).sqrt();
    if den < 1e-12 {
        None
    } else {
        Some((num / den).clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadcastSpacing {
    pub mean_gap: f64,
    pub min_gap: f64,
    /// Jain index of the gaps, in `[1/M, 1]`.
    pub jain_fairness: f64,
    pub gaps: usize,
}

/// Gap statistics of the merged broadcast sequence of all agents.
pub fn broadcast_spacing_stats(fire_times: &[Vec<f64>]) -> Result<BroadcastSpacing, MetricsError> {
    let mut all: Vec<f64> = fire_times.iter().flatten().copied().collect();
    if all.len() < 2 {
        return Err(MetricsError::TooFew { need: 2, got: all.len() });
    }
    all.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = all.windows(2).map(|w| w[1] - w[0]).collect();
    let m = gaps.len() as f64;
    let sum: f64 = gaps.iter().sum();
    let sum_sq: f64 = gaps.iter().map(|g| g * g).sum();
    let jain_fairness = if sum_sq > 0.0 { (sum * sum / (m * sum_sq)).min(1.0) } else { 1.0 };
    Ok(BroadcastSpacing {
        mean_gap: sum / m,
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        jain_fairness,
        gaps: gaps.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormationTarget {
    PentagonRing,
    SquareRing,
}

impl FormationTarget {
    pub fn vertices(self) -> usize {
        match self {
            FormationTarget::PentagonRing => 5,
            FormationTarget::SquareRing => 4,
        }
    }
}

/// RMS residual between `positions` and a regular polygon after the best
/// translation, rotation and vertex assignment. The polygon's circumradius
/// is the RMS distance of the positions from their centroid.
pub fn formation_error(positions: &[Vec2], target: FormationTarget) -> Result<f64, MetricsError> {
    let n = target.vertices();
    if positions.len() != n {
        return Err(MetricsError::ShapeMismatch { expected: n, got: positions.len() });
    }
    let centroid = positions.iter().copied().sum::<Vec2>() / n as f64;
    let centred: Vec<Vec2> = positions.iter().map(|p| *p - centroid).collect();
    let spread: f64 = centred.iter().map(|p| p.norm_squared()).sum();
    let radius = (spread / n as f64).sqrt();
    let ideal: Vec<Vec2> = (0..n).map(|k| Vec2::from_polar(radius, TAU * k as f64 / n as f64)).collect();

    // Pick the assignment and rotation by the closed form, then measure the
    // residual directly; the closed-form residual cancels badly near zero.
    let mut best = (f64::NEG_INFINITY, 0.0, Vec::new());
    let mut perm: Vec<usize> = (0..n).collect();
    for_each_permutation(&mut perm, 0, &mut |perm| {
        let (mut dot, mut cross) = (0.0, 0.0);
        for (p, &k) in centred.iter().zip(perm.iter()) {
            dot += ideal[k].dot(*p);
            cross += p.cross(ideal[k]);
        }
        let aligned = dot.hypot(cross);
        if aligned > best.0 {
            best = (aligned, cross.atan2(dot), perm.to_vec());
        }
    });
    let (_, phi, perm) = best;
    let residual: f64 = centred.iter().zip(&perm).map(|(p, &k)| (p.rotated(phi) - ideal[k]).norm_squared()).sum();
    Ok((residual / n as f64).sqrt())
}

fn for_each_permutation(items: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}
