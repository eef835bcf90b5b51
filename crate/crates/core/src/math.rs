//! Circular arithmetic, planar vectors and the seeded random stream shared by
//! every model in the crate.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MathError;

/// Separation below which a pairwise direction is considered undefined (m).
pub const EPSILON_DIST: f64 = 1e-6;

/// An angle in radians, always stored in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps any finite value into `[0, 2π)`.
    ///
    /// Panics on non-finite input; use [`wrap_angle`] for a checked version.
    pub fn new(raw: f64) -> Self {
        wrap_angle(raw).expect("angle must be finite")
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Returns `self + delta`, wrapped.
    pub fn shifted(self, delta: f64) -> Self {
        Angle::new(self.0 + delta)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dimensionless phase in `[0, 1)` used by the pulse-coupled model.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitPhase(f64);

impl UnitPhase {
    pub const ZERO: UnitPhase = UnitPhase(0.0);

    /// Builds a unit phase; values outside `[0, 1)` are rejected.
    pub fn new(value: f64) -> Result<Self, MathError> {
        if !value.is_finite() {
            return Err(MathError::NonFinite(value));
        }
        if !(0.0..1.0).contains(&value) {
            return Err(MathError::OutOfRange { value, lo: 0.0, hi: 1.0 });
        }
        Ok(UnitPhase(value))
    }

    /// Wraps into `[0, 1)`.
    pub fn wrapping(value: f64) -> Self {
        let mut v = value.rem_euclid(1.0);
        if v >= 1.0 {
            v = 0.0;
        }
        UnitPhase(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Shortest distance around the unit circle, in `[0, 0.5]`.
    pub fn circular_distance(self, other: UnitPhase) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(1.0 - d)
    }
}

/// Wraps a raw angle into `[0, 2π)`.
pub fn wrap_angle(raw: f64) -> Result<Angle, MathError> {
    if !raw.is_finite() {
        return Err(MathError::NonFinite(raw));
    }
    let mut v = raw.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if v >= TAU {
        v = 0.0;
    }
    Ok(Angle(v))
}

/// Signed shortest angular distance from `b` to `a`, in `(-π, π]`.
///
/// An exact half-turn resolves to `+π`.
pub fn circ_diff(a: Angle, b: Angle) -> f64 {
    let d = a.0 - b.0;
    if d > PI {
        d - TAU
    } else if d <= -PI {
        d + TAU
    } else {
        d
    }
}

/// Planar vector in metres (or model length units).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Vec2::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Unit vector in the direction of `self`.
    pub fn unit(self) -> Result<Vec2, MathError> {
        let n = self.norm();
        if !(n > EPSILON_DIST) {
            return Err(MathError::Singular(n));
        }
        Ok(self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> Angle {
        Angle::new(self.y.atan2(self.x))
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Scales the vector down so that its norm does not exceed `cap`.
    pub fn capped(self, cap: f64) -> Vec2 {
        let n = self.norm();
        if n > cap && n > 0.0 {
            self * (cap / n)
        } else {
            self
        }
    }
}

pub fn norm(v: Vec2) -> f64 {
    v.norm()
}

pub fn unit(v: Vec2) -> Result<Vec2, MathError> {
    v.unit()
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::iter::Sum for Vec2 {
    fn sum<I: Iterator<Item = Vec2>>(iter: I) -> Vec2 {
        iter.fold(Vec2::ZERO, |a, b| a + b)
    }
}

/// The scenario random stream: ChaCha8 seeded through `seed_from_u64`.
///
/// ChaCha output is value-stable across platforms and `rand_chacha` releases,
/// which is what makes traces reproducible byte for byte.
#[derive(Debug, Clone)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        self.0.random_range(lo..hi)
    }

    /// Uniform angle in `[0, 2π)`.
    pub fn angle(&mut self) -> Angle {
        Angle::new(self.uniform(0.0, TAU))
    }

    /// Uniform unit phase in `[0, 1)`.
    pub fn unit_phase(&mut self) -> UnitPhase {
        UnitPhase::wrapping(self.uniform(0.0, 1.0))
    }

    /// Uniformly distributed direction.
    pub fn unit_vector(&mut self) -> Vec2 {
        Vec2::from_polar(1.0, self.uniform(0.0, TAU))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.random()
    }
}

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng(ChaCha8Rng::seed_from_u64(seed))
}

/// Unit vector from `from` towards `to`, falling back to a random direction
/// drawn from `rng` when the two points are closer than [`EPSILON_DIST`].
pub fn direction_or_random(from: Vec2, to: Vec2, rng: &mut SimRng) -> (Vec2, f64) {
    let d = to - from;
    let dist = d.norm();
    match d.unit() {
        Ok(u) => (u, dist),
        Err(_) => (rng.unit_vector(), EPSILON_DIST),
    }
}
