//! Per-agent smoothing of movement commands.
//!
//! Pairwise coupling makes each command depend on whichever peer broadcast
//! last, so the raw command stream jumps from peer to peer. Both filters here
//! average that stream; neither touches phases.

use std::collections::VecDeque;

use crate::error::ConfigError;
use crate::math::Vec2;

/// Moving average over the last `window` samples. Before the window fills,
/// the average is taken over the samples seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverageFilter {
    window: usize,
    samples: VecDeque<Vec2>,
}

impl MovingAverageFilter {
    pub fn new(window: usize) -> Result<Self, ConfigError> {
        if window == 0 {
            return Err(ConfigError::invalid("smoothing.window", "window must be >= 1"));
        }
        Ok(MovingAverageFilter { window, samples: VecDeque::with_capacity(window) })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn push(&mut self, x: Vec2) -> Vec2 {
        if self.samples.len() == self.window {
            self.samples.pop_front();
        }
        self.samples.push_back(x);
        // Summed fresh each time; a running sum would drift over long flights.
        self.samples.iter().copied().sum::<Vec2>() / self.samples.len() as f64
    }
}

/// Exponential smoothing `s <- alpha * x + (1 - alpha) * s`, seeded with the
/// first sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFilter {
    alpha: f64,
    state: Option<Vec2>,
}

impl ExponentialFilter {
    pub fn new(alpha: f64) -> Result<Self, ConfigError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ConfigError::invalid("smoothing.alpha", "alpha must lie in (0, 1]"));
        }
        Ok(ExponentialFilter { alpha, state: None })
    }

    /// Filter with an explicit starting state instead of first-sample seeding.
    pub fn with_state(alpha: f64, state: Vec2) -> Result<Self, ConfigError> {
        let mut f = Self::new(alpha)?;
        f.state = Some(state);
        Ok(f)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn state(&self) -> Option<Vec2> {
        self.state
    }

    pub fn push(&mut self, x: Vec2) -> Vec2 {
        let next = match self.state {
            None => x,
            Some(s) => x * self.alpha + s * (1.0 - self.alpha),
        };
        self.state = Some(next);
        next
    }
}

/// Smoothing selected by configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingMode {
    None,
    MovingAverage { window: usize },
    Exponential { alpha: f64 },
}

impl SmoothingMode {
    pub fn build(self) -> Result<CommandFilter, ConfigError> {
        Ok(match self {
            SmoothingMode::None => CommandFilter::Passthrough,
            SmoothingMode::MovingAverage { window } => CommandFilter::MovingAverage(MovingAverageFilter::new(window)?),
            SmoothingMode::Exponential { alpha } => CommandFilter::Exponential(ExponentialFilter::new(alpha)?),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            SmoothingMode::None => "none",
            SmoothingMode::MovingAverage { .. } => "moving_average",
            SmoothingMode::Exponential { .. } => "exponential",
        }
    }
}

/// The filter instance owned by one agent.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandFilter {
    Passthrough,
    MovingAverage(MovingAverageFilter),
    Exponential(ExponentialFilter),
}

impl CommandFilter {
    pub fn push(&mut self, x: Vec2) -> Vec2 {
        match self {
            CommandFilter::Passthrough => x,
            CommandFilter::MovingAverage(f) => f.push(x),
            CommandFilter::Exponential(f) => f.push(x),
        }
    }
}
