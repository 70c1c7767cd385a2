//! Arcs of the unit circle, parametrized by start angle and length.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Half-open arc [start, start + length) in R/(2 pi Z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub start: f64,
    pub length: f64,
}

impl AngleInterval {
    pub fn new(start: f64, length: f64) -> Self {
        assert!(length > 0.0 && length <= 2.0 * PI, "length must lie in (0, 2 pi]");
        Self { start: start.rem_euclid(2.0 * PI), length }
    }

    pub fn full_circle() -> Self {
        Self { start: 0.0, length: 2.0 * PI }
    }

    /// Half-open membership: ((theta - start) mod 2 pi) < length.
    pub fn contains(&self, theta: f64) -> bool {
        (theta - self.start).rem_euclid(2.0 * PI) < self.length
    }

    /// Complementary arc [start + length, start + 2 pi).
    pub fn complement(&self) -> Self {
        Self::new(self.start + self.length, 2.0 * PI - self.length)
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }
}
