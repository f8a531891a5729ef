//! Helpers on the Heisenberg group `G_{2,2}` in exponential coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergPoint {
    pub x: f64,
    pub y: f64,
    pub a: f64,
}

impl HeisenbergPoint {
    pub const IDENTITY: Self = Self { x: 0.0, y: 0.0, a: 0.0 };

    pub fn new(x: f64, y: f64, a: f64) -> Self {
        Self { x, y, a }
    }

    pub fn inverse(&self) -> Self {
        Self { x: -self.x, y: -self.y, a: -self.a }
    }
}

/// Homogeneous norm `((x²+y²)² + 16a²)^{1/4}`.
pub fn heisenberg_norm(g: HeisenbergPoint) -> f64 {
    let r2 = g.x * g.x + g.y * g.y;
    (r2 * r2 + 16.0 * g.a * g.a).sqrt().sqrt()
}

pub fn heisenberg_mul(g: HeisenbergPoint, h: HeisenbergPoint) -> HeisenbergPoint {
    HeisenbergPoint {
        x: g.x + h.x,
        y: g.y + h.y,
        a: g.a + h.a + 0.5 * (g.x * h.y - g.y * h.x),
    }
}

/// Group potential `N(g⁻¹·h)^{-2}` (homogeneous dimension 4, unit constant).
pub fn heisenberg_potential(g: HeisenbergPoint, h: HeisenbergPoint) -> f64 {
    let n = heisenberg_norm(heisenberg_mul(g.inverse(), h));
    if n == 0.0 {
        f64::INFINITY
    } else {
        n.powi(-2)
    }
}

/// Density of the target law balayed from `δ_0` onto the unit norm ball.
pub fn heisenberg_nu_density(g: HeisenbergPoint) -> f64 {
    let r2 = g.x * g.x + g.y * g.y;
    let q = r2 * r2 + 16.0 * g.a * g.a;
    if q >= 1.0 || q == 0.0 {
        return 0.0;
    }
    4.0 / PI * r2 / q.sqrt()
}
