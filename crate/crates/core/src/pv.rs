//! PV inverter operating envelope: MPP bound, symmetric power-factor cone,
//! and a circumscribed polygon around the apparent-power circle.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

/// Tangent cuts `m * p + q <= n` (and mirrored `m * p - q <= n`) around the
/// circle `p^2 + q^2 = s^2`. Tangent points sit at the midpoints of `K`
/// equal arcs of the quadrant, so every polygon vertex, including the two on
/// the axes, lies at radius `s / cos(pi / 4K)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapabilityCuts {
    pub s_rated: f64,
    pub segments: Vec<(f64, f64)>,
}

pub fn capability_cuts(s_rated: f64, k_segments: usize) -> Result<CapabilityCuts> {
    if k_segments < 2 {
        return Err(Error::Config(format!("need at least 2 capability segments, got {k_segments}")));
    }
    if !(s_rated > 0.0) {
        return Err(Error::Config(format!("s_rated must be positive, got {s_rated}")));
    }
    let k = k_segments as f64;
    let segments = (0..k_segments)
        .map(|i| {
            let phi = (2.0 * i as f64 + 1.0) * FRAC_PI_2 / (2.0 * k);
            (phi.cos() / phi.sin(), s_rated / phi.sin())
        })
        .collect();
    Ok(CapabilityCuts { s_rated, segments })
}

impl CapabilityCuts {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Largest |q| the polygon admits at active power `p` (may be negative
    /// when `p` lies beyond the polygon).
    pub fn q_limit(&self, p: f64) -> f64 {
        self.segments
            .iter()
            .map(|&(m, n)| n - m * p)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest active power inside the polygon (reached at q = 0).
    pub fn p_limit(&self) -> f64 {
        self.segments
            .iter()
            .map(|&(m, n)| n / m)
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `(p, q)` satisfies every cut and its mirror.
    pub fn contains(&self, p: f64, q: f64, tol: f64) -> bool {
        self.segments
            .iter()
            .all(|&(m, n)| m * p + q <= n + tol && m * p - q <= n + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvSetpoint {
    pub p: f64,
    pub q: f64,
}

/// Reactive-power interval at active power `p`: the cone `|q| <= xi p`
/// intersected with the polygon. `None` when `p` lies outside the polygon.
pub fn feasible_q_bounds(p: f64, xi: f64, cuts: &CapabilityCuts) -> Option<(f64, f64)> {
    if p < 0.0 {
        return None;
    }
    let q_hi = (xi * p).min(cuts.q_limit(p));
    if q_hi < 0.0 {
        return None;
    }
    Some((-q_hi, q_hi))
}

/// Applies a setpoint to a plant whose actual MPP is `mpp_actual`: active
/// power cannot exceed the MPP (or the polygon), and reactive power is
/// clamped into what the realized active power allows.
pub fn realize_setpoint(sp: PvSetpoint, mpp_actual: f64, xi: f64, cuts: &CapabilityCuts) -> PvSetpoint {
    let p = sp.p.min(mpp_actual).min(cuts.p_limit()).max(0.0);
    let (lo, hi) = feasible_q_bounds(p, xi, cuts).unwrap_or((0.0, 0.0));
    PvSetpoint { p, q: sp.q.clamp(lo, hi) }
}
