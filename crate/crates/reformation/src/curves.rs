//! Lengths and speeds of discretely sampled curves of measures.
//!
//! A curve is a sequence of measure snapshots `ρ(t_0), …, ρ(t_K)` at
//! strictly increasing times. Its discrete length is the sum of exact
//! 1-Wasserstein distances between consecutive snapshots, and the speed on
//! segment `k` is that distance divided by `t_{k+1} − t_k`. Both quantities
//! are lower bounds for their continuum counterparts (by the triangle
//! inequality, refining the sampling can only increase the length), which is
//! the right direction for certifying geodesics: a curve whose discrete
//! length already equals `W(ρ(t_0), ρ(t_K))` is length-minimizing among all
//! curves through those snapshots.

use crate::measure::{stable_sum, DiscreteMeasure};
use crate::wasserstein::w1_exact;
use crate::{Error, Result};

/// Discrete length and per-segment speeds of a sampled curve.
#[derive(Debug, Clone)]
pub struct CurveLength {
    /// Sum of consecutive 1-Wasserstein distances.
    pub length: f64,
    /// `W(ρ_{k+1}, ρ_k) / (t_{k+1} − t_k)` per segment.
    pub speeds: Vec<f64>,
}

/// Measures a sampled curve: consecutive exact 1-Wasserstein distances are
/// summed into a length and divided by the time steps into speeds.
///
/// Requires at least two snapshots, aligned times, strictly increasing and
/// finite time stamps, and a common ambient dimension.
pub fn curve_length(snapshots: &[DiscreteMeasure], times: &[f64]) -> Result<CurveLength> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a curve needs at least two snapshots, got {}",
            snapshots.len()
        )));
    }
    if times.len() != snapshots.len() {
        return Err(Error::LengthMismatch {
            what: "snapshots vs times",
            left: snapshots.len(),
            right: times.len(),
        });
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite { what: "time stamps" });
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(format!(
                "times must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let dim = snapshots[0].dim();
    for s in snapshots {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
        }
    }
    let mut speeds = Vec::with_capacity(snapshots.len() - 1);
    let mut legs = Vec::with_capacity(snapshots.len() - 1);
    for k in 0..snapshots.len() - 1 {
        let d = w1_exact(&snapshots[k], &snapshots[k + 1])?.cost;
        legs.push(d);
        speeds.push(d / (times[k + 1] - times[k]));
    }
    Ok(CurveLength { length: stable_sum(legs), speeds })
}
