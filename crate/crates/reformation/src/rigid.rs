//! Best-fit rigid motions (orthogonal maps plus translations).
//!
//! Used to certify an isometry verdict: when a correspondence between two
//! atom sets is claimed to be distance-preserving, the weighted orthogonal
//! Procrustes fit produces the unique candidate motion, and the maximum
//! per-atom residual measures how far the claim is from literal truth.
//! Reflections count as rigid here — the energies this crate minimizes are
//! built from distances only, so orientation is invisible to them — hence no
//! determinant correction is applied to the fitted orthogonal factor.

use nalgebra::{DMatrix, DVector, SVD};

use crate::measure::Point;
use crate::{Error, Result};

/// An orthogonal linear map plus a translation, `p ↦ R p + t`.
#[derive(Debug, Clone)]
pub struct RigidMotion {
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl RigidMotion {
    /// Weighted least-squares fit of a rigid motion sending `xs[i]` near
    /// `ys[i]`, by singular value decomposition of the weighted
    /// cross-covariance of the centered clouds.
    pub fn fit(xs: &[Point], ys: &[Point], weights: &[f64]) -> Result<RigidMotion> {
        if xs.is_empty() {
            return Err(Error::EmptySupport);
        }
        if xs.len() != ys.len() || xs.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "points vs correspondents vs weights",
                left: xs.len(),
                right: ys.len().min(weights.len()),
            });
        }
        let d = xs[0].dim();
        for p in xs.iter().chain(ys.iter()) {
            if p.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be nonnegative with positive sum".into(),
            ));
        }

        let mut cx = DVector::<f64>::zeros(d);
        let mut cy = DVector::<f64>::zeros(d);
        for i in 0..xs.len() {
            let w = weights[i] / total;
            for a in 0..d {
                cx[a] += w * xs[i].coords[a];
                cy[a] += w * ys[i].coords[a];
            }
        }
        let mut h = DMatrix::<f64>::zeros(d, d);
        for i in 0..xs.len() {
            let w = weights[i] / total;
            for a in 0..d {
                let xa = xs[i].coords[a] - cx[a];
                for b in 0..d {
                    let yb = ys[i].coords[b] - cy[b];
                    h[(a, b)] += w * xa * yb;
                }
            }
        }
        let svd = SVD::new(h, true, true);
        let u = svd.u.ok_or_else(|| Error::Internal("svd did not produce u".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::Internal("svd did not produce v".into()))?;
        let rotation = v_t.transpose() * u.transpose();
        let translation = &cy - &rotation * &cx;
        Ok(RigidMotion { rotation, translation })
    }

    /// Applies the motion to a point.
    pub fn apply(&self, p: &Point) -> Point {
        let x = DVector::from_column_slice(&p.coords);
        let y = &self.rotation * x + &self.translation;
        Point::new(y.iter().copied().collect())
    }

    /// The orthogonal factor (row-major `d × d`).
    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    /// The translation component.
    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    /// `det R`: `+1` orientation-preserving, `-1` a reflection.
    pub fn orientation(&self) -> f64 {
        self.rotation.determinant()
    }

    /// Largest distance between a mapped point and its correspondent.
    pub fn max_residual(&self, xs: &[Point], ys: &[Point]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| self.apply(x).distance(y))
            .fold(0.0f64, f64::max)
    }
}
