//! Discrete probability measures on `R^N`.
//!
//! A shape is a [`DiscreteMeasure`]: a finite list of distinct support atoms
//! with strictly positive weights summing to one. Construction normalizes
//! weights, drops zero-mass atoms, and merges duplicates closer than
//! [`MERGE_EPS`](crate::MERGE_EPS) so that downstream contraction estimators
//! never divide by an accidental zero distance. Everything here is immutable
//! after construction and safe to share across threads.

use crate::{Error, Result, MASS_TOL, MERGE_EPS};

/// A point of `R^N`, stored as its coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    /// Spatial coordinates; the length is the ambient dimension `N`.
    pub coords: Vec<f64>,
}

impl Point {
    /// Wraps a coordinate vector.
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// Compensated (Neumaier) summation; keeps the sum-to-one invariant checkable
/// at 1e-12 even for thousands of atoms.
pub(crate) fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A discrete probability measure: distinct atoms with positive weights
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from atoms and optional weights.
    ///
    /// Weights may be any nonnegative numbers with positive total; they are
    /// normalized to sum to one. `None` means uniform. Zero-weight atoms are
    /// dropped, and atoms closer than [`MERGE_EPS`](crate::MERGE_EPS) are
    /// merged by weight addition (first occurrence keeps its coordinates).
    pub fn new(points: Vec<Point>, weights: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        let dim = points[0].dim();
        if dim == 0 {
            return Err(Error::NonFinite { what: "point with no coordinates" });
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !p.is_finite() {
                return Err(Error::NonFinite { what: "point coordinates" });
            }
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::LengthMismatch {
                        what: "points vs weights",
                        left: points.len(),
                        right: w.len(),
                    });
                }
                for (i, &wi) in w.iter().enumerate() {
                    if !wi.is_finite() {
                        return Err(Error::NonFinite { what: "weights" });
                    }
                    if wi < 0.0 {
                        return Err(Error::NegativeWeight { index: i });
                    }
                }
                w
            }
            None => vec![1.0; points.len()],
        };

        // Merge duplicates, keeping first-occurrence order and coordinates.
        let mut reps: Vec<Point> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        'atoms: for (p, w) in points.into_iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (r, m) in reps.iter().zip(mass.iter_mut()) {
                // Cheap reject on the first coordinate before the full distance.
                if (r.coords[0] - p.coords[0]).abs() <= MERGE_EPS && r.distance(&p) <= MERGE_EPS {
                    *m += w;
                    continue 'atoms;
                }
            }
            reps.push(p);
            mass.push(w);
        }
        if reps.is_empty() {
            return Err(Error::ZeroMass);
        }

        let total = stable_sum(mass.iter().copied());
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        // Idempotent normalization: weights already summing to one (within
        // tolerance) pass through untouched, so re-reading a written shape
        // reproduces it bit for bit.
        if (total - 1.0).abs() > MASS_TOL {
            for m in &mut mass {
                *m /= total;
            }
            // One correction pass so |sum - 1| stays within MASS_TOL
            // regardless of atom count.
            let resum = stable_sum(mass.iter().copied());
            if (resum - 1.0).abs() > MASS_TOL {
                for m in &mut mass {
                    *m /= resum;
                }
            }
        }
        debug_assert!((stable_sum(mass.iter().copied()) - 1.0).abs() <= MASS_TOL);
        Ok(DiscreteMeasure { points: reps, weights: mass })
    }

    /// Uniform measure on the given atoms.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        Self::new(points, None)
    }

    /// Uniform measure from raw coordinate rows.
    pub fn uniform_from_coords(coords: Vec<Vec<f64>>) -> Result<Self> {
        Self::uniform(coords.into_iter().map(Point::new).collect())
    }

    /// Weighted measure from raw coordinate rows.
    pub fn from_coords(coords: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        Self::new(coords.into_iter().map(Point::new).collect(), weights)
    }

    /// A Dirac mass at one point.
    pub fn dirac(point: Point) -> Result<Self> {
        Self::uniform(vec![point])
    }

    /// Number of support atoms.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false after construction (a measure has at least one atom);
    /// present to pair with [`len`](Self::len).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Support atoms, in construction order.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Atom weights, aligned with [`points`](Self::points).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest pairwise distance between support atoms (0 for a Dirac).
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                d = d.max(self.points[i].distance(&self.points[j]));
            }
        }
        d
    }

    /// True when all atoms carry the same mass `1/n` within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let target = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - target).abs() <= tol)
    }

    /// Weighted mean of the support.
    pub fn barycenter(&self) -> Point {
        let mut acc = vec![0.0; self.dim()];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            for (a, c) in acc.iter_mut().zip(&p.coords) {
                *a += w * c;
            }
        }
        Point::new(acc)
    }

    /// Image measure under the atom-wise map `x_i -> images[i]`.
    ///
    /// Pre-images landing on the same point (within the merge threshold) have
    /// their weights added, so total mass is preserved exactly.
    pub fn push_forward(&self, images: &[Point]) -> Result<Self> {
        if images.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "atoms vs images",
                left: self.len(),
                right: images.len(),
            });
        }
        DiscreteMeasure::new(images.to_vec(), Some(self.weights.clone()))
    }
}

/// Weighted mean of the support of `m` (the first moment `∫ x dm`).
pub fn barycenter(m: &DiscreteMeasure) -> Point {
    m.barycenter()
}

/// Image of `m` under the atom-wise map `x_i -> images[i]`; see
/// [`DiscreteMeasure::push_forward`].
pub fn push_forward(m: &DiscreteMeasure, images: &[Point]) -> Result<DiscreteMeasure> {
    m.push_forward(images)
}

/// Convex combination of measures.
///
/// Component weights must be nonnegative with positive sum; they are
/// renormalized, atom weights are scaled accordingly, and coincident atoms
/// across components merge.
pub fn mixture(components: &[(f64, DiscreteMeasure)]) -> Result<DiscreteMeasure> {
    if components.is_empty() {
        return Err(Error::EmptySupport);
    }
    let dim = components[0].1.dim();
    for (i, (lambda, m)) in components.iter().enumerate() {
        if !lambda.is_finite() {
            return Err(Error::NonFinite { what: "mixture coefficients" });
        }
        if *lambda < 0.0 {
            return Err(Error::NegativeWeight { index: i });
        }
        if m.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
        }
    }
    let lam_total = stable_sum(components.iter().map(|(l, _)| *l));
    if !(lam_total > 0.0) {
        return Err(Error::ZeroMass);
    }
    // Renormalize the coefficients, not the merged atom weights: a single
    // component then scales by exactly 1 and comes back bit for bit, and
    // already-normalized coefficients keep products like `0.5 * w` exact.
    let renorm = (lam_total - 1.0).abs() > MASS_TOL;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lambda, m) in components {
        let lam = if renorm { lambda / lam_total } else { *lambda };
        for (p, &w) in m.points().iter().zip(m.weights()) {
            points.push(p.clone());
            weights.push(lam * w);
        }
    }
    DiscreteMeasure::new(points, Some(weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn m(coords: &[&[f64]], weights: Option<&[f64]>) -> DiscreteMeasure {
        DiscreteMeasure::from_coords(
            coords.iter().map(|c| c.to_vec()).collect(),
            weights.map(|w| w.to_vec()),
        )
        .unwrap()
    }

    #[test]
    fn uniform_normalization() {
        let mu = m(&[&[0.0], &[1.0], &[2.0]], None);
        assert_eq!(mu.len(), 3);
        for &w in mu.weights() {
            assert!((w - 1.0 / 3.0).abs() <= TOL);
        }
    }

    #[test]
    fn duplicate_atoms_merge_by_weight_addition() {
        let mu = m(&[&[0.0], &[0.0], &[1.0]], None);
        assert_eq!(mu.len(), 2);
        assert!((mu.weights()[0] - 2.0 / 3.0).abs() <= TOL);
        assert!((mu.weights()[1] - 1.0 / 3.0).abs() <= TOL);
    }

    #[test]
    fn weights_are_normalized() {
        let mu = m(&[&[0.0], &[1.0]], Some(&[2.0, 2.0]));
        assert_eq!(mu.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn zero_weight_atoms_leave_the_support() {
        let mu = m(&[&[0.0], &[1.0], &[2.0]], Some(&[1.0, 0.0, 1.0]));
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.points()[1].coords, vec![2.0]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            DiscreteMeasure::from_coords(vec![], None),
            Err(Error::EmptySupport)
        ));
        assert!(matches!(
            DiscreteMeasure::from_coords(vec![vec![0.0]], Some(vec![0.0])),
            Err(Error::ZeroMass)
        ));
        assert!(matches!(
            DiscreteMeasure::from_coords(vec![vec![0.0], vec![0.0, 1.0]], None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            DiscreteMeasure::from_coords(vec![vec![0.0]], Some(vec![-1.0])),
            Err(Error::NegativeWeight { index: 0 })
        ));
        assert!(matches!(
            DiscreteMeasure::from_coords(vec![vec![f64::NAN]], None),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            DiscreteMeasure::from_coords(vec![vec![0.0]], Some(vec![f64::INFINITY])),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn barycenter_of_dirac_is_the_atom() {
        let mu = DiscreteMeasure::dirac(Point::new(vec![2.5, -1.0])).unwrap();
        assert_eq!(mu.barycenter().coords, vec![2.5, -1.0]);
    }

    #[test]
    fn barycenter_balances_symmetric_atoms() {
        let mu = m(&[&[0.0], &[2.0]], None);
        assert!((mu.barycenter().coords[0] - 1.0).abs() <= TOL);
    }

    #[test]
    fn barycenter_weighted_sum() {
        let mu = m(&[&[0.0, 0.0], &[4.0, 0.0]], Some(&[0.25, 0.75]));
        let b = mu.barycenter();
        assert!((b.coords[0] - 3.0).abs() <= TOL);
        assert!(b.coords[1].abs() <= TOL);
    }

    #[test]
    fn push_forward_identity_is_identity() {
        let mu = m(&[&[0.0], &[1.0], &[2.0]], Some(&[0.2, 0.3, 0.5]));
        let nu = mu.push_forward(mu.points()).unwrap();
        assert_eq!(mu, nu);
    }

    #[test]
    fn push_forward_total_collapse_gives_dirac() {
        let mu = m(&[&[0.0], &[1.0], &[2.0]], None);
        let y0 = Point::new(vec![7.0]);
        let nu = mu.push_forward(&vec![y0.clone(); 3]).unwrap();
        assert_eq!(nu.len(), 1);
        assert_eq!(nu.points()[0], y0);
        assert!((nu.weights()[0] - 1.0).abs() <= TOL);
    }

    #[test]
    fn push_forward_sums_preimage_weights() {
        let mu = m(&[&[0.0], &[1.0], &[2.0]], None);
        let images = vec![Point::new(vec![0.0]), Point::new(vec![0.0]), Point::new(vec![5.0])];
        let nu = mu.push_forward(&images).unwrap();
        assert_eq!(nu.len(), 2);
        assert!((nu.weights()[0] - 2.0 / 3.0).abs() <= TOL);
        assert!((nu.weights()[1] - 1.0 / 3.0).abs() <= TOL);
    }

    #[test]
    fn mixture_of_one_component_is_that_measure() {
        let mu = m(&[&[0.0], &[1.0]], Some(&[0.4, 0.6]));
        let mixed = mixture(&[(3.0, mu.clone())]).unwrap();
        assert_eq!(mixed, mu);
    }

    #[test]
    fn mixture_merges_identical_diracs() {
        let a = DiscreteMeasure::dirac(Point::new(vec![1.0])).unwrap();
        let mixed = mixture(&[(0.5, a.clone()), (0.5, a.clone())]).unwrap();
        assert_eq!(mixed, a);
    }

    #[test]
    fn mixture_by_definition() {
        let d0 = DiscreteMeasure::dirac(Point::new(vec![0.0])).unwrap();
        let d1 = DiscreteMeasure::dirac(Point::new(vec![1.0])).unwrap();
        let mixed = mixture(&[(0.3, d0), (0.7, d1)]).unwrap();
        assert_eq!(mixed.weights(), &[0.3, 0.7]);
    }

    #[test]
    fn diameter_of_axis_pair() {
        let mu = m(&[&[0.0, 0.0], &[3.0, 4.0]], None);
        assert!((mu.diameter() - 5.0).abs() <= TOL);
    }

    fn arb_cloud(max_atoms: usize, dim: usize) -> impl Strategy<Value = DiscreteMeasure> {
        prop::collection::vec(
            prop::collection::vec(-10.0f64..10.0, dim),
            1..=max_atoms,
        )
        .prop_map(|coords| DiscreteMeasure::uniform_from_coords(coords).unwrap())
    }

    proptest! {
        #[test]
        fn mass_always_sums_to_one(mu in arb_cloud(8, 2)) {
            let total = stable_sum(mu.weights().iter().copied());
            prop_assert!((total - 1.0).abs() <= TOL);
        }

        #[test]
        fn push_forward_preserves_mass(mu in arb_cloud(8, 2), shift in -5.0f64..5.0) {
            let images: Vec<Point> = mu
                .points()
                .iter()
                .map(|p| Point::new(p.coords.iter().map(|c| c + shift).collect()))
                .collect();
            let nu = mu.push_forward(&images).unwrap();
            let total = stable_sum(nu.weights().iter().copied());
            prop_assert!((total - 1.0).abs() <= TOL);
        }

        #[test]
        fn mixture_barycenter_is_linear(
            a in arb_cloud(6, 2),
            b in arb_cloud(6, 2),
            t in 0.0f64..=1.0,
        ) {
            let mixed = mixture(&[(t, a.clone()), (1.0 - t, b.clone())]);
            // t = 0 or 1 can drop a component entirely; mixture still succeeds.
            let mixed = mixed.unwrap();
            let ba = a.barycenter();
            let bb = b.barycenter();
            let bm = mixed.barycenter();
            for k in 0..2 {
                let expect = t * ba.coords[k] + (1.0 - t) * bb.coords[k];
                prop_assert!((bm.coords[k] - expect).abs() <= 1e-10);
            }
        }

        #[test]
        fn affine_push_forward_moves_barycenter_affinely(
            mu in arb_cloud(8, 2),
            a11 in -2.0f64..2.0, a12 in -2.0f64..2.0,
            a21 in -2.0f64..2.0, a22 in -2.0f64..2.0,
            b1 in -3.0f64..3.0, b2 in -3.0f64..3.0,
        ) {
            let images: Vec<Point> = mu
                .points()
                .iter()
                .map(|p| {
                    Point::new(vec![
                        a11 * p.coords[0] + a12 * p.coords[1] + b1,
                        a21 * p.coords[0] + a22 * p.coords[1] + b2,
                    ])
                })
                .collect();
            let nu = mu.push_forward(&images).unwrap();
            let before = mu.barycenter();
            let after = nu.barycenter();
            let expect = [
                a11 * before.coords[0] + a12 * before.coords[1] + b1,
                a21 * before.coords[0] + a22 * before.coords[1] + b2,
            ];
            for (got, want) in after.coords.iter().zip(&expect) {
                prop_assert!((got - want).abs() <= 1e-9);
            }
        }
    }
}
