//! Constructive scenarios with hand-computable expected values.
//!
//! Each demo builds an explicit instance whose energies are known in closed
//! form, so they double as end-to-end checks of the whole stack:
//!
//! * [`bending`] — a rectangle whose mass splits between a large and a
//!   small scaled copy; fiber distances contract by `(1−1/n)² + 1/n²`.
//! * [`split_segment`] — a segment fanning out into two diverging branches;
//!   fiber distances expand by `√2` and the total energy is `√2 + 1/√2`,
//!   yet the barycenter projection is an isometry.
//! * [`disconnected_target`] — mass split between two far-apart translated
//!   copies; the plan is a perfect isometry in the fiber metric even though
//!   no map can reach the disconnected target.
//! * [`fragmentation`] — a clustered cloud rearranged tile-by-tile into a
//!   square by rigid translations: minimal energy under a local scheme, but
//!   infeasible under a coarser covering scheme with a finite expansion
//!   bound — the bounds are what keep global geometry in the picture.

use crate::elastic::assignment_report;
use crate::lipschitz::{BoundField, EnergyReport, NeighborhoodScheme, SampledMap};
use crate::measure::{DiscreteMeasure, Point};
use crate::plans::{mixture_plan, DisintegrationPlan};
use crate::{Error, Result};

/// Rectangle-splitting scenario: the unit-mass rectangle `[0,2]×[0,1]`
/// splits into a copy scaled by `1−1/n` (carrying that fraction of mass)
/// and a far-away copy scaled by `1/n` (carrying the rest).
#[derive(Debug, Clone)]
pub struct BendingDemo {
    /// The splitting parameter (`n ≥ 2`).
    pub n: usize,
    /// The two-map mixture plan.
    pub plan: DisintegrationPlan,
    /// Expected per-atom expansion `(1−1/n)² + (1/n)²`.
    pub expected_e: f64,
    /// Scheme the demo evaluates under.
    pub scheme: NeighborhoodScheme,
}

/// Builds the rectangle-splitting plan on an `nx × ny` grid.
///
/// Expected per-atom expansion: `n=2 → 0.5`, `n=5 → 0.68`, `n=10 → 0.82`,
/// with contraction exactly the reciprocal.
pub fn bending(n: usize, nx: usize, ny: usize) -> Result<BendingDemo> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "splitting parameter must be at least 2, got {n}"
        )));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid must be at least 2×2, got {nx}×{ny}"
        )));
    }
    let mut coords = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            coords.push(vec![
                2.0 * i as f64 / (nx - 1) as f64,
                j as f64 / (ny - 1) as f64,
            ]);
        }
    }
    let mu = DiscreteMeasure::uniform_from_coords(coords)?;
    let big = 1.0 - 1.0 / n as f64;
    let small = 1.0 / n as f64;
    // The small copy sits 50 units away so that fiber couplings never cross
    // branches and the parallel coupling is exactly optimal.
    let u1 = SampledMap::from_fn(mu.clone(), |p| {
        Point::new(vec![big * p.coords[0], big * p.coords[1]])
    })?;
    let u2 = SampledMap::from_fn(mu, |p| {
        Point::new(vec![small * p.coords[0] + 50.0, small * p.coords[1]])
    })?;
    let plan = mixture_plan(&[u1, u2], &[big, small])?;
    Ok(BendingDemo {
        n,
        plan,
        expected_e: big * big + small * small,
        scheme: NeighborhoodScheme::knn(4),
    })
}

/// Segment-splitting scenario: atoms `(t, 0)` on the unit segment send half
/// their mass up to `(t, t+1)` and half down to `(t, −t−1)`.
#[derive(Debug, Clone)]
pub struct SplitSegmentDemo {
    /// The branching plan.
    pub plan: DisintegrationPlan,
    /// Expected fiber-distance slope: `W(ν_t, ν_s) = √2 |t−s|`.
    pub expected_w_slope: f64,
    /// Expected per-atom and total energy `√2 + 1/√2`.
    pub expected_r: f64,
    /// Scheme the demo evaluates under.
    pub scheme: NeighborhoodScheme,
}

/// Builds the segment-splitting plan on `atoms ≥ 2` uniform atoms.
pub fn split_segment(atoms: usize) -> Result<SplitSegmentDemo> {
    if atoms < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two atoms, got {atoms}"
        )));
    }
    let mu = DiscreteMeasure::uniform_from_coords(
        (0..atoms)
            .map(|i| vec![i as f64 / (atoms - 1) as f64, 0.0])
            .collect(),
    )?;
    let fibers: Vec<DiscreteMeasure> = mu
        .points()
        .iter()
        .map(|pt| {
            let t = pt.coords[0];
            DiscreteMeasure::new(
                vec![Point::new(vec![t, t + 1.0]), Point::new(vec![t, -t - 1.0])],
                Some(vec![0.5, 0.5]),
            )
        })
        .collect::<Result<_>>()?;
    let plan = DisintegrationPlan::new(mu, fibers)?;
    let root2 = 2f64.sqrt();
    Ok(SplitSegmentDemo {
        plan,
        expected_w_slope: root2,
        expected_r: root2 + 1.0 / root2,
        scheme: NeighborhoodScheme::knn(2),
    })
}

/// Disconnected-target scenario: every atom of a square grid splits its
/// mass between a copy shifted right by 10 and a copy shifted left by 10.
#[derive(Debug, Clone)]
pub struct DisconnectedTargetDemo {
    /// The mass-splitting plan.
    pub plan: DisintegrationPlan,
    /// Mass fraction sent to the right copy.
    pub weight_a: f64,
    /// Scheme the demo evaluates under.
    pub scheme: NeighborhoodScheme,
}

/// Builds the disconnected-target plan on a `side × side` unit grid;
/// `weight_a` in `(0, 1)` is the fraction sent right.
///
/// Every fiber pair satisfies `W(ν_x, ν_{x'}) = |x − x'|`, so the plan has
/// `e = c = 1` per atom even though its target marginal is disconnected.
pub fn disconnected_target(side: usize, weight_a: f64) -> Result<DisconnectedTargetDemo> {
    if side < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid side must be at least 2, got {side}"
        )));
    }
    if !(weight_a > 0.0 && weight_a < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "right-copy mass must be strictly between 0 and 1, got {weight_a}"
        )));
    }
    let mu = DiscreteMeasure::uniform_from_coords(
        (0..side * side)
            .map(|q| {
                vec![
                    (q / side) as f64 / (side - 1) as f64,
                    (q % side) as f64 / (side - 1) as f64,
                ]
            })
            .collect(),
    )?;
    let u1 = SampledMap::from_fn(mu.clone(), |p| {
        Point::new(vec![p.coords[0] + 10.0, p.coords[1]])
    })?;
    let u2 = SampledMap::from_fn(mu, |p| {
        Point::new(vec![p.coords[0] - 10.0, p.coords[1]])
    })?;
    let plan = mixture_plan(&[u1, u2], &[weight_a, 1.0 - weight_a])?;
    Ok(DisconnectedTargetDemo { plan, weight_a, scheme: NeighborhoodScheme::knn(3) })
}

/// Tile-scramble scenario: a clustered cloud is rearranged into a square
/// grid of tiles by per-tile translations.
#[derive(Debug, Clone)]
pub struct FragmentationDemo {
    /// Clustered source cloud: 16 tiles of 4×4 atoms around the origin.
    pub domain: DiscreteMeasure,
    /// Square target cloud: the same 16 tiles on a 4×4 grid.
    pub target: DiscreteMeasure,
    /// The piecewise-translation bijection, atom index to atom index.
    pub assignment: Vec<usize>,
    /// Fine scheme under which every atom only sees its own tile.
    pub energy_scheme: NeighborhoodScheme,
    /// Coarse scheme whose neighborhoods bridge tiles.
    pub covering_scheme: NeighborhoodScheme,
    /// Expansion bound that the bridged pairs violate.
    pub expansion_bound: f64,
}

const TILE_SIDE: usize = 4;
const TILE_STEP: f64 = 0.2;

fn tile_atoms(center: (f64, f64)) -> impl Iterator<Item = Vec<f64>> {
    (0..TILE_SIDE * TILE_SIDE).map(move |q| {
        let half = TILE_STEP * (TILE_SIDE - 1) as f64 / 2.0;
        vec![
            center.0 + (q / TILE_SIDE) as f64 * TILE_STEP - half,
            center.1 + (q % TILE_SIDE) as f64 * TILE_STEP - half,
        ]
    })
}

/// Builds the tile-scramble instance.
///
/// The source packs one tile at the origin, five on a ring of radius 1.55
/// and ten on a ring of radius 3.0; the target lays the 16 tiles on a 4×4
/// grid with pitch 1.3, visited in the order `7t mod 16`. Every tile moves
/// by a pure translation, so under the fine scheme (neighborhoods inside
/// tiles) the assignment has energy 2; under the coarse covering scheme,
/// source neighborhoods contain cross-tile pairs whose images land several
/// grid cells apart, and the expansion bound 1.5 is violated.
pub fn fragmentation() -> Result<FragmentationDemo> {
    let tiles = 16usize;
    let mut centers = Vec::with_capacity(tiles);
    centers.push((0.0, 0.0));
    for k in 0..5 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
        centers.push((1.55 * a.cos(), 1.55 * a.sin()));
    }
    for k in 0..10 {
        let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 10.0;
        centers.push((3.0 * a.cos(), 3.0 * a.sin()));
    }
    let mut source = Vec::with_capacity(tiles * TILE_SIDE * TILE_SIDE);
    for &c in &centers {
        source.extend(tile_atoms(c));
    }
    let domain = DiscreteMeasure::uniform_from_coords(source)?;

    let pitch = 1.3;
    let mut dest = Vec::with_capacity(tiles * TILE_SIDE * TILE_SIDE);
    for s in 0..tiles {
        let cell = ((s % 4) as f64 * pitch, (s / 4) as f64 * pitch);
        dest.extend(tile_atoms(cell));
    }
    let target = DiscreteMeasure::uniform_from_coords(dest)?;

    let per_tile = TILE_SIDE * TILE_SIDE;
    let mut assignment = vec![0usize; tiles * per_tile];
    for t in 0..tiles {
        let s = (7 * t) % tiles;
        for q in 0..per_tile {
            assignment[t * per_tile + q] = s * per_tile + q;
        }
    }
    Ok(FragmentationDemo {
        domain,
        target,
        assignment,
        energy_scheme: NeighborhoodScheme::knn(3),
        covering_scheme: NeighborhoodScheme::radius(1.2),
        expansion_bound: 1.5,
    })
}

impl FragmentationDemo {
    /// Energy of the tile assignment under the fine scheme, no bounds:
    /// totals 2 up to rounding.
    pub fn unconstrained(&self) -> Result<EnergyReport> {
        assignment_report(
            &self.domain,
            &self.target,
            &self.assignment,
            &self.energy_scheme,
            &BoundField::unbounded(),
            &BoundField::unbounded(),
        )
    }

    /// The same assignment judged under the covering scheme with the
    /// expansion bound: infeasible.
    pub fn constrained(&self) -> Result<EnergyReport> {
        assignment_report(
            &self.domain,
            &self.target,
            &self.assignment,
            &self.covering_scheme,
            &BoundField::unbounded(),
            &BoundField::Constant(self.expansion_bound),
        )
    }
}
