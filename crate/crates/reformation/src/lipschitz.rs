//! Pointwise stretch and compression of sampled maps.
//!
//! The continuous objects are limsup ratios at vanishing radius; a finite
//! sample cannot reach that limit, so this module discretizes them as
//! neighbor maxima under an explicit [`NeighborhoodScheme`]. All energy
//! values are therefore *scheme-relative* and every report records which
//! scheme produced it.
//!
//! For an atom `x_i` with neighbor set `N(i)`:
//!
//! * expansion  `e_i = max_{j ∈ N(i)} |u(x_j) − u(x_i)| / |x_j − x_i|`
//! * contraction `c_i = max_{j ∈ N(i)} |x_j − x_i| / |u(x_j) − u(x_i)|`,
//!   with `+∞` when a neighbor's image collapses onto `u(x_i)`.
//!
//! Because both maxima run over the *same* neighbor set, `c_i ≥ 1/e_i`
//! holds exactly, hence `r_i = e_i + c_i ≥ 2` and the total energy is never
//! below 2 — the floor that makes the energy a measure of non-isometry.
//!
//! The same estimators accept a list of fiber measures instead of image
//! points ([`metric_map_expansion`], [`metric_map_contraction`]); the only
//! change is that image distances become exact 1-Wasserstein distances
//! between fibers. With Dirac fibers the two paths agree bit-for-bit.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::measure::{stable_sum, DiscreteMeasure, Point};
use crate::wasserstein::w1_exact;
use crate::{Error, Result, COLLAPSE_EPS};

/// A map sampled on the atoms of a measure: atom `x_i` goes to `images[i]`.
#[derive(Debug, Clone)]
pub struct SampledMap {
    domain: DiscreteMeasure,
    images: Vec<Point>,
}

impl SampledMap {
    /// Validates alignment and image finiteness/dimension.
    pub fn new(domain: DiscreteMeasure, images: Vec<Point>) -> Result<Self> {
        if images.len() != domain.len() {
            return Err(Error::LengthMismatch {
                what: "atoms vs images",
                left: domain.len(),
                right: images.len(),
            });
        }
        let idim = images[0].dim();
        for p in &images {
            if p.dim() != idim {
                return Err(Error::DimensionMismatch { expected: idim, got: p.dim() });
            }
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite { what: "image coordinates" });
            }
        }
        Ok(SampledMap { domain, images })
    }

    /// Builds a map by evaluating `f` on every atom.
    pub fn from_fn(domain: DiscreteMeasure, f: impl Fn(&Point) -> Point) -> Result<Self> {
        let images = domain.points().iter().map(f).collect();
        SampledMap::new(domain, images)
    }

    /// The domain measure.
    pub fn domain(&self) -> &DiscreteMeasure {
        &self.domain
    }

    /// Image points, aligned with the domain atoms.
    pub fn images(&self) -> &[Point] {
        &self.images
    }

    /// Image measure `u_# μ` of the domain under this map.
    pub fn push_forward(&self) -> Result<DiscreteMeasure> {
        self.domain.push_forward(&self.images)
    }
}

/// How neighborhoods are formed when discretizing limsup ratios.
///
/// `knn(k)` takes the `k` nearest atoms and every atom tied with the k-th
/// distance (a superset never lowers a maximum, which keeps `c·e ≥ 1`
/// intact). `radius(h)` takes all atoms within distance `h` and rejects the
/// scheme if any atom ends up neighborless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborhoodScheme {
    /// k-nearest neighbors, ties at the cutoff distance all included.
    Knn(usize),
    /// All atoms within the given positive radius.
    Radius(f64),
}

impl NeighborhoodScheme {
    /// k-nearest-neighbor scheme (`k ≥ 1`).
    pub fn knn(k: usize) -> Self {
        NeighborhoodScheme::Knn(k)
    }

    /// Fixed-radius scheme (`h > 0`).
    pub fn radius(h: f64) -> Self {
        NeighborhoodScheme::Radius(h)
    }

    fn check(&self) -> Result<()> {
        match self {
            NeighborhoodScheme::Knn(k) if *k >= 1 => Ok(()),
            NeighborhoodScheme::Knn(k) => {
                Err(Error::InvalidScheme(format!("knn needs k >= 1, got {k}")))
            }
            NeighborhoodScheme::Radius(h) if *h > 0.0 && h.is_finite() => Ok(()),
            NeighborhoodScheme::Radius(h) => {
                Err(Error::InvalidScheme(format!("radius needs h > 0, got {h}")))
            }
        }
    }

    /// Materializes the neighbor lists for a set of points.
    ///
    /// A single point yields one empty neighbor list (the isolated-point
    /// convention of the estimators); with two or more points a neighborless
    /// atom is an error.
    pub fn adjacency(&self, points: &[Point]) -> Result<Adjacency> {
        self.check()?;
        let n = points.len();
        if n == 1 {
            return Ok(Adjacency { scheme: *self, neighbors: vec![vec![]] });
        }
        let mut neighbors = Vec::with_capacity(n);
        match *self {
            NeighborhoodScheme::Knn(k) => {
                for i in 0..n {
                    let mut others: Vec<(f64, usize)> = (0..n)
                        .filter(|&j| j != i)
                        .map(|j| (points[i].distance(&points[j]), j))
                        .collect();
                    others.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let cutoff = others[k.min(others.len()) - 1].0;
                    let list: Vec<usize> = others
                        .iter()
                        .take_while(|(d, _)| *d <= cutoff)
                        .map(|&(_, j)| j)
                        .collect();
                    neighbors.push(list);
                }
            }
            NeighborhoodScheme::Radius(h) => {
                for i in 0..n {
                    let list: Vec<usize> = (0..n)
                        .filter(|&j| j != i && points[i].distance(&points[j]) <= h)
                        .collect();
                    if list.is_empty() {
                        return Err(Error::IsolatedAtom { index: i });
                    }
                    neighbors.push(list);
                }
            }
        }
        Ok(Adjacency { scheme: *self, neighbors })
    }
}

impl Default for NeighborhoodScheme {
    fn default() -> Self {
        NeighborhoodScheme::Knn(8)
    }
}

impl fmt::Display for NeighborhoodScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborhoodScheme::Knn(k) => write!(f, "knn:{k}"),
            NeighborhoodScheme::Radius(h) => write!(f, "radius:{h}"),
        }
    }
}

impl FromStr for NeighborhoodScheme {
    type Err = Error;

    /// Parses `knn:<k>` or `radius:<h>`.
    fn from_str(s: &str) -> Result<Self> {
        let (mode, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidScheme(format!("expected knn:<k> or radius:<h>, got {s}")))?;
        let scheme = match mode {
            "knn" => NeighborhoodScheme::Knn(
                arg.parse()
                    .map_err(|_| Error::InvalidScheme(format!("bad knn count {arg}")))?,
            ),
            "radius" => NeighborhoodScheme::Radius(
                arg.parse()
                    .map_err(|_| Error::InvalidScheme(format!("bad radius {arg}")))?,
            ),
            other => return Err(Error::InvalidScheme(format!("unknown mode {other}"))),
        };
        scheme.check()?;
        Ok(scheme)
    }
}

/// Materialized neighbor lists for a fixed point set under a fixed scheme.
///
/// Passing the same adjacency to estimators for a map and for its inverse is
/// what makes the inverse identity `c_u(x_i) = e_{u⁻¹}(u(x_i))` exact: both
/// maxima then run over literally the same atom pairs.
#[derive(Debug, Clone)]
pub struct Adjacency {
    scheme: NeighborhoodScheme,
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    /// The scheme that produced these lists.
    pub fn scheme(&self) -> NeighborhoodScheme {
        self.scheme
    }

    /// Neighbor indices per atom.
    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// Number of atoms covered.
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    /// True when the adjacency covers no atoms (never after construction).
    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// A bound (the `H` or `K` of a constrained energy report), either one
/// constant for every atom or a per-atom array.
#[derive(Debug, Clone)]
pub enum BoundField {
    /// One positive bound for all atoms.
    Constant(f64),
    /// One positive bound per atom.
    PerAtom(Vec<f64>),
}

impl BoundField {
    /// A bound that never binds.
    pub fn unbounded() -> Self {
        BoundField::Constant(f64::INFINITY)
    }

    /// Bound applying to atom `i`.
    pub fn at(&self, i: usize) -> f64 {
        match self {
            BoundField::Constant(v) => *v,
            BoundField::PerAtom(vs) => vs[i],
        }
    }

    pub(crate) fn validate(&self, atoms: usize) -> Result<()> {
        match self {
            BoundField::Constant(v) => {
                if *v > 0.0 && !v.is_nan() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("bound must be positive, got {v}")))
                }
            }
            BoundField::PerAtom(vs) => {
                if vs.len() != atoms {
                    return Err(Error::LengthMismatch {
                        what: "per-atom bound",
                        left: vs.len(),
                        right: atoms,
                    });
                }
                if let Some(v) = vs.iter().find(|v| !(**v > 0.0) || v.is_nan()) {
                    return Err(Error::InvalidArgument(format!(
                        "bound must be positive, got {v}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Per-atom energies of a map together with the mass-weighted total and the
/// verdict of each atom against its `(H, K)` bounds.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// Per-atom expansion (`+∞` possible).
    pub e: Vec<f64>,
    /// Per-atom contraction (`+∞` possible).
    pub c: Vec<f64>,
    /// Per-atom `r_i = e_i + c_i`.
    pub r: Vec<f64>,
    /// `Σ μ_i r_i`; `+∞` as soon as any atom is infinite.
    pub total_r: f64,
    /// Per-atom `e_i ≤ K_i && c_i ≤ H_i`.
    pub constraint_verdict: Vec<bool>,
    /// Scheme the energies were computed under.
    pub scheme: NeighborhoodScheme,
}

impl EnergyReport {
    /// True when every atom satisfies its bounds.
    pub fn feasible(&self) -> bool {
        self.constraint_verdict.iter().all(|&v| v)
    }
}

/// Mass-weighted total that propagates `+∞` without poisoning the
/// compensated sum with NaNs.
pub(crate) fn weighted_total(weights: &[f64], values: &[f64]) -> f64 {
    if values.iter().any(|v| v.is_infinite()) {
        return f64::INFINITY;
    }
    stable_sum(weights.iter().zip(values).map(|(&w, &v)| w * v))
}

fn expansion_from(
    domain_points: &[Point],
    adj: &Adjacency,
    image_dist: impl Fn(usize, usize) -> f64,
) -> Vec<f64> {
    adj.neighbors()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            if nbrs.is_empty() {
                return 0.0; // isolated-point convention: lip = 0
            }
            nbrs.iter()
                .map(|&j| image_dist(i, j) / domain_points[i].distance(&domain_points[j]))
                .fold(0.0f64, f64::max)
        })
        .collect()
}

fn contraction_from(
    domain_points: &[Point],
    adj: &Adjacency,
    image_dist: impl Fn(usize, usize) -> f64,
) -> Vec<f64> {
    adj.neighbors()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            if nbrs.is_empty() {
                return 0.0; // isolated-point convention, mirroring expansion
            }
            nbrs.iter()
                .map(|&j| {
                    let num = domain_points[i].distance(&domain_points[j]);
                    let den = image_dist(i, j);
                    if den <= COLLAPSE_EPS {
                        f64::INFINITY
                    } else {
                        num / den
                    }
                })
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Per-atom expansion of a sampled map under a scheme.
pub fn pointwise_expansion(map: &SampledMap, scheme: &NeighborhoodScheme) -> Result<Vec<f64>> {
    let adj = scheme.adjacency(map.domain().points())?;
    Ok(pointwise_expansion_with(map, &adj))
}

/// Expansion against a pre-built adjacency (for shared pairing across maps).
pub fn pointwise_expansion_with(map: &SampledMap, adj: &Adjacency) -> Vec<f64> {
    expansion_from(map.domain().points(), adj, |i, j| {
        map.images()[i].distance(&map.images()[j])
    })
}

/// Per-atom contraction of a sampled map under a scheme; `+∞` where a
/// neighbor's image collapses.
pub fn pointwise_contraction(map: &SampledMap, scheme: &NeighborhoodScheme) -> Result<Vec<f64>> {
    let adj = scheme.adjacency(map.domain().points())?;
    Ok(pointwise_contraction_with(map, &adj))
}

/// Contraction against a pre-built adjacency (for shared pairing across maps).
pub fn pointwise_contraction_with(map: &SampledMap, adj: &Adjacency) -> Vec<f64> {
    contraction_from(map.domain().points(), adj, |i, j| {
        map.images()[i].distance(&map.images()[j])
    })
}

/// Full energy report of a sampled map: per-atom `e`, `c`, `r = e + c`, the
/// mass-weighted total `Σ μ_i r_i`, and per-atom verdicts `e_i ≤ K_i` and
/// `c_i ≤ H_i` realized on the scheme's own neighborhoods.
pub fn energy_report(
    map: &SampledMap,
    scheme: &NeighborhoodScheme,
    h: &BoundField,
    k: &BoundField,
) -> Result<EnergyReport> {
    let n = map.domain().len();
    h.validate(n)?;
    k.validate(n)?;
    let adj = scheme.adjacency(map.domain().points())?;
    let e = pointwise_expansion_with(map, &adj);
    let c = pointwise_contraction_with(map, &adj);
    Ok(assemble_report(map.domain(), e, c, h, k, *scheme))
}

pub(crate) fn assemble_report(
    domain: &DiscreteMeasure,
    e: Vec<f64>,
    c: Vec<f64>,
    h: &BoundField,
    k: &BoundField,
    scheme: NeighborhoodScheme,
) -> EnergyReport {
    let r: Vec<f64> = e.iter().zip(&c).map(|(&ei, &ci)| ei + ci).collect();
    let total_r = weighted_total(domain.weights(), &r);
    let constraint_verdict: Vec<bool> = e
        .iter()
        .zip(&c)
        .enumerate()
        .map(|(i, (&ei, &ci))| ei <= k.at(i) && ci <= h.at(i))
        .collect();
    EnergyReport { e, c, r, total_r, constraint_verdict, scheme }
}

/// Exact 1-Wasserstein distances between the fiber pairs an adjacency needs.
pub(crate) fn fiber_pair_distances(
    fibers: &[DiscreteMeasure],
    adj: &Adjacency,
) -> Result<HashMap<(usize, usize), f64>> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, nbrs) in adj.neighbors().iter().enumerate() {
        for &j in nbrs {
            let key = (i.min(j), i.max(j));
            pairs.push(key);
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| w1_exact(&fibers[a], &fibers[b]).map(|s| s.cost))
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().zip(dists).collect())
}

fn validate_fibers(domain: &DiscreteMeasure, fibers: &[DiscreteMeasure]) -> Result<()> {
    if fibers.len() != domain.len() {
        return Err(Error::LengthMismatch {
            what: "atoms vs fibers",
            left: domain.len(),
            right: fibers.len(),
        });
    }
    let fdim = fibers[0].dim();
    for f in fibers {
        if f.dim() != fdim {
            return Err(Error::DimensionMismatch { expected: fdim, got: f.dim() });
        }
    }
    Ok(())
}

/// Expansion and contraction of a fiber-valued map in one pass (one exact
/// Wasserstein solve per needed fiber pair).
pub fn metric_map_energies(
    domain: &DiscreteMeasure,
    fibers: &[DiscreteMeasure],
    scheme: &NeighborhoodScheme,
) -> Result<(Vec<f64>, Vec<f64>)> {
    validate_fibers(domain, fibers)?;
    let adj = scheme.adjacency(domain.points())?;
    let wd = fiber_pair_distances(fibers, &adj)?;
    let dist = |i: usize, j: usize| wd[&(i.min(j), i.max(j))];
    let e = expansion_from(domain.points(), &adj, dist);
    let c = contraction_from(domain.points(), &adj, dist);
    Ok((e, c))
}

/// Per-atom expansion where each atom carries a fiber measure; image
/// distances are exact 1-Wasserstein distances between fibers.
///
/// With Dirac fibers this reproduces [`pointwise_expansion`] bit-for-bit.
pub fn metric_map_expansion(
    domain: &DiscreteMeasure,
    fibers: &[DiscreteMeasure],
    scheme: &NeighborhoodScheme,
) -> Result<Vec<f64>> {
    Ok(metric_map_energies(domain, fibers, scheme)?.0)
}

/// Per-atom contraction of a fiber-valued map; `+∞` where neighboring fibers
/// coincide (zero Wasserstein distance).
pub fn metric_map_contraction(
    domain: &DiscreteMeasure,
    fibers: &[DiscreteMeasure],
    scheme: &NeighborhoodScheme,
) -> Result<Vec<f64>> {
    Ok(metric_map_energies(domain, fibers, scheme)?.1)
}
