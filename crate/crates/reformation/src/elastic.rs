//! Minimizing total energy over mass-preserving bijections, and the
//! isometry test built on it.
//!
//! Between two uniform clouds of equal size, mass preservation forces a map
//! to be a bijection of atoms, so the variational problem is a search over
//! permutations. The total energy of every permutation sits at or above the
//! floor of 2, and reaches it exactly when the correspondence is rigid —
//! which turns the minimizer into a decision procedure: minimize, compare
//! to the floor, then certify a low value by fitting an explicit rigid
//! motion and checking residuals.
//!
//! The search is deterministic given its seed: it starts from the optimal
//! transport coupling rounded to a permutation, descends by best 2-swaps,
//! and restarts from seeded random permutations until the sweep budget is
//! spent. Constraint bounds enter through a penalty during the search and a
//! hard feasibility check on the result.

use std::fmt;

use crate::lipschitz::{
    assemble_report, BoundField, NeighborhoodScheme, SampledMap,
};
use crate::measure::{DiscreteMeasure, Point};
use crate::rigid::RigidMotion;
use crate::search::SwapSearch;
use crate::wasserstein::{w1_exact, CouplingPlan};
use crate::{Error, Result, DEFAULT_ISO_TOL, MASS_TOL};

/// A candidate solution: a bijection of atom indices with its energy.
#[derive(Debug, Clone)]
pub struct AssignmentState {
    /// `permutation[i]` is the target atom attached to domain atom `i`.
    pub permutation: Vec<usize>,
    /// Total energy `Σ μ_i (e_i + c_i)` of the induced map.
    pub energy: f64,
    /// All per-atom constraint verdicts true.
    pub feasible: bool,
}

/// Outcome of the energy test between two shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Energy at the floor and a rigid motion reproduces the assignment.
    Isometric,
    /// A best assignment exists but its energy sits above the floor, or no
    /// rigid motion explains it.
    NonIsometric,
    /// No constraint-satisfying assignment found within the budget (not a
    /// proof that none exists).
    Infeasible,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Isometric => write!(f, "isometric"),
            Verdict::NonIsometric => write!(f, "non_isometric"),
            Verdict::Infeasible => write!(f, "infeasible"),
        }
    }
}

/// Result of [`minimize_energy`] / [`detect_isometry`].
#[derive(Debug, Clone)]
pub struct ElasticResult {
    /// Lowest total energy reached.
    pub best_energy: f64,
    /// The assignment attaining it.
    pub best_assignment: AssignmentState,
    /// Descent sweeps consumed across restarts.
    pub iterations: usize,
    /// Decision, see [`Verdict`].
    pub verdict: Verdict,
    /// Fitted rigid motion when the verdict is isometric.
    pub isometry_params: Option<RigidMotion>,
    /// Per-atom expansion of the best assignment.
    pub per_atom_e: Vec<f64>,
    /// Per-atom contraction of the best assignment.
    pub per_atom_c: Vec<f64>,
}

fn require_matchable(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    if mu.len() != nu.len() {
        return Err(Error::NotBijective { left: mu.len(), right: nu.len() });
    }
    if let Some(i) = non_uniform_index(mu) {
        return Err(Error::NotUniform { index: i });
    }
    if let Some(i) = non_uniform_index(nu) {
        return Err(Error::NotUniform { index: i });
    }
    Ok(())
}

fn non_uniform_index(m: &DiscreteMeasure) -> Option<usize> {
    let expect = 1.0 / m.len() as f64;
    m.weights().iter().position(|w| (w - expect).abs() > MASS_TOL * m.len() as f64)
}

fn check_permutation(n: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "length {} does not match atom count {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n {
            return Err(Error::InvalidPermutation(format!("index {j} out of range")));
        }
        if seen[j] {
            return Err(Error::InvalidPermutation(format!("index {j} used twice")));
        }
        seen[j] = true;
    }
    Ok(())
}

/// The map sending atom `i` of `mu` to atom `permutation[i]` of `nu`.
///
/// Both measures must be uniform with equal atom counts — exactly the
/// regime where mass preservation forces a bijection. Unequal or
/// non-uniform inputs are rejected; reformulate those through a
/// disintegration plan instead.
pub fn induced_map(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    permutation: &[usize],
) -> Result<SampledMap> {
    require_matchable(mu, nu)?;
    check_permutation(mu.len(), permutation)?;
    let images: Vec<Point> =
        permutation.iter().map(|&j| nu.points()[j].clone()).collect();
    SampledMap::new(mu.clone(), images)
}

/// Rounds an optimal coupling between equal uniform marginals to a
/// permutation: heaviest entries first (ties to the lowest pair), leftover
/// rows then filled with the lowest free columns.
fn round_to_permutation(plan: &CouplingPlan) -> Vec<usize> {
    let n = plan.row_measure().len();
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let m = plan.mass(i, j);
            if m > 0.0 {
                entries.push((m, i, j));
            }
        }
    }
    entries.sort_by(|a, b| {
        b.0.partial_cmp(&a.0).unwrap().then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
    });
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, i, j) in entries {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
        }
    }
    let mut free: Vec<usize> = (0..n).filter(|&j| !used[j]).collect();
    free.reverse();
    for slot in perm.iter_mut() {
        if *slot == usize::MAX {
            *slot = free.pop().expect("one free column per unfilled row");
        }
    }
    perm
}

fn dense_distances(pts: &[Point]) -> Vec<f64> {
    let n = pts.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i * n + j] = pts[i].distance(&pts[j]);
            }
        }
    }
    d
}

fn bound_vec(b: &BoundField, n: usize) -> Vec<f64> {
    (0..n).map(|i| b.at(i)).collect()
}

// Private engine behind the two public entry points; its parameters are the
// full problem statement, so bundling them would only add ceremony.
#[allow(clippy::too_many_arguments)]
fn minimize_with_tol(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    scheme: &NeighborhoodScheme,
    h: &BoundField,
    k: &BoundField,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<ElasticResult> {
    require_matchable(mu, nu)?;
    let n = mu.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "energy minimization needs at least two atoms".into(),
        ));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    h.validate(n)?;
    k.validate(n)?;
    let adjacency = scheme.adjacency(mu.points())?;
    let dx = dense_distances(mu.points());
    let dy = dense_distances(nu.points());
    // Two complementary seeded starts: the rounded optimal coupling is good
    // when the shapes sit close in space, the distance-profile ranking is
    // exact (up to ties) whenever they are congruent however far apart.
    let starts = vec![
        round_to_permutation(&w1_exact(mu, nu)?.plan),
        crate::search::profile_init(&dx, &dy, n),
    ];
    let search = SwapSearch::new(
        &dx,
        &dy,
        mu.weights(),
        &adjacency,
        bound_vec(h, n),
        bound_vec(k, n),
        1.0,
    );
    let out = search.run(&starts, budget, seed);

    let mut verdict = if !out.feasible {
        Verdict::Infeasible
    } else if out.energy <= 2.0 + tol {
        Verdict::Isometric
    } else {
        Verdict::NonIsometric
    };
    let mut isometry_params = None;
    if verdict == Verdict::Isometric {
        // Certify the low energy with an explicit rigid motion.
        let matched: Vec<Point> =
            out.perm.iter().map(|&j| nu.points()[j].clone()).collect();
        let motion = RigidMotion::fit(mu.points(), &matched, mu.weights())?;
        let residual = motion.max_residual(mu.points(), &matched);
        if residual <= tol.max(DEFAULT_ISO_TOL) * mu.diameter() {
            isometry_params = Some(motion);
        } else {
            verdict = Verdict::NonIsometric;
        }
    }
    Ok(ElasticResult {
        best_energy: out.energy,
        best_assignment: AssignmentState {
            permutation: out.perm,
            energy: out.energy,
            feasible: out.feasible,
        },
        iterations: out.sweeps,
        verdict,
        isometry_params,
        per_atom_e: out.e,
        per_atom_c: out.c,
    })
}

/// Minimizes total energy over bijections between two equal-size uniform
/// clouds under expansion bound `k` and contraction bound `h`.
///
/// Deterministic given `seed`. The verdict uses the default isometry band;
/// use [`detect_isometry`] to choose the band explicitly.
pub fn minimize_energy(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    scheme: &NeighborhoodScheme,
    h: &BoundField,
    k: &BoundField,
    budget: usize,
    seed: u64,
) -> Result<ElasticResult> {
    minimize_with_tol(mu, nu, scheme, h, k, budget, seed, DEFAULT_ISO_TOL)
}

/// Decides whether two shapes are isometric: minimizes the energy without
/// bounds, and if the optimum sits within `tol` of the floor, fits a rigid
/// motion (reflections allowed) and verifies that the maximum residual is
/// below `tol` times the diameter.
pub fn detect_isometry(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: f64,
    scheme: &NeighborhoodScheme,
    budget: usize,
    seed: u64,
) -> Result<ElasticResult> {
    minimize_with_tol(
        mu,
        nu,
        scheme,
        &BoundField::unbounded(),
        &BoundField::unbounded(),
        budget,
        seed,
        tol,
    )
}

/// Energy report of the map induced by an explicit permutation — used to
/// audit search results and to evaluate hand-built assignments.
pub fn assignment_report(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    permutation: &[usize],
    scheme: &NeighborhoodScheme,
    h: &BoundField,
    k: &BoundField,
) -> Result<crate::lipschitz::EnergyReport> {
    let map = induced_map(mu, nu, permutation)?;
    let adj = scheme.adjacency(map.domain().points())?;
    let e = crate::lipschitz::pointwise_expansion_with(&map, &adj);
    let c = crate::lipschitz::pointwise_contraction_with(&map, &adj);
    h.validate(mu.len())?;
    k.validate(mu.len())?;
    Ok(assemble_report(map.domain(), e, c, h, k, *scheme))
}
