//! Measure-valued maps: disintegration plans, their energies, transport
//! classes, and constrained minimization within a class.
//!
//! A plan attaches to each domain atom `x_i` a whole probability measure
//! `ν_i` on the target space (its *fiber*), generalizing a map, whose plan
//! has Dirac fibers. Energies carry over verbatim: the image distance
//! between two atoms is the exact 1-Wasserstein distance between their
//! fibers, so a plan can be smooth even when no map is — two neighboring
//! atoms may split their mass to far-apart regions in lockstep, keeping the
//! fiber distances small.
//!
//! Two plans over the same domain are *transport-class equivalent* when
//! they attach the same weighted multiset of fibers, possibly to different
//! atoms. [`minimize_in_class`] searches that class — restricted to
//! reattachments by permutation, which provably stay inside it — for the
//! lowest generalized energy `Σ μ_i (e_i^p + c_i^p)` under bounds.

use rayon::prelude::*;

use crate::lipschitz::{
    metric_map_energies, weighted_total, BoundField, NeighborhoodScheme, SampledMap,
};
use crate::measure::{mixture, DiscreteMeasure, Point};
use crate::search::SwapSearch;
use crate::wasserstein::{solve_transport, w1_exact};
use crate::{Error, Result, MASS_TOL};

/// A measure-valued map: one fiber measure per domain atom.
#[derive(Debug, Clone)]
pub struct DisintegrationPlan {
    domain: DiscreteMeasure,
    fibers: Vec<DiscreteMeasure>,
}

impl DisintegrationPlan {
    /// Validates fiber count and a common fiber dimension.
    pub fn new(domain: DiscreteMeasure, fibers: Vec<DiscreteMeasure>) -> Result<Self> {
        if fibers.len() != domain.len() {
            return Err(Error::LengthMismatch {
                what: "atoms vs fibers",
                left: domain.len(),
                right: fibers.len(),
            });
        }
        let fdim = fibers[0].dim();
        for f in &fibers {
            if f.dim() != fdim {
                return Err(Error::DimensionMismatch { expected: fdim, got: f.dim() });
            }
        }
        Ok(DisintegrationPlan { domain, fibers })
    }

    /// The first marginal.
    pub fn domain(&self) -> &DiscreteMeasure {
        &self.domain
    }

    /// Fibers aligned with the domain atoms.
    pub fn fibers(&self) -> &[DiscreteMeasure] {
        &self.fibers
    }

    /// Number of domain atoms.
    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    /// Always false after construction; present to pair with `len`.
    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }
}

/// The plan of a sampled map: Dirac fibers at the image points.
pub fn plan_from_map(map: &SampledMap) -> Result<DisintegrationPlan> {
    let fibers: Vec<DiscreteMeasure> = map
        .images()
        .iter()
        .map(|y| DiscreteMeasure::dirac(y.clone()))
        .collect::<Result<_>>()?;
    DisintegrationPlan::new(map.domain().clone(), fibers)
}

/// The target-side marginal `Σ_i μ_i ν_i`, with duplicate atoms merged.
pub fn second_marginal(plan: &DisintegrationPlan) -> Result<DiscreteMeasure> {
    let components: Vec<(f64, DiscreteMeasure)> = plan
        .domain()
        .weights()
        .iter()
        .zip(plan.fibers())
        .map(|(&w, f)| (w, f.clone()))
        .collect();
    mixture(&components)
}

/// The plan whose fiber at `x_i` splits mass across several maps:
/// `ν_i = Σ_k w_k δ_{u_k(x_i)}`.
///
/// All maps must be sampled on the same domain measure, and the
/// coefficients must be positive and sum to 1.
pub fn mixture_plan(
    maps: &[SampledMap],
    coefficients: &[f64],
) -> Result<DisintegrationPlan> {
    if maps.is_empty() {
        return Err(Error::EmptySupport);
    }
    if maps.len() != coefficients.len() {
        return Err(Error::LengthMismatch {
            what: "maps vs coefficients",
            left: maps.len(),
            right: coefficients.len(),
        });
    }
    if coefficients.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidArgument(
            "mixture coefficients must be positive and finite".into(),
        ));
    }
    let total: f64 = coefficients.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "mixture coefficients must sum to 1, got {total}"
        )));
    }
    let base = maps[0].domain();
    for m in &maps[1..] {
        if !same_measure(base, m.domain()) {
            return Err(Error::DomainMismatch(
                "all maps must share the same domain measure".into(),
            ));
        }
        if m.images()[0].dim() != maps[0].images()[0].dim() {
            return Err(Error::DimensionMismatch {
                expected: maps[0].images()[0].dim(),
                got: m.images()[0].dim(),
            });
        }
    }
    let fibers: Vec<DiscreteMeasure> = (0..base.len())
        .map(|i| {
            let pts: Vec<Point> = maps.iter().map(|m| m.images()[i].clone()).collect();
            DiscreteMeasure::new(pts, Some(coefficients.to_vec()))
        })
        .collect::<Result<_>>()?;
    DisintegrationPlan::new(base.clone(), fibers)
}

fn same_measure(a: &DiscreteMeasure, b: &DiscreteMeasure) -> bool {
    a.len() == b.len()
        && a.dim() == b.dim()
        && a.weights() == b.weights()
        && a.points()
            .iter()
            .zip(b.points())
            .all(|(p, q)| p.coords == q.coords)
}

/// Turns a coupling between two measures into a plan over the first one:
/// the fiber at atom `i` is row `i` of the coupling, renormalized to unit
/// mass. The plan's target marginal is the coupling's column marginal.
pub fn disintegrate_coupling(
    coupling: &crate::wasserstein::CouplingPlan,
) -> Result<DisintegrationPlan> {
    let mu = coupling.row_measure();
    let nu = coupling.col_measure();
    let fibers: Vec<DiscreteMeasure> = (0..mu.len())
        .map(|i| {
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for j in 0..nu.len() {
                let m = coupling.mass(i, j);
                if m > 0.0 {
                    pts.push(nu.points()[j].clone());
                    ws.push(m);
                }
            }
            DiscreteMeasure::new(pts, Some(ws))
        })
        .collect::<Result<_>>()?;
    DisintegrationPlan::new(mu.clone(), fibers)
}

/// Generalized energy of a plan.
#[derive(Debug, Clone)]
pub struct PlanEnergy {
    /// `Σ μ_i (e_i^p + c_i^p)`; `+∞` propagates.
    pub total: f64,
    /// Per-atom expansion (fiber-distance based).
    pub e: Vec<f64>,
    /// Per-atom contraction (`+∞` where neighboring fibers coincide).
    pub c: Vec<f64>,
    /// Exponent used.
    pub p: f64,
}

fn powp(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else {
        v.powf(p)
    }
}

/// Evaluates the generalized energy `Σ μ_i (e_i^p + c_i^p)` of a plan under
/// a scheme; `p = 1` reproduces the plain total energy.
pub fn plan_energy(
    plan: &DisintegrationPlan,
    scheme: &NeighborhoodScheme,
    p: f64,
) -> Result<PlanEnergy> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must be >= 1, got {p}")));
    }
    let (e, c) = metric_map_energies(plan.domain(), plan.fibers(), scheme)?;
    let terms: Vec<f64> = e
        .iter()
        .zip(&c)
        .map(|(&ei, &ci)| if p == 1.0 { ei + ci } else { powp(ei, p) + powp(ci, p) })
        .collect();
    let total = weighted_total(plan.domain().weights(), &terms);
    Ok(PlanEnergy { total, e, c, p })
}

/// Collapses each fiber to its barycenter, producing an ordinary map.
///
/// A plan with wildly split fibers can still project to an isometry — the
/// projection forgets how the mass spreads, only where it balances.
pub fn barycenter_map(plan: &DisintegrationPlan) -> Result<SampledMap> {
    let images: Vec<Point> = plan.fibers().iter().map(|f| f.barycenter()).collect();
    SampledMap::new(plan.domain().clone(), images)
}

/// Verdict of a transport-class comparison.
#[derive(Debug, Clone, Copy)]
pub struct TransportClassWitness {
    /// Optimal matching cost between the two weighted fiber multisets,
    /// under the exact fiber-to-fiber Wasserstein ground cost.
    pub matching_cost: f64,
    /// `matching_cost ≤ tol`.
    pub equivalent: bool,
}

/// Tests whether two plans attach the same weighted multiset of fibers,
/// comparing the pushed-forward fiber distributions by optimal
/// transportation with ground cost `W(fiber, fiber)`.
///
/// Both plans must live over the same domain measure. The cost is exactly
/// zero when one fiber multiset is a reattachment of the other.
pub fn class_equivalent(
    a: &DisintegrationPlan,
    b: &DisintegrationPlan,
    tol: f64,
) -> Result<TransportClassWitness> {
    if !same_measure(a.domain(), b.domain()) {
        return Err(Error::DomainMismatch(
            "transport classes are defined over a fixed domain measure".into(),
        ));
    }
    if a.fibers()[0].dim() != b.fibers()[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: a.fibers()[0].dim(),
            got: b.fibers()[0].dim(),
        });
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let n = a.len();
    let costs: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            w1_exact(&a.fibers()[i], &b.fibers()[j]).map(|s| s.cost)
        })
        .collect::<Result<_>>()?;
    let sol = solve_transport(
        &costs,
        n,
        n,
        a.domain().weights(),
        b.domain().weights(),
    )?;
    Ok(TransportClassWitness { matching_cost: sol.cost, equivalent: sol.cost <= tol })
}

/// Result of [`minimize_in_class`].
#[derive(Debug, Clone)]
pub struct ClassSearch {
    /// The best reattachment found (same fiber multiset as the reference).
    pub best: DisintegrationPlan,
    /// Its generalized energy `Σ μ_i (e_i^p + c_i^p)`.
    pub energy: f64,
    /// `permutation[i]` = index of the reference fiber attached to atom `i`.
    pub permutation: Vec<usize>,
    /// Whether the best reattachment satisfies the bounds; false means no
    /// feasible reattachment was found within the budget (not a proof that
    /// none exists).
    pub feasible: bool,
    /// Descent sweeps consumed.
    pub iterations: usize,
    /// Per-atom expansion of the best reattachment.
    pub e: Vec<f64>,
    /// Per-atom contraction of the best reattachment.
    pub c: Vec<f64>,
}

/// Searches the transport class of `reference` — fiber reattachments by
/// permutation — for the lowest generalized energy under bounds `h`
/// (contraction) and `k` (expansion).
///
/// The domain must be uniform (reattachment preserves the pushed-forward
/// fiber distribution only then). Requires `p ≥ 1`; minimizers are known to
/// exist for `p > 1`, while `p = 1` is accepted as a search without that
/// guarantee. The pairwise fiber-distance matrix is computed once and
/// reused across the whole search. Deterministic given `seed`.
pub fn minimize_in_class(
    reference: &DisintegrationPlan,
    scheme: &NeighborhoodScheme,
    h: &BoundField,
    k: &BoundField,
    p: f64,
    budget: usize,
    seed: u64,
) -> Result<ClassSearch> {
    let n = reference.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "in-class minimization needs at least two atoms".into(),
        ));
    }
    if let Some(i) = reference
        .domain()
        .weights()
        .iter()
        .position(|w| (w - 1.0 / n as f64).abs() > MASS_TOL * n as f64)
    {
        return Err(Error::NotUniform { index: i });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must be >= 1, got {p}")));
    }
    h.validate(n)?;
    k.validate(n)?;
    let adjacency = scheme.adjacency(reference.domain().points())?;

    // Ground-cost cache: every candidate attachment reads fiber distances
    // from this one matrix. Each unordered pair is solved once, in the same
    // orientation the per-plan evaluator uses, so the matrix is symmetric by
    // construction and search energies agree with plan evaluations to the
    // last bit.
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let solved: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| w1_exact(&reference.fibers()[i], &reference.fibers()[j]).map(|s| s.cost))
        .collect::<Result<_>>()?;
    let mut fiber_w = vec![0.0; n * n];
    for (&(i, j), &d) in pairs.iter().zip(&solved) {
        fiber_w[i * n + j] = d;
        fiber_w[j * n + i] = d;
    }

    let mut dx = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dx[i * n + j] =
                    reference.domain().points()[i].distance(&reference.domain().points()[j]);
            }
        }
    }
    let hv: Vec<f64> = (0..n).map(|i| h.at(i)).collect();
    let kv: Vec<f64> = (0..n).map(|i| k.at(i)).collect();
    let search =
        SwapSearch::new(&dx, &fiber_w, reference.domain().weights(), &adjacency, hv, kv, p);
    // Start from the reference attachment itself, then from the ranking of
    // distance profiles (exact for scrambled congruent references).
    let starts = vec![(0..n).collect(), crate::search::profile_init(&dx, &fiber_w, n)];
    let out = search.run(&starts, budget, seed);

    let fibers: Vec<DiscreteMeasure> =
        out.perm.iter().map(|&j| reference.fibers()[j].clone()).collect();
    let best = DisintegrationPlan::new(reference.domain().clone(), fibers)?;
    Ok(ClassSearch {
        best,
        energy: out.energy,
        permutation: out.perm,
        feasible: out.feasible,
        iterations: out.sweeps,
        e: out.e,
        c: out.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz::{energy_report, pointwise_expansion};

    fn segment(n: usize) -> DiscreteMeasure {
        DiscreteMeasure::uniform_from_coords(
            (0..n).map(|i| vec![i as f64 / (n - 1) as f64, 0.0]).collect(),
        )
        .unwrap()
    }

    fn split_fibers(domain: &DiscreteMeasure) -> Vec<DiscreteMeasure> {
        domain
            .points()
            .iter()
            .map(|pt| {
                let t = pt.coords[0];
                DiscreteMeasure::new(
                    vec![
                        Point::new(vec![t, t + 1.0]),
                        Point::new(vec![t, -t - 1.0]),
                    ],
                    Some(vec![0.5, 0.5]),
                )
                .unwrap()
            })
            .collect()
    }

    fn sort_key(m: &DiscreteMeasure) -> Vec<(Vec<u64>, u64)> {
        let mut v: Vec<(Vec<u64>, u64)> = m
            .points()
            .iter()
            .zip(m.weights())
            .map(|(p, w)| {
                (
                    p.coords.iter().map(|c| c.to_bits()).collect(),
                    w.to_bits(),
                )
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn map_plans_have_dirac_fibers_and_matching_marginal() {
        let mu = segment(4);
        let map = SampledMap::from_fn(mu.clone(), |p| {
            Point::new(vec![p.coords[0] + 1.0, p.coords[1]])
        })
        .unwrap();
        let plan = plan_from_map(&map).unwrap();
        for (f, img) in plan.fibers().iter().zip(map.images()) {
            assert_eq!(f.len(), 1);
            assert_eq!(f.points()[0].coords, img.coords);
        }
        let sm = second_marginal(&plan).unwrap();
        let pf = map.push_forward().unwrap();
        assert_eq!(sort_key(&sm), sort_key(&pf));
    }

    #[test]
    fn constant_map_plan_collapses_the_marginal() {
        let mu = segment(5);
        let y0 = Point::new(vec![7.0, -2.0]);
        let map = SampledMap::from_fn(mu, |_| y0.clone()).unwrap();
        let plan = plan_from_map(&map).unwrap();
        let sm = second_marginal(&plan).unwrap();
        assert_eq!(sm.len(), 1);
        assert_eq!(sm.points()[0].coords, y0.coords);
        assert_eq!(sm.weights()[0], 1.0);
    }

    #[test]
    fn mixture_plan_marginal_equals_mixture_of_push_forwards() {
        // Dyadic weights and an 8-atom uniform domain keep every product
        // exact, so the two constructions must agree bit for bit.
        let mu = DiscreteMeasure::uniform_from_coords(
            (0..8).map(|i| vec![i as f64, 0.5 * i as f64]).collect(),
        )
        .unwrap();
        let u1 = SampledMap::from_fn(mu.clone(), |p| {
            Point::new(vec![p.coords[0] + 10.0, p.coords[1]])
        })
        .unwrap();
        let u2 = SampledMap::from_fn(mu.clone(), |p| {
            Point::new(vec![p.coords[0] - 10.0, p.coords[1] + 1.0])
        })
        .unwrap();
        let plan = mixture_plan(&[u1.clone(), u2.clone()], &[0.75, 0.25]).unwrap();
        let sm = second_marginal(&plan).unwrap();
        let direct = mixture(&[
            (0.75, u1.push_forward().unwrap()),
            (0.25, u2.push_forward().unwrap()),
        ])
        .unwrap();
        assert_eq!(sort_key(&sm), sort_key(&direct));
    }

    #[test]
    fn mixture_plan_rejects_mismatched_domains() {
        let mu = segment(4);
        let other = segment(5);
        let u1 = SampledMap::from_fn(mu, |p| p.clone()).unwrap();
        let u2 = SampledMap::from_fn(other, |p| p.clone()).unwrap();
        assert!(matches!(
            mixture_plan(&[u1, u2], &[0.5, 0.5]),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn plan_energy_of_an_isometry_map_is_two() {
        let mu = segment(6);
        let map = SampledMap::from_fn(mu, |p| {
            Point::new(vec![-p.coords[1] + 1.0, p.coords[0]])
        })
        .unwrap();
        let plan = plan_from_map(&map).unwrap();
        let en = plan_energy(&plan, &NeighborhoodScheme::knn(2), 1.0).unwrap();
        assert!((en.total - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn dirac_plan_energy_equals_map_report_bitwise() {
        let mu = DiscreteMeasure::uniform_from_coords(vec![
            vec![0.0, 0.0],
            vec![1.1, 0.2],
            vec![0.3, 0.9],
            vec![1.4, 1.5],
            vec![2.2, 0.6],
        ])
        .unwrap();
        let map = SampledMap::from_fn(mu, |p| {
            Point::new(vec![
                1.4 * p.coords[0] - 0.3 * p.coords[1],
                0.8 * p.coords[1] + 0.1 * p.coords[0] + 2.0,
            ])
        })
        .unwrap();
        let scheme = NeighborhoodScheme::knn(2);
        let plan = plan_from_map(&map).unwrap();
        let en = plan_energy(&plan, &scheme, 1.0).unwrap();
        let rep = energy_report(
            &map,
            &scheme,
            &BoundField::unbounded(),
            &BoundField::unbounded(),
        )
        .unwrap();
        assert_eq!(en.total, rep.total_r);
        assert_eq!(en.e, rep.e);
        assert_eq!(en.c, rep.c);
    }

    #[test]
    fn split_fibers_are_mutually_root_two_apart() {
        let mu = segment(6);
        let fibers = split_fibers(&mu);
        for i in 0..6 {
            for j in 0..6 {
                let w = w1_exact(&fibers[i], &fibers[j]).unwrap().cost;
                let expect =
                    2f64.sqrt() * (mu.points()[i].coords[0] - mu.points()[j].coords[0]).abs();
                assert!(
                    (w - expect).abs() <= 1e-9,
                    "pair ({i},{j}): {w} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn split_plan_projects_to_an_isometry_through_barycenters() {
        let mu = segment(7);
        let plan = DisintegrationPlan::new(mu.clone(), split_fibers(&mu)).unwrap();
        let bmap = barycenter_map(&plan).unwrap();
        for (img, pt) in bmap.images().iter().zip(mu.points()) {
            assert!((img.coords[0] - pt.coords[0]).abs() <= 1e-12);
            assert!(img.coords[1].abs() <= 1e-12);
        }
        let e = pointwise_expansion(&bmap, &NeighborhoodScheme::knn(2)).unwrap();
        for v in e {
            assert!((v - 1.0).abs() <= 1e-9);
        }
        // The plan itself is strictly above the floor; the projection hides
        // the splitting cost.
        let en = plan_energy(&plan, &NeighborhoodScheme::knn(2), 1.0).unwrap();
        let expect = 2f64.sqrt() + 1.0 / 2f64.sqrt();
        assert!((en.total - expect).abs() <= 1e-9);
    }

    #[test]
    fn symmetric_two_point_fibers_balance_at_the_center() {
        let mu = segment(3);
        let v = [0.4, 1.3];
        let fibers: Vec<DiscreteMeasure> = mu
            .points()
            .iter()
            .map(|pt| {
                DiscreteMeasure::new(
                    vec![
                        Point::new(vec![pt.coords[0] + v[0], pt.coords[1] + v[1]]),
                        Point::new(vec![pt.coords[0] - v[0], pt.coords[1] - v[1]]),
                    ],
                    Some(vec![0.5, 0.5]),
                )
                .unwrap()
            })
            .collect();
        let plan = DisintegrationPlan::new(mu.clone(), fibers).unwrap();
        let bmap = barycenter_map(&plan).unwrap();
        for (img, pt) in bmap.images().iter().zip(mu.points()) {
            assert!((img.coords[0] - pt.coords[0]).abs() <= 1e-12);
            assert!((img.coords[1] - pt.coords[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn class_witness_is_exactly_zero_for_reattachments() {
        let mu = segment(5);
        let plan = DisintegrationPlan::new(mu.clone(), split_fibers(&mu)).unwrap();
        let w = class_equivalent(&plan, &plan, 0.0).unwrap();
        assert_eq!(w.matching_cost, 0.0);
        assert!(w.equivalent);

        let scramble = [3usize, 0, 4, 2, 1];
        let fibers: Vec<DiscreteMeasure> =
            scramble.iter().map(|&j| plan.fibers()[j].clone()).collect();
        let scrambled = DisintegrationPlan::new(mu, fibers).unwrap();
        let w = class_equivalent(&plan, &scrambled, 0.0).unwrap();
        assert_eq!(w.matching_cost, 0.0);
        assert!(w.equivalent);
    }

    #[test]
    fn precomposing_a_map_with_a_permutation_stays_in_class() {
        let mu = segment(4);
        let u = SampledMap::from_fn(mu.clone(), |p| {
            Point::new(vec![2.0 * p.coords[0], p.coords[1] + 1.0])
        })
        .unwrap();
        let sigma = [2usize, 3, 0, 1];
        let v = SampledMap::new(
            mu.clone(),
            sigma.iter().map(|&j| u.images()[j].clone()).collect(),
        )
        .unwrap();
        let pa = plan_from_map(&u).unwrap();
        let pb = plan_from_map(&v).unwrap();
        let w = class_equivalent(&pa, &pb, 0.0).unwrap();
        assert_eq!(w.matching_cost, 0.0);
        assert!(w.equivalent);
    }

    #[test]
    fn different_domains_cannot_share_a_class() {
        let a = DisintegrationPlan::new(segment(4), split_fibers(&segment(4))).unwrap();
        let b = DisintegrationPlan::new(segment(5), split_fibers(&segment(5))).unwrap();
        assert!(matches!(
            class_equivalent(&a, &b, 0.0),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn scrambled_split_plan_is_recovered_in_class() {
        let mu = segment(7);
        let ordered = DisintegrationPlan::new(mu.clone(), split_fibers(&mu)).unwrap();
        let scramble = [4usize, 1, 6, 3, 0, 5, 2];
        let fibers: Vec<DiscreteMeasure> =
            scramble.iter().map(|&j| ordered.fibers()[j].clone()).collect();
        let scrambled = DisintegrationPlan::new(mu, fibers).unwrap();
        let scheme = NeighborhoodScheme::knn(2);
        let found = minimize_in_class(
            &scrambled,
            &scheme,
            &BoundField::unbounded(),
            &BoundField::unbounded(),
            1.0,
            256,
            0,
        )
        .unwrap();
        let target = plan_energy(&ordered, &scheme, 1.0).unwrap().total;
        assert!(
            (found.energy - target).abs() <= 1e-9,
            "found {} target {target}",
            found.energy
        );
        // Never leaves the class: fiber multiset preserved bit for bit.
        let w = class_equivalent(&found.best, &scrambled, 0.0).unwrap();
        assert_eq!(w.matching_cost, 0.0);
        // Energy is re-derivable from the returned plan.
        let direct = plan_energy(&found.best, &scheme, 1.0).unwrap();
        assert_eq!(direct.total, found.energy);
    }

    #[test]
    fn rigid_reference_reaches_the_floor_for_any_exponent() {
        let mu = segment(5);
        let map = SampledMap::from_fn(mu.clone(), |p| {
            Point::new(vec![p.coords[1] - 3.0, -p.coords[0]])
        })
        .unwrap();
        let reference = plan_from_map(&map).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let found = minimize_in_class(
                &reference,
                &NeighborhoodScheme::knn(2),
                &BoundField::unbounded(),
                &BoundField::unbounded(),
                p,
                128,
                0,
            )
            .unwrap();
            assert!(
                (found.energy - 2.0).abs() <= 1e-9,
                "p={p}: energy {}",
                found.energy
            );
            assert!(found.feasible);
        }
    }

    #[test]
    fn in_class_search_matches_exhaustive_on_small_instances() {
        let mu = segment(6);
        let scramble = [2usize, 5, 1, 0, 4, 3];
        let fibers: Vec<DiscreteMeasure> = {
            let base = split_fibers(&mu);
            scramble.iter().map(|&j| base[j].clone()).collect()
        };
        let reference = DisintegrationPlan::new(mu.clone(), fibers).unwrap();
        let scheme = NeighborhoodScheme::knn(2);
        let p = 2.0;
        let found = minimize_in_class(
            &reference,
            &scheme,
            &BoundField::unbounded(),
            &BoundField::unbounded(),
            p,
            512,
            0,
        )
        .unwrap();

        // Exhaustive oracle over all 720 reattachments of the same fibers.
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..6).collect();
        fn walk(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
            if k == perm.len() {
                visit(perm);
                return;
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                walk(perm, k + 1, visit);
                perm.swap(k, i);
            }
        }
        walk(&mut perm, 0, &mut |pm| {
            let fibers: Vec<DiscreteMeasure> =
                pm.iter().map(|&j| reference.fibers()[j].clone()).collect();
            let plan = DisintegrationPlan::new(mu.clone(), fibers).unwrap();
            let en = plan_energy(&plan, &scheme, p).unwrap().total;
            if en < best {
                best = en;
            }
        });
        println!("in-class search {} exhaustive {best}", found.energy);
        assert_eq!(found.energy, best);
    }

    #[test]
    fn disintegrated_couplings_reproduce_the_target_marginal() {
        let mu = segment(4);
        let nu = DiscreteMeasure::uniform_from_coords(
            (0..6).map(|i| vec![i as f64 * 0.3 + 5.0, 1.0]).collect(),
        )
        .unwrap();
        let sol = w1_exact(&mu, &nu).unwrap();
        let plan = disintegrate_coupling(&sol.plan).unwrap();
        assert_eq!(plan.len(), mu.len());
        let sm = second_marginal(&plan).unwrap();
        assert!(w1_exact(&sm, &nu).unwrap().cost <= 1e-10);

        // Equal uniform marginals make the optimal coupling a permutation,
        // so every fiber collapses to a Dirac.
        let shifted = DiscreteMeasure::uniform_from_coords(
            mu.points()
                .iter()
                .map(|p| vec![p.coords[0] + 2.0, p.coords[1]])
                .collect(),
        )
        .unwrap();
        let sol = w1_exact(&mu, &shifted).unwrap();
        let plan = disintegrate_coupling(&sol.plan).unwrap();
        for f in plan.fibers() {
            assert_eq!(f.len(), 1);
        }
    }

    #[test]
    fn non_uniform_domains_and_bad_exponents_are_rejected() {
        let mu = DiscreteMeasure::new(
            vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0])],
            Some(vec![0.75, 0.25]),
        )
        .unwrap();
        let plan = DisintegrationPlan::new(mu.clone(), split_fibers(&mu)).unwrap();
        assert!(matches!(
            minimize_in_class(
                &plan,
                &NeighborhoodScheme::knn(1),
                &BoundField::unbounded(),
                &BoundField::unbounded(),
                1.0,
                16,
                0
            ),
            Err(Error::NotUniform { .. })
        ));
        let uni = segment(3);
        let plan = DisintegrationPlan::new(uni.clone(), split_fibers(&uni)).unwrap();
        assert!(matches!(
            minimize_in_class(
                &plan,
                &NeighborhoodScheme::knn(1),
                &BoundField::unbounded(),
                &BoundField::unbounded(),
                0.5,
                16,
                0
            ),
            Err(Error::InvalidArgument(_))
        ));
        assert!(plan_energy(&plan, &NeighborhoodScheme::knn(1), 0.9).is_err());
    }
}
