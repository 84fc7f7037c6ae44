//! End-to-end checks: every numerical claim the library makes is verified
//! here against an independent oracle, a closed-form value, or a structural
//! identity, at the stated tolerance. Each test prints one `PASS` line with
//! the observed extremes (visible under `--nocapture`).

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use reformation::{
    bending, class_equivalent, curve_length, detect_isometry,
    energy_report, fragmentation, minimize_energy, minimize_in_class, mixture, plan_energy,
    pointwise_contraction, pointwise_contraction_with, pointwise_expansion,
    pointwise_expansion_with, split_segment, w1_dual_value, w1_exact, BoundField,
    DiscreteMeasure, DisintegrationPlan, NeighborhoodScheme, SampledMap, Verdict,
};

/// The 200 shared random transport instances used by the primal and the dual
/// checks (both must see the same measures).
fn transport_instances() -> Vec<(DiscreteMeasure, DiscreteMeasure)> {
    let mut rng = rng(11);
    (0..200)
        .map(|case| {
            let dim = 1 + case % 3;
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let mu = random_weighted_cloud(&mut rng, m, dim, 2.0);
            let nu = random_weighted_cloud(&mut rng, n, dim, 2.0);
            (mu, nu)
        })
        .collect()
}

#[test]
fn a01_exact_cost_matches_polytope_vertex_enumeration() {
    let t0 = Instant::now();
    let mut max_err = 0.0f64;
    for (case, (mu, nu)) in transport_instances().iter().enumerate() {
        let sol = w1_exact(mu, nu).unwrap();
        let reference = oracle_w1(mu, nu);
        let err = (sol.cost - reference).abs();
        max_err = max_err.max(err);
        assert!(
            err <= 1e-9,
            "case {case}: solver {:.17} vs enumeration {:.17}",
            sol.cost,
            reference
        );
    }
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(10), "took {dt:?}, budget 10 s");
    println!("PASS exact vs vertex enumeration: 200 instances, max |Δ| = {max_err:.3e}, {dt:?}");
}

#[test]
fn a02_dual_certificates_are_lipschitz_and_tight() {
    let mut max_gap = 0.0f64;
    for (case, (mu, nu)) in transport_instances().iter().enumerate() {
        let sol = w1_exact(mu, nu).unwrap();
        // validate() enforces the Lipschitz constraint pairwise at 1e-9.
        sol.potential.validate(mu, nu).unwrap();
        let dual = w1_dual_value(mu, nu, &sol.potential).unwrap();
        let gap = (dual - sol.cost).abs();
        max_gap = max_gap.max(gap);
        assert!(
            gap <= 1e-7,
            "case {case}: dual {:.17} vs primal {:.17}",
            dual,
            sol.cost
        );
    }
    println!("PASS dual certificates: 200 instances, max |dual − primal| = {max_gap:.3e}");
}

#[test]
fn a03_energy_floor_holds_for_random_maps_and_plans() {
    let mut rng = rng(33);
    let unb = BoundField::unbounded();
    let mut min_r = f64::INFINITY;
    let mut min_total = f64::INFINITY;
    // Random point maps.
    for _ in 0..40 {
        let dim = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=12);
        let domain = random_weighted_cloud(&mut rng, n, dim, 1.0);
        let images = random_cloud(&mut rng, n, dim, 1.0).points().to_vec();
        let map = SampledMap::new(domain, images).unwrap();
        let scheme = NeighborhoodScheme::knn(rng.gen_range(1..=3));
        let report = energy_report(&map, &scheme, &unb, &unb).unwrap();
        for &r in &report.r {
            if r.is_finite() {
                assert!(r >= 2.0 - 1e-12, "per-atom r {r} under the floor");
                min_r = min_r.min(r);
            }
        }
        assert!(report.total_r >= 2.0 - 1e-12, "total {} under the floor", report.total_r);
        if report.total_r.is_finite() {
            min_total = min_total.min(report.total_r);
        }
    }
    // Random measure-valued plans.
    for _ in 0..40 {
        let dim = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=10);
        let domain = random_weighted_cloud(&mut rng, n, dim, 1.0);
        let fibers: Vec<DiscreteMeasure> = (0..n)
            .map(|_| {
                let fn_atoms = rng.gen_range(1..=3);
                random_weighted_cloud(&mut rng, fn_atoms, dim, 1.0)
            })
            .collect();
        let plan = DisintegrationPlan::new(domain, fibers).unwrap();
        let scheme = NeighborhoodScheme::knn(rng.gen_range(1..=3));
        let en = plan_energy(&plan, &scheme, 1.0).unwrap();
        for (&e, &c) in en.e.iter().zip(&en.c) {
            let r = e + c;
            if r.is_finite() {
                assert!(r >= 2.0 - 1e-12, "plan per-atom r {r} under the floor");
                min_r = min_r.min(r);
            }
        }
        assert!(en.total >= 2.0 - 1e-12, "plan total {} under the floor", en.total);
        if en.total.is_finite() {
            min_total = min_total.min(en.total);
        }
    }
    println!(
        "PASS energy floor: 80 random instances, min finite r = {min_r:.12}, min total = {min_total:.12}"
    );
}

#[test]
fn a04_rigid_pairs_reach_the_floor_and_perturbations_are_flagged() {
    let t0 = Instant::now();
    let mut rng = rng(44);
    let unb = BoundField::unbounded();
    let scheme = NeighborhoodScheme::knn(4);
    let mut worst_dev = 0.0f64;
    for case in 0..50 {
        let dim = 2 + case % 2;
        let n = rng.gen_range(10..=60);
        let mu = random_cloud(&mut rng, n, dim, 1.0);
        let rot = random_orthogonal(&mut rng, dim);
        let t: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let nu = moved_copy(&mut rng, &mu, &rot, &t);

        let res = minimize_energy(&mu, &nu, &scheme, &unb, &unb, 256, 0).unwrap();
        let dev = (res.best_energy - 2.0).abs();
        worst_dev = worst_dev.max(dev);
        assert!(
            dev <= 1e-9,
            "case {case} (n={n}, dim={dim}): best energy {:.17}",
            res.best_energy
        );
        let det = detect_isometry(&mu, &nu, 1e-6, &scheme, 256, 0).unwrap();
        assert!(
            matches!(det.verdict, Verdict::Isometric),
            "case {case} (n={n}, dim={dim}): rigid pair judged {}",
            det.verdict
        );
        assert!(det.isometry_params.is_some());

        // Perturb every coordinate by a few percent of the diameter: far
        // beyond the tolerance, so the verdict must flip.
        let diam = nu.diameter();
        let delta = 0.02 * diam;
        let noisy = DiscreteMeasure::uniform_from_coords(
            nu.points()
                .iter()
                .map(|p| p.coords.iter().map(|&v| v + rng.gen_range(-delta..delta)).collect())
                .collect(),
        )
        .unwrap();
        let det2 = detect_isometry(&mu, &noisy, 1e-6, &scheme, 48, 0).unwrap();
        assert!(
            matches!(det2.verdict, Verdict::NonIsometric),
            "case {case} (n={n}, dim={dim}): perturbed pair judged {}",
            det2.verdict
        );
    }
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(60), "took {dt:?}, budget 60 s");
    println!("PASS rigid recovery: 50 rigid pairs at the floor (worst |Δ| = {worst_dev:.3e}), 50 perturbed pairs flagged, {dt:?}");
}

#[test]
fn a05_rectangle_bending_energies_match_the_formula() {
    let mut worst = 0.0f64;
    for n in [2usize, 5, 10] {
        let demo = bending(n, 9, 5).unwrap();
        let en = plan_energy(&demo.plan, &demo.scheme, 1.0).unwrap();
        for (i, (&e, &c)) in en.e.iter().zip(&en.c).enumerate() {
            let de = (e - demo.expected_e).abs();
            let dc = (c - 1.0 / e).abs();
            worst = worst.max(de).max(dc);
            assert!(de <= 1e-9, "n={n} atom {i}: e = {e:.17}, expected {:.17}", demo.expected_e);
            assert!(dc <= 1e-9, "n={n} atom {i}: c = {c:.17}, expected 1/e = {:.17}", 1.0 / e);
        }
        let expected_total = demo.expected_e + 1.0 / demo.expected_e;
        assert!((en.total - expected_total).abs() <= 1e-9);
    }
    println!("PASS rectangle bending: n ∈ {{2, 5, 10}}, worst per-atom |Δ| = {worst:.3e}");
}

#[test]
fn a06_split_segment_distances_total_and_barycenter() {
    let demo = split_segment(9).unwrap();
    let plan = &demo.plan;
    let n = plan.len();
    let mut worst_slope = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = w1_exact(&plan.fibers()[i], &plan.fibers()[j]).unwrap().cost;
            let dx = plan.domain().points()[i].distance(&plan.domain().points()[j]);
            let dev = (w - demo.expected_w_slope * dx).abs();
            worst_slope = worst_slope.max(dev);
            assert!(dev <= 1e-9, "pair ({i},{j}): W = {w:.17}, expected {:.17}", demo.expected_w_slope * dx);
        }
    }
    let en = plan_energy(plan, &demo.scheme, 1.0).unwrap();
    assert!(
        (en.total - 2.121320343).abs() <= 1e-8,
        "total {:.17} vs 2.121320343",
        en.total
    );
    assert!((en.total - demo.expected_r).abs() <= 1e-8);

    // Collapsing each two-branch fiber to its barycenter projects the plan
    // onto the axis and lands exactly on the floor.
    let bary = reformation::barycenter_map(plan).unwrap();
    let e = pointwise_expansion(&bary, &demo.scheme).unwrap();
    let c = pointwise_contraction(&bary, &demo.scheme).unwrap();
    let mut worst_bary = 0.0f64;
    for i in 0..n {
        worst_bary = worst_bary.max((e[i] - 1.0).abs()).max((c[i] - 1.0).abs());
        assert!((e[i] - 1.0).abs() <= 1e-9, "barycenter atom {i}: e = {:.17}", e[i]);
        assert!((c[i] - 1.0).abs() <= 1e-9, "barycenter atom {i}: c = {:.17}", c[i]);
    }
    println!(
        "PASS split segment: slope dev {worst_slope:.3e}, total {:.12}, barycenter dev {worst_bary:.3e}",
        en.total
    );
}

#[test]
fn a07_contraction_equals_inverse_expansion_under_shared_pairing() {
    let mut rng = rng(77);
    for case in 0..100 {
        let dim = 1 + case % 3;
        let n = rng.gen_range(3..=10);
        let domain = random_weighted_cloud(&mut rng, n, dim, 1.0);
        let images = random_cloud(&mut rng, n, dim, 1.0).points().to_vec();
        let map = SampledMap::new(domain.clone(), images).unwrap();
        let scheme = NeighborhoodScheme::knn(rng.gen_range(1..=3));
        let adj = scheme.adjacency(domain.points()).unwrap();

        let c_fwd = pointwise_contraction_with(&map, &adj);
        let inverse = SampledMap::new(map.push_forward().unwrap(), domain.points().to_vec()).unwrap();
        let e_inv = pointwise_expansion_with(&inverse, &adj);
        for i in 0..n {
            assert_eq!(
                c_fwd[i].to_bits(),
                e_inv[i].to_bits(),
                "case {case} atom {i}: c = {:.17} vs inverse e = {:.17}",
                c_fwd[i],
                e_inv[i]
            );
        }
    }
    println!("PASS inverse identity: 100 random injective maps, bitwise equal per atom");
}

#[test]
fn a08_mixture_curves_have_length_w1_and_constant_speed() {
    let mut rng = rng(88);
    let mut worst_len = 0.0f64;
    let mut worst_speed = 0.0f64;
    for case in 0..20 {
        let dim = 1 + case % 3;
        let na = rng.gen_range(2..=6);
        let nb = rng.gen_range(2..=6);
        let a = random_weighted_cloud(&mut rng, na, dim, 1.5);
        let b = random_weighted_cloud(&mut rng, nb, dim, 1.5);
        let exact = w1_exact(&a, &b).unwrap().cost;

        let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let snapshots: Vec<DiscreteMeasure> = times
            .iter()
            .map(|&t| mixture(&[(1.0 - t, a.clone()), (t, b.clone())]).unwrap())
            .collect();
        let curve = curve_length(&snapshots, &times).unwrap();

        let dev = (curve.length - exact).abs();
        worst_len = worst_len.max(dev);
        assert!(dev <= 1e-9, "case {case}: length {:.17} vs W = {exact:.17}", curve.length);
        for (k, &s) in curve.speeds.iter().enumerate() {
            let sdev = (s - exact).abs();
            worst_speed = worst_speed.max(sdev);
            assert!(sdev <= 1e-9, "case {case} segment {k}: speed {s:.17} vs {exact:.17}");
        }
    }
    println!("PASS displacement curves: 20 pairs, max |length − W| = {worst_len:.3e}, max speed dev = {worst_speed:.3e}");
}

#[test]
fn a09_in_class_search_stays_in_class_and_matches_exhaustive() {
    let unb = BoundField::unbounded();
    let scheme = NeighborhoodScheme::knn(2);

    // The minimizer must never leave the transport class of its reference:
    // zero tolerance, exact zero matching cost.
    let mut rng = rng(90);
    for case in 0..20 {
        let n = rng.gen_range(4..=10);
        let domain = random_cloud(&mut rng, n, 2, 1.0);
        let fibers: Vec<DiscreteMeasure> = (0..n)
            .map(|_| {
                let atoms = rng.gen_range(1..=3);
                random_weighted_cloud(&mut rng, atoms, 2, 1.0)
            })
            .collect();
        let reference = DisintegrationPlan::new(domain, fibers).unwrap();
        let p = if case % 2 == 0 { 1.0 } else { 2.0 };
        let found = minimize_in_class(&reference, &scheme, &unb, &unb, p, 256, case as u64).unwrap();
        let witness = class_equivalent(&reference, &found.best, 0.0).unwrap();
        assert!(
            witness.equivalent && witness.matching_cost == 0.0,
            "case {case}: matching cost {:.3e}",
            witness.matching_cost
        );
    }

    // On small instances the search energy must equal brute force over all
    // reattachments, bit for bit.
    for n in 4usize..=8 {
        let mut rng = common::rng(900 + n as u64);
        let domain = random_cloud(&mut rng, n, 2, 1.0);
        let fibers: Vec<DiscreteMeasure> = (0..n)
            .map(|_| {
                let atoms = rng.gen_range(1..=3);
                random_weighted_cloud(&mut rng, atoms, 2, 1.0)
            })
            .collect();
        let reference = DisintegrationPlan::new(domain.clone(), fibers.clone()).unwrap();
        let found = minimize_in_class(&reference, &scheme, &unb, &unb, 1.0, 2048, 1).unwrap();

        let mut exhaustive = f64::INFINITY;
        for_each_permutation(n, &mut |perm| {
            let permuted: Vec<DiscreteMeasure> =
                perm.iter().map(|&j| fibers[j].clone()).collect();
            let plan = DisintegrationPlan::new(domain.clone(), permuted).unwrap();
            let total = plan_energy(&plan, &scheme, 1.0).unwrap().total;
            if total < exhaustive {
                exhaustive = total;
            }
        });
        assert_eq!(
            found.energy.to_bits(),
            exhaustive.to_bits(),
            "n={n}: search {:.17} vs exhaustive {:.17}",
            found.energy,
            exhaustive
        );
    }
    println!("PASS in-class search: 20 references re-matched at zero cost, exhaustive match bit-for-bit for n = 4..=8");
}

#[test]
fn a10_tile_scramble_floor_versus_covering_bound() {
    let demo = fragmentation().unwrap();
    let fine = demo.unconstrained().unwrap();
    assert!(fine.feasible());
    assert!(
        fine.total_r <= 2.0 + 1e-9,
        "fine-scheme total {:.17} above the floor",
        fine.total_r
    );
    let coarse = demo.constrained().unwrap();
    assert!(!coarse.feasible(), "covering-scheme bound unexpectedly satisfied");
    let worst_e = coarse.e.iter().cloned().fold(0.0f64, f64::max);
    assert!(worst_e > demo.expansion_bound);
    println!(
        "PASS tile scramble: fine total {:.12} at the floor; covering scheme worst e = {worst_e:.6} breaks the bound {}",
        fine.total_r, demo.expansion_bound
    );
}
