//! Pointwise stretch and compression of a sampled map, and the energy that
//! aggregates them.
//!
//! Each atom's expansion `e_i` is the largest ratio `|u(x_i) − u(x_j)| /
//! |x_i − x_j|` over scheme neighbors `j`; the contraction `c_i` is the
//! largest inverse ratio. Their mass-weighted sum `Σ μ_i (e_i + c_i)` is the
//! reformation energy of the map: at least 2 always, exactly 2 for rigid
//! motions.
//!
//! Run with: `cargo run --example energy_of_a_map`

use reformation::{
    energy_report, pointwise_contraction, pointwise_expansion, BoundField, DiscreteMeasure,
    NeighborhoodScheme, Point, SampledMap,
};

fn main() -> reformation::Result<()> {
    // 21 atoms on [0, 1], pushed through the squaring map.
    let xs: Vec<Vec<f64>> = (0..=20).map(|i| vec![i as f64 / 20.0]).collect();
    let mu = DiscreteMeasure::uniform_from_coords(xs)?;
    let square = SampledMap::from_fn(mu.clone(), |p: &Point| {
        Point::new(vec![p.coords[0] * p.coords[0]])
    })?;

    let scheme = NeighborhoodScheme::knn(2);
    let e = pointwise_expansion(&square, &scheme)?;
    let c = pointwise_contraction(&square, &scheme)?;

    println!("x -> x^2 on a uniform grid of [0,1], knn(2) neighborhoods\n");
    println!("{:>6}  {:>10}  {:>12}", "x", "stretch e", "compression c");
    for (i, p) in square.domain().points().iter().enumerate() {
        println!("{:>6.2}  {:>10.4}  {:>12.4}", p.coords[0], e[i], c[i]);
    }
    // Near 0 the parabola flattens: tiny stretch, huge compression. Near 1
    // the local slope approaches 2: stretch ~2, compression ~1/2. And
    // everywhere c_i * e_i >= 1 because both maxima run over the same
    // neighbor set.
    for i in 0..e.len() {
        assert!(c[i] * e[i] >= 1.0 - 1e-12);
    }

    // The full report adds per-atom bound verdicts and the weighted total.
    let report = energy_report(
        &square,
        &scheme,
        &BoundField::Constant(12.0), // contraction allowance H
        &BoundField::Constant(2.5),  // expansion allowance K
    )?;
    println!("\ntotal energy  = {:.6}  (floor is 2, rigid motions attain it)", report.total_r);
    println!("within bounds = {}", report.feasible());

    // Tighten the contraction allowance below the flat end's compression and
    // the same map becomes infeasible.
    let tight = energy_report(
        &square,
        &scheme,
        &BoundField::Constant(5.0),
        &BoundField::Constant(2.5),
    )?;
    println!("with H = 5    = {}", tight.feasible());

    // A rigid motion of the same atoms sits exactly on the floor.
    let rot = SampledMap::from_fn(mu, |p: &Point| Point::new(vec![-p.coords[0]]))?;
    let rigid = energy_report(&rot, &scheme, &BoundField::unbounded(), &BoundField::unbounded())?;
    println!("\nreflected copy: total = {} (the floor)", rigid.total_r);
    assert!((rigid.total_r - 2.0).abs() <= 1e-12);
    assert!(report.total_r > 2.0);
    Ok(())
}
