//! A segment fanning out into two diverging branches — a plan whose fiber
//! geometry expands by √2, and whose barycenter projection silently hides
//! that expansion.
//!
//! Atom `t` of the segment carries the fiber `½ δ_(t, t+1) + ½ δ_(t, −t−1)`:
//! half its mass goes up-and-right, half down-and-right. Between two atoms
//! at distance d the fibers are a Wasserstein distance `√2 · d` apart, so
//! the plan's per-atom stretch is `√2`, its compression is `1/√2`, and the
//! total energy is `√2 + 1/√2 ≈ 2.1213`.
//!
//! Averaging each fiber to a single point (the barycenter map) collapses the
//! two branches back onto the segment's axis — an exact isometry with energy
//! 2. The fan-out is invisible to the projection and is only charged by the
//! fiber metric.
//!
//! Run with: `cargo run --example split_segment`

use reformation::{
    barycenter_map, energy_report, plan_energy, split_segment, w1_exact, BoundField,
};

fn main() -> reformation::Result<()> {
    let demo = split_segment(9)?;
    let plan = &demo.plan;

    println!("domain: {} atoms on a segment; each fiber holds 2 branch points\n", plan.len());

    // Fiber distances grow with slope √2 in the domain distance.
    let pts = plan.domain().points();
    println!("{:>10}  {:>12}  {:>12}", "|x_i-x_j|", "W(f_i,f_j)", "ratio");
    for (i, j) in [(0usize, 1usize), (0, 4), (0, 8), (3, 6)] {
        let d = pts[i].distance(&pts[j]);
        let w = w1_exact(&plan.fibers()[i], &plan.fibers()[j])?.cost;
        println!("{:>10.4}  {:>12.6}  {:>12.8}", d, w, w / d);
        assert!((w / d - demo.expected_w_slope).abs() <= 1e-9);
    }
    println!("            (expected ratio: sqrt(2) = {:.8})", demo.expected_w_slope);

    let en = plan_energy(plan, &demo.scheme, 1.0)?;
    println!("\nplan energy = {:.9}", en.total);
    println!("expected    = {:.9}  (sqrt(2) + 1/sqrt(2))", demo.expected_r);
    assert!((en.total - demo.expected_r).abs() <= 1e-8);

    // Collapse each fiber to its mean: both branches average onto the axis.
    let projected = barycenter_map(plan)?;
    let rep = energy_report(
        &projected,
        &demo.scheme,
        &BoundField::unbounded(),
        &BoundField::unbounded(),
    )?;
    println!("\nbarycenter projection: energy = {:.9} (an exact isometry)", rep.total_r);
    for (p, img) in projected.domain().points().iter().zip(projected.images()) {
        assert!((img.coords[0] - p.coords[0]).abs() <= 1e-12);
        assert!(img.coords[1].abs() <= 1e-12);
    }
    assert!((rep.total_r - 2.0).abs() <= 1e-12);
    println!("every barycenter sits back on the segment axis: the projection");
    println!("erases the fan-out that the fiber metric charges for.");
    Ok(())
}
