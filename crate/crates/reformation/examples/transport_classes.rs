//! Plans that differ only by *which atom holds which fiber* form a transport
//! class; this example tests membership and searches a class for its
//! lowest-energy member.
//!
//! Over a uniform domain, permuting the fiber attachment changes nothing
//! about where the mass ends up — the pushed-forward fiber distribution is
//! the same weighted multiset — but it changes the plan's energy, because
//! the energy compares neighboring atoms' fibers. Class equivalence is
//! decided by optimal transportation between the two fiber multisets with
//! ground cost W(fiber, fiber); reattachments give matching cost exactly 0.
//!
//! Run with: `cargo run --example transport_classes`

use reformation::{
    class_equivalent, minimize_in_class, plan_energy, plan_from_map, BoundField,
    DisintegrationPlan, DiscreteMeasure, NeighborhoodScheme, Point, SampledMap,
};

fn main() -> reformation::Result<()> {
    // A clean reference plan: 6 atoms on a line, each mapped one step right
    // (a translation, fiber distances = domain distances, energy 2).
    let mu = DiscreteMeasure::uniform_from_coords((0..6).map(|i| vec![i as f64]).collect())?;
    let translate = SampledMap::from_fn(mu.clone(), |p: &Point| Point::new(vec![p.coords[0] + 1.0]))?;
    let reference = plan_from_map(&translate)?;

    // Scramble the attachment: atom i now holds the fiber of atom sigma(i).
    let sigma = [3usize, 0, 4, 2, 5, 1];
    let scrambled = DisintegrationPlan::new(
        mu.clone(),
        sigma.iter().map(|&j| reference.fibers()[j].clone()).collect(),
    )?;

    let scheme = NeighborhoodScheme::knn(2);
    let e_ref = plan_energy(&reference, &scheme, 2.0)?;
    let e_scr = plan_energy(&scrambled, &scheme, 2.0)?;
    println!("reference energy (p = 2): {:.6}", e_ref.total);
    println!("scrambled energy (p = 2): {:.6}", e_scr.total);

    // Same class? The matching cost between the fiber multisets is 0.
    let witness = class_equivalent(&reference, &scrambled, 1e-9)?;
    println!(
        "\nclass test: matching cost = {} -> equivalent: {}",
        witness.matching_cost, witness.equivalent
    );
    assert!(witness.equivalent);
    assert_eq!(witness.matching_cost, 0.0);

    // A plan with genuinely different fibers is NOT in the class.
    let doubled = SampledMap::from_fn(mu.clone(), |p: &Point| Point::new(vec![2.0 * p.coords[0]]))?;
    let other = plan_from_map(&doubled)?;
    let far = class_equivalent(&reference, &other, 1e-9)?;
    println!("vs a dilation plan: matching cost = {:.6} -> equivalent: {}", far.matching_cost, far.equivalent);
    assert!(!far.equivalent);

    // Search the scrambled plan's class for its best member: the search
    // permutes attachments only, so it can recover the translation order.
    let found = minimize_in_class(
        &scrambled,
        &scheme,
        &BoundField::unbounded(),
        &BoundField::unbounded(),
        2.0,
        128,
        7,
    )?;
    println!("\nin-class search: energy {:.6} -> {:.6}", e_scr.total, found.energy);
    println!("  reattachment: {:?}", found.permutation);
    let witness = class_equivalent(&scrambled, &found.best, 1e-9)?;
    assert!(witness.equivalent, "search must stay inside the class");
    assert!((found.energy - e_ref.total).abs() <= 1e-9, "must reach the floor");
    println!("  reached the reference energy without leaving the class");
    println!("  (the minimizer need not be the original order: any rigid");
    println!("   reattachment, such as the mirrored one, is equally optimal)");
    Ok(())
}
