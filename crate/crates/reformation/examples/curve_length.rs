//! Lengths and speeds of curves of measures, measured with the exact
//! 1-Wasserstein distance between consecutive snapshots.
//!
//! Run with: `cargo run --example curve_length`

use reformation::{curve_length, mixture, w1_exact, DiscreteMeasure};

fn main() -> reformation::Result<()> {
    // A Dirac gliding right at unit speed, sampled at 6 instants.
    let times: Vec<f64> = (0..6).map(|k| 0.2 * k as f64).collect();
    let gliding: Vec<DiscreteMeasure> = times
        .iter()
        .map(|&t| DiscreteMeasure::uniform_from_coords(vec![vec![t, 0.0]]))
        .collect::<reformation::Result<_>>()?;
    let res = curve_length(&gliding, &times)?;
    println!("gliding dirac:   length = {:.9}", res.length);
    println!("  speeds per segment: {:?}", res.speeds);
    assert!((res.length - 1.0).abs() <= 1e-12);
    for s in &res.speeds {
        assert!((s - 1.0).abs() <= 1e-9);
    }

    // A mixture sliding from measure a to measure b: rho_t = (1-t) a + t b.
    // Mixtures keep both supports and only shift weights, so mass teleports
    // across the gap between the supports gradually. The resulting curve is
    // a Wasserstein geodesic: its length equals W1(a, b) and the speed is
    // constant.
    let a = DiscreteMeasure::uniform_from_coords(vec![vec![0.0, 0.0], vec![1.0, 0.0]])?;
    let b = DiscreteMeasure::uniform_from_coords(vec![vec![0.0, 3.0], vec![1.0, 3.0]])?;
    let steps = 10usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let sliding: Vec<DiscreteMeasure> = times
        .iter()
        .map(|&t| mixture(&[(1.0 - t, a.clone()), (t, b.clone())]))
        .collect::<reformation::Result<_>>()?;
    let res = curve_length(&sliding, &times)?;
    let direct = w1_exact(&a, &b)?.cost;
    println!("\nmixture path:    length = {:.9}", res.length);
    println!("direct distance  W1(a,b) = {:.9}", direct);
    println!("  (equal: the linear mixture is a geodesic for W1)");
    assert!((res.length - direct).abs() <= 1e-9);
    let top = res.speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bot = res.speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("  speed range: [{bot:.9}, {top:.9}]");
    assert!((top - bot).abs() <= 1e-9);

    // A detour is never shorter than the straight run.
    let via = DiscreteMeasure::uniform_from_coords(vec![vec![5.0, 1.5], vec![6.0, 1.5]])?;
    let detour = curve_length(&[a.clone(), via, b.clone()], &[0.0, 0.5, 1.0])?;
    println!("\ndetour length = {:.6} >= direct {:.6}", detour.length, direct);
    assert!(detour.length >= direct - 1e-12);
    Ok(())
}
