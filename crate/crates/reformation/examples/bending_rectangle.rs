//! A plan that "bends" a rectangle into two scaled copies, with a fiber
//! geometry no single map can imitate.
//!
//! Every atom of the rectangle splits its mass between a large scaled copy
//! (fraction `1 − 1/n`) and a small far-away copy (fraction `1/n`). When
//! neighboring atoms move, their fibers move with slope contributions from
//! both branches; the fiber distance per unit domain distance works out to
//! `(1 − 1/n)² + (1/n)²` — strictly below 1, getting closer to 1 as `n`
//! grows, yet never rigid for finite `n`.
//!
//! Run with: `cargo run --example bending_rectangle`

use reformation::{bending, plan_energy, w1_exact};

fn main() -> reformation::Result<()> {
    println!("per-atom fiber contraction of the two-branch rectangle plan:\n");
    println!("{:>4}  {:>12}  {:>12}  {:>12}", "n", "expected e", "computed e", "total energy");
    for n in [2usize, 5, 10, 40] {
        let demo = bending(n, 9, 5)?;
        let en = plan_energy(&demo.plan, &demo.scheme, 1.0)?;
        let e_max = en.e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e_min = en.e.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((e_max - demo.expected_e).abs() <= 1e-9, "n={n}: e_max={e_max}");
        assert!((e_min - demo.expected_e).abs() <= 1e-9, "n={n}: e_min={e_min}");
        println!("{:>4}  {:>12.6}  {:>12.6}  {:>12.6}", n, demo.expected_e, e_max, en.total);
    }

    // Why the value (1 − 1/n)² + (1/n)²: between two domain atoms at
    // distance d, the big branch moves the heavy part of the fiber by
    // (1 − 1/n)·d and the small branch moves the light part by d/n. The
    // optimal way to rearrange one fiber into the other keeps each branch to
    // itself, shipping mass (1 − 1/n) a distance (1 − 1/n)·d plus mass 1/n a
    // distance d/n.
    let n = 5usize;
    let demo = bending(n, 9, 5)?;
    let pts = demo.plan.domain().points();
    let (i, j) = (0usize, 1usize);
    let d = pts[i].distance(&pts[j]);
    let w = w1_exact(&demo.plan.fibers()[i], &demo.plan.fibers()[j])?.cost;
    let big = 1.0 - 1.0 / n as f64;
    let small = 1.0 / n as f64;
    println!("\nn = {n}: two neighboring atoms at domain distance {d:.4}");
    println!("  fiber Wasserstein distance           = {w:.6}");
    println!("  big-branch share  (1-1/n)·(1-1/n)·d  = {:.6}", big * big * d);
    println!("  small-branch share  (1/n)·(1/n)·d    = {:.6}", small * small * d);
    println!("  sum / d = {:.6} = expected e", w / d);

    // The contraction estimator sees the inverse ratio, so c = 1/e per atom
    // and the total energy is e + 1/e, which is minimized (value 2) only at
    // e = 1: bending has a real cost, and more violent bending (smaller n)
    // costs more.
    let en = plan_energy(&demo.plan, &demo.scheme, 1.0)?;
    println!("\n  per-atom energy e + 1/e = {:.6}", en.total);
    assert!((en.total - (demo.expected_e + 1.0 / demo.expected_e)).abs() <= 1e-9);
    Ok(())
}
