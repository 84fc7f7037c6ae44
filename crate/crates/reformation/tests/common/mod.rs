//! Shared generators and independent oracles for the end-to-end suite.
//!
//! The transport oracle here deliberately shares no code with the library's
//! solver: it enumerates every spanning-tree vertex of the transportation
//! polytope and takes the cheapest feasible one, which is exact for the tiny
//! instances the suite uses.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reformation::DiscreteMeasure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform cloud of `n` distinct random atoms in `[-spread, spread]^dim`.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, spread: f64) -> DiscreteMeasure {
    loop {
        let coords: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-spread..spread)).collect())
            .collect();
        let m = DiscreteMeasure::uniform_from_coords(coords).unwrap();
        if m.len() == n {
            return m; // no accidental merges
        }
    }
}

/// Random cloud with random (non-uniform) weights.
pub fn random_weighted_cloud(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
    spread: f64,
) -> DiscreteMeasure {
    loop {
        let coords: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-spread..spread)).collect())
            .collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let m = DiscreteMeasure::from_coords(coords, Some(weights)).unwrap();
        if m.len() == n {
            return m;
        }
    }
}

/// Exact transportation optimum for tiny instances, by brute force.
///
/// Every vertex of the transportation polytope is the unique flow of some
/// spanning tree of the complete bipartite supply/demand graph; the optimum
/// is attained at a vertex. So: enumerate all arc subsets of size
/// `m + n - 1`, keep the spanning trees, solve each tree's flow by leaf
/// elimination, discard negative-flow (infeasible) trees, and return the
/// minimum cost seen.
pub fn oracle_w1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let m = mu.len();
    let n = nu.len();
    let arcs = m * n;
    assert!(arcs <= 20, "vertex enumeration is exponential; keep sides tiny");
    let nodes = m + n;
    let mut cost = vec![0.0f64; arcs];
    for i in 0..m {
        for j in 0..n {
            cost[i * n + j] = mu.points()[i].distance(&nu.points()[j]);
        }
    }

    let mut best = f64::INFINITY;
    'masks: for mask in 0u32..(1u32 << arcs) {
        if mask.count_ones() as usize != nodes - 1 {
            continue;
        }
        // Union-find cycle/spanning check.
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in 0..arcs {
            if mask & (1 << a) == 0 {
                continue;
            }
            let (i, j) = (a / n, m + a % n);
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri == rj {
                continue 'masks; // cycle: not a tree
            }
            parent[ri] = rj;
        }
        // nodes-1 edges and no cycle => spanning tree.

        // Leaf elimination: each leaf's single arc must carry exactly the
        // leaf's remaining mass.
        let mut deg = vec![0usize; nodes];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for a in 0..arcs {
            if mask & (1 << a) != 0 {
                let (i, j) = (a / n, m + a % n);
                deg[i] += 1;
                deg[j] += 1;
                incident[i].push(a);
                incident[j].push(a);
            }
        }
        let mut rem: Vec<f64> = mu
            .weights()
            .iter()
            .chain(nu.weights().iter())
            .copied()
            .collect();
        let mut used = vec![false; arcs];
        let mut stack: Vec<usize> = (0..nodes).filter(|&v| deg[v] == 1).collect();
        let mut total = 0.0f64;
        let mut processed = 0usize;
        while let Some(v) = stack.pop() {
            if deg[v] == 0 {
                continue;
            }
            let &a = incident[v]
                .iter()
                .find(|&&a| !used[a])
                .expect("leaf keeps one unused arc");
            let flow = rem[v];
            if flow < -1e-12 {
                continue 'masks; // vertex outside the polytope
            }
            used[a] = true;
            processed += 1;
            total += flow.max(0.0) * cost[a];
            let (i, j) = (a / n, m + a % n);
            let other = if v == i { j } else { i };
            rem[v] = 0.0;
            rem[other] -= flow;
            deg[v] -= 1;
            deg[other] -= 1;
            if deg[other] == 1 {
                stack.push(other);
            }
        }
        debug_assert_eq!(processed, nodes - 1);
        if total < best {
            best = total;
        }
    }
    best
}

/// Random orthogonal matrix (rotations and reflections with equal say).
pub fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0f64..1.0));
    let mut q = a.qr().q();
    if rng.gen_bool(0.5) {
        for r in 0..dim {
            q[(r, 0)] = -q[(r, 0)];
        }
    }
    q
}

/// Applies `p -> R p + t` to every atom and returns the moved cloud with the
/// atom order shuffled (to hide the correspondence).
pub fn moved_copy(
    rng: &mut ChaCha8Rng,
    m: &DiscreteMeasure,
    rot: &DMatrix<f64>,
    t: &[f64],
) -> DiscreteMeasure {
    let dim = m.dim();
    let mut coords: Vec<Vec<f64>> = m
        .points()
        .iter()
        .map(|p| {
            (0..dim)
                .map(|r| {
                    let mut v = t[r];
                    for c in 0..dim {
                        v += rot[(r, c)] * p.coords[c];
                    }
                    v
                })
                .collect()
        })
        .collect();
    shuffle(rng, &mut coords);
    DiscreteMeasure::uniform_from_coords(coords).unwrap()
}

pub fn shuffle<T>(rng: &mut ChaCha8Rng, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
}

/// Visits every permutation of `0..n` (Heap-style recursion).
pub fn for_each_permutation(n: usize, visit: &mut impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    fn walk(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            visit(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            walk(p, k + 1, visit);
            p.swap(k, i);
        }
    }
    walk(&mut p, 0, visit);
}

