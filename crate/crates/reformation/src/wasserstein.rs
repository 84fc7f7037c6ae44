//! Exact and approximate 1-Wasserstein distance between discrete measures.
//!
//! The exact path solves the transportation linear program on the complete
//! bipartite cost graph with a successive-shortest-path min-cost-flow solver
//! (Dijkstra over reduced costs with node potentials). The final node
//! potentials *are* the LP duals, so every solve returns, in one pass:
//!
//! * the optimal cost,
//! * an optimal [`CouplingPlan`] (one optimizer; ties are broken by scan
//!   order and are not part of the contract),
//! * a 1-Lipschitz [`DualPotential`] recovered through complementary
//!   slackness and normalized to vanish at the first atom of `μ`.
//!
//! Every solve is self-certified: primal feasibility, dual feasibility, and
//! the duality gap are checked before returning, so a solver defect surfaces
//! as a loud [`Error::Internal`] instead of a quietly wrong distance.
//!
//! The entropic path ([`w1_entropic`]) is a log-domain Sinkhorn iteration for
//! callers who need many cheap approximate distances; the exact solver
//! remains the authoritative path and is what every other module uses.

use crate::measure::{stable_sum, DiscreteMeasure, Point};
use crate::{Error, Result, LIPSCHITZ_TOL, MARGINAL_TOL, MAX_DENSE_SIDE};

/// A transport plan between two measures: nonnegative mass on each atom pair,
/// with row sums matching `μ` and column sums matching `ν` within
/// [`MARGINAL_TOL`](crate::MARGINAL_TOL).
#[derive(Debug, Clone)]
pub struct CouplingPlan {
    row_measure: DiscreteMeasure,
    col_measure: DiscreteMeasure,
    /// Row-major `|supp μ| × |supp ν|` mass matrix.
    mass: Vec<f64>,
}

impl CouplingPlan {
    /// Validates and wraps a mass matrix as a coupling of `mu` and `nu`.
    pub fn new(mu: DiscreteMeasure, nu: DiscreteMeasure, mass: Vec<f64>) -> Result<Self> {
        let (m, n) = (mu.len(), nu.len());
        if mass.len() != m * n {
            return Err(Error::LengthMismatch {
                what: "coupling mass matrix",
                left: mass.len(),
                right: m * n,
            });
        }
        let mut worst = 0.0f64;
        for &v in &mass {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "coupling mass" });
            }
            if v < 0.0 {
                worst = worst.max(-v);
            }
        }
        for i in 0..m {
            let row = stable_sum(mass[i * n..(i + 1) * n].iter().copied());
            worst = worst.max((row - mu.weights()[i]).abs());
        }
        for j in 0..n {
            let col = stable_sum((0..m).map(|i| mass[i * n + j]));
            worst = worst.max((col - nu.weights()[j]).abs());
        }
        if worst > MARGINAL_TOL {
            return Err(Error::InfeasibleMarginals {
                max_violation: worst,
                tolerance: MARGINAL_TOL,
            });
        }
        Ok(CouplingPlan { row_measure: mu, col_measure: nu, mass })
    }

    /// The independent coupling `μ ⊗ ν` (always feasible).
    pub fn product(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let (m, n) = (mu.len(), nu.len());
        let mut mass = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                mass[i * n + j] = mu.weights()[i] * nu.weights()[j];
            }
        }
        CouplingPlan { row_measure: mu.clone(), col_measure: nu.clone(), mass }
    }

    /// The deterministic coupling induced by the atom-wise map
    /// `x_i -> images[i]`: each atom ships its whole mass to its image.
    pub fn induced(mu: &DiscreteMeasure, images: &[Point]) -> Result<Self> {
        let nu = mu.push_forward(images)?;
        let (m, n) = (mu.len(), nu.len());
        let mut mass = vec![0.0; m * n];
        for (i, img) in images.iter().enumerate() {
            // Locate the column atom this image merged into.
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (j, q) in nu.points().iter().enumerate() {
                let d = img.distance(q);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            mass[i * n + best] += mu.weights()[i];
        }
        CouplingPlan::new(mu.clone(), nu, mass)
    }

    /// Source measure `μ`.
    pub fn row_measure(&self) -> &DiscreteMeasure {
        &self.row_measure
    }

    /// Target measure `ν`.
    pub fn col_measure(&self) -> &DiscreteMeasure {
        &self.col_measure
    }

    /// Mass shipped from atom `i` of `μ` to atom `j` of `ν`.
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.col_measure.len() + j]
    }

    /// Row-major mass matrix.
    pub fn mass_matrix(&self) -> &[f64] {
        &self.mass
    }
}

/// A Kantorovich potential: one value per atom of each support, 1-Lipschitz
/// across the union of supports within
/// [`LIPSCHITZ_TOL`](crate::LIPSCHITZ_TOL).
#[derive(Debug, Clone)]
pub struct DualPotential {
    /// φ evaluated on the atoms of `μ`.
    pub mu_values: Vec<f64>,
    /// φ evaluated on the atoms of `ν`.
    pub nu_values: Vec<f64>,
}

impl DualPotential {
    /// Checks the 1-Lipschitz constraint on the union of both supports.
    pub fn validate(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
        if self.mu_values.len() != mu.len() {
            return Err(Error::LengthMismatch {
                what: "potential values vs mu atoms",
                left: self.mu_values.len(),
                right: mu.len(),
            });
        }
        if self.nu_values.len() != nu.len() {
            return Err(Error::LengthMismatch {
                what: "potential values vs nu atoms",
                left: self.nu_values.len(),
                right: nu.len(),
            });
        }
        let points: Vec<&Point> = mu.points().iter().chain(nu.points().iter()).collect();
        let values: Vec<f64> = self
            .mu_values
            .iter()
            .chain(self.nu_values.iter())
            .copied()
            .collect();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let excess = (values[i] - values[j]).abs() - points[i].distance(points[j]);
                if excess > LIPSCHITZ_TOL {
                    return Err(Error::NotLipschitz { i, j, excess });
                }
            }
        }
        Ok(())
    }
}

/// Output of the exact solver: optimal cost, one optimal coupling, and a
/// certified dual potential.
#[derive(Debug, Clone)]
pub struct W1Solution {
    /// The 1-Wasserstein distance `W(μ, ν)`.
    pub cost: f64,
    /// An optimal coupling (ties broken by solver scan order).
    pub plan: CouplingPlan,
    /// Complementary-slackness potential, normalized so `φ(x_0) = 0`.
    pub potential: DualPotential,
}

/// Raw transportation solve over an arbitrary nonnegative cost matrix;
/// shared by `w1_exact` and the transport-class matching in `plans`.
#[derive(Debug)]
pub(crate) struct TransportSolution {
    pub cost: f64,
    /// Row-major `m × n` flow matrix.
    pub flow: Vec<f64>,
    /// LP duals for column atoms (`b_j`); the row duals are consumed by the
    /// in-solver duality certificate and not exported.
    pub dual_col: Vec<f64>,
}

/// Solves `min Σ f_ij c_ij` over nonnegative flows with row sums `supply`
/// and column sums `demand` (both summing to the same total within fp dust).
///
/// Successive shortest paths with node potentials: the flow stays optimal
/// for its shipped value throughout, Dijkstra runs on clamped reduced costs,
/// and the final potentials give dual-feasible `(a, b)` with complementary
/// slackness. The result is certified (marginals + duality gap) before it is
/// returned.
pub(crate) fn solve_transport(
    costs: &[f64],
    m: usize,
    n: usize,
    supply: &[f64],
    demand: &[f64],
) -> Result<TransportSolution> {
    assert_eq!(costs.len(), m * n);
    assert_eq!(supply.len(), m);
    assert_eq!(demand.len(), n);
    // Node layout: 0..m sources, m..m+n sinks.
    let v = m + n;
    let mut flow = vec![0.0f64; m * n];
    let mut pot = vec![0.0f64; v];
    let mut rem_s = supply.to_vec();
    let mut rem_d = demand.to_vec();

    let mut dist = vec![0.0f64; v];
    let mut done = vec![false; v];
    let mut parent = vec![usize::MAX; v];

    // Each augmentation zeroes a supply, a demand, or a support arc; the cap
    // is a loud guard against a cycle that should be impossible.
    let max_augment = 16 * (m + n) + 4 * m * n + 64;
    let mut augments = 0usize;

    const DUST: f64 = 1e-13;
    loop {
        let total_s = stable_sum(rem_s.iter().copied());
        let total_d = stable_sum(rem_d.iter().copied());
        if total_s <= DUST || total_d <= DUST {
            break;
        }
        augments += 1;
        if augments > max_augment {
            return Err(Error::Internal(format!(
                "transport solver exceeded {max_augment} augmentations"
            )));
        }

        // Multi-source Dijkstra over reduced costs.
        for i in 0..v {
            dist[i] = f64::INFINITY;
            done[i] = false;
            parent[i] = usize::MAX;
        }
        for i in 0..m {
            if rem_s[i] > 0.0 {
                dist[i] = 0.0;
            }
        }
        let mut target = usize::MAX;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for x in 0..v {
                if !done[x] && dist[x] < best {
                    best = dist[x];
                    u = x;
                }
            }
            if u == usize::MAX {
                break; // nothing reachable
            }
            done[u] = true;
            if u >= m && rem_d[u - m] > 0.0 {
                target = u;
                break;
            }
            if u < m {
                // Forward arcs source u -> every sink.
                let row = &costs[u * n..(u + 1) * n];
                for (j, &c) in row.iter().enumerate() {
                    let snk = m + j;
                    if done[snk] {
                        continue;
                    }
                    let rc = (c + pot[u] - pot[snk]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[snk] {
                        dist[snk] = nd;
                        parent[snk] = u;
                    }
                }
            } else {
                // Backward arcs sink u -> sources with positive flow.
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[i * n + j] <= 0.0 {
                        continue;
                    }
                    let rc = (-costs[i * n + j] + pot[u] - pot[i]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[i] {
                        dist[i] = nd;
                        parent[i] = u;
                    }
                }
            }
        }
        if target == usize::MAX {
            // Remaining supply cannot reach remaining demand: only possible
            // when one side is down to summation dust; the loop guard above
            // has already bounded it.
            break;
        }

        let d_t = dist[target];
        for x in 0..v {
            pot[x] += dist[x].min(d_t);
        }

        // Trace back to a source, collecting the bottleneck.
        let mut delta = rem_d[target - m];
        let mut node = target;
        while parent[node] != usize::MAX {
            let p = parent[node];
            if node >= m {
                // forward arc p(source) -> node(sink): unbounded capacity
            } else {
                // backward arc p(sink) -> node(source): capacity = flow
                delta = delta.min(flow[node * n + (p - m)]);
            }
            node = p;
        }
        delta = delta.min(rem_s[node]);
        let source = node;

        let mut node = target;
        while parent[node] != usize::MAX {
            let p = parent[node];
            if node >= m {
                flow[p * n + (node - m)] += delta;
            } else {
                flow[node * n + (p - m)] -= delta;
            }
            node = p;
        }
        rem_s[source] -= delta;
        rem_d[target - m] -= delta;
    }

    // Certify: marginals within dust of the requested ones.
    let mut worst = 0.0f64;
    for i in 0..m {
        let row = stable_sum(flow[i * n..(i + 1) * n].iter().copied());
        worst = worst.max((row - supply[i]).abs());
    }
    for j in 0..n {
        let col = stable_sum((0..m).map(|i| flow[i * n + j]));
        worst = worst.max((col - demand[j]).abs());
    }
    if worst > 1e-11 {
        return Err(Error::Internal(format!(
            "transport marginals off by {worst:.3e} after solve"
        )));
    }

    let cost = stable_sum(flow.iter().zip(costs).map(|(&f, &c)| f * c));
    let dual_row: Vec<f64> = (0..m).map(|i| -pot[i]).collect();
    let dual_col: Vec<f64> = (0..n).map(|j| pot[m + j]).collect();

    // Duality gap certificate: feasible (a, b) must price the flow exactly.
    let dual_value = stable_sum(
        dual_row
            .iter()
            .zip(supply)
            .map(|(&a, &s)| a * s)
            .chain(dual_col.iter().zip(demand).map(|(&b, &d)| b * d)),
    );
    let scale = cost.abs().max(1.0);
    if (cost - dual_value).abs() > 1e-8 * scale {
        return Err(Error::Internal(format!(
            "duality gap {:.3e} after solve",
            (cost - dual_value).abs()
        )));
    }
    Ok(TransportSolution { cost, flow, dual_col })
}

/// Dense Euclidean cost matrix between two supports.
pub(crate) fn distance_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<f64> {
    let (m, n) = (mu.len(), nu.len());
    let mut c = vec![0.0; m * n];
    for (i, p) in mu.points().iter().enumerate() {
        for (j, q) in nu.points().iter().enumerate() {
            c[i * n + j] = p.distance(q);
        }
    }
    c
}

/// The exact 1-Wasserstein distance `W(μ, ν)`, with an optimal coupling and a
/// certified dual potential.
///
/// Errors on dimension mismatch and on instances beyond
/// [`MAX_DENSE_SIDE`](crate::MAX_DENSE_SIDE) atoms per side (the solver is
/// dense by design; it refuses rather than degrade).
pub fn w1_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<W1Solution> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    let (m, n) = (mu.len(), nu.len());
    if m > MAX_DENSE_SIDE || n > MAX_DENSE_SIDE {
        return Err(Error::SizeLimit { rows: m, cols: n, limit: MAX_DENSE_SIDE });
    }
    let costs = distance_matrix(mu, nu);
    let sol = solve_transport(&costs, m, n, mu.weights(), nu.weights())?;

    // Metric infimal convolution of the column duals: a single function
    // phi(p) = min_j (|p - y_j| - b_j), 1-Lipschitz on all of R^N, whose
    // restriction to the supports attains the optimal dual value (it
    // dominates (a, b) by LP feasibility and is dominated by W by duality).
    let phi = |p: &Point| -> f64 {
        nu.points()
            .iter()
            .zip(&sol.dual_col)
            .map(|(q, &b)| p.distance(q) - b)
            .fold(f64::INFINITY, f64::min)
    };
    let mut mu_values: Vec<f64> = mu.points().iter().map(phi).collect();
    let mut nu_values: Vec<f64> = nu.points().iter().map(phi).collect();
    let shift = mu_values[0];
    for v in mu_values.iter_mut().chain(nu_values.iter_mut()) {
        *v -= shift;
    }

    let plan = CouplingPlan::new(mu.clone(), nu.clone(), sol.flow)?;
    Ok(W1Solution {
        cost: sol.cost,
        plan,
        potential: DualPotential { mu_values, nu_values },
    })
}

/// Transport cost `Σ mass_ij |x_i − y_j|` of a feasible plan.
pub fn plan_cost(plan: &CouplingPlan) -> f64 {
    let n = plan.col_measure.len();
    stable_sum(plan.mass.iter().enumerate().map(|(k, &f)| {
        let (i, j) = (k / n, k % n);
        f * plan.row_measure.points()[i].distance(&plan.col_measure.points()[j])
    }))
}

/// Dual objective `Σ φ(x_i) μ_i − Σ φ(y_j) ν_j` of a 1-Lipschitz potential.
///
/// Validates the Lipschitz constraint on the union of supports first; by
/// Kantorovich duality the result never exceeds the exact cost (beyond fp
/// tolerance).
pub fn w1_dual_value(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    phi: &DualPotential,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    phi.validate(mu, nu)?;
    let plus = stable_sum(phi.mu_values.iter().zip(mu.weights()).map(|(&p, &w)| p * w));
    let minus = stable_sum(phi.nu_values.iter().zip(nu.weights()).map(|(&p, &w)| p * w));
    Ok(plus - minus)
}

/// Result of the entropic approximation.
#[derive(Debug, Clone)]
pub struct EntropicResult {
    /// Approximate transport cost `Σ P_ij c_ij` of the entropic plan.
    pub cost: f64,
    /// Sinkhorn iterations performed.
    pub iterations: usize,
    /// Largest marginal violation at termination.
    pub marginal_error: f64,
    /// Whether the marginal tolerance (≤ 1e-9) was met within `max_iters`.
    pub converged: bool,
}

/// Entropic (Sinkhorn) approximation of `W(μ, ν)` with regularization
/// `epsilon`, iterated in the log domain to avoid underflow.
///
/// Converges when the largest marginal violation drops to `1e-9`; otherwise
/// stops at `max_iters` and reports the achieved error in the result. The
/// approximation tightens as `epsilon → 0`; [`w1_exact`] stays the
/// authoritative path.
pub fn w1_entropic(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    epsilon: f64,
    max_iters: usize,
) -> Result<EntropicResult> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let (m, n) = (mu.len(), nu.len());
    if m > MAX_DENSE_SIDE || n > MAX_DENSE_SIDE {
        return Err(Error::SizeLimit { rows: m, cols: n, limit: MAX_DENSE_SIDE });
    }
    const TARGET: f64 = 1e-9;
    let costs = distance_matrix(mu, nu);
    let log_mu: Vec<f64> = mu.weights().iter().map(|w| w.ln()).collect();
    let log_nu: Vec<f64> = nu.weights().iter().map(|w| w.ln()).collect();
    // Scaled potentials: log P_ij = f_i + g_j - c_ij / epsilon.
    let mut f = vec![0.0f64; m];
    let mut g = vec![0.0f64; n];

    fn logsumexp(terms: impl Iterator<Item = f64>) -> f64 {
        let vals: Vec<f64> = terms.collect();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        hi + vals.iter().map(|v| (v - hi).exp()).sum::<f64>().ln()
    }

    let mut iterations = 0;
    let mut marginal_error = f64::INFINITY;
    while iterations < max_iters {
        iterations += 1;
        for i in 0..m {
            let row = &costs[i * n..(i + 1) * n];
            let lse = logsumexp((0..n).map(|j| g[j] - row[j] / epsilon));
            f[i] = log_mu[i] - lse;
        }
        for j in 0..n {
            let lse = logsumexp((0..m).map(|i| f[i] - costs[i * n + j] / epsilon));
            g[j] = log_nu[j] - lse;
        }
        // After the g-update, column sums are exact; rows carry the error.
        marginal_error = (0..m)
            .map(|i| {
                let row = &costs[i * n..(i + 1) * n];
                let sum: f64 = (0..n).map(|j| (f[i] + g[j] - row[j] / epsilon).exp()).sum();
                (sum - mu.weights()[i]).abs()
            })
            .fold(0.0f64, f64::max);
        if marginal_error <= TARGET {
            break;
        }
    }
    let cost = stable_sum((0..m * n).map(|k| {
        let (i, j) = (k / n, k % n);
        (f[i] + g[j] - costs[k] / epsilon).exp() * costs[k]
    }));
    Ok(EntropicResult {
        cost,
        iterations,
        marginal_error,
        converged: marginal_error <= TARGET,
    })
}
