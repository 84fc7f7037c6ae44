//! # reformation
//!
//! A numerical toolkit that quantifies how far two shapes are from being
//! isometric.
//!
//! Shapes are discrete probability measures on `R^N` (weighted point clouds).
//! The central quantity is the *reformation energy* of a mass-preserving
//! rearrangement: for a map `u` pushing one cloud onto the other, each atom
//! pays its worst local stretch `e` plus its worst local compression `c`, and
//! the energy is the mass-weighted total of `e + c`. Because `c·e ≥ 1`
//! pointwise, the energy is never below `2`, and it equals `2` exactly when
//! the rearrangement is a rigid motion. The gap above `2` is therefore a
//! scalar answer to "how non-isometric are these two shapes?".
//!
//! The same machinery generalizes from maps to *disintegration plans*: each
//! domain atom is sent to a whole fiber measure, distances between fibers are
//! measured with the exact 1-Wasserstein distance, and the identical
//! stretch/compression estimators apply verbatim. Plans reach targets no map
//! can reach (split, bent, or disconnected targets) while still certifying
//! isometry through the energy floor.
//!
//! ## Quick start
//!
//! ```
//! use reformation::{DiscreteMeasure, NeighborhoodScheme, detect_isometry, Verdict};
//!
//! // A unit square and a rigidly moved copy of it.
//! let corners = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
//! let mu = DiscreteMeasure::uniform_from_coords(corners.clone()).unwrap();
//! let rot = |p: &Vec<f64>| vec![-p[1] + 3.0, p[0] - 1.0]; // rotation + translation
//! let nu = DiscreteMeasure::uniform_from_coords(corners.iter().map(rot).collect()).unwrap();
//!
//! let result = detect_isometry(&mu, &nu, 1e-6, &NeighborhoodScheme::knn(3), 32, 0).unwrap();
//! assert_eq!(result.verdict, Verdict::Isometric);
//! assert!((result.best_energy - 2.0).abs() < 1e-9);
//! ```
//!
//! ## Runnable examples
//!
//! The primary interface of this crate is its `examples/` directory; each file
//! is a self-contained walk through one capability:
//!
//! | Example | Run with | Shows |
//! |---|---|---|
//! | `w1_distance` | `cargo run --example w1_distance` | exact 1-Wasserstein cost, optimal coupling, dual certificate |
//! | `energy_of_a_map` | `cargo run --example energy_of_a_map` | pointwise stretch/compression of a sampled map |
//! | `isometry_detection` | `cargo run --example isometry_detection` | assignment search, rigid fit, verdicts |
//! | `bending_rectangle` | `cargo run --example bending_rectangle` | a two-branch plan that bends a rectangle |
//! | `split_segment` | `cargo run --example split_segment` | a segment split into two diagonal branches, and its barycenter collapse |
//! | `fragmentation` | `cargo run --example fragmentation` | energy 2 without isometry, and why covering-scale bounds catch it |
//! | `disconnected_target` | `cargo run --example disconnected_target` | an exactly isometric plan onto a disconnected target |
//! | `curve_length` | `cargo run --example curve_length` | lengths and speeds of curves of measures |
//! | `transport_classes` | `cargo run --example transport_classes` | fiber reattachment search within a transport class |
//!
//! A thin command-line binary `refo` wraps the same operations for file-based
//! use (`w1`, `minimize`, `demo`, `classify`); see the README for the file
//! formats and exit codes.
//!
//! ## Module map
//!
//! | Module | Contents |
//! |---|---|
//! | [`measure`] | `Point`, `DiscreteMeasure`, mixtures, push-forward, barycenter |
//! | [`wasserstein`] | exact W1 with coupling + dual potential, entropic approximation |
//! | [`lipschitz`] | neighborhood schemes, pointwise stretch/compression, energy reports |
//! | [`curves`] | lengths and speeds of discrete curves of measures |
//! | [`elastic`] | bijective assignment search, energy minimization, isometry detection |
//! | [`rigid`] | orthogonal Procrustes fit (rigid motions, reflections allowed) |
//! | [`plans`] | disintegration plans, plan energies, barycenter maps, transport classes |
//! | [`demos`] | pinned constructions used by the demo subcommands and examples |
//! | [`io`] | shape/plan file formats (CSV and JSON) |
//! | [`report`] | machine-readable run reports |
//! | [`cli`] | argument parsing and subcommand drivers for the `refo` binary |
//!
//! ## What can go wrong
//!
//! - Measures must be same-dimension, finite, with positive total mass;
//!   duplicate atoms are merged at construction ([`MERGE_EPS`]).
//! - The exact solver works on a dense cost matrix and refuses instances
//!   beyond [`MAX_DENSE_SIDE`] atoms per side rather than degrade silently.
//! - Contraction estimators return `+∞` when a neighbor's image collapses
//!   below [`COLLAPSE_EPS`]; totals then propagate `+∞` honestly.
//! - Radius schemes that leave an atom neighborless are rejected
//!   ([`Error::IsolatedAtom`]); shrink the radius only as far as the sampling
//!   allows, or use `knn`.

// Validation guards are written `if !(x >= bound)` on purpose: unlike the
// inverted comparison, the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curves;
pub mod demos;
pub mod elastic;
pub mod io;
pub mod lipschitz;
pub mod measure;
pub mod plans;
pub mod report;
pub mod rigid;
mod search;
pub mod wasserstein;

pub use curves::{curve_length, CurveLength};
pub use demos::{
    bending, disconnected_target, fragmentation, split_segment, BendingDemo,
    DisconnectedTargetDemo, FragmentationDemo, SplitSegmentDemo,
};
pub use elastic::{
    assignment_report, detect_isometry, induced_map, minimize_energy, AssignmentState,
    ElasticResult, Verdict,
};
pub use io::{read_plan, read_shape, write_plan, write_shape};
pub use lipschitz::{
    energy_report, metric_map_contraction, metric_map_energies, metric_map_expansion,
    pointwise_contraction, pointwise_contraction_with, pointwise_expansion,
    pointwise_expansion_with, Adjacency, BoundField, EnergyReport, NeighborhoodScheme, SampledMap,
};
pub use measure::{barycenter, mixture, push_forward, DiscreteMeasure, Point};
pub use plans::{
    barycenter_map, class_equivalent, disintegrate_coupling, minimize_in_class, mixture_plan,
    plan_energy, plan_from_map, second_marginal, ClassSearch, DisintegrationPlan, PlanEnergy,
    TransportClassWitness,
};
pub use report::{sig9, sig9_slice, RunReport};
pub use rigid::RigidMotion;
pub use wasserstein::{
    plan_cost, w1_dual_value, w1_entropic, w1_exact, CouplingPlan, DualPotential, EntropicResult,
    W1Solution,
};

use thiserror::Error as ThisError;

/// Tolerance for the sum-to-one invariant of measure weights.
pub const MASS_TOL: f64 = 1e-12;
/// Atoms closer than this Euclidean distance are merged at construction.
pub const MERGE_EPS: f64 = 1e-12;
/// Image (or fiber) distances at or below this threshold count as collapsed,
/// making the contraction estimator `+∞`.
pub const COLLAPSE_EPS: f64 = 1e-12;
/// Tolerance for coupling-plan marginal feasibility.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Tolerance for the 1-Lipschitz constraint on dual potentials.
pub const LIPSCHITZ_TOL: f64 = 1e-9;
/// Tolerance for the strong-duality gap of recovered potentials.
pub const DUALITY_GAP_TOL: f64 = 1e-7;
/// Largest side of the dense transport cost matrix the exact solver accepts.
pub const MAX_DENSE_SIDE: usize = 5000;
/// Weight multiplying constraint violations in penalized assignment search.
pub const PENALTY_WEIGHT: f64 = 1e3;
/// Default relative tolerance for isometry verdicts.
pub const DEFAULT_ISO_TOL: f64 = 1e-6;

/// Errors reported by every fallible operation in this crate.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("empty support: a measure needs at least one atom with positive mass")]
    EmptySupport,

    #[error("all weights are zero; total mass must be positive")]
    ZeroMass,

    #[error("negative weight at atom {index}")]
    NegativeWeight { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("length mismatch in {what}: {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("dense solver limit exceeded: {rows} x {cols} atoms (limit {limit} per side)")]
    SizeLimit {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("atom {index} has no neighbor under the scheme; enlarge the radius or use knn")]
    IsolatedAtom { index: usize },

    #[error("invalid neighborhood scheme: {0}")]
    InvalidScheme(String),

    #[error(
        "coupling marginals infeasible: max violation {max_violation:.3e} exceeds {tolerance:.1e}"
    )]
    InfeasibleMarginals { max_violation: f64, tolerance: f64 },

    #[error(
        "potential violates the 1-Lipschitz constraint between atoms {i} and {j} by {excess:.3e}"
    )]
    NotLipschitz { i: usize, j: usize, excess: f64 },

    #[error(
        "map problem needs equal-cardinality uniform shapes ({left} vs {right} atoms); \
         use a disintegration plan instead"
    )]
    NotBijective { left: usize, right: usize },

    #[error("weights are not uniform (atom {index} deviates); use a disintegration plan instead")]
    NotUniform { index: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("plans live over different domains: {0}")]
    DomainMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal solver failure: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
