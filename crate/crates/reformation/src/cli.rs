//! Command-line surface: `refo w1 | minimize | demo | classify`.
//!
//! Every command reads shapes from CSV/JSON files, runs the corresponding
//! library routine, and prints one JSON run report to stdout. Exit codes
//! tell scripts what happened:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success (for `classify`: isometric) |
//! | 1    | `classify`/`minimize` verdict non-isometric |
//! | 2    | unreadable input: parse error, bad flag, invalid scheme |
//! | 3    | dimension mismatch between shapes |
//! | 4    | instance exceeds the dense-solver size limit |
//! | 5    | no bound-satisfying assignment found within budget |
//! | 70   | internal invariant failure (certification failed) |

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::demos;
use crate::elastic::{detect_isometry, minimize_energy, Verdict};
use crate::io;
use crate::lipschitz::{BoundField, NeighborhoodScheme};
use crate::measure::DiscreteMeasure;
use crate::plans::{disintegrate_coupling, minimize_in_class, plan_energy};
use crate::report::{sig9, sig9_slice, RunReport};
use crate::rigid::RigidMotion;
use crate::wasserstein::{w1_dual_value, w1_entropic, w1_exact};
use crate::{Error, Result};

/// Shape comparison by reformation energies.
#[derive(Debug, Parser)]
#[command(name = "refo", version, about)]
struct Cli {
    /// Cap the worker-thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact 1-Wasserstein distance between two shapes.
    W1 {
        /// First shape (CSV or JSON).
        shape_a: PathBuf,
        /// Second shape (CSV or JSON).
        shape_b: PathBuf,
        /// Write the optimal coupling, disintegrated into a plan, to this
        /// JSON file.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Also report the dual potential, its value and the duality gap.
        #[arg(long)]
        dual: bool,
        /// Also run the entropy-regularized solver at this regularization
        /// strength.
        #[arg(long, value_name = "EPSILON")]
        entropic: Option<f64>,
        /// Iteration cap for the entropy-regularized solver.
        #[arg(long, default_value_t = 10_000)]
        entropic_iters: usize,
    },
    /// Minimize reformation energy between two shapes.
    ///
    /// Equal-size uniform shapes are matched by a bijection; anything else
    /// is routed to the plan search (a notice goes to stderr).
    Minimize {
        shape_a: PathBuf,
        shape_b: PathBuf,
        #[command(flatten)]
        knobs: SearchKnobs,
        /// Contraction bound per atom.
        #[arg(long = "H", default_value_t = f64::INFINITY)]
        h: f64,
        /// Expansion bound per atom.
        #[arg(long = "K", default_value_t = f64::INFINITY)]
        k: f64,
        /// Energy exponent for the plan-mode search (map mode always uses 1).
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Include per-atom energies and the assignment in the report.
        #[arg(long)]
        per_atom: bool,
    },
    /// Build a named construction and report expected vs computed values.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
    /// Decide whether two shapes are isometric.
    Classify {
        shape_a: PathBuf,
        shape_b: PathBuf,
        /// Isometry band: accept energies within `2 + tol` and residuals
        /// within `tol · diameter`.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        knobs: SearchKnobs,
    },
}

/// Flags shared by the searching commands.
#[derive(Debug, Args)]
struct SearchKnobs {
    /// Neighborhood scheme, `knn:<k>` or `radius:<h>`.
    #[arg(long, default_value = "knn:8")]
    scheme: NeighborhoodScheme,
    /// Descent-sweep budget across restarts.
    #[arg(long, default_value_t = 64)]
    iters: usize,
    /// Seed for all randomness of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum DemoCommand {
    /// Rectangle splitting into a large and a small scaled copy.
    Bending {
        /// Splitting parameter (≥ 2).
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Grid resolution along the long side.
        #[arg(long, default_value_t = 9)]
        nx: usize,
        /// Grid resolution along the short side.
        #[arg(long, default_value_t = 5)]
        ny: usize,
    },
    /// Segment fanning out into two diverging branches.
    SplitSegment {
        /// Atom count on the segment.
        #[arg(long, default_value_t = 9)]
        atoms: usize,
    },
    /// Tile-by-tile rearrangement of a clustered cloud into a square.
    Fragmentation,
    /// Mass splitting between two far-apart translated copies.
    DisconnectedTarget {
        /// Grid side of the source square.
        #[arg(long, default_value_t = 3)]
        side: usize,
        /// Mass fraction sent to the right copy.
        #[arg(long, default_value_t = 0.5)]
        weight_a: f64,
    },
}

/// Parses arguments, runs the command, prints its report, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // Only the first initialization takes effect; later calls (tests in
        // one process) keep the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let start = Instant::now();
    match execute(cli.command) {
        Ok((mut report, code)) => {
            report.wall_time_ms = start.elapsed().as_millis() as u64;
            println!("{}", report.to_json());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. } => 3,
        Error::SizeLimit { .. } => 4,
        Error::InfeasibleMarginals { .. } => 5,
        Error::Internal(_) => 70,
        _ => 2,
    }
}

fn execute(cmd: Command) -> Result<(RunReport, i32)> {
    match cmd {
        Command::W1 { shape_a, shape_b, plan, dual, entropic, entropic_iters } => {
            cmd_w1(shape_a, shape_b, plan, dual, entropic, entropic_iters)
        }
        Command::Minimize { shape_a, shape_b, knobs, h, k, p, per_atom } => {
            cmd_minimize(shape_a, shape_b, knobs, h, k, p, per_atom)
        }
        Command::Demo { which } => cmd_demo(which),
        Command::Classify { shape_a, shape_b, tol, knobs } => {
            cmd_classify(shape_a, shape_b, tol, knobs)
        }
    }
}

fn load_pair(a: &Path, b: &Path) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    Ok((io::read_shape(a)?, io::read_shape(b)?))
}

fn cmd_w1(
    shape_a: PathBuf,
    shape_b: PathBuf,
    plan_out: Option<PathBuf>,
    dual: bool,
    entropic: Option<f64>,
    entropic_iters: usize,
) -> Result<(RunReport, i32)> {
    let (mu, nu) = load_pair(&shape_a, &shape_b)?;
    let mut report = RunReport::new("w1", 0);
    report.input("shape_a", shape_a.display().to_string());
    report.input("shape_b", shape_b.display().to_string());
    let sol = w1_exact(&mu, &nu)?;
    report.output("cost", sig9(sol.cost));
    if dual {
        let dual_value = w1_dual_value(&mu, &nu, &sol.potential)?;
        report.output("dual_value", sig9(dual_value));
        report.output("duality_gap", sig9((sol.cost - dual_value).abs()));
        report.output("potential_mu", sig9_slice(&sol.potential.mu_values));
        report.output("potential_nu", sig9_slice(&sol.potential.nu_values));
    }
    if let Some(eps) = entropic {
        let ent = w1_entropic(&mu, &nu, eps, entropic_iters)?;
        report.input("entropic_epsilon", json!(eps));
        report.output("entropic_cost", sig9(ent.cost));
        report.output("entropic_iterations", json!(ent.iterations));
        report.output("entropic_marginal_error", sig9(ent.marginal_error));
        report.output("entropic_converged", json!(ent.converged));
    }
    if let Some(path) = plan_out {
        let plan = disintegrate_coupling(&sol.plan)?;
        io::write_plan(&plan, &path)?;
        report.output("plan_file", path.display().to_string());
    }
    Ok((report, 0))
}

fn uniform_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
    mu.len() == nu.len()
        && mu.is_uniform(crate::MASS_TOL * mu.len() as f64)
        && nu.is_uniform(crate::MASS_TOL * nu.len() as f64)
}

fn motion_json(m: &RigidMotion) -> serde_json::Value {
    let d = m.translation().len();
    let rows: Vec<serde_json::Value> = (0..d)
        .map(|a| sig9_slice(&(0..d).map(|b| m.rotation()[(a, b)]).collect::<Vec<_>>()))
        .collect();
    json!({
        "matrix": rows,
        "translation": sig9_slice(m.translation().as_slice()),
        "orientation": sig9(m.orientation()),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_minimize(
    shape_a: PathBuf,
    shape_b: PathBuf,
    knobs: SearchKnobs,
    h: f64,
    k: f64,
    p: f64,
    per_atom: bool,
) -> Result<(RunReport, i32)> {
    let (mu, nu) = load_pair(&shape_a, &shape_b)?;
    let mut report = RunReport::new("minimize", knobs.seed);
    report.input("shape_a", shape_a.display().to_string());
    report.input("shape_b", shape_b.display().to_string());
    report.input("H", sig9(h));
    report.input("K", sig9(k));
    report.input("iters", json!(knobs.iters));
    report.input("p", sig9(p));
    report.scheme = Some(knobs.scheme.to_string());
    let hb = BoundField::Constant(h);
    let kb = BoundField::Constant(k);

    if uniform_pair(&mu, &nu) {
        let res =
            minimize_energy(&mu, &nu, &knobs.scheme, &hb, &kb, knobs.iters, knobs.seed)?;
        report.output("mode", "map");
        report.output("best_energy", sig9(res.best_energy));
        report.output("verdict", res.verdict.to_string());
        report.output("feasible", json!(res.best_assignment.feasible));
        report.output("iterations", json!(res.iterations));
        if let Some(m) = &res.isometry_params {
            report.output("isometry", motion_json(m));
        }
        if per_atom {
            report.output("assignment", json!(res.best_assignment.permutation));
            report.output("per_atom_e", sig9_slice(&res.per_atom_e));
            report.output("per_atom_c", sig9_slice(&res.per_atom_c));
        }
        let code = if res.verdict == Verdict::Infeasible { 5 } else { 0 };
        return Ok((report, code));
    }

    // No bijection can push one marginal to the other; fall back to the
    // plan problem seeded by the optimal coupling.
    eprintln!(
        "notice: shapes are not equal-size uniform clouds; \
         searching reformation plans instead of maps"
    );
    report.output("mode", "plan");
    let coupling = w1_exact(&mu, &nu)?;
    let reference = disintegrate_coupling(&coupling.plan)?;
    let base = plan_energy(&reference, &knobs.scheme, p)?;
    report.output("coupling_plan_energy", sig9(base.total));
    if mu.is_uniform(crate::MASS_TOL * mu.len() as f64) && mu.len() >= 2 {
        let found = minimize_in_class(
            &reference,
            &knobs.scheme,
            &hb,
            &kb,
            p,
            knobs.iters,
            knobs.seed,
        )?;
        report.output("best_energy", sig9(found.energy));
        report.output("feasible", json!(found.feasible));
        report.output("iterations", json!(found.iterations));
        if per_atom {
            report.output("attachment", json!(found.permutation));
            report.output("per_atom_e", sig9_slice(&found.e));
            report.output("per_atom_c", sig9_slice(&found.c));
        }
        let code = if found.feasible { 0 } else { 5 };
        Ok((report, code))
    } else {
        // A non-uniform domain pins fibers to atoms; reattachment would
        // change the plan's class, so only the evaluation is reported.
        report.output("best_energy", sig9(base.total));
        report.output(
            "note",
            "domain is not uniform: reported the coupling plan's energy without an in-class search",
        );
        Ok((report, 0))
    }
}

fn cmd_classify(
    shape_a: PathBuf,
    shape_b: PathBuf,
    tol: f64,
    knobs: SearchKnobs,
) -> Result<(RunReport, i32)> {
    let (mu, nu) = load_pair(&shape_a, &shape_b)?;
    let mut report = RunReport::new("classify", knobs.seed);
    report.input("shape_a", shape_a.display().to_string());
    report.input("shape_b", shape_b.display().to_string());
    report.input("tol", sig9(tol));
    report.input("iters", json!(knobs.iters));
    report.scheme = Some(knobs.scheme.to_string());
    let res = detect_isometry(&mu, &nu, tol, &knobs.scheme, knobs.iters, knobs.seed)?;
    report.output("verdict", res.verdict.to_string());
    report.output("best_energy", sig9(res.best_energy));
    report.output("iterations", json!(res.iterations));
    if let Some(m) = &res.isometry_params {
        report.output("isometry", motion_json(m));
    }
    let code = match res.verdict {
        Verdict::Isometric => 0,
        Verdict::NonIsometric => 1,
        Verdict::Infeasible => 5,
    };
    Ok((report, code))
}

fn cmd_demo(which: DemoCommand) -> Result<(RunReport, i32)> {
    let mut report;
    match which {
        DemoCommand::Bending { n, nx, ny } => {
            let demo = demos::bending(n, nx, ny)?;
            report = RunReport::new("demo bending", 0);
            report.input("n", json!(n));
            report.input("grid", format!("{nx}x{ny}"));
            report.scheme = Some(demo.scheme.to_string());
            let en = plan_energy(&demo.plan, &demo.scheme, 1.0)?;
            let (e_min, e_max) = min_max(&en.e);
            let (c_min, c_max) = min_max(&en.c);
            report.output("expected_e", sig9(demo.expected_e));
            report.output("computed_e_min", sig9(e_min));
            report.output("computed_e_max", sig9(e_max));
            report.output("expected_c", sig9(1.0 / demo.expected_e));
            report.output("computed_c_min", sig9(c_min));
            report.output("computed_c_max", sig9(c_max));
            report.output("total_energy", sig9(en.total));
        }
        DemoCommand::SplitSegment { atoms } => {
            let demo = demos::split_segment(atoms)?;
            report = RunReport::new("demo split-segment", 0);
            report.input("atoms", json!(atoms));
            report.scheme = Some(demo.scheme.to_string());
            let en = plan_energy(&demo.plan, &demo.scheme, 1.0)?;
            report.output("expected_total", sig9(demo.expected_r));
            report.output("computed_total", sig9(en.total));
            // Fiber distances grow linearly along the segment; report the
            // worst deviation from the expected slope over all atom pairs.
            let pts = demo.plan.domain().points();
            let mut worst = 0.0f64;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let w = w1_exact(&demo.plan.fibers()[i], &demo.plan.fibers()[j])?.cost;
                    let expect = demo.expected_w_slope * pts[i].distance(&pts[j]);
                    worst = worst.max((w - expect).abs());
                }
            }
            report.output("fiber_distance_worst_error", sig9(worst));
            let bmap = crate::plans::barycenter_map(&demo.plan)?;
            let be = crate::lipschitz::pointwise_expansion(&bmap, &demo.scheme)?;
            let bc = crate::lipschitz::pointwise_contraction(&bmap, &demo.scheme)?;
            let (bemin, bemax) = min_max(&be);
            let (bcmin, bcmax) = min_max(&bc);
            report.output("barycenter_e_range", json!([sig9(bemin), sig9(bemax)]));
            report.output("barycenter_c_range", json!([sig9(bcmin), sig9(bcmax)]));
        }
        DemoCommand::Fragmentation => {
            let demo = demos::fragmentation()?;
            report = RunReport::new("demo fragmentation", 0);
            report.scheme = Some(demo.energy_scheme.to_string());
            let fine = demo.unconstrained()?;
            let coarse = demo.constrained()?;
            report.output("expected_total", sig9(2.0));
            report.output("computed_total", sig9(fine.total_r));
            report.output("covering_scheme", demo.covering_scheme.to_string());
            report.output("expansion_bound", sig9(demo.expansion_bound));
            report.output("covering_feasible", json!(coarse.feasible()));
            let (_, worst) = min_max(&coarse.e);
            report.output("covering_worst_expansion", sig9(worst));
        }
        DemoCommand::DisconnectedTarget { side, weight_a } => {
            let demo = demos::disconnected_target(side, weight_a)?;
            report = RunReport::new("demo disconnected-target", 0);
            report.input("side", json!(side));
            report.input("weight_a", sig9(weight_a));
            report.scheme = Some(demo.scheme.to_string());
            let en = plan_energy(&demo.plan, &demo.scheme, 1.0)?;
            let (e_min, e_max) = min_max(&en.e);
            let (c_min, c_max) = min_max(&en.c);
            report.output("expected_total", sig9(2.0));
            report.output("computed_total", sig9(en.total));
            report.output("computed_e_range", json!([sig9(e_min), sig9(e_max)]));
            report.output("computed_c_range", json!([sig9(c_min), sig9(c_max)]));
        }
    }
    Ok((report, 0))
}

fn min_max(vs: &[f64]) -> (f64, f64) {
    vs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}
