//! Reading and writing shapes and plans.
//!
//! Shapes travel as CSV (one atom per line, `x1,...,xN[,w]`) or JSON
//! (`{"points": [[...], ...], "weights": [...]}` with `weights` optional).
//! A CSV first line that does not parse as numbers is a header; a header
//! whose last column is named `w` or `weight` (case-insensitive) marks the
//! last value of each row as the atom's mass, otherwise every column is a
//! coordinate. Headerless files are all-coordinates with uniform mass.
//!
//! Plans travel as JSON: `{"domain": <shape>, "fibers": [<shape>, ...]}`.
//!
//! Writers emit shortest round-tripping decimal forms, and measure
//! construction is idempotent on normalized weights, so reading a file the
//! tool wrote reproduces the measure bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::measure::{DiscreteMeasure, Point};
use crate::plans::DisintegrationPlan;
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ShapeFile {
    points: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl ShapeFile {
    fn from_measure(m: &DiscreteMeasure) -> Self {
        ShapeFile {
            points: m.points().iter().map(|p| p.coords.clone()).collect(),
            weights: Some(m.weights().to_vec()),
        }
    }

    fn into_measure(self) -> Result<DiscreteMeasure> {
        let points = self.points.into_iter().map(Point::new).collect();
        DiscreteMeasure::new(points, self.weights)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PlanFile {
    domain: ShapeFile,
    fibers: Vec<ShapeFile>,
}

/// Parses a shape from CSV text.
pub fn parse_shape_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut columns: Option<usize> = None;
    let mut weighted = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if columns.is_none() {
            let parsed: std::result::Result<Vec<f64>, _> =
                cells.iter().map(|c| c.parse::<f64>()).collect();
            columns = Some(cells.len());
            match parsed {
                Ok(values) => {
                    check_finite(&values, line_no)?;
                    rows.push(values);
                }
                Err(_) => {
                    // Header line; its last column may name the weight.
                    let last = cells.last().unwrap().to_ascii_lowercase();
                    weighted = last == "w" || last == "weight";
                    if weighted && cells.len() < 2 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "weight column needs at least one coordinate column".into(),
                        });
                    }
                }
            }
            continue;
        }
        if cells.len() != columns.unwrap() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} values, found {}",
                    columns.unwrap(),
                    cells.len()
                ),
            });
        }
        let values: Vec<f64> = cells
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("not a number: {c}"),
                })
            })
            .collect::<Result<_>>()?;
        check_finite(&values, line_no)?;
        rows.push(values);
    }
    let (points, weights) = if weighted {
        let mut pts = Vec::with_capacity(rows.len());
        let mut ws = Vec::with_capacity(rows.len());
        for mut row in rows {
            let w = row.pop().expect("header guaranteed at least two columns");
            pts.push(Point::new(row));
            ws.push(w);
        }
        (pts, Some(ws))
    } else {
        (rows.into_iter().map(Point::new).collect(), None)
    };
    DiscreteMeasure::new(points, weights)
}

fn check_finite(values: &[f64], line_no: usize) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse { line: line_no, msg: "non-finite value".into() });
    }
    Ok(())
}

/// Parses a shape from JSON text.
pub fn parse_shape_json(text: &str) -> Result<DiscreteMeasure> {
    let file: ShapeFile = serde_json::from_str(text)?;
    file.into_measure()
}

/// Reads a shape file, dispatching on the `.json` extension (anything else
/// is treated as CSV).
pub fn read_shape(path: &Path) -> Result<DiscreteMeasure> {
    let text = fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        parse_shape_json(&text)
    } else {
        parse_shape_csv(&text)
    }
}

/// Renders a shape as weighted CSV (`x1,...,xN,w` with a header line).
pub fn shape_to_csv(m: &DiscreteMeasure) -> String {
    let dim = m.dim();
    let mut out = String::new();
    for a in 0..dim {
        let _ = write!(out, "x{},", a + 1);
    }
    out.push_str("w\n");
    for (p, w) in m.points().iter().zip(m.weights()) {
        for c in &p.coords {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{w}");
    }
    out
}

/// Renders a shape as JSON.
pub fn shape_to_json(m: &DiscreteMeasure) -> String {
    serde_json::to_string_pretty(&ShapeFile::from_measure(m)).expect("shape serializes")
}

/// Writes a shape, picking the format from the `.json` extension.
pub fn write_shape(m: &DiscreteMeasure, path: &Path) -> Result<()> {
    let text = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        shape_to_json(m)
    } else {
        shape_to_csv(m)
    };
    fs::write(path, text)?;
    Ok(())
}

/// Parses a plan from JSON text.
pub fn parse_plan_json(text: &str) -> Result<DisintegrationPlan> {
    let file: PlanFile = serde_json::from_str(text)?;
    let domain = file.domain.into_measure()?;
    let fibers: Vec<DiscreteMeasure> = file
        .fibers
        .into_iter()
        .map(ShapeFile::into_measure)
        .collect::<Result<_>>()?;
    DisintegrationPlan::new(domain, fibers)
}

/// Reads a plan from a JSON file.
pub fn read_plan(path: &Path) -> Result<DisintegrationPlan> {
    parse_plan_json(&fs::read_to_string(path)?)
}

/// Renders a plan as JSON.
pub fn plan_to_json(plan: &DisintegrationPlan) -> String {
    let file = PlanFile {
        domain: ShapeFile::from_measure(plan.domain()),
        fibers: plan.fibers().iter().map(ShapeFile::from_measure).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plan serializes")
}

/// Writes a plan as JSON.
pub fn write_plan(plan: &DisintegrationPlan, path: &Path) -> Result<()> {
    fs::write(path, plan_to_json(plan))?;
    Ok(())
}
