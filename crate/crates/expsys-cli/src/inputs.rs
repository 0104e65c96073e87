//! Input-file parsing: point sets, distributions, bodies, weights, grids.
//!
//! All inputs are JSON (one schema per object kind) except distributions,
//! which may also arrive as CSV with columns `re, im, mult`.

use std::path::Path;

use expsys_core::convexfun::ConvexDecreasingFunction;
use expsys_core::criteria::{geometric_points, OuterRadiusRule, SweepGrid};
use expsys_core::distributions::PointDistribution;
use expsys_core::geometry::{ConvexBody, PlanePoint};
use serde::Deserialize;

/// Input-layer failure; maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn read_text(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| {
        InputError(format!(
            "malformed JSON in {} (line {}, column {}): {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

// ---------------------------------------------------------------------------
// Point sets and distributions
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct PointsFile {
    points: Vec<Vec<f64>>,
}

/// Bare points for the hull command: JSON `{"points": [[x, y], ...]}` or
/// CSV with columns `re, im`.
pub fn load_points(path: &Path) -> Result<Vec<PlanePoint>, InputError> {
    let loaded = if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        load_csv_rows(path)?
            .into_iter()
            .map(|(re, im, _)| PlanePoint::new(re, im))
            .collect()
    } else {
        let text = read_text(path)?;
        let file: PointsFile = parse_json(&text, path)?;
        let mut pts = Vec::with_capacity(file.points.len());
        for (i, row) in file.points.iter().enumerate() {
            if row.len() < 2 {
                return Err(InputError(format!(
                    "{}: point {i} needs at least [x, y]",
                    path.display()
                )));
            }
            pts.push(PlanePoint::new(row[0], row[1]));
        }
        pts
    };
    if loaded.is_empty() {
        return Err(InputError(format!("{}: empty point set", path.display())));
    }
    if loaded.iter().any(|p| !p.is_finite()) {
        return Err(InputError(format!(
            "{}: non-finite coordinates",
            path.display()
        )));
    }
    Ok(loaded)
}

#[derive(Deserialize)]
struct DistributionFile {
    #[serde(default)]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    generator: Option<GeneratorSpec>,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
struct GeneratorSpec {
    name: String,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    count: Option<u32>,
    #[serde(default)]
    first: Option<f64>,
    #[serde(default)]
    ratio: Option<f64>,
    #[serde(default)]
    r_max: Option<f64>,
}

fn load_csv_rows(path: &Path) -> Result<Vec<(f64, f64, u32)>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| InputError(format!("{}: row {}: {e}", path.display(), i + 2)))?;
        let field = |j: usize| -> Result<f64, InputError> {
            record
                .get(j)
                .ok_or_else(|| {
                    InputError(format!("{}: row {} missing column {j}", path.display(), i + 2))
                })?
                .parse::<f64>()
                .map_err(|e| InputError(format!("{}: row {}: {e}", path.display(), i + 2)))
        };
        let re = field(0)?;
        let im = field(1)?;
        let mult = match record.get(2) {
            Some("") | None => 1u32,
            Some(s) => s.parse::<u32>().map_err(|e| {
                InputError(format!("{}: row {}: bad multiplicity: {e}", path.display(), i + 2))
            })?,
        };
        rows.push((re, im, mult));
    }
    Ok(rows)
}

/// Distribution of exponents: explicit points with multiplicities, a named
/// generator, or a CSV table.
pub fn load_distribution(path: &Path, seed: u64) -> Result<PointDistribution, InputError> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let rows = load_csv_rows(path)?;
        let entries: Vec<(PlanePoint, u32)> = rows
            .into_iter()
            .map(|(re, im, m)| (PlanePoint::new(re, im), m))
            .collect();
        return PointDistribution::new(entries, path.display().to_string())
            .map_err(|e| InputError(format!("{}: {e}", path.display())));
    }
    let text = read_text(path)?;
    let file: DistributionFile = parse_json(&text, path)?;
    if let Some(gen) = file.generator {
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| {
                InputError(format!("{}: generator needs {what}", path.display()))
            })
        };
        let count = gen
            .count
            .ok_or_else(|| InputError(format!("{}: generator needs count", path.display())))?;
        return Ok(match gen.name.as_str() {
            "sine_lattice" => {
                PointDistribution::sine_lattice(need(gen.sigma, "sigma")?, count)
            }
            "geometric" => PointDistribution::geometric_radii(
                need(gen.first, "first")?,
                need(gen.ratio, "ratio")?,
                count,
            ),
            "random" => {
                PointDistribution::random_uniform(count, need(gen.r_max, "r_max")?, seed)
            }
            other => {
                return Err(InputError(format!(
                    "{}: unknown generator '{other}'",
                    path.display()
                )))
            }
        });
    }
    let points = file.points.ok_or_else(|| {
        InputError(format!(
            "{}: need either \"points\" or \"generator\"",
            path.display()
        ))
    })?;
    let mut entries = Vec::with_capacity(points.len());
    for (i, row) in points.iter().enumerate() {
        if row.len() < 2 {
            return Err(InputError(format!(
                "{}: point {i} needs at least [x, y]",
                path.display()
            )));
        }
        let mult = if row.len() >= 3 { row[2] } else { 1.0 };
        if mult < 1.0 || mult.fract() != 0.0 || mult > u32::MAX as f64 {
            return Err(InputError(format!(
                "{}: point {i}: multiplicity must be a positive integer",
                path.display()
            )));
        }
        entries.push((PlanePoint::new(row[0], row[1]), mult as u32));
    }
    let label = file.label.unwrap_or_else(|| path.display().to_string());
    PointDistribution::new(entries, label)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Bodies
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum BodyFile {
    Polygon { vertices: Vec<[f64; 2]> },
    Disk { center: [f64; 2], radius: f64 },
    Segment { a: [f64; 2], b: [f64; 2] },
    Point { p: [f64; 2] },
}

pub fn load_body(path: &Path) -> Result<ConvexBody, InputError> {
    let text = read_text(path)?;
    let file: BodyFile = parse_json(&text, path)?;
    let pt = |xy: [f64; 2]| PlanePoint::new(xy[0], xy[1]);
    let body = match file {
        BodyFile::Polygon { vertices } => {
            ConvexBody::polygon(vertices.into_iter().map(pt).collect())
        }
        BodyFile::Disk { center, radius } => ConvexBody::disk(pt(center), radius),
        BodyFile::Segment { a, b } => ConvexBody::segment(pt(a), pt(b)),
        BodyFile::Point { p } => ConvexBody::point(pt(p)),
    };
    body.map_err(|e| InputError(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum WeightFile {
    Constant { c: f64 },
    Power { p: f64 },
    ReciprocalLog { depth: u32 },
    PiecewiseLinear { knots: Vec<[f64; 2]> },
}

pub fn load_weight(path: &Path) -> Result<ConvexDecreasingFunction, InputError> {
    let text = read_text(path)?;
    let file: WeightFile = parse_json(&text, path)?;
    let weight = match file {
        WeightFile::Constant { c } => ConvexDecreasingFunction::constant(c),
        WeightFile::Power { p } => ConvexDecreasingFunction::power(p),
        WeightFile::ReciprocalLog { depth } => ConvexDecreasingFunction::reciprocal_log(depth),
        WeightFile::PiecewiseLinear { knots } => ConvexDecreasingFunction::piecewise_linear(
            knots.into_iter().map(|[x, v]| (x, v)).collect(),
        ),
    };
    weight.map_err(|e| InputError(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(untagged)]
enum AxisSpec {
    Range { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl AxisSpec {
    fn materialize(&self) -> Result<Vec<f64>, InputError> {
        match self {
            AxisSpec::List(v) => Ok(v.clone()),
            AxisSpec::Range { start, stop, count } => {
                if !(*start > 0.0 && stop > start && *count >= 2) {
                    return Err(InputError(
                        "axis range needs 0 < start < stop and count >= 2".into(),
                    ));
                }
                Ok(geometric_points(*start, *stop, *count))
            }
        }
    }
}

#[derive(Deserialize)]
struct GridFile {
    r: AxisSpec,
    #[serde(default)]
    a: Option<AxisSpec>,
    #[serde(default, rename = "R")]
    outer: Option<serde_json::Value>,
}

pub fn load_grid(path: &Path) -> Result<SweepGrid, InputError> {
    let text = read_text(path)?;
    let file: GridFile = parse_json(&text, path)?;
    let r = file.r.materialize()?;
    let a = match &file.a {
        Some(spec) => spec.materialize()?,
        None => geometric_points(2.0, 64.0, 6),
    };
    let outer = match &file.outer {
        None => OuterRadiusRule::FactorTimesR,
        Some(serde_json::Value::String(s)) if s == "factor" => OuterRadiusRule::FactorTimesR,
        Some(v) => {
            let spec: AxisSpec = serde_json::from_value(v.clone())
                .map_err(|e| InputError(format!("{}: bad R spec: {e}", path.display())))?;
            OuterRadiusRule::List(spec.materialize()?)
        }
    };
    SweepGrid::new(r, a, outer).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Default sweep grid sized against a distribution's truncation radius.
pub fn default_grid(z: &PointDistribution) -> SweepGrid {
    let top = z
        .truncation_radius()
        .or_else(|| {
            z.entries()
                .iter()
                .map(|&(p, _)| p.abs())
                .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
        })
        .unwrap_or(1000.0)
        .max(64.0);
    let hi = 0.8 * top;
    SweepGrid::geometric(hi.sqrt().clamp(2.0, 64.0), hi.max(16.0), 24, 2.0, 64.0, 6)
        .expect("default grid is valid")
}
