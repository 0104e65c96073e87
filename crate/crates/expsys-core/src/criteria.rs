//! Grid evaluators for the completeness conditions.
//!
//! Each evaluator tabulates a windowed integral functional of the radial
//! counting function over a sweep grid, compares the resulting limit
//! estimate with a perimeter threshold, and issues a three-valued verdict.
//! Asymptotic conditions cannot be decided from finite truncations, so a
//! verdict is explicit evidence, not a decided claim: `evidence-satisfied`
//! requires the two largest window scales to agree on the comparison and
//! the trend to be non-decreasing; windows that disagree yield
//! `inconclusive`.
//!
//! Verdicts depend on the target domain only through the perimeter of the
//! convex hull of its closure; no topological property of the domain is
//! inspected. Conditions appear in two flavors per threshold: a non-strict
//! one (`>=`, reported as `verdict_geq`) and a strict one (`>`, reported as
//! `verdict_strict`); the distinction is material for which function space
//! the criterion addresses.

use crate::convexfun::ConvexDecreasingFunction;
use crate::distributions::{stieltjes_integral, PointDistribution, RadialCounting};
use crate::geometry::{perimeter, ConvexBody};
use crate::jsonout::Json;
use crate::quad::regression_slope;
use rayon::prelude::*;
use thiserror::Error;

/// Non-strict comparisons tolerate this relative shortfall below the
/// threshold; finite truncations approach limits from below.
pub const EQUALITY_BAND_REL: f64 = 5e-3;
/// Strict comparisons require exceeding the threshold by this relative band.
pub const STRICT_BAND_REL: f64 = 1e-6;
/// A trend counts as non-decreasing down to this relative slope.
pub const SLOPE_TOL_REL: f64 = 0.02;
/// Windows are clipped to this fraction of the truncation radius.
pub const TRUNCATION_CLIP: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum CriteriaError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("condition II.1 inapplicable")]
    InapplicableII1,
    #[error("condition II.2 inapplicable")]
    InapplicableII2,
    #[error("grid lies beyond the clipped truncation radius")]
    GridClippedEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    EvidenceSatisfied,
    EvidenceViolated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::EvidenceSatisfied => "evidence-satisfied",
            Verdict::EvidenceViolated => "evidence-violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// How the outer window radii pair with inner ones in two-parameter sweeps.
#[derive(Debug, Clone)]
pub enum OuterRadiusRule {
    /// `R = a * r` for every factor `a` of the grid.
    FactorTimesR,
    /// An explicit independent list of outer radii.
    List(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub r_values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub outer_rule: OuterRadiusRule,
}

impl SweepGrid {
    pub fn new(
        r_values: Vec<f64>,
        a_values: Vec<f64>,
        outer_rule: OuterRadiusRule,
    ) -> Result<Self, CriteriaError> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if r_values.is_empty() || r_values[0] <= 0.0 || !increasing(&r_values) {
            return Err(CriteriaError::BadGrid(
                "r grid must be non-empty, positive, strictly increasing".into(),
            ));
        }
        if a_values.iter().any(|&a| a <= 1.0) || !increasing(&a_values) {
            return Err(CriteriaError::BadGrid(
                "a grid must be strictly increasing with a > 1".into(),
            ));
        }
        if let OuterRadiusRule::List(list) = &outer_rule {
            if list.is_empty() || list[0] <= 0.0 || !increasing(list) {
                return Err(CriteriaError::BadGrid(
                    "outer radius list must be positive and strictly increasing".into(),
                ));
            }
        }
        Ok(Self {
            r_values,
            a_values,
            outer_rule,
        })
    }

    /// Geometric grids for both parameters with `R = a*r` pairing.
    pub fn geometric(
        r_lo: f64,
        r_hi: f64,
        r_count: usize,
        a_lo: f64,
        a_hi: f64,
        a_count: usize,
    ) -> Result<Self, CriteriaError> {
        Self::new(
            geometric_points(r_lo, r_hi, r_count),
            geometric_points(a_lo, a_hi, a_count),
            OuterRadiusRule::FactorTimesR,
        )
    }
}

pub fn geometric_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let ratio = (hi / lo).powf(1.0 / (count as f64 - 1.0));
    let mut v: Vec<f64> = (0..count).map(|i| lo * ratio.powi(i as i32)).collect();
    v[count - 1] = hi;
    v
}

#[derive(Debug, Clone, Copy)]
pub struct TrendDiagnostics {
    /// Regression slope of the outer series against the log of its parameter.
    pub slope: f64,
    /// Estimate over the largest window scale (top quartile).
    pub window_primary: f64,
    /// Estimate over the second window scale.
    pub window_secondary: f64,
    pub windows_agree: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct GridCell {
    pub r: f64,
    pub a: Option<f64>,
    pub outer_r: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub criterion: String,
    pub weight: Option<String>,
    pub parameter_p: Option<f64>,
    /// Perimeter of the body (or the explicit perimeter bound `P`).
    pub perimeter_bound: f64,
    pub threshold: f64,
    pub estimate: f64,
    pub verdict_geq: Verdict,
    pub verdict_strict: Verdict,
    pub trend: TrendDiagnostics,
    pub values: Vec<GridCell>,
    pub clip_radius: Option<f64>,
}

impl CriterionReport {
    pub fn to_json(&self) -> Json {
        Json::object(vec![
            ("criterion", Json::str(&self.criterion)),
            (
                "weight",
                match &self.weight {
                    Some(w) => Json::str(w),
                    None => Json::Null,
                },
            ),
            (
                "parameter_p",
                match self.parameter_p {
                    Some(p) => Json::Float(p),
                    None => Json::Null,
                },
            ),
            ("perimeter_bound", Json::Float(self.perimeter_bound)),
            ("threshold", Json::Float(self.threshold)),
            ("estimate", Json::Float(self.estimate)),
            ("verdict_geq", Json::str(self.verdict_geq.as_str())),
            ("verdict_strict", Json::str(self.verdict_strict.as_str())),
            (
                "trend",
                Json::object(vec![
                    ("slope", Json::Float(self.trend.slope)),
                    ("window_primary", Json::Float(self.trend.window_primary)),
                    ("window_secondary", Json::Float(self.trend.window_secondary)),
                    ("windows_agree", Json::Bool(self.trend.windows_agree)),
                ]),
            ),
            (
                "clip_radius",
                match self.clip_radius {
                    Some(c) => Json::Float(c),
                    None => Json::Null,
                },
            ),
            (
                "values",
                Json::array(self.values.iter().map(|cell| {
                    Json::object(vec![
                        ("r", Json::Float(cell.r)),
                        (
                            "a",
                            match cell.a {
                                Some(a) => Json::Float(a),
                                None => Json::Null,
                            },
                        ),
                        (
                            "R",
                            match cell.outer_r {
                                Some(x) => Json::Float(x),
                                None => Json::Null,
                            },
                        ),
                        ("value", Json::Float(cell.value)),
                    ])
                })),
            ),
        ])
    }
}

// ---------------------------------------------------------------------------
// Window estimation helpers
// ---------------------------------------------------------------------------

fn clip_radius(z: &PointDistribution) -> Option<f64> {
    z.truncation_radius().map(|t| TRUNCATION_CLIP * t)
}

fn clip_list(values: &[f64], clip: Option<f64>) -> Result<Vec<f64>, CriteriaError> {
    let out: Vec<f64> = match clip {
        Some(c) => values.iter().copied().filter(|&v| v <= c).collect(),
        None => values.to_vec(),
    };
    if out.is_empty() {
        return Err(CriteriaError::GridClippedEmpty);
    }
    Ok(out)
}

enum Aggregate {
    Max,
    Min,
}

/// Limit-superior style estimation over an outer series `(param, value)`:
/// estimates over the two largest window scales, a trend slope over the top
/// half, and the derived pair of verdicts against a threshold.
fn windowed_verdict(
    series: &[(f64, f64)],
    threshold: f64,
    aggregate: Aggregate,
) -> (f64, TrendDiagnostics, Verdict, Verdict) {
    assert!(!series.is_empty());
    let n = series.len();
    let q = (n / 4).max(1);
    let agg = |slice: &[(f64, f64)]| -> f64 {
        let it = slice.iter().map(|&(_, v)| v);
        match aggregate {
            Aggregate::Max => it.fold(f64::NEG_INFINITY, f64::max),
            Aggregate::Min => it.fold(f64::INFINITY, f64::min),
        }
    };
    let primary = agg(&series[n - q..]);
    let secondary = if n >= 2 * q {
        agg(&series[n - 2 * q..n - q])
    } else {
        primary
    };
    let estimate = match aggregate {
        Aggregate::Max => primary,
        // Infimum over the whole outer grid.
        Aggregate::Min => agg(series),
    };

    let half = (n / 2).max(2).min(n);
    let xs: Vec<f64> = series[n - half..].iter().map(|&(p, _)| p.ln()).collect();
    let ys: Vec<f64> = series[n - half..].iter().map(|&(_, v)| v).collect();
    let slope = regression_slope(&xs, &ys);

    let scale = threshold.abs().max(estimate.abs()).max(1e-300);
    let verdict_for = |band: f64, above: bool| -> (Verdict, bool) {
        let bar = if above {
            threshold * (1.0 + band)
        } else {
            threshold * (1.0 - band)
        };
        let sat_p = if above { primary > bar } else { primary >= bar };
        let sat_s = if above { secondary > bar } else { secondary >= bar };
        if sat_p != sat_s {
            return (Verdict::Inconclusive, false);
        }
        let verdict = if sat_p {
            if slope >= -SLOPE_TOL_REL * scale {
                Verdict::EvidenceSatisfied
            } else {
                Verdict::Inconclusive
            }
        } else {
            Verdict::EvidenceViolated
        };
        (verdict, true)
    };
    let (geq, agree) = verdict_for(EQUALITY_BAND_REL, false);
    let (strict, _) = verdict_for(STRICT_BAND_REL, true);
    (
        estimate,
        TrendDiagnostics {
            slope,
            window_primary: primary,
            window_secondary: secondary,
            windows_agree: agree,
        },
        geq,
        strict,
    )
}

// ---------------------------------------------------------------------------
// Single-limit criteria: the averaged-window conditions
// ---------------------------------------------------------------------------

/// `(1/r) \int_1^r Z^rad(t)/t dt` against `perimeter / 2pi`.
pub fn evaluate_ng(
    z: &PointDistribution,
    body: &ConvexBody,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    evaluate_power_pair(z, body, 0.0, grid, "ng")
}

/// `(1/2r) \int_1^r ((r/t)^p + (t/r)^p) Z^rad(t)/t dt` against
/// `(1/(1-p^2)) perimeter / 2pi`, for `p` in `[0, 1)`.
pub fn evaluate_b1(
    z: &PointDistribution,
    body: &ConvexBody,
    p: f64,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    if !(0.0..1.0).contains(&p) {
        return Err(CriteriaError::BadParameter("need p in [0, 1)".into()));
    }
    evaluate_power_pair(z, body, p, grid, "b1")
}

/// Shared implementation: the `p = 0` case is exactly the plain averaged
/// condition, which keeps the reduction identity bitwise.
fn evaluate_power_pair(
    z: &PointDistribution,
    body: &ConvexBody,
    p: f64,
    grid: &SweepGrid,
    name: &str,
) -> Result<CriterionReport, CriteriaError> {
    if grid.r_values[0] < 1.0 {
        return Err(CriteriaError::BadGrid(
            "window functional starts at 1; need grid r >= 1".into(),
        ));
    }
    let clip = clip_radius(z);
    let r_values = clip_list(&grid.r_values, clip)?;
    let counting = z.radial_counting();
    let prm = perimeter(body);
    let threshold = prm / (1.0 - p * p) / std::f64::consts::TAU;

    let values: Vec<(f64, f64)> = r_values
        .par_iter()
        .map(|&r| {
            let v = if p == 0.0 {
                let base = counting.step_weighted_integral(1.0, r, |t| t.ln());
                0.5 / r * (base + base)
            } else {
                let falling = counting.step_weighted_integral(1.0, r, |t| -(r / t).powf(p) / p);
                let rising = counting.step_weighted_integral(1.0, r, |t| (t / r).powf(p) / p);
                0.5 / r * (falling + rising)
            };
            (r, v)
        })
        .collect();

    let (estimate, trend, geq, strict) = windowed_verdict(&values, threshold, Aggregate::Max);
    Ok(CriterionReport {
        criterion: name.to_string(),
        weight: None,
        parameter_p: if name == "ng" { None } else { Some(p) },
        perimeter_bound: prm,
        threshold,
        estimate,
        verdict_geq: geq,
        verdict_strict: strict,
        trend,
        values: values
            .into_iter()
            .map(|(r, value)| GridCell {
                r,
                a: None,
                outer_r: None,
                value,
            })
            .collect(),
        clip_radius: clip,
    })
}

/// `(1/2r) ( \int_1^r (2 - (t/r)^p) Z^rad(t)/t dt
///          + \int_r^inf (r/t)^p Z^rad(t)/t dt )`
/// against `(p^2/(p^2-1)) perimeter / 2pi`, for `p > 1`. The tail integral
/// is exact: beyond the largest point radius the counting function is
/// constant and the tail has a closed form.
pub fn evaluate_b3(
    z: &PointDistribution,
    body: &ConvexBody,
    p: f64,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    if !(p > 1.0) {
        return Err(CriteriaError::BadParameter("need p > 1".into()));
    }
    if grid.r_values[0] < 1.0 {
        return Err(CriteriaError::BadGrid(
            "window functional starts at 1; need grid r >= 1".into(),
        ));
    }
    let clip = clip_radius(z);
    let r_values = clip_list(&grid.r_values, clip)?;
    let counting = z.radial_counting();
    let prm = perimeter(body);
    let threshold = prm * p * p / (p * p - 1.0) / std::f64::consts::TAU;
    let top = counting.jump_radii().last().copied().unwrap_or(0.0);
    let total = counting.total() as f64;

    let values: Vec<(f64, f64)> = r_values
        .par_iter()
        .map(|&r| {
            let flat = counting.step_weighted_integral(1.0, r, |t| t.ln());
            let rising = counting.step_weighted_integral(1.0, r, |t| (t / r).powf(p) / p);
            let t_eff = top.max(r);
            let falling = counting.step_weighted_integral(r, t_eff, |t| -(r / t).powf(p) / p);
            let tail = total * (r / t_eff).powf(p) / p;
            (r, 0.5 / r * (2.0 * flat - rising + falling + tail))
        })
        .collect();

    let (estimate, trend, geq, strict) = windowed_verdict(&values, threshold, Aggregate::Max);
    Ok(CriterionReport {
        criterion: "b3".to_string(),
        weight: None,
        parameter_p: Some(p),
        perimeter_bound: prm,
        threshold,
        estimate,
        verdict_geq: geq,
        verdict_strict: strict,
        trend,
        values: values
            .into_iter()
            .map(|(r, value)| GridCell {
                r,
                a: None,
                outer_r: None,
                value,
            })
            .collect(),
        clip_radius: clip,
    })
}

// ---------------------------------------------------------------------------
// Ratio cells shared by the double-limit criteria
// ---------------------------------------------------------------------------

/// One ratio cell: transformed window integral of the weight kernel against
/// the counting function over `(r, ar]`, divided by the plain kernel
/// integral over the same window.
fn ratio_cell(counting: &RadialCounting, f: &ConvexDecreasingFunction, r: f64, a: f64) -> f64 {
    let hi = a * r;
    let numerator =
        counting.step_weighted_integral_by(r, hi, |lo, up| f.transformed_kernel_integral(lo, up));
    let denominator = f.kernel_integral(r, hi);
    numerator / denominator
}

/// Ratio cells plus the distinct inner/outer parameter lists and the clip.
struct RatioTable {
    cells: Vec<GridCell>,
    r_list: Vec<f64>,
    a_list: Vec<f64>,
    clip: Option<f64>,
}

fn ratio_table(
    z: &PointDistribution,
    f: &ConvexDecreasingFunction,
    grid: &SweepGrid,
) -> Result<RatioTable, CriteriaError> {
    let clip = clip_radius(z);
    let counting = z.radial_counting();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for &r in &grid.r_values {
        for &a in &grid.a_values {
            if clip.is_none_or(|c| a * r <= c) {
                cells.push((r, a));
            }
        }
    }
    if cells.is_empty() {
        return Err(CriteriaError::GridClippedEmpty);
    }
    let values: Vec<GridCell> = cells
        .par_iter()
        .map(|&(r, a)| GridCell {
            r,
            a: Some(a),
            outer_r: Some(a * r),
            value: ratio_cell(&counting, f, r, a),
        })
        .collect();
    let mut r_list: Vec<f64> = values.iter().map(|c| c.r).collect();
    r_list.dedup();
    let mut a_list: Vec<f64> = values.iter().filter_map(|c| c.a).collect();
    a_list.sort_by(|x, y| x.partial_cmp(y).unwrap());
    a_list.dedup();
    Ok(RatioTable {
        cells: values,
        r_list,
        a_list,
        clip,
    })
}

/// Collapse the inner parameter by a top-quartile extremum.
fn inner_estimate(
    cells: &[GridCell],
    outer_of: impl Fn(&GridCell) -> f64,
    inner_of: impl Fn(&GridCell) -> f64,
    outer: f64,
    aggregate: &Aggregate,
) -> Option<f64> {
    let mut inner: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| outer_of(c) == outer)
        .map(|c| (inner_of(c), c.value))
        .collect();
    if inner.is_empty() {
        return None;
    }
    inner.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let q = (inner.len() / 4).max(1);
    let tail = &inner[inner.len() - q..];
    Some(match aggregate {
        Aggregate::Max => tail.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max),
        Aggregate::Min => tail.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min),
    })
}

/// The `a`-averaged window condition: inner functional
/// `(1/ln a) \int_r^{ar} Z^rad(t)/t^2 dt`, limit superior over `r` first,
/// then the infimum over `a` (the three `a`-limits coincide for finite
/// upper density). Threshold `perimeter / 2pi`.
pub fn evaluate_b2(
    z: &PointDistribution,
    body: &ConvexBody,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    let one = ConvexDecreasingFunction::constant(1.0).expect("unit weight");
    let table = ratio_table(z, &one, grid)?;
    let prm = perimeter(body);
    let threshold = prm / std::f64::consts::TAU;

    let series: Vec<(f64, f64)> = table
        .a_list
        .iter()
        .filter_map(|&a| {
            inner_estimate(&table.cells, |c| c.a.unwrap(), |c| c.r, a, &Aggregate::Max)
                .map(|v| (a, v))
        })
        .collect();
    let (estimate, trend, geq, strict) = windowed_verdict(&series, threshold, Aggregate::Min);
    Ok(CriterionReport {
        criterion: "b2".to_string(),
        weight: None,
        parameter_p: None,
        perimeter_bound: prm,
        threshold,
        estimate,
        verdict_geq: geq,
        verdict_strict: strict,
        trend,
        values: table.cells,
        clip_radius: table.clip,
    })
}

// ---------------------------------------------------------------------------
// Weighted criteria (general convex decreasing weight, perimeter bound P)
// ---------------------------------------------------------------------------

/// Divergence-style condition: tabulates
/// `D(r, R) = \int_(r,R] f(t^2)/t dZ^rad(t) - (P/2pi) \int_r^R f(t^2)/t dt`
/// and looks for growth without saturation over expanding windows.
pub fn evaluate_t1_i(
    z: &PointDistribution,
    f: &ConvexDecreasingFunction,
    p_bound: f64,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    if !(p_bound > 0.0) {
        return Err(CriteriaError::BadParameter("need P > 0".into()));
    }
    let clip = clip_radius(z);
    let factor = p_bound / std::f64::consts::TAU;

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for &r in &grid.r_values {
        let outers: Vec<f64> = match &grid.outer_rule {
            OuterRadiusRule::FactorTimesR => grid.a_values.iter().map(|&a| a * r).collect(),
            OuterRadiusRule::List(list) => list.clone(),
        };
        for outer in outers {
            if outer > r && clip.is_none_or(|c| outer <= c) {
                pairs.push((r, outer));
            }
        }
    }
    if pairs.is_empty() {
        return Err(CriteriaError::GridClippedEmpty);
    }

    let cells: Vec<GridCell> = pairs
        .par_iter()
        .map(|&(r, outer)| {
            let mass = stieltjes_integral(z, |t| f.eval(t * t) / t, r, outer)
                .expect("window ordering validated");
            GridCell {
                r,
                a: None,
                outer_r: Some(outer),
                value: mass - factor * f.kernel_integral(r, outer),
            }
        })
        .collect();

    // Outer series: sup over r of D(r, R), indexed by R.
    let mut outer_list: Vec<f64> = cells.iter().filter_map(|c| c.outer_r).collect();
    outer_list.sort_by(|x, y| x.partial_cmp(y).unwrap());
    outer_list.dedup();
    let series: Vec<(f64, f64)> = outer_list
        .iter()
        .map(|&outer| {
            let sup = cells
                .iter()
                .filter(|c| c.outer_r == Some(outer))
                .map(|c| c.value)
                .fold(f64::NEG_INFINITY, f64::max);
            (outer, sup)
        })
        .collect();

    let n = series.len();
    let half = (n / 2).max(2).min(n);
    let xs: Vec<f64> = series[n - half..].iter().map(|&(p, _)| p.ln()).collect();
    let ys: Vec<f64> = series[n - half..].iter().map(|&(_, v)| v).collect();
    let slope = regression_slope(&xs, &ys);
    // Per e-fold of R the deficit of a just-critical case moves by about
    // (P/2pi) f(R^2); that sets the natural slope scale.
    let slope_scale = factor
        * (xs
            .iter()
            .map(|lnr| {
                let r = lnr.exp();
                f.eval(r * r)
            })
            .sum::<f64>()
            / xs.len() as f64)
            .max(1e-300);
    let q = (n / 4).max(1);
    let primary = series[n - q..]
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let secondary = if n >= 2 * q {
        series[n - 2 * q..n - q]
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        primary
    };
    // Lattice oscillations jitter the window suprema by a fraction of the
    // slope scale; only a drop beyond that counts against growth.
    let windows_agree = primary >= secondary - 0.1 * slope_scale;
    let growing = slope >= 0.05 * slope_scale && windows_agree;
    let shrinking = slope <= -0.05 * slope_scale;
    let verdict = if growing {
        Verdict::EvidenceSatisfied
    } else if shrinking {
        Verdict::EvidenceViolated
    } else {
        Verdict::Inconclusive
    };
    let estimate = cells.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);

    Ok(CriterionReport {
        criterion: "t1_i".to_string(),
        weight: Some(f.describe()),
        parameter_p: None,
        perimeter_bound: p_bound,
        threshold: factor,
        estimate,
        verdict_geq: verdict,
        verdict_strict: verdict,
        trend: TrendDiagnostics {
            slope,
            window_primary: primary,
            window_secondary: secondary,
            windows_agree,
        },
        values: cells,
        clip_radius: clip,
    })
}

/// Ratio condition with the limit superior taken over `r` first (outer),
/// then over the window factor `a` (inner). Requires a weight whose kernel
/// integral diverges.
pub fn evaluate_t1_ii1(
    z: &PointDistribution,
    f: &ConvexDecreasingFunction,
    p_bound: f64,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    let class = classify_weight(f, &ClassifyProbe::default_for(f));
    if class.if_diverges != Verdict::EvidenceSatisfied {
        return Err(CriteriaError::InapplicableII1);
    }
    evaluate_ratio_condition(z, f, p_bound, grid, "t1_ii1", Outer::R)
}

/// Ratio condition with the limit superior taken over `a` first (outer),
/// then over `r` (inner). Requires a weight whose window integrals diverge
/// in the double limit-inferior sense.
pub fn evaluate_t1_ii2(
    z: &PointDistribution,
    f: &ConvexDecreasingFunction,
    p_bound: f64,
    grid: &SweepGrid,
) -> Result<CriterionReport, CriteriaError> {
    let class = classify_weight(f, &ClassifyProbe::default_for(f));
    if class.lni_infinite != Verdict::EvidenceSatisfied {
        return Err(CriteriaError::InapplicableII2);
    }
    evaluate_ratio_condition(z, f, p_bound, grid, "t1_ii2", Outer::A)
}

enum Outer {
    R,
    A,
}

fn evaluate_ratio_condition(
    z: &PointDistribution,
    f: &ConvexDecreasingFunction,
    p_bound: f64,
    grid: &SweepGrid,
    name: &str,
    outer: Outer,
) -> Result<CriterionReport, CriteriaError> {
    if !(p_bound > 0.0) {
        return Err(CriteriaError::BadParameter("need P > 0".into()));
    }
    let table = ratio_table(z, f, grid)?;
    let threshold = p_bound / std::f64::consts::TAU;

    let series: Vec<(f64, f64)> = match outer {
        Outer::R => table
            .r_list
            .iter()
            .filter_map(|&r| {
                inner_estimate(&table.cells, |c| c.r, |c| c.a.unwrap(), r, &Aggregate::Max)
                    .map(|v| (r, v))
            })
            .collect(),
        Outer::A => table
            .a_list
            .iter()
            .filter_map(|&a| {
                inner_estimate(&table.cells, |c| c.a.unwrap(), |c| c.r, a, &Aggregate::Max)
                    .map(|v| (a, v))
            })
            .collect(),
    };
    let (estimate, trend, geq, strict) = windowed_verdict(&series, threshold, Aggregate::Max);
    Ok(CriterionReport {
        criterion: name.to_string(),
        weight: Some(f.describe()),
        parameter_p: None,
        perimeter_bound: p_bound,
        threshold,
        estimate,
        verdict_geq: geq,
        verdict_strict: strict,
        trend,
        values: table.cells,
        clip_radius: table.clip,
    })
}

// ---------------------------------------------------------------------------
// Weight classification: which ratio condition applies
// ---------------------------------------------------------------------------

/// Probe layout for the weight classifier.
#[derive(Debug, Clone)]
pub struct ClassifyProbe {
    /// Exponents `K` for the tail-decay ratio test `d(2K)/d(K)`, where
    /// `d(k)` is the kernel integral over `[e^k, e^{k+1}]`.
    pub doubling_ks: Vec<f64>,
    pub a_values: Vec<f64>,
    pub r_probe: Vec<f64>,
}

impl ClassifyProbe {
    pub fn default_for(f: &ConvexDecreasingFunction) -> Self {
        let r_lo = (2.0 * f.r0()).max(10.0);
        Self {
            doubling_ks: vec![16.0, 32.0, 64.0, 128.0],
            a_values: (1..=16).map(|k| 2.0f64.powi(k)).collect(),
            r_probe: geometric_points(r_lo, 1e120, 32),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FunctionClassification {
    /// Evidence that `\int_{r0}^inf f(t^2)/t dt` diverges.
    pub if_diverges: Verdict,
    /// Evidence that `liminf_a liminf_r \int_r^{ar} f(t^2)/t dt` is infinite.
    pub lni_infinite: Verdict,
    /// `(K, d(2K)/d(K))` decade-decay ratios.
    pub tail_ratios: Vec<(f64, f64)>,
    /// `(a, psi(a))` at the full probe scale (liminf over the largest radii).
    pub window_growth_full: Vec<(f64, f64)>,
    /// Same at the half log-scale, for window-agreement comparison.
    pub window_growth_half: Vec<(f64, f64)>,
}

impl FunctionClassification {
    pub fn to_json(&self) -> Json {
        let pairs = |v: &[(f64, f64)]| {
            Json::array(v.iter().map(|&(x, y)| Json::array([Json::Float(x), Json::Float(y)])))
        };
        Json::object(vec![
            ("if_diverges", Json::str(self.if_diverges.as_str())),
            ("lni_infinite", Json::str(self.lni_infinite.as_str())),
            ("tail_ratios", pairs(&self.tail_ratios)),
            ("window_growth_full", pairs(&self.window_growth_full)),
            ("window_growth_half", pairs(&self.window_growth_half)),
        ])
    }
}

/// Classify a weight for the two ratio conditions.
///
/// The kernel integral over `[e^k, e^{k+1}]` behaves like a series term in
/// `k`; the series diverges exactly when the doubling ratio `d(2K)/d(K)`
/// stays at or above 1/2 (the harmonic boundary `d ~ 1/k` sits exactly at
/// 1/2 and is divergent). The double limit-inferior probe compares window
/// integrals `psi(a) = min over huge r` at two radius log-scales: a genuine
/// infinite limit keeps `psi` stable across scales and growing in `a`,
/// while a vanishing one shrinks proportionally to the probe scale.
pub fn classify_weight(f: &ConvexDecreasingFunction, probe: &ClassifyProbe) -> FunctionClassification {
    // Tail-decay ratio test for the kernel integral.
    let mut tail_ratios = Vec::new();
    for &k in &probe.doubling_ks {
        let d = |kk: f64| f.kernel_integral(kk.exp(), (kk + 1.0).exp());
        let base = d(k);
        let doubled = d(2.0 * k);
        let ratio = if base > 1e-280 { doubled / base } else { 0.0 };
        tail_ratios.push((k, ratio));
    }
    let if_diverges = if tail_ratios.iter().all(|&(_, r)| r >= 0.499) {
        Verdict::EvidenceSatisfied
    } else if tail_ratios.last().map(|&(_, r)| r < 0.45).unwrap_or(true) {
        Verdict::EvidenceViolated
    } else {
        Verdict::Inconclusive
    };

    // Window probe at two radius scales.
    let n = probe.r_probe.len();
    let full_window: Vec<f64> = probe.r_probe[n.saturating_sub(4)..].to_vec();
    let target = probe.r_probe[n - 1].ln() / 2.0;
    let mut half_idx = 0;
    for (i, &r) in probe.r_probe.iter().enumerate() {
        if (r.ln() - target).abs() < (probe.r_probe[half_idx].ln() - target).abs() {
            half_idx = i;
        }
    }
    let half_window: Vec<f64> =
        probe.r_probe[half_idx.saturating_sub(3)..=half_idx].to_vec();

    let psi = |window: &[f64], a: f64| -> f64 {
        window
            .iter()
            .map(|&r| f.kernel_integral(r, a * r))
            .fold(f64::INFINITY, f64::min)
    };
    let window_growth_full: Vec<(f64, f64)> =
        probe.a_values.iter().map(|&a| (a, psi(&full_window, a))).collect();
    let window_growth_half: Vec<(f64, f64)> =
        probe.a_values.iter().map(|&a| (a, psi(&half_window, a))).collect();

    let a_max = *probe.a_values.last().unwrap();
    let a_mid = probe.a_values[probe.a_values.len() / 2];
    let at = |table: &[(f64, f64)], a: f64| table.iter().find(|&&(x, _)| x == a).unwrap().1;
    let full_max = at(&window_growth_full, a_max);
    let full_mid = at(&window_growth_full, a_mid);
    let half_max = at(&window_growth_half, a_max);

    let growth = full_max > 1e-12 && full_max >= 1.2 * full_mid;
    let weak_growth = full_max > 1e-12 && full_max > 1.05 * full_mid;
    let scale_ratio = if half_max > 1e-300 { full_max / half_max } else { 1.0 };
    let lni_infinite = if growth && scale_ratio >= 0.8 {
        Verdict::EvidenceSatisfied
    } else if scale_ratio < 0.6 || !weak_growth {
        Verdict::EvidenceViolated
    } else {
        Verdict::Inconclusive
    };

    FunctionClassification {
        if_diverges,
        lni_infinite,
        tail_ratios,
        window_growth_full,
        window_growth_half,
    }
}
