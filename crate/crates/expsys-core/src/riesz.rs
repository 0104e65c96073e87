//! Riesz-mass inequalities verified numerically on concrete entire
//! functions.
//!
//! For an entire function `g` with `ln|g| <= Spf_B + c` (support function of
//! a mirrored convex body plus a constant), the Riesz mass of `ln|g|` is the
//! zero counting measure of `g`. Two quantities are checked here:
//!
//! - the annulus inequality: the mass integral of the inversion profile
//!   `V*` against the zeros must not exceed the same integral against the
//!   support-function mass plus a circle boundary term;
//! - the growth deficit: the window integral of `f(t^2)/t` against the
//!   radial zero counting measure minus `(perimeter/2pi)` times the plain
//!   window integral, which must stay bounded over expanding windows.
//!
//! Everything reports an honest quadrature error estimate obtained from
//! trapezoid refinement; an inequality only counts as violated when the
//! slack drops below that estimate.

use crate::convexfun::ConvexDecreasingFunction;
use crate::distributions::PointDistribution;
use crate::geometry::{self, ConvexBody, PlanePoint};
use crate::quad::{adaptive_simpson, periodic_trapezoid_refined};
use crate::subharmonic::{RadialSubharmonic, SubharmonicError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RieszError {
    #[error("relocate test radius: circle at r = {0} passes too close to a zero")]
    RelocateTestRadius(f64),
    #[error("hypothesis failure: ln|g| exceeds the growth majorant at |z| = {radius}, angle {theta}")]
    HypothesisFailure { radius: f64, theta: f64 },
    #[error("zero-perimeter body has no support mass")]
    ZeroPerimeterBody,
    #[error("growth bodies of product factors cannot be combined")]
    UnsupportedProductGrowth,
    #[error("deficit window needs 1 < r < R")]
    BadDeficitWindow,
    #[error(transparent)]
    Subharmonic(#[from] SubharmonicError),
}

/// Which sign the inversion profile enters the inequality with. The negated
/// mode exists only as a deliberate failure harness for self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VstarMode {
    Normal,
    NegatedSelfTest,
}

#[derive(Debug, Clone)]
enum EntireKind {
    /// `sin(sigma z)`: simple zeros at `pi k / sigma`, growth bounded by the
    /// support function of the vertical segment `[-i sigma, i sigma]`.
    SineType { sigma: f64 },
    /// Finite product of `(z - z_k)^mult`: `ln|g| = sum mult ln|z - z_k|`.
    Polynomial { zeros: PointDistribution },
    Product(Vec<TestEntireFunction>),
}

/// An entire function with a recorded growth majorant `Spf_body + c`.
#[derive(Debug, Clone)]
pub struct TestEntireFunction {
    kind: EntireKind,
    growth_body: ConvexBody,
    offset: f64,
    label: String,
}

impl TestEntireFunction {
    pub fn sine_type(sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        let body = ConvexBody::segment(PlanePoint::new(0.0, -sigma), PlanePoint::new(0.0, sigma))
            .expect("valid segment");
        Self {
            kind: EntireKind::SineType { sigma },
            growth_body: body,
            offset: 0.0,
            label: format!("sin({sigma} z)"),
        }
    }

    /// Polynomial with the given zeros. The offset `c` is fitted as the
    /// maximum of `ln|g| - Spf(mirror body)` over a dense polar grid of the
    /// disk of radius `fit_radius`, padded against sampling error, so that
    /// the growth hypothesis holds on the whole disk. The gap function dips
    /// to `-inf` at zeros, so only its smooth high region matters.
    pub fn polynomial(zeros: PointDistribution, growth_body: ConvexBody, fit_radius: f64) -> Self {
        let label = format!("polynomial({} zeros)", zeros.total_multiplicity());
        let mut g = Self {
            kind: EntireKind::Polynomial { zeros },
            growth_body,
            offset: 0.0,
            label,
        };
        let mirrored = geometry::mirror(&g.growth_body);
        let radial_steps = 192;
        let angular_steps = 1024;
        let mut worst = f64::NEG_INFINITY;
        // Largest angular jump among samples near the running maximum; a
        // proxy for how much the true supremum can exceed the sampled one.
        let mut near_max_gap: f64 = 0.0;
        for i in 1..=radial_steps {
            let radius = fit_radius * 1.03 * i as f64 / radial_steps as f64;
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=angular_steps {
                let theta = std::f64::consts::TAU * k as f64 / angular_steps as f64;
                let z = PlanePoint::from_polar(radius, theta);
                let gap = g.log_modulus(z) - geometry::support(&mirrored, z);
                if gap.is_finite() {
                    if gap > worst {
                        worst = gap;
                    }
                    if prev.is_finite() && gap.max(prev) >= worst - 1.0 {
                        near_max_gap = near_max_gap.max((gap - prev).abs());
                    }
                }
                prev = gap;
            }
        }
        g.offset = worst + 2.0 * near_max_gap + 1e-6 * (1.0 + worst.abs());
        g
    }

    /// Product of factors; the growth majorants add, so the combined body is
    /// the Minkowski sum (supported for the combinations this crate builds:
    /// points shift, parallel segments add, concentric disks add).
    pub fn product(parts: Vec<TestEntireFunction>) -> Result<Self, RieszError> {
        assert!(!parts.is_empty(), "product of no factors");
        let mut body = parts[0].growth_body.clone();
        let mut offset = parts[0].offset;
        for part in &parts[1..] {
            body = minkowski_sum(&body, &part.growth_body)?;
            offset += part.offset;
        }
        let label = parts
            .iter()
            .map(|p| p.label.clone())
            .collect::<Vec<_>>()
            .join(" * ");
        Ok(Self {
            kind: EntireKind::Product(parts),
            growth_body: body,
            offset,
            label,
        })
    }

    pub fn growth_body(&self) -> &ConvexBody {
        &self.growth_body
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `ln|g(z)|`; `-inf` exactly at zeros.
    pub fn log_modulus(&self, z: PlanePoint) -> f64 {
        match &self.kind {
            EntireKind::SineType { sigma } => log_abs_sin(*sigma, z),
            EntireKind::Polynomial { zeros } => zeros
                .entries()
                .iter()
                .map(|&(p, m)| {
                    m as f64 * PlanePoint::new(z.re - p.re, z.im - p.im).abs().ln()
                })
                .sum(),
            EntireKind::Product(parts) => parts.iter().map(|p| p.log_modulus(z)).sum(),
        }
    }

    /// Zeros with multiplicity inside the closed disk of the given radius:
    /// the Riesz masses of `ln|g|` there.
    pub fn masses_within(&self, radius: f64) -> PointDistribution {
        match &self.kind {
            EntireKind::SineType { sigma } => {
                let step = std::f64::consts::PI / sigma;
                let count = (radius / step).floor() as u32;
                PointDistribution::sine_lattice(*sigma, count)
            }
            EntireKind::Polynomial { zeros } => PointDistribution::new(
                zeros
                    .entries()
                    .iter()
                    .copied()
                    .filter(|(p, _)| p.abs() <= radius)
                    .collect(),
                format!("{} masses", self.label),
            )
            .expect("positive multiplicities"),
            EntireKind::Product(parts) => {
                let mut merged = PointDistribution::empty(format!("{} masses", self.label));
                for part in parts {
                    merged = merged.union(&part.masses_within(radius));
                }
                merged
            }
        }
    }

    /// The growth majorant `M(z) = Spf(mirror(growth_body), z) + c`.
    pub fn growth_majorant(&self, z: PlanePoint) -> f64 {
        geometry::support(&geometry::mirror(&self.growth_body), z) + self.offset
    }
}

/// `ln|sin(w)| = Im w + ln|1 - e^{2iw}| - ln 2` for `Im w >= 0`; the other
/// half-plane follows by conjugation symmetry. Stable for large |Im z|,
/// where direct evaluation of sin overflows.
fn log_abs_sin(sigma: f64, z: PlanePoint) -> f64 {
    let w = PlanePoint::new(sigma * z.re, sigma * z.im);
    let y = w.im.abs();
    // |1 - e^{2i(x + iy)}| with y >= 0: amplitude a = e^{-2y} <= 1.
    let a = (-2.0 * y).exp();
    let c = (2.0 * w.re).cos();
    let s = (2.0 * w.re).sin();
    let sq = (1.0 - a * c) * (1.0 - a * c) + (a * s) * (a * s);
    y + 0.5 * sq.ln() - std::f64::consts::LN_2
}

/// Minkowski sum restricted to the variant-preserving combinations used by
/// the product constructor.
fn minkowski_sum(a: &ConvexBody, b: &ConvexBody) -> Result<ConvexBody, RieszError> {
    let shift = |body: &ConvexBody, by: PlanePoint| -> ConvexBody {
        let t = |p: PlanePoint| PlanePoint::new(p.re + by.re, p.im + by.im);
        match body {
            ConvexBody::Polygon(v) => ConvexBody::Polygon(v.iter().copied().map(t).collect()),
            ConvexBody::Disk { center, radius } => ConvexBody::Disk {
                center: t(*center),
                radius: *radius,
            },
            ConvexBody::Segment { a, b } => {
                ConvexBody::segment(t(*a), t(*b)).expect("shift keeps segments valid")
            }
            ConvexBody::Point(p) => ConvexBody::Point(t(*p)),
        }
    };
    match (a, b) {
        (ConvexBody::Point(p), other) => Ok(shift(other, *p)),
        (other, ConvexBody::Point(p)) => Ok(shift(other, *p)),
        (ConvexBody::Segment { a: a1, b: b1 }, ConvexBody::Segment { a: a2, b: b2 }) => {
            let d1 = PlanePoint::new(b1.re - a1.re, b1.im - a1.im);
            let d2 = PlanePoint::new(b2.re - a2.re, b2.im - a2.im);
            if d1.cross(d2).abs() > 1e-12 * d1.abs() * d2.abs() {
                return Err(RieszError::UnsupportedProductGrowth);
            }
            Ok(ConvexBody::segment(
                PlanePoint::new(a1.re + a2.re, a1.im + a2.im),
                PlanePoint::new(b1.re + b2.re, b1.im + b2.im),
            )
            .expect("parallel segments add to a segment"))
        }
        (ConvexBody::Disk { center: c1, radius: r1 }, ConvexBody::Disk { center: c2, radius: r2 }) => {
            Ok(ConvexBody::Disk {
                center: PlanePoint::new(c1.re + c2.re, c1.im + c2.im),
                radius: r1 + r2,
            })
        }
        _ => Err(RieszError::UnsupportedProductGrowth),
    }
}

/// Exact mass integral of the inversion profile: the sum of
/// `mult * V*(z_k)` over the atoms (the profile vanishes outside
/// `(r^2/R, R]`).
pub fn riesz_integral_against_vstar(
    masses: &PointDistribution,
    h: &RadialSubharmonic,
) -> Result<f64, RieszError> {
    let mut total = 0.0;
    for &(p, m) in masses.entries() {
        total += m as f64 * h.v_star_radial(p.abs())?;
    }
    Ok(total)
}

/// Mass integral of the inversion profile against the support-function
/// measure: since the profile is radial this is
/// `(perimeter / 2pi) * \int_{r^2/R}^{R} V*(t) dt`, split at the branch
/// boundary `t = r`.
pub fn support_mass_integral_against_vstar(
    body: &ConvexBody,
    h: &RadialSubharmonic,
) -> Result<f64, RieszError> {
    let perimeter = geometry::perimeter(body);
    if perimeter <= 0.0 {
        return Err(RieszError::ZeroPerimeterBody);
    }
    Ok(perimeter / std::f64::consts::TAU * vstar_radial_integral(h)?)
}

fn vstar_radial_integral(h: &RadialSubharmonic) -> Result<f64, RieszError> {
    let r = h.inner_radius();
    let big_r = h.outer_radius();
    let lo = r * r / big_r;
    let profile = |t: f64| h.v_star_radial(t).unwrap_or(0.0);
    let scale = (big_r - lo) * (profile(0.5 * (lo + r)).abs() + profile(0.5 * (r + big_r)).abs() + 1e-30);
    let tol = 1e-12 * scale + 1e-300;
    Ok(adaptive_simpson(&profile, lo, r, tol) + adaptive_simpson(&profile, r, big_r, tol))
}

/// Full record of one annulus-inequality evaluation.
#[derive(Debug, Clone)]
pub struct RieszMassReport {
    /// Mass integral of `V*` against the zeros of `g`.
    pub lhs: f64,
    /// Support-mass integral plus the circle boundary term.
    pub rhs: f64,
    /// `rhs - lhs`; the inequality is in evidence when this is no smaller
    /// than minus the quadrature error estimate.
    pub slack: f64,
    pub quadrature_error_estimate: f64,
    pub support_term: f64,
    pub boundary_term: f64,
    pub circle_samples: usize,
}

/// Relative gap required between the test circle and every zero radius.
pub const CIRCLE_ZERO_GAP_REL: f64 = 1e-3;

/// Evaluate both sides of the annulus inequality
/// `int V* dDelta_u <= int V* dDelta_M + (r/pi) \oint (u - M) dV/dn dtheta`
/// for `u = ln|g|` and `M` the recorded growth majorant of `g`.
///
/// The circle radius is the inner radius of `h`; it must keep a relative
/// gap of at least 1e-3 from every zero radius. The growth hypothesis
/// `u <= M` is spot-checked on sampled circles first.
pub fn mass_inequality_check(
    g: &TestEntireFunction,
    body: &ConvexBody,
    h: &RadialSubharmonic,
    circle_samples: usize,
) -> Result<RieszMassReport, RieszError> {
    mass_inequality_check_with_mode(g, body, h, circle_samples, VstarMode::Normal)
}

pub fn mass_inequality_check_with_mode(
    g: &TestEntireFunction,
    body: &ConvexBody,
    h: &RadialSubharmonic,
    circle_samples: usize,
    mode: VstarMode,
) -> Result<RieszMassReport, RieszError> {
    let r = h.inner_radius();
    let big_r = h.outer_radius();
    let masses = g.masses_within(big_r * (1.0 + 1e-12));

    // The circle must avoid the zeros of g.
    for &(p, _) in masses.entries() {
        if (p.abs() - r).abs() < CIRCLE_ZERO_GAP_REL * r {
            return Err(RieszError::RelocateTestRadius(r));
        }
    }

    let mirrored = geometry::mirror(body);
    let majorant = |z: PlanePoint| geometry::support(&mirrored, z) + g.offset();

    // Spot-check the growth hypothesis u <= M on a circle family.
    let hypothesis_samples = circle_samples.clamp(64, 4096);
    for &radius in &[r, (r * big_r).sqrt(), big_r] {
        for k in 0..hypothesis_samples {
            let theta = std::f64::consts::TAU * k as f64 / hypothesis_samples as f64;
            let z = PlanePoint::from_polar(radius, theta);
            let m = majorant(z);
            if g.log_modulus(z) > m + 1e-9 * (1.0 + m.abs()) {
                return Err(RieszError::HypothesisFailure { radius, theta });
            }
        }
    }

    let sign = match mode {
        VstarMode::Normal => 1.0,
        VstarMode::NegatedSelfTest => -1.0,
    };

    let lhs = sign * riesz_integral_against_vstar(&masses, h)?;
    let support_term = sign * support_mass_integral_against_vstar(body, h)?;

    // Boundary term (r/pi) * V'(r) * \oint (u - M) dtheta; the profile is
    // radial so the circle factor is the signed radial derivative on the
    // inner circle (both factors are non-positive, the term non-negative).
    let dv_dn = sign * h.inner_circle_radial_derivative(r)?;
    let circle = periodic_trapezoid_refined(
        &|theta: f64| {
            let z = PlanePoint::from_polar(r, theta);
            g.log_modulus(z) - majorant(z)
        },
        circle_samples,
    );
    let factor = r / std::f64::consts::PI;
    let boundary_term = factor * dv_dn * circle.value;
    let boundary_error = factor * dv_dn.abs() * circle.error_estimate;
    // Radial quadrature contributes a small share of the budget as well.
    let quadrature_error_estimate = boundary_error + 1e-9 * support_term.abs() + 1e-12;

    let rhs = support_term + boundary_term;
    Ok(RieszMassReport {
        lhs,
        rhs,
        slack: rhs - lhs,
        quadrature_error_estimate,
        support_term,
        boundary_term,
        circle_samples: circle.samples,
    })
}

/// Window deficit of the growth estimate: the integral of `f(t^2)/t`
/// against the radial zero counting of `g` over `(r, R]` minus
/// `(perimeter(conv body)/2pi) * \int_r^R f(t^2)/t dt`. Bounded above over
/// expanding windows when the growth hypothesis holds.
pub fn growth_deficit(
    g: &TestEntireFunction,
    body: &ConvexBody,
    f: &ConvexDecreasingFunction,
    r: f64,
    big_r: f64,
) -> Result<f64, RieszError> {
    if !(1.0 < r && r < big_r) {
        return Err(RieszError::BadDeficitWindow);
    }
    let masses = g.masses_within(big_r * (1.0 + 1e-12));
    let mut mass_side = 0.0;
    for &(p, m) in masses.entries() {
        let t = p.abs();
        if t > r && t <= big_r {
            mass_side += m as f64 * f.eval(t * t) / t;
        }
    }
    let perimeter = geometry::perimeter(body);
    Ok(mass_side - perimeter / std::f64::consts::TAU * f.kernel_integral(r, big_r))
}

/// One case of the randomized inequality suite.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub label: String,
    pub g: TestEntireFunction,
    pub body: ConvexBody,
    pub f: ConvexDecreasingFunction,
    pub inner_r: f64,
    pub outer_r: f64,
}

/// Deterministic seeded suite of sine-type / polynomial / product cases over
/// inner radii {2, 4, 8} and outer radii {32, 64}.
pub fn inequality_suite_cases(seed: u64, count: usize) -> Vec<SuiteCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner_choices = [2.0, 4.0, 8.0];
    let outer_choices = [32.0, 64.0];
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let mut inner_r = inner_choices[i % inner_choices.len()];
        let outer_r = outer_choices[(i / inner_choices.len()) % outer_choices.len()];
        let f = match i % 4 {
            0 => ConvexDecreasingFunction::constant(1.0).unwrap(),
            1 => ConvexDecreasingFunction::power(0.5).unwrap(),
            2 => ConvexDecreasingFunction::power(1.0).unwrap(),
            _ => ConvexDecreasingFunction::reciprocal_log(1).unwrap(),
        };
        let (g, body) = match i % 3 {
            0 => {
                let sigma = 0.6 + 1.4 * rng.gen::<f64>();
                let g = TestEntireFunction::sine_type(sigma);
                let body = g.growth_body().clone();
                (g, body)
            }
            1 => {
                let n = 5 + (rng.gen::<u32>() % 20);
                let mut zeros = Vec::new();
                for _ in 0..n {
                    let radius = outer_r * 1.4 * rng.gen::<f64>();
                    let theta = std::f64::consts::TAU * rng.gen::<f64>();
                    zeros.push((PlanePoint::from_polar(radius, theta), 1u32));
                }
                let z = PointDistribution::new(zeros, format!("suite zeros {i}")).unwrap();
                let body = ConvexBody::disk(
                    PlanePoint::new(0.0, 0.0),
                    0.3 + 0.9 * rng.gen::<f64>(),
                )
                .unwrap();
                let g = TestEntireFunction::polynomial(z, body.clone(), outer_r);
                (g, body)
            }
            _ => {
                let s1 = 0.5 + 0.7 * rng.gen::<f64>();
                let s2 = 0.4 + 0.5 * rng.gen::<f64>();
                let g = TestEntireFunction::product(vec![
                    TestEntireFunction::sine_type(s1),
                    TestEntireFunction::sine_type(s2),
                ])
                .expect("parallel segments combine");
                let body = g.growth_body().clone();
                (g, body)
            }
        };
        // Nudge the circle off any zero radius.
        let masses = g.masses_within(outer_r * 1.01);
        for _ in 0..64 {
            let close = masses
                .entries()
                .iter()
                .any(|&(p, _)| (p.abs() - inner_r).abs() < 2.0 * CIRCLE_ZERO_GAP_REL * inner_r);
            if !close {
                break;
            }
            inner_r *= 1.0037;
        }
        cases.push(SuiteCase {
            label: format!("case {i}: {} on {} window ({inner_r}, {outer_r})", g.label(), kind_name(&body)),
            g,
            body,
            f,
            inner_r,
            outer_r,
        });
    }
    cases
}

fn kind_name(body: &ConvexBody) -> &'static str {
    match body {
        ConvexBody::Polygon(_) => "polygon",
        ConvexBody::Disk { .. } => "disk",
        ConvexBody::Segment { .. } => "segment",
        ConvexBody::Point(_) => "point",
    }
}

/// Run the suite in parallel; results are reported in case order.
pub fn run_inequality_suite(
    cases: &[SuiteCase],
    circle_samples: usize,
    mode: VstarMode,
) -> Vec<Result<RieszMassReport, RieszError>> {
    cases
        .par_iter()
        .map(|case| {
            let h = RadialSubharmonic::from_weight(&case.f, case.inner_r, case.outer_r)?;
            mass_inequality_check_with_mode(&case.g, &case.body, &h, circle_samples, mode)
        })
        .collect()
}
