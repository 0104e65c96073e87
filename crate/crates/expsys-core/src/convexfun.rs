//! Positive convex decreasing weights on `[r0, +inf)` and their C^2 convex
//! smoothing stages.
//!
//! The catalog holds four kinds: a positive constant, a power `x^{-p}`, an
//! iterated reciprocal logarithm `1/(ln ... ln x)`, and a convex decreasing
//! piecewise-linear table. Every kind evaluates below its domain start `r0`
//! through the affine extension with slope `f'_+(r0)`, which stays positive,
//! convex and decreasing on all of `(0, +inf)`.
//!
//! The smoothing sequence replaces the weight by chord interpolants on knot
//! grids with spacing and value gap at most `2^-n`, then rounds every kink
//! with a C^2 convex cubic patch whose second derivative is a tent of
//! integral equal to the slope jump. Stage `n` stays within `1/n` above the
//! base weight, stages decrease, and the shifted derivative inequality
//! `f'_+(x) >= f_n'(x - 1/n)` holds with margin by the spacing rule.

use crate::quad::adaptive_simpson;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConvexFunError {
    #[error("argument {x} is not above the domain start r0 = {r0}")]
    DomainBelowR0 { x: f64, r0: f64 },
    #[error("ordering violation: need r0 < x1 < x2")]
    OrderingViolation,
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
    #[error("knot sequence cannot start")]
    KnotSequenceCannotStart,
    #[error("argument {x} outside smoothing stage range [{lo}, {hi}]")]
    OutOfStageRange { x: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum WeightKind {
    Constant(f64),
    Power(f64),
    ReciprocalLog(u32),
    PiecewiseLinear(Vec<(f64, f64)>),
}

/// A positive convex decreasing function on `[r0, +inf)`, extended affinely
/// below `r0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDecreasingFunction {
    kind: WeightKind,
    r0: f64,
}

/// Tower of exponentials `e^(e^(...^e))`, the natural domain start of the
/// depth-n reciprocal log.
fn exp_tower(depth: u32) -> f64 {
    let mut t = std::f64::consts::E;
    for _ in 1..depth {
        t = t.exp();
    }
    t
}

/// Second-order forward-mode scalar: value and first two derivatives.
#[derive(Clone, Copy)]
struct Jet2 {
    v: f64,
    d1: f64,
    d2: f64,
}

impl Jet2 {
    fn ln(self) -> Jet2 {
        Jet2 {
            v: self.v.ln(),
            d1: self.d1 / self.v,
            d2: (self.d2 * self.v - self.d1 * self.d1) / (self.v * self.v),
        }
    }

    fn recip(self) -> Jet2 {
        let v2 = self.v * self.v;
        Jet2 {
            v: 1.0 / self.v,
            d1: -self.d1 / v2,
            d2: (2.0 * self.d1 * self.d1 - self.v * self.d2) / (v2 * self.v),
        }
    }
}

impl ConvexDecreasingFunction {
    pub fn constant(c: f64) -> Result<Self, ConvexFunError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(ConvexFunError::InvalidSpec("constant must be > 0".into()));
        }
        Ok(Self {
            kind: WeightKind::Constant(c),
            r0: f64::MIN_POSITIVE,
        })
    }

    pub fn power(p: f64) -> Result<Self, ConvexFunError> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(ConvexFunError::InvalidSpec("power exponent must be > 0".into()));
        }
        Ok(Self {
            kind: WeightKind::Power(p),
            r0: f64::MIN_POSITIVE,
        })
    }

    /// `1/(ln ... ln x)` iterated `depth` times, on `[e^e^...^e, +inf)`.
    /// Depths above 3 put the domain start beyond f64 range.
    pub fn reciprocal_log(depth: u32) -> Result<Self, ConvexFunError> {
        if depth == 0 || depth > 3 {
            return Err(ConvexFunError::InvalidSpec(
                "reciprocal_log depth must be in 1..=3".into(),
            ));
        }
        Ok(Self {
            kind: WeightKind::ReciprocalLog(depth),
            r0: exp_tower(depth),
        })
    }

    /// Convex decreasing strictly positive table; knots strictly increasing.
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self, ConvexFunError> {
        if knots.len() < 2 {
            return Err(ConvexFunError::InvalidSpec(
                "piecewise_linear needs at least 2 knots".into(),
            ));
        }
        let mut prev_slope = f64::NEG_INFINITY;
        for w in knots.windows(2) {
            let ((x0, v0), (x1, v1)) = (w[0], w[1]);
            if !(x0 > 0.0) || !x0.is_finite() || !v0.is_finite() || !v1.is_finite() {
                return Err(ConvexFunError::InvalidSpec("non-finite knot".into()));
            }
            if !(x1 > x0) {
                return Err(ConvexFunError::InvalidSpec(
                    "knot abscissae must be strictly increasing".into(),
                ));
            }
            if !(v0 > 0.0) || !(v1 > 0.0) {
                return Err(ConvexFunError::InvalidSpec("values must be positive".into()));
            }
            let slope = (v1 - v0) / (x1 - x0);
            if slope > 0.0 {
                return Err(ConvexFunError::InvalidSpec("values must be decreasing".into()));
            }
            if slope < prev_slope {
                return Err(ConvexFunError::InvalidSpec(
                    "slopes must be non-decreasing (convexity)".into(),
                ));
            }
            prev_slope = slope;
        }
        let r0 = knots[0].0;
        Ok(Self {
            kind: WeightKind::PiecewiseLinear(knots),
            r0,
        })
    }

    /// Skips the convexity/monotonicity validation; for feeding deliberately
    /// corrupted tables into the diagnostic checks.
    pub fn piecewise_linear_unchecked(knots: Vec<(f64, f64)>) -> Self {
        let r0 = knots.first().map(|k| k.0).unwrap_or(1.0);
        Self {
            kind: WeightKind::PiecewiseLinear(knots),
            r0,
        }
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            WeightKind::Constant(c) => format!("constant(c={c})"),
            WeightKind::Power(p) => format!("power(p={p})"),
            WeightKind::ReciprocalLog(d) => format!("reciprocal_log(depth={d})"),
            WeightKind::PiecewiseLinear(k) => format!("piecewise_linear({} knots)", k.len()),
        }
    }

    fn has_extension(&self) -> bool {
        matches!(self.kind, WeightKind::ReciprocalLog(_))
    }

    /// Evaluate at `x > 0`; below `r0` the affine extension applies.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0, "weight argument must be positive");
        if self.has_extension() && x < self.r0 {
            let v0 = self.eval_main(self.r0);
            let s0 = self.right_deriv_main(self.r0);
            return v0 + s0 * (x - self.r0);
        }
        self.eval_main(x)
    }

    fn eval_main(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Power(p) => x.powf(-p),
            WeightKind::ReciprocalLog(depth) => {
                let mut v = x;
                for _ in 0..*depth {
                    v = v.ln();
                }
                1.0 / v
            }
            WeightKind::PiecewiseLinear(knots) => {
                let (a, b) = pwl_segment(knots, x);
                a + b * x
            }
        }
    }

    fn jet(&self, x: f64) -> Option<Jet2> {
        match &self.kind {
            WeightKind::Constant(c) => Some(Jet2 { v: *c, d1: 0.0, d2: 0.0 }),
            WeightKind::Power(p) => Some(Jet2 {
                v: x.powf(-p),
                d1: -p * x.powf(-p - 1.0),
                d2: p * (p + 1.0) * x.powf(-p - 2.0),
            }),
            WeightKind::ReciprocalLog(depth) => {
                let mut j = Jet2 { v: x, d1: 1.0, d2: 0.0 };
                for _ in 0..*depth {
                    j = j.ln();
                }
                Some(j.recip())
            }
            WeightKind::PiecewiseLinear(_) => None,
        }
    }

    fn right_deriv_main(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::PiecewiseLinear(knots) => pwl_right_slope(knots, x),
            _ => self.jet(x).map(|j| j.d1).unwrap_or(0.0),
        }
    }

    /// One-sided derivatives with the affine extension in force below `r0`.
    pub(crate) fn derivatives_extended(&self, x: f64) -> (f64, f64) {
        if self.has_extension() && x <= self.r0 {
            let s0 = self.right_deriv_main(self.r0);
            return (s0, s0);
        }
        match &self.kind {
            WeightKind::PiecewiseLinear(knots) => pwl_one_sided(knots, x),
            _ => {
                let d = self.jet(x).map(|j| j.d1).unwrap_or(0.0);
                (d, d)
            }
        }
    }

    pub(crate) fn right_derivative_extended(&self, x: f64) -> f64 {
        self.derivatives_extended(x).1
    }

    /// Left and right derivatives at `x > r0`.
    pub fn one_sided_derivatives(&self, x: f64) -> Result<(f64, f64), ConvexFunError> {
        if !(x > self.r0) {
            return Err(ConvexFunError::DomainBelowR0 { x, r0: self.r0 });
        }
        Ok(self.derivatives_extended(x))
    }

    /// Closed-form second derivative; `None` at kinks of a piecewise-linear
    /// table (the only non-C^2 points of the catalog).
    pub fn second_derivative(&self, x: f64) -> Option<f64> {
        if self.has_extension() && x < self.r0 {
            return Some(0.0);
        }
        match &self.kind {
            WeightKind::PiecewiseLinear(knots) => {
                if knots.iter().any(|&(k, _)| k == x) {
                    None
                } else {
                    Some(0.0)
                }
            }
            _ => self.jet(x).map(|j| j.d2),
        }
    }

    /// Check of the convex chord inequality
    /// `0 >= f'(x2) >= (f(x2)-f(x1))/(x2-x1) >= f'(x1)` at tolerance 1e-10.
    pub fn chord_inequality_check(&self, x1: f64, x2: f64) -> Result<bool, ConvexFunError> {
        if !(self.r0 < x1 && x1 < x2) {
            return Err(ConvexFunError::OrderingViolation);
        }
        const TOL: f64 = 1e-10;
        let (l1, r1) = self.derivatives_extended(x1);
        let (l2, r2) = self.derivatives_extended(x2);
        let chord = (self.eval(x2) - self.eval(x1)) / (x2 - x1);
        let ok = r2 <= TOL
            && l2 >= chord - TOL
            && chord >= r1 - TOL
            && l1 <= r1 + TOL
            && l2 <= r2 + TOL;
        Ok(ok)
    }

    /// Breakpoints in `x` where the evaluation formula changes.
    fn x_breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            WeightKind::Constant(_) | WeightKind::Power(_) => Vec::new(),
            WeightKind::ReciprocalLog(_) => vec![self.r0],
            WeightKind::PiecewiseLinear(knots) => knots.iter().map(|k| k.0).collect(),
        }
    }

    /// Affine parameters `(alpha, beta)` with `f(x) = alpha + beta x` valid
    /// around `x`, when `x` lies in an affine region, else `None`.
    fn affine_at(&self, x: f64) -> Option<(f64, f64)> {
        if self.has_extension() && x < self.r0 {
            let v0 = self.eval_main(self.r0);
            let s0 = self.right_deriv_main(self.r0);
            return Some((v0 - s0 * self.r0, s0));
        }
        match &self.kind {
            WeightKind::Constant(c) => Some((*c, 0.0)),
            WeightKind::PiecewiseLinear(knots) => Some(pwl_segment(knots, x)),
            _ => None,
        }
    }

    /// `\int_a^b f(t^2)/t dt`, exact for the affine/constant/power/log-depth-1
    /// formulas and adaptive otherwise.
    pub fn kernel_integral(&self, a: f64, b: f64) -> f64 {
        assert!(0.0 < a && a <= b, "need 0 < a <= b");
        self.split_integral(a, b, |f, lo, hi| f.kernel_piece(lo, hi))
    }

    /// `\int_a^b [f(t^2)/t^2 - 2 f'_+(t^2)/t] dt`, the kernel of the
    /// transformed counting-function integrand.
    pub fn transformed_kernel_integral(&self, a: f64, b: f64) -> f64 {
        assert!(0.0 < a && a <= b, "need 0 < a <= b");
        self.split_integral(a, b, |f, lo, hi| f.transformed_piece(lo, hi))
    }

    fn split_integral(
        &self,
        a: f64,
        b: f64,
        piece: impl Fn(&Self, f64, f64) -> f64,
    ) -> f64 {
        if a == b {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .x_breakpoints()
            .into_iter()
            .map(f64::sqrt)
            .filter(|t| *t > a && *t < b)
            .collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0.0;
        let mut lo = a;
        for cut in cuts {
            total += piece(self, lo, cut);
            lo = cut;
        }
        total + piece(self, lo, b)
    }

    fn kernel_piece(&self, lo: f64, hi: f64) -> f64 {
        let xm = lo * hi; // x at the geometric midpoint of [lo, hi]
        if let Some((alpha, beta)) = self.affine_at(xm) {
            return alpha * (hi / lo).ln() + 0.5 * beta * (hi * hi - lo * lo);
        }
        match &self.kind {
            WeightKind::Power(p) => {
                (lo.powf(-2.0 * p) - hi.powf(-2.0 * p)) / (2.0 * p)
            }
            WeightKind::ReciprocalLog(1) => 0.5 * (hi.ln().ln() - lo.ln().ln()),
            _ => {
                let g = |t: f64| self.eval(t * t) / t;
                let scale = (hi - lo) * (g(lo).abs() + g(hi).abs() + 1e-30);
                adaptive_simpson(&g, lo, hi, 1e-13 * scale + 1e-300)
            }
        }
    }

    fn transformed_piece(&self, lo: f64, hi: f64) -> f64 {
        let xm = lo * hi;
        if let Some((alpha, beta)) = self.affine_at(xm) {
            return alpha * (1.0 / lo - 1.0 / hi) + beta * (hi - lo)
                - 2.0 * beta * (hi / lo).ln();
        }
        match &self.kind {
            WeightKind::Power(p) => {
                let q1 = 2.0 * p + 1.0;
                let q2 = 2.0 * p + 2.0;
                (lo.powf(-q1) - hi.powf(-q1)) / q1
                    + (2.0 * p / q2) * (lo.powf(-q2) - hi.powf(-q2))
            }
            _ => {
                let g = |t: f64| {
                    let x = t * t;
                    self.eval(x) / (t * t) - 2.0 * self.right_derivative_extended(x) / t
                };
                let scale = (hi - lo) * (g(lo).abs() + g(hi).abs() + 1e-30);
                adaptive_simpson(&g, lo, hi, 1e-13 * scale + 1e-300)
            }
        }
    }
}

/// Affine parameters of the piecewise-linear table at `x`: the first segment
/// extends below the first knot, a constant extends beyond the last.
fn pwl_segment(knots: &[(f64, f64)], x: f64) -> (f64, f64) {
    let n = knots.len();
    if x >= knots[n - 1].0 {
        return (knots[n - 1].1, 0.0);
    }
    // Last index with knot.0 <= x, or 0 when below the first knot.
    let i = match knots.partition_point(|k| k.0 <= x) {
        0 => 0,
        j => (j - 1).min(n - 2),
    };
    let (x0, v0) = knots[i];
    let (x1, v1) = knots[i + 1];
    let slope = (v1 - v0) / (x1 - x0);
    (v0 - slope * x0, slope)
}

fn pwl_right_slope(knots: &[(f64, f64)], x: f64) -> f64 {
    pwl_segment(knots, x).1
}

fn pwl_one_sided(knots: &[(f64, f64)], x: f64) -> (f64, f64) {
    let right = pwl_right_slope(knots, x);
    // At a knot the left slope comes from the previous segment.
    let left = if let Some(i) = knots.iter().position(|&(k, _)| k == x) {
        if i == 0 {
            right
        } else {
            let (x0, v0) = knots[i - 1];
            let (x1, v1) = knots[i];
            (v1 - v0) / (x1 - x0)
        }
    } else {
        right
    };
    (left, right)
}

// ---------------------------------------------------------------------------
// C^2 convex smoothing stages
// ---------------------------------------------------------------------------

/// Cubic C^2 rounding of one chord kink. The second derivative is a tent on
/// `[center - delta, center + delta]` of integral `s_right - s_left`.
#[derive(Debug, Clone, Copy)]
struct PatchCoeffs {
    center: f64,
    delta: f64,
    s_left: f64,
    s_right: f64,
    val_left_edge: f64,
    val_right_edge: f64,
}

impl PatchCoeffs {
    fn jump(&self) -> f64 {
        self.s_right - self.s_left
    }

    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let j = self.jump();
        let d2cap = self.delta * self.delta;
        if x <= self.center {
            let s = x - (self.center - self.delta);
            (
                self.val_left_edge + self.s_left * s + j * s * s * s / (6.0 * d2cap),
                self.s_left + j * s * s / (2.0 * d2cap),
                j * s / d2cap,
            )
        } else {
            let u = (self.center + self.delta) - x;
            (
                self.val_right_edge - self.s_right * u + j * u * u * u / (6.0 * d2cap),
                self.s_right - j * u * u / (2.0 * d2cap),
                j * u / d2cap,
            )
        }
    }
}

/// One C^2 convex decreasing smoothing stage: a chord interpolant of the base
/// weight with every kink replaced by a cubic patch.
#[derive(Debug, Clone)]
pub struct SmoothStage {
    pub n: u32,
    knots: Vec<f64>,
    values: Vec<f64>,
    patches: Vec<Option<PatchCoeffs>>,
}

impl SmoothStage {
    pub fn range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn locate(&self, x: f64) -> Result<usize, ConvexFunError> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(ConvexFunError::OutOfStageRange { x, lo, hi });
        }
        let i = match self.knots.partition_point(|k| *k <= x) {
            0 => 0,
            j => (j - 1).min(self.knots.len() - 2),
        };
        Ok(i)
    }

    fn eval_all(&self, x: f64) -> Result<(f64, f64, f64), ConvexFunError> {
        let i = self.locate(x)?;
        if let Some(p) = &self.patches[i] {
            if x <= p.center + p.delta {
                return Ok(p.eval(x));
            }
        }
        if let Some(p) = &self.patches[i + 1] {
            if x >= p.center - p.delta {
                return Ok(p.eval(x));
            }
        }
        let (x0, v0) = (self.knots[i], self.values[i]);
        let (x1, v1) = (self.knots[i + 1], self.values[i + 1]);
        let slope = (v1 - v0) / (x1 - x0);
        Ok((v0 + slope * (x - x0), slope, 0.0))
    }

    pub fn eval(&self, x: f64) -> Result<f64, ConvexFunError> {
        self.eval_all(x).map(|t| t.0)
    }

    pub fn derivative(&self, x: f64) -> Result<f64, ConvexFunError> {
        self.eval_all(x).map(|t| t.1)
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64, ConvexFunError> {
        self.eval_all(x).map(|t| t.2)
    }
}

/// The decreasing sequence of C^2 convex stages above a base weight.
#[derive(Debug, Clone)]
pub struct SmoothingSequence {
    pub base: ConvexDecreasingFunction,
    pub stages: Vec<SmoothStage>,
}

impl SmoothingSequence {
    /// Stage for index `n` in `1..=n_max`.
    pub fn stage(&self, n: u32) -> &SmoothStage {
        &self.stages[(n - 1) as usize]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SmoothingConfig {
    pub n_max: u32,
    /// Width of the covered interval; stages are defined on
    /// `[start, start + span]` only.
    pub span: f64,
    /// Refusal threshold for the starting value: if the weight cannot drop
    /// to this cap the knot sequence cannot start.
    pub value_cap: f64,
}

impl SmoothingConfig {
    pub fn new(n_max: u32) -> Self {
        Self {
            n_max,
            span: 256.0,
            value_cap: 1e6,
        }
    }
}

/// Build smoothing stages `f_1 >= f_2 >= ... >= f_n >= f` with the default
/// window; see [`build_smoothing_with`].
pub fn build_smoothing(
    f: &ConvexDecreasingFunction,
    n_max: u32,
) -> Result<SmoothingSequence, ConvexFunError> {
    build_smoothing_with(f, SmoothingConfig::new(n_max))
}

pub fn build_smoothing_with(
    f: &ConvexDecreasingFunction,
    cfg: SmoothingConfig,
) -> Result<SmoothingSequence, ConvexFunError> {
    if cfg.n_max == 0 {
        return Err(ConvexFunError::InvalidSpec("n_max must be >= 1".into()));
    }
    let start = find_start(f, cfg.value_cap)?;
    let end = start + cfg.span;

    let mut stages: Vec<SmoothStage> = Vec::with_capacity(cfg.n_max as usize);
    let mut knots: Vec<f64> = base_knots(f, start, end);
    for n in 1..=cfg.n_max {
        let gap = 0.5f64.powi(n as i32);
        refine_knots(f, &mut knots, gap);
        let values: Vec<f64> = knots.iter().map(|&x| f.eval(x)).collect();
        let patches = build_patches(&knots, &values, n, stages.last());
        stages.push(SmoothStage {
            n,
            knots: knots.clone(),
            values,
            patches,
        });
    }
    Ok(SmoothingSequence {
        base: f.clone(),
        stages,
    })
}

/// First abscissa where the weight is at or below the cap; geometric search
/// upward from `r0`.
fn find_start(f: &ConvexDecreasingFunction, cap: f64) -> Result<f64, ConvexFunError> {
    let mut x = f.r0().max(f64::MIN_POSITIVE);
    for _ in 0..4096 {
        if f.eval(x) <= cap {
            return Ok(x);
        }
        x *= 2.0;
        if !x.is_finite() {
            break;
        }
    }
    Err(ConvexFunError::KnotSequenceCannotStart)
}

/// Initial knot set: window endpoints plus any table breakpoints inside, so
/// chord interpolants reproduce piecewise-linear bases exactly.
fn base_knots(f: &ConvexDecreasingFunction, start: f64, end: f64) -> Vec<f64> {
    let mut knots = vec![start, end];
    for bp in f.x_breakpoints() {
        if bp > start && bp < end {
            knots.push(bp);
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    knots
}

/// Bisect intervals until both the spacing and the value drop are <= gap.
fn refine_knots(f: &ConvexDecreasingFunction, knots: &mut Vec<f64>, gap: f64) {
    let mut out: Vec<f64> = Vec::with_capacity(knots.len() * 2);
    for i in 0..knots.len() - 1 {
        out.push(knots[i]);
        let mut stack = vec![(knots[i], knots[i + 1])];
        let mut pending: Vec<f64> = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let width_ok = (b - a) <= gap;
            let value_ok = (f.eval(a) - f.eval(b)) <= gap;
            let m = 0.5 * (a + b);
            if (width_ok && value_ok) || m <= a || m >= b {
                continue;
            }
            pending.push(m);
            stack.push((a, m));
            stack.push((m, b));
        }
        pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.extend(pending);
    }
    out.push(*knots.last().unwrap());
    *knots = out;
}

fn build_patches(
    knots: &[f64],
    values: &[f64],
    n: u32,
    prev: Option<&SmoothStage>,
) -> Vec<Option<PatchCoeffs>> {
    let m = knots.len();
    let slopes: Vec<f64> = (0..m - 1)
        .map(|i| (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]))
        .collect();
    let gap = 0.5f64.powi(n as i32);
    // Elevation budget keeping the chord gap plus the patch within 1/n.
    let elevation_cap = 0.9 * (1.0 / n as f64 - gap).max(0.25 * gap);

    let mut patches: Vec<Option<PatchCoeffs>> = vec![None; m];
    for i in 1..m - 1 {
        let s_left = slopes[i - 1];
        let s_right = slopes[i];
        let jump = s_right - s_left;
        let slope_scale = s_left.abs().max(s_right.abs()).max(1e-30);
        if jump <= 1e-13 * slope_scale {
            continue;
        }
        let gap_l = knots[i] - knots[i - 1];
        let gap_r = knots[i + 1] - knots[i];
        let mut delta = (0.5f64.powi(n as i32 + 2)).min(0.25 * gap_l.min(gap_r));

        let chord_at = |x: f64| {
            if x <= knots[i] {
                values[i] + s_left * (x - knots[i])
            } else {
                values[i] + s_right * (x - knots[i])
            }
        };

        for _ in 0..200 {
            let elevation = jump * delta / 6.0;
            let mut ok = elevation <= elevation_cap;
            if let Some(prev_stage) = prev {
                // Stay below the previous stage over the whole patch interval.
                let mut margin = f64::INFINITY;
                for k in 0..=8 {
                    let x = knots[i] - delta + 2.0 * delta * k as f64 / 8.0;
                    let above = prev_stage.eval(x).unwrap_or(f64::INFINITY);
                    margin = margin.min(above - chord_at(x));
                }
                ok = ok && elevation <= 0.9 * margin;
            }
            if ok {
                break;
            }
            delta *= 0.5;
        }

        patches[i] = Some(PatchCoeffs {
            center: knots[i],
            delta,
            s_left,
            s_right,
            val_left_edge: chord_at(knots[i] - delta),
            val_right_edge: chord_at(knots[i] + delta),
        });
    }
    patches
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_derivatives_of_smooth_kinds() {
        let f = ConvexDecreasingFunction::power(1.0).unwrap();
        let (l, r) = f.one_sided_derivatives(2.0).unwrap();
        assert!((l + 0.25).abs() < 1e-15);
        assert!((r + 0.25).abs() < 1e-15);

        let c = ConvexDecreasingFunction::constant(3.0).unwrap();
        assert_eq!(c.one_sided_derivatives(5.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn one_sided_derivatives_of_table_at_knot() {
        let f = ConvexDecreasingFunction::piecewise_linear(vec![
            (1.0, 1.0),
            (2.0, 0.5),
            (4.0, 0.4),
        ])
        .unwrap();
        let (l, r) = f.one_sided_derivatives(2.0).unwrap();
        assert!((l + 0.5).abs() < 1e-15);
        assert!((r + 0.05).abs() < 1e-15);
    }

    #[test]
    fn one_sided_derivatives_reject_domain_start() {
        let f = ConvexDecreasingFunction::reciprocal_log(1).unwrap();
        assert!(matches!(
            f.one_sided_derivatives(1.0),
            Err(ConvexFunError::DomainBelowR0 { .. })
        ));
    }

    #[test]
    fn reciprocal_log_jet_matches_finite_differences() {
        for depth in 1..=2u32 {
            let f = ConvexDecreasingFunction::reciprocal_log(depth).unwrap();
            let x = f.r0() * 4.0;
            let h = 1e-5 * x;
            let d_fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            let d2_fd = (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h);
            let (l, r) = f.one_sided_derivatives(x).unwrap();
            assert!((l - r).abs() < 1e-15);
            assert!((l - d_fd).abs() < 1e-7 * d_fd.abs().max(1e-8), "depth {depth}");
            let d2 = f.second_derivative(x).unwrap();
            assert!((d2 - d2_fd).abs() < 1e-4 * d2.abs().max(1e-10), "depth {depth}");
        }
    }

    #[test]
    fn chord_inequality_on_reciprocal() {
        let f = ConvexDecreasingFunction::power(1.0).unwrap();
        // chord slope (1/4 - 1)/3 = -1/4 within [f'(1), f'(4)] = [-1, -1/16]
        assert!(f.chord_inequality_check(1.0, 4.0).unwrap());
        let c = ConvexDecreasingFunction::constant(1.0).unwrap();
        assert!(c.chord_inequality_check(3.0, 7.0).unwrap());
    }

    #[test]
    fn chord_inequality_flags_corrupt_table() {
        // Slopes decrease: -0.2 then -0.6, a convexity violation.
        let f = ConvexDecreasingFunction::piecewise_linear_unchecked(vec![
            (1.0, 1.0),
            (2.0, 0.8),
            (3.0, 0.2),
        ]);
        assert!(!f.chord_inequality_check(1.5, 2.5).unwrap());
        assert_eq!(
            f.chord_inequality_check(2.5, 1.5).unwrap_err(),
            ConvexFunError::OrderingViolation
        );
    }

    #[test]
    fn extension_below_r0_is_positive_and_affine() {
        let f = ConvexDecreasingFunction::reciprocal_log(1).unwrap();
        let e = std::f64::consts::E;
        assert!((f.eval(e) - 1.0).abs() < 1e-15);
        // Extension value grows as x decreases and stays positive.
        let v_half = f.eval(0.5);
        let v_tiny = f.eval(1e-6);
        assert!(v_half > 1.0 && v_tiny > v_half);
        assert!((f.eval(e - 1e-9) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_integral_closed_forms() {
        let one = ConvexDecreasingFunction::constant(1.0).unwrap();
        let a = 7.3;
        let r = 11.0;
        assert!((one.kernel_integral(r, a * r) - a.ln()).abs() < 1e-14);

        let log1 = ConvexDecreasingFunction::reciprocal_log(1).unwrap();
        let e = std::f64::consts::E;
        let got = log1.kernel_integral(e, e * e);
        assert!((got - 0.5 * 2.0f64.ln()).abs() < 1e-12);

        // Cross-check the power closed form against adaptive quadrature.
        let pow = ConvexDecreasingFunction::power(0.75).unwrap();
        let adp = adaptive_simpson(&|t: f64| pow.eval(t * t) / t, 2.0, 9.0, 1e-13);
        assert!((pow.kernel_integral(2.0, 9.0) - adp).abs() < 1e-10);
    }

    #[test]
    fn transformed_kernel_closed_forms() {
        let one = ConvexDecreasingFunction::constant(1.0).unwrap();
        // constant: integral of 1/t^2
        let got = one.transformed_kernel_integral(1.0, 2.0);
        assert!((got - 0.5).abs() < 1e-15);

        let pow = ConvexDecreasingFunction::power(0.5).unwrap();
        let g = |t: f64| {
            pow.eval(t * t) / (t * t) - 2.0 * pow.right_derivative_extended(t * t) / t
        };
        let adp = adaptive_simpson(&g, 1.5, 6.0, 1e-13);
        assert!((pow.transformed_kernel_integral(1.5, 6.0) - adp).abs() < 1e-10);
    }

    #[test]
    fn catalog_is_positive_decreasing_convex_on_wide_grids() {
        let members = [
            ConvexDecreasingFunction::constant(0.7).unwrap(),
            ConvexDecreasingFunction::power(0.5).unwrap(),
            ConvexDecreasingFunction::power(2.0).unwrap(),
            ConvexDecreasingFunction::reciprocal_log(1).unwrap(),
            ConvexDecreasingFunction::reciprocal_log(2).unwrap(),
            ConvexDecreasingFunction::piecewise_linear(vec![
                (1.0, 3.0),
                (4.0, 1.5),
                (20.0, 0.9),
                (100.0, 0.5),
            ])
            .unwrap(),
        ];
        for f in &members {
            let lo = f.r0().max(1e-3);
            let grid: Vec<f64> = (0..200)
                .map(|k| lo * (1e6f64 / lo).powf(k as f64 / 199.0))
                .collect();
            for w in grid.windows(2) {
                let (x1, x2) = (w[0], w[1]);
                let (v1, v2) = (f.eval(x1), f.eval(x2));
                assert!(v1 > 0.0 && v2 > 0.0, "{} positivity", f.describe());
                assert!(v2 <= v1 + 1e-12 * v1, "{} monotone at {x1}", f.describe());
                let mid = 0.5 * (x1 + x2);
                assert!(
                    f.eval(mid) <= 0.5 * (v1 + v2) + 1e-12 * (v1 + v2),
                    "{} midpoint convexity at {mid}",
                    f.describe()
                );
                // One-sided derivatives are increasing with left <= right.
                let (l1, r1) = f.derivatives_extended(x1);
                let (l2, r2) = f.derivatives_extended(x2);
                assert!(l1 <= r1 + 1e-14 && l2 <= r2 + 1e-14);
                assert!(r1 <= l2 + 1e-12 * r1.abs().max(1e-30), "{}", f.describe());
                assert!(r2 <= 1e-15, "{} derivatives non-positive", f.describe());
            }
        }
    }

    #[test]
    fn derivative_limit_vanishes_at_infinity() {
        let members = [
            ConvexDecreasingFunction::constant(2.0).unwrap(),
            ConvexDecreasingFunction::power(0.5).unwrap(),
            ConvexDecreasingFunction::power(1.0).unwrap(),
            ConvexDecreasingFunction::reciprocal_log(1).unwrap(),
            ConvexDecreasingFunction::reciprocal_log(2).unwrap(),
            ConvexDecreasingFunction::piecewise_linear(vec![(1.0, 2.0), (10.0, 1.0)]).unwrap(),
        ];
        for f in &members {
            let (_, r) = f.one_sided_derivatives(1e6).unwrap();
            assert!(r.abs() < 1e-4, "{}", f.describe());
        }
    }

    #[test]
    fn constant_smooths_to_itself() {
        let f = ConvexDecreasingFunction::constant(2.5).unwrap();
        let seq = build_smoothing(&f, 3).unwrap();
        for stage in &seq.stages {
            let (lo, hi) = stage.range();
            for k in 0..50 {
                let x = lo + (hi - lo) * k as f64 / 49.0;
                assert_eq!(stage.eval(x).unwrap(), 2.5);
                assert_eq!(stage.derivative(x).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn smoothing_approximates_reciprocal_log() {
        let f = ConvexDecreasingFunction::reciprocal_log(1).unwrap();
        let seq = build_smoothing_with(
            &f,
            SmoothingConfig {
                n_max: 2,
                span: 64.0,
                value_cap: 1e6,
            },
        )
        .unwrap();
        let s1 = seq.stage(1);
        let s2 = seq.stage(2);
        let (lo, hi) = s1.range();
        let mut sup1: f64 = 0.0;
        for k in 0..1000 {
            let x = lo + (hi - lo) * k as f64 / 999.0;
            let d1 = s1.eval(x).unwrap() - f.eval(x);
            let d2 = s2.eval(x).unwrap() - f.eval(x);
            assert!(d1 >= -1e-12, "stage must dominate the base at x={x}");
            assert!(d2 >= -1e-12);
            assert!(
                s2.eval(x).unwrap() <= s1.eval(x).unwrap() + 1e-12,
                "stages must decrease"
            );
            sup1 = sup1.max(d1);
        }
        assert!(sup1 <= 1.0, "stage-1 sup gap {sup1} must be <= 1");
    }

    #[test]
    fn smoothing_refuses_unreachable_cap() {
        let f = ConvexDecreasingFunction::constant(1e9).unwrap();
        let err = build_smoothing_with(
            &f,
            SmoothingConfig {
                n_max: 1,
                span: 8.0,
                value_cap: 1e6,
            },
        )
        .unwrap_err();
        assert_eq!(err, ConvexFunError::KnotSequenceCannotStart);
    }

    #[test]
    fn stage_rejects_out_of_range_argument() {
        let f = ConvexDecreasingFunction::power(1.0).unwrap();
        let seq = build_smoothing_with(
            &f,
            SmoothingConfig {
                n_max: 1,
                span: 16.0,
                value_cap: 10.0,
            },
        )
        .unwrap();
        let (lo, _) = seq.stage(1).range();
        assert!(matches!(
            seq.stage(1).eval(lo / 2.0),
            Err(ConvexFunError::OutOfStageRange { .. })
        ));
    }
}
