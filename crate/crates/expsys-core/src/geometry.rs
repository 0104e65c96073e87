//! Planar convex bodies: hulls, perimeters, support functions and the
//! arc-length measure of the boundary.
//!
//! A body is one of polygon / disk / segment / point. Degenerate hulls are
//! first-class citizens: the boundary of a segment is traversed twice, so its
//! perimeter is `2 * length`, and a single point has perimeter zero. This
//! convention keeps the arc-length measure total equal to the perimeter for
//! every body with a positive perimeter.

use thiserror::Error;

/// Relative tolerance used by the orientation predicate of the hull builder.
const COLLINEARITY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("zero-perimeter body has no arc-length measure")]
    ZeroPerimeterBody,
    #[error("invalid body: {0}")]
    InvalidBody(String),
}

/// A point of the plane, also read as a complex number `re + i*im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub re: f64,
    pub im: f64,
}

impl PlanePoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn from_polar(radius: f64, theta: f64) -> Self {
        Self::new(radius * theta.cos(), radius * theta.sin())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// `Re(self * conj(other))`, the Euclidean inner product.
    pub fn dot(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }

    pub fn cross(self, other: Self) -> f64 {
        self.re * other.im - self.im * other.re
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn sub(self, other: Self) -> Self {
        Self::new(self.re - other.re, self.im - other.im)
    }

    fn lex_le(self, other: Self) -> bool {
        (self.re, self.im) <= (other.re, other.im)
    }
}

/// Convex compact set in the plane.
///
/// Polygon vertices are stored counter-clockwise, strictly convex, starting
/// from the lexicographically smallest vertex so that equal bodies compare
/// equal field by field.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Polygon(Vec<PlanePoint>),
    Disk { center: PlanePoint, radius: f64 },
    Segment { a: PlanePoint, b: PlanePoint },
    Point(PlanePoint),
}

/// Arc length of the boundary, indexed by the outward normal direction.
///
/// Polygons contribute one atom per edge (angle = edge normal, weight = edge
/// length), a segment contributes two atoms of the full segment length, and a
/// disk carries the constant density `R` instead of a discretization. The
/// total mass always equals the perimeter of the body.
#[derive(Debug, Clone)]
pub struct ArcLengthMeasure {
    pub atoms: Vec<ArcAtom>,
    pub density: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ArcAtom {
    /// Outward normal direction in `[0, 2*pi)`.
    pub theta: f64,
    pub weight: f64,
}

impl ArcLengthMeasure {
    pub fn total_mass(&self) -> f64 {
        let atom_sum: f64 = self.atoms.iter().map(|a| a.weight).sum();
        atom_sum + self.density.unwrap_or(0.0) * std::f64::consts::TAU
    }
}

impl ConvexBody {
    pub fn polygon(vertices: Vec<PlanePoint>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidBody(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        for v in &vertices {
            if !v.is_finite() {
                return Err(GeometryError::InvalidBody("non-finite vertex".into()));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if b.sub(a).cross(c.sub(b)) <= 0.0 {
                return Err(GeometryError::InvalidBody(
                    "vertices must be strictly convex in counter-clockwise order".into(),
                ));
            }
        }
        Ok(Self::Polygon(canonical_cycle(vertices)))
    }

    pub fn disk(center: PlanePoint, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !center.is_finite() || !radius.is_finite() {
            return Err(GeometryError::InvalidBody(
                "disk needs a finite center and radius > 0".into(),
            ));
        }
        Ok(Self::Disk { center, radius })
    }

    pub fn segment(a: PlanePoint, b: PlanePoint) -> Result<Self, GeometryError> {
        if a == b {
            return Err(GeometryError::InvalidBody(
                "segment endpoints must be distinct".into(),
            ));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::InvalidBody("non-finite endpoint".into()));
        }
        Ok(if a.lex_le(b) {
            Self::Segment { a, b }
        } else {
            Self::Segment { a: b, b: a }
        })
    }

    pub fn point(p: PlanePoint) -> Result<Self, GeometryError> {
        if !p.is_finite() {
            return Err(GeometryError::InvalidBody("non-finite point".into()));
        }
        Ok(Self::Point(p))
    }

    pub fn vertices(&self) -> Vec<PlanePoint> {
        match self {
            Self::Polygon(v) => v.clone(),
            Self::Segment { a, b } => vec![*a, *b],
            Self::Point(p) => vec![*p],
            Self::Disk { .. } => Vec::new(),
        }
    }
}

/// Rotate a strictly convex CCW vertex cycle so it starts at the
/// lexicographically smallest vertex.
fn canonical_cycle(vertices: Vec<PlanePoint>) -> Vec<PlanePoint> {
    let start = vertices
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| {
            (p.re, p.im)
                .partial_cmp(&(q.re, q.im))
                .expect("finite coordinates")
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = Vec::with_capacity(vertices.len());
    out.extend_from_slice(&vertices[start..]);
    out.extend_from_slice(&vertices[..start]);
    out
}

/// Convex hull of a finite point set (monotone chain).
///
/// Degenerates to a segment for collinear input and to a point when all
/// points coincide. Interior and collinear boundary points are dropped, so
/// the polygon output is strictly convex; ordering is deterministic.
pub fn convex_hull(points: &[PlanePoint]) -> Result<ConvexBody, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    for p in points {
        if !p.is_finite() {
            return Err(GeometryError::InvalidBody("non-finite input point".into()));
        }
    }

    let mut pts: Vec<PlanePoint> = points.to_vec();
    pts.sort_by(|p, q| (p.re, p.im).partial_cmp(&(q.re, q.im)).unwrap());
    pts.dedup();

    if pts.len() == 1 {
        return ConvexBody::point(pts[0]);
    }

    let scale = pts
        .iter()
        .flat_map(|p| [p.re.abs(), p.im.abs()])
        .fold(f64::MIN_POSITIVE, f64::max);
    // Cross products scale like length^2.
    let tol = COLLINEARITY_REL_TOL * scale * scale;

    let turns_right = |o: PlanePoint, a: PlanePoint, b: PlanePoint| {
        a.sub(o).cross(b.sub(o)) <= tol
    };

    let mut lower: Vec<PlanePoint> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turns_right(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<PlanePoint> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turns_right(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }

    lower.pop();
    upper.pop();
    lower.extend(upper);

    match lower.len() {
        0 | 1 => ConvexBody::point(pts[0]),
        2 => ConvexBody::segment(lower[0], lower[1]),
        _ => Ok(ConvexBody::Polygon(canonical_cycle(lower))),
    }
}

/// Boundary length. Degenerate conventions: a segment's boundary is the
/// segment traversed twice, a point has zero perimeter.
pub fn perimeter(body: &ConvexBody) -> f64 {
    match body {
        ConvexBody::Polygon(v) => {
            let n = v.len();
            let mut edges: Vec<f64> = (0..n).map(|i| v[(i + 1) % n].sub(v[i]).abs()).collect();
            // Summation order must not depend on the vertex cycle start or
            // orientation, so mirrored bodies get bit-identical perimeters.
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.iter().sum()
        }
        ConvexBody::Disk { radius, .. } => std::f64::consts::TAU * radius,
        ConvexBody::Segment { a, b } => 2.0 * b.sub(*a).abs(),
        ConvexBody::Point(_) => 0.0,
    }
}

/// Support function `sup { Re(s * conj(z)) : s in body }`.
///
/// Positively homogeneous and convex in `z`.
pub fn support(body: &ConvexBody, z: PlanePoint) -> f64 {
    match body {
        ConvexBody::Polygon(v) => v
            .iter()
            .map(|s| s.dot(z))
            .fold(f64::NEG_INFINITY, f64::max),
        ConvexBody::Disk { center, radius } => center.dot(z) + radius * z.abs(),
        ConvexBody::Segment { a, b } => a.dot(z).max(b.dot(z)),
        ConvexBody::Point(p) => p.dot(z),
    }
}

/// Reflection across the real axis, `z -> conj(z)`. Preserves perimeter.
pub fn mirror(body: &ConvexBody) -> ConvexBody {
    match body {
        ConvexBody::Polygon(v) => {
            // Conjugation reverses orientation; reverse the cycle to stay CCW.
            let mut w: Vec<PlanePoint> = v.iter().rev().map(|p| p.conj()).collect();
            w = canonical_cycle(w);
            ConvexBody::Polygon(w)
        }
        ConvexBody::Disk { center, radius } => ConvexBody::Disk {
            center: center.conj(),
            radius: *radius,
        },
        ConvexBody::Segment { a, b } => {
            ConvexBody::segment(a.conj(), b.conj()).expect("mirrored segment stays valid")
        }
        ConvexBody::Point(p) => ConvexBody::Point(p.conj()),
    }
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can return TAU when theta is a tiny negative number.
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

/// Arc-length measure of the boundary, indexed by outward normal angle.
///
/// Errors on a point body, whose boundary carries no length.
pub fn arc_length_measure(body: &ConvexBody) -> Result<ArcLengthMeasure, GeometryError> {
    match body {
        ConvexBody::Point(_) => Err(GeometryError::ZeroPerimeterBody),
        ConvexBody::Disk { radius, .. } => Ok(ArcLengthMeasure {
            atoms: Vec::new(),
            density: Some(*radius),
        }),
        ConvexBody::Segment { a, b } => {
            let d = b.sub(*a);
            let len = d.abs();
            // Outward normals of the doubly-traversed segment: +/- the
            // perpendicular of the direction.
            let theta = normalize_angle(f64::atan2(-d.re, d.im));
            let opposite = normalize_angle(theta + std::f64::consts::PI);
            let mut atoms = vec![
                ArcAtom { theta, weight: len },
                ArcAtom {
                    theta: opposite,
                    weight: len,
                },
            ];
            atoms.sort_by(|x, y| x.theta.partial_cmp(&y.theta).unwrap());
            Ok(ArcLengthMeasure {
                atoms,
                density: None,
            })
        }
        ConvexBody::Polygon(v) => {
            let n = v.len();
            let mut atoms = Vec::with_capacity(n);
            for i in 0..n {
                let d = v[(i + 1) % n].sub(v[i]);
                // Outward normal of a CCW edge is the direction rotated by -90 degrees.
                let theta = normalize_angle(f64::atan2(-d.re, d.im));
                atoms.push(ArcAtom {
                    theta,
                    weight: d.abs(),
                });
            }
            atoms.sort_by(|x, y| x.theta.partial_cmp(&y.theta).unwrap());
            Ok(ArcLengthMeasure {
                atoms,
                density: None,
            })
        }
    }
}
