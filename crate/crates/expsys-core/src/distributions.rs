//! Finite point distributions on the plane: the radial counting function,
//! upper-density estimates, exact Stieltjes sums against the counting
//! measure, and the transformed counting-function integrand.
//!
//! Every distribution here is a finite truncation, so the limit functionals
//! of the criteria become windowed grid estimates. Generators record their
//! truncation radius; sweep windows are clipped against it downstream.

use crate::convexfun::ConvexDecreasingFunction;
use crate::geometry::PlanePoint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("empty window")]
    EmptyWindow,
    #[error("grid must be non-empty and strictly increasing with r > 0")]
    BadGrid,
    #[error("multiplicities must be >= 1")]
    ZeroMultiplicity,
}

/// Weighted finite point multiset standing for a distribution of exponents.
/// Entries with equal points are merged.
#[derive(Debug, Clone)]
pub struct PointDistribution {
    entries: Vec<(PlanePoint, u32)>,
    label: String,
    truncation_radius: Option<f64>,
}

impl PointDistribution {
    pub fn new(
        points: Vec<(PlanePoint, u32)>,
        label: impl Into<String>,
    ) -> Result<Self, DistributionError> {
        if points.iter().any(|&(_, m)| m == 0) {
            return Err(DistributionError::ZeroMultiplicity);
        }
        let mut entries: Vec<(PlanePoint, u32)> = Vec::with_capacity(points.len());
        for (p, m) in points {
            match entries.iter_mut().find(|(q, _)| *q == p) {
                Some((_, mm)) => *mm += m,
                None => entries.push((p, m)),
            }
        }
        entries.sort_by(|(p, _), (q, _)| {
            (p.abs(), p.re, p.im)
                .partial_cmp(&(q.abs(), q.re, q.im))
                .unwrap()
        });
        Ok(Self {
            entries,
            label: label.into(),
            truncation_radius: None,
        })
    }

    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            entries: Vec::new(),
            label: label.into(),
            truncation_radius: None,
        }
    }

    /// Zeros of a sine-type function: `pi k / sigma` for `|k| <= count`,
    /// all simple, truncated at radius `pi count / sigma`.
    pub fn sine_lattice(sigma: f64, count: u32) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        let step = std::f64::consts::PI / sigma;
        let mut points = Vec::with_capacity(2 * count as usize + 1);
        points.push((PlanePoint::new(0.0, 0.0), 1));
        for k in 1..=count {
            let x = step * k as f64;
            points.push((PlanePoint::new(x, 0.0), 1));
            points.push((PlanePoint::new(-x, 0.0), 1));
        }
        let mut z = Self::new(points, format!("sine_lattice(sigma={sigma},count={count})"))
            .expect("positive multiplicities");
        z.truncation_radius = Some(step * count as f64);
        z
    }

    /// Radii in geometric progression on the positive real axis.
    pub fn geometric_radii(first: f64, ratio: f64, count: u32) -> Self {
        assert!(first > 0.0 && ratio > 1.0, "need first > 0, ratio > 1");
        let mut points = Vec::with_capacity(count as usize);
        let mut r = first;
        for _ in 0..count {
            points.push((PlanePoint::new(r, 0.0), 1));
            r *= ratio;
        }
        let mut z = Self::new(
            points,
            format!("geometric(first={first},ratio={ratio},count={count})"),
        )
        .expect("positive multiplicities");
        z.truncation_radius = Some(first * ratio.powi(count as i32 - 1));
        z
    }

    /// Seeded points with uniform radii in `(0, r_max]` and uniform angles.
    pub fn random_uniform(count: u32, r_max: f64, seed: u64) -> Self {
        assert!(r_max > 0.0, "r_max must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let radius = r_max * (1.0 - rng.gen::<f64>());
            let theta = std::f64::consts::TAU * rng.gen::<f64>();
            points.push((PlanePoint::from_polar(radius, theta), 1));
        }
        let mut z = Self::new(
            points,
            format!("random(count={count},r_max={r_max},seed={seed})"),
        )
        .expect("positive multiplicities");
        z.truncation_radius = Some(r_max);
        z
    }

    pub fn with_truncation_radius(mut self, radius: f64) -> Self {
        self.truncation_radius = Some(radius);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        self.truncation_radius
    }

    pub fn entries(&self) -> &[(PlanePoint, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| m as u64).sum()
    }

    /// Merge two distributions (multiplicities add on shared points).
    pub fn union(&self, other: &Self) -> Self {
        let mut points: Vec<(PlanePoint, u32)> = self.entries.clone();
        points.extend_from_slice(&other.entries);
        let mut z = Self::new(points, format!("{}+{}", self.label, other.label))
            .expect("positive multiplicities");
        z.truncation_radius = match (self.truncation_radius, other.truncation_radius) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (t, None) | (None, t) => t,
        };
        z
    }

    pub fn radial_counting(&self) -> RadialCounting {
        RadialCounting::from_distribution(self)
    }
}

/// Right-continuous counting step function `r -> Z(closed disk of radius r)`.
#[derive(Debug, Clone)]
pub struct RadialCounting {
    jump_radii: Vec<f64>,
    cumulative: Vec<u64>,
}

impl RadialCounting {
    fn from_distribution(z: &PointDistribution) -> Self {
        let mut radii: Vec<(f64, u64)> = z
            .entries
            .iter()
            .map(|&(p, m)| (p.abs(), m as u64))
            .collect();
        radii.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut jump_radii = Vec::new();
        let mut cumulative = Vec::new();
        let mut running = 0u64;
        for (r, m) in radii {
            running += m;
            match jump_radii.last() {
                Some(&last) if last == r => {
                    *cumulative.last_mut().unwrap() = running;
                }
                _ => {
                    jump_radii.push(r);
                    cumulative.push(running);
                }
            }
        }
        Self {
            jump_radii,
            cumulative,
        }
    }

    /// Count of points with `|z| <= r`, with multiplicity.
    pub fn value_at(&self, r: f64) -> u64 {
        match self.jump_radii.partition_point(|&j| j <= r) {
            0 => 0,
            i => self.cumulative[i - 1],
        }
    }

    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn jump_radii(&self) -> &[f64] {
        &self.jump_radii
    }

    /// Exact count over the half-open window `(r, big_r]`.
    pub fn count_in_window(&self, r: f64, big_r: f64) -> u64 {
        self.value_at(big_r) - self.value_at(r)
    }

    /// Exact integral `\int_a^b Z^rad(t) k(t) dt` for a kernel given through
    /// its antiderivative `K`; the counting function is constant between
    /// jumps, so the integral is a finite sum of `count * (K(hi) - K(lo))`.
    pub fn step_weighted_integral(&self, a: f64, b: f64, antiderivative: impl Fn(f64) -> f64) -> f64 {
        assert!(a <= b, "need a <= b");
        if a == b {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        let start = self.jump_radii.partition_point(|&j| j <= a);
        for i in start..self.jump_radii.len() {
            let j = self.jump_radii[i];
            if j >= b {
                break;
            }
            let count = self.value_at(lo);
            if count > 0 {
                total += count as f64 * (antiderivative(j) - antiderivative(lo));
            }
            lo = j;
        }
        let count = self.value_at(lo);
        if count > 0 {
            total += count as f64 * (antiderivative(b) - antiderivative(lo));
        }
        total
    }

    /// As `step_weighted_integral` but with a per-piece integrator
    /// `piece(lo, hi)` for kernels without a closed antiderivative.
    pub fn step_weighted_integral_by(&self, a: f64, b: f64, piece: impl Fn(f64, f64) -> f64) -> f64 {
        assert!(a <= b, "need a <= b");
        if a == b {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        let start = self.jump_radii.partition_point(|&j| j <= a);
        for i in start..self.jump_radii.len() {
            let j = self.jump_radii[i];
            if j >= b {
                break;
            }
            let count = self.value_at(lo);
            if count > 0 {
                total += count as f64 * piece(lo, j);
            }
            lo = j;
        }
        let count = self.value_at(lo);
        if count > 0 {
            total += count as f64 * piece(lo, b);
        }
        total
    }
}

/// Upper-density estimate `max Z^rad(r)/r` over a grid, with the maximizer.
#[derive(Debug, Clone, Copy)]
pub struct DensityEstimate {
    pub estimate: f64,
    pub at_radius: f64,
}

/// Finite-truncation estimate of the upper density: the maximum of
/// `Z^rad(r)/r` over the supplied grid, reported with the maximizing radius.
pub fn upper_density(
    z: &PointDistribution,
    r_grid: &[f64],
) -> Result<DensityEstimate, DistributionError> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| r <= 0.0) {
        return Err(DistributionError::BadGrid);
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DistributionError::BadGrid);
    }
    let counting = z.radial_counting();
    let mut best = DensityEstimate {
        estimate: 0.0,
        at_radius: r_grid[0],
    };
    for &r in r_grid {
        let v = counting.value_at(r) as f64 / r;
        if v > best.estimate {
            best = DensityEstimate {
                estimate: v,
                at_radius: r,
            };
        }
    }
    Ok(best)
}

/// Exact Stieltjes sum `\int_(r, R] g(t) dZ^rad(t)`: the sum of
/// `mult * g(|z|)` over points with `r < |z| <= R`.
pub fn stieltjes_integral(
    z: &PointDistribution,
    g: impl Fn(f64) -> f64,
    r: f64,
    big_r: f64,
) -> Result<f64, DistributionError> {
    if !(r < big_r) {
        return Err(DistributionError::EmptyWindow);
    }
    let mut total = 0.0;
    for &(p, m) in &z.entries {
        let t = p.abs();
        if t > r && t <= big_r {
            total += m as f64 * g(t);
        }
    }
    Ok(total)
}

/// The window integral `\int_r^R Z^rad(t)/t^2 (f(t^2) - 2 t f'_+(t^2)) dt`,
/// the transformed form of the Stieltjes integral against `f(t^2)/t`.
/// Exact piecewise between the jump radii of the counting function.
pub fn transformed_integrand(
    z: &PointDistribution,
    f: &ConvexDecreasingFunction,
    r: f64,
    big_r: f64,
) -> Result<f64, DistributionError> {
    if !(r < big_r) || r <= 0.0 {
        return Err(DistributionError::EmptyWindow);
    }
    let counting = z.radial_counting();
    Ok(counting.step_weighted_integral_by(r, big_r, |lo, hi| f.transformed_kernel_integral(lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_of_radii(radii: &[f64]) -> PointDistribution {
        PointDistribution::new(
            radii
                .iter()
                .map(|&r| (PlanePoint::new(r, 0.0), 1u32))
                .collect(),
            "test",
        )
        .unwrap()
    }

    #[test]
    fn radial_counting_counts_closed_disks() {
        let z = z_of_radii(&[1.0, 2.0, 3.0]);
        let c = z.radial_counting();
        assert_eq!(c.value_at(0.5), 0);
        assert_eq!(c.value_at(1.0), 1);
        assert_eq!(c.value_at(2.5), 2);
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn radial_counting_of_truncated_lattice() {
        // pi k / sigma with sigma = pi gives the integer lattice.
        let z = PointDistribution::sine_lattice(std::f64::consts::PI, 50);
        let c = z.radial_counting();
        for &r in &[0.5f64, 1.0, 7.3, 20.0, 49.9] {
            let expected = 2 * (r.floor() as u64) + 1;
            assert_eq!(c.value_at(r), expected, "r = {r}");
        }
    }

    #[test]
    fn generators_record_truncation() {
        let g = PointDistribution::geometric_radii(1.0, 2.0, 6);
        assert_eq!(g.total_multiplicity(), 6);
        assert_eq!(g.truncation_radius(), Some(32.0));
        assert_eq!(g.radial_counting().value_at(8.0), 4);
        let r = PointDistribution::random_uniform(50, 10.0, 42);
        assert_eq!(r.truncation_radius(), Some(10.0));
        assert!(r.entries().iter().all(|&(p, _)| p.abs() <= 10.0));
        // Seeded: same seed, same points.
        let r2 = PointDistribution::random_uniform(50, 10.0, 42);
        assert_eq!(r.entries(), r2.entries());
    }

    #[test]
    fn multiplicity_at_origin_counts_at_zero() {
        let z = PointDistribution::new(vec![(PlanePoint::new(0.0, 0.0), 3)], "origin").unwrap();
        assert_eq!(z.radial_counting().value_at(0.0), 3);
    }

    #[test]
    fn merging_equal_points_adds_multiplicity() {
        let p = PlanePoint::new(1.0, 2.0);
        let z = PointDistribution::new(vec![(p, 1), (p, 2)], "dup").unwrap();
        assert_eq!(z.entries().len(), 1);
        assert_eq!(z.total_multiplicity(), 3);
    }

    #[test]
    fn upper_density_on_lattice_grid() {
        let z = PointDistribution::sine_lattice(std::f64::consts::PI, 200);
        let grid: Vec<f64> = (20..=100).map(|k| k as f64).collect();
        let d = upper_density(&z, &grid).unwrap();
        assert!((d.estimate - 2.0).abs() / 2.0 < 0.05, "estimate {}", d.estimate);
    }

    #[test]
    fn upper_density_of_single_point_peaks_at_its_radius() {
        let z = z_of_radii(&[1.0]);
        let d = upper_density(&z, &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(d.estimate, 1.0);
        assert_eq!(d.at_radius, 1.0);
    }

    #[test]
    fn upper_density_of_empty_is_zero_and_grid_validated() {
        let z = PointDistribution::empty("none");
        assert_eq!(upper_density(&z, &[1.0, 2.0]).unwrap().estimate, 0.0);
        assert_eq!(
            upper_density(&z, &[-1.0, 2.0]).unwrap_err(),
            DistributionError::BadGrid
        );
    }

    #[test]
    fn stieltjes_sum_uses_half_open_window() {
        let z = z_of_radii(&[1.0, 2.0, 3.0]);
        let got = stieltjes_integral(&z, |t| 1.0 / t, 0.5, 2.5).unwrap();
        assert!((got - 1.5).abs() < 1e-15);
        // Left endpoint excluded, right included.
        assert_eq!(stieltjes_integral(&z, |_| 1.0, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(stieltjes_integral(&z, |_| 1.0, 3.5, 9.0).unwrap(), 0.0);
        assert_eq!(
            stieltjes_integral(&z, |_| 1.0, 2.0, 2.0).unwrap_err(),
            DistributionError::EmptyWindow
        );
    }

    #[test]
    fn stieltjes_matches_brute_force_on_lattice() {
        let z = z_of_radii(&(1..=100).map(|k| k as f64).collect::<Vec<_>>());
        let got = stieltjes_integral(&z, |t| 1.0 / (t * t), 0.0, 100.0).unwrap();
        let brute: f64 = (1..=100).map(|k| 1.0 / (k as f64 * k as f64)).sum();
        assert!((got - brute).abs() < 1e-14);
        assert!((got - 1.6350).abs() < 5e-4);
    }

    #[test]
    fn stieltjes_is_additive_over_windows() {
        let z = PointDistribution::sine_lattice(1.0, 40);
        let g = |t: f64| 1.0 / (1.0 + t);
        let whole = stieltjes_integral(&z, g, 0.5, 90.0).unwrap();
        let left = stieltjes_integral(&z, g, 0.5, 31.0).unwrap();
        let right = stieltjes_integral(&z, g, 31.0, 90.0).unwrap();
        assert!((whole - left - right).abs() < 1e-12);
    }

    #[test]
    fn counting_consistency_with_unit_kernel() {
        let z = PointDistribution::sine_lattice(2.0, 30);
        let c = z.radial_counting();
        let got = stieltjes_integral(&z, |_| 1.0, 3.0, 20.0).unwrap();
        assert_eq!(got, (c.value_at(20.0) - c.value_at(3.0)) as f64);
    }

    #[test]
    fn transformed_integrand_constant_weight_closed_form() {
        // f == 1 reduces the kernel to Z^rad(t)/t^2; single point at radius 1.
        let z = z_of_radii(&[1.0]);
        let f = ConvexDecreasingFunction::constant(1.0).unwrap();
        let got = transformed_integrand(&z, &f, 1.0, 2.0).unwrap();
        assert!((got - 0.5).abs() < 1e-14);
        let empty = PointDistribution::empty("none");
        assert_eq!(transformed_integrand(&empty, &f, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn transformed_stays_near_stieltjes_for_unit_weight() {
        // The two window forms differ by the boundary terms only, which stay
        // O(1) on a bounded-density lattice; check there is no growth trend.
        let z = PointDistribution::sine_lattice(1.0, 4000);
        let f = ConvexDecreasingFunction::constant(1.0).unwrap();
        let r = 2.0;
        let mut lns = Vec::new();
        let mut diffs = Vec::new();
        let mut scale: f64 = 0.0;
        for k in 0..13 {
            let big_r = 50.0 * 1.5f64.powi(k);
            let st = stieltjes_integral(&z, |t| f.eval(t * t) / t, r, big_r).unwrap();
            let tr = transformed_integrand(&z, &f, r, big_r).unwrap();
            lns.push(big_r.ln());
            diffs.push(st - tr);
            scale = scale.max(st.abs());
        }
        // Trend over the upper half of the window, past the small-R transient.
        let half = lns.len() / 2;
        let slope = crate::quad::regression_slope(&lns[half..], &diffs[half..]);
        assert!(
            slope.abs() < 1e-3 * scale,
            "slope {slope} too large vs scale {scale}"
        );
        let spread = diffs.iter().cloned().fold(f64::MIN, f64::max)
            - diffs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 2.0, "difference spread {spread} not bounded");
    }

    #[test]
    fn step_weighted_integral_matches_closed_form() {
        // Z^rad for the integer lattice is 2 floor(t) + 1; integrate 1/t.
        let z = PointDistribution::sine_lattice(std::f64::consts::PI, 10);
        let c = z.radial_counting();
        let got = c.step_weighted_integral(1.0, 4.0, |t| t.ln());
        let expected = 3.0 * (2.0f64).ln() + 5.0 * (1.5f64).ln() + 7.0 * (4.0f64 / 3.0).ln();
        assert!((got - expected).abs() < 1e-12);
    }
}
