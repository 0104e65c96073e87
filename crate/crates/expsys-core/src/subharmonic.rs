//! Radial test functions on the punctured plane built from a convex
//! decreasing weight `f`: the truncated profile
//! `F_R(x) = (f(x^2)/x - f(R^2)/R)^+`, its radial extension `V`, the C^2
//! companions `v_n`/`V_n` obtained from smoothing stages, the inversion
//! `V*` across the inner circle, the closed-form Laplacian and the outer
//! normal-derivative bound on the inner circle of an annulus.

use crate::convexfun::{ConvexDecreasingFunction, ConvexFunError, SmoothStage};
use crate::geometry::PlanePoint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SubharmonicError {
    #[error("need 0 < inner radius < outer radius")]
    BadRadii,
    #[error("no second derivative at x = {0}: not a C^2 point")]
    NotTwiceDifferentiable(f64),
    #[error("bound valid only for r > 1")]
    BoundNeedsRAboveOne,
    #[error(transparent)]
    Weight(#[from] ConvexFunError),
}

/// The radial weight behind a profile: either a catalog member or one C^2
/// smoothing stage.
#[derive(Debug, Clone)]
pub enum RadialWeight {
    Base(ConvexDecreasingFunction),
    Stage(SmoothStage),
}

impl RadialWeight {
    pub fn eval(&self, x: f64) -> Result<f64, ConvexFunError> {
        match self {
            Self::Base(f) => Ok(f.eval(x)),
            Self::Stage(s) => s.eval(x),
        }
    }

    pub fn one_sided(&self, x: f64) -> Result<(f64, f64), ConvexFunError> {
        match self {
            Self::Base(f) => Ok(f.derivatives_extended(x)),
            Self::Stage(s) => {
                let d = s.derivative(x)?;
                Ok((d, d))
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> Result<Option<f64>, ConvexFunError> {
        match self {
            Self::Base(f) => Ok(f.second_derivative(x)),
            Self::Stage(s) => s.second_derivative(x).map(Some),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Base(f) => f.describe(),
            Self::Stage(s) => format!("smoothing stage n={}", s.n),
        }
    }
}

/// A radial profile attached to an annulus `inner_r < |z| < outer_r`.
#[derive(Debug, Clone)]
pub struct RadialSubharmonic {
    weight: RadialWeight,
    inner_r: f64,
    outer_r: f64,
}

impl RadialSubharmonic {
    pub fn new(weight: RadialWeight, inner_r: f64, outer_r: f64) -> Result<Self, SubharmonicError> {
        if !(0.0 < inner_r && inner_r < outer_r) || !outer_r.is_finite() {
            return Err(SubharmonicError::BadRadii);
        }
        Ok(Self {
            weight,
            inner_r,
            outer_r,
        })
    }

    pub fn from_weight(
        f: &ConvexDecreasingFunction,
        inner_r: f64,
        outer_r: f64,
    ) -> Result<Self, SubharmonicError> {
        Self::new(RadialWeight::Base(f.clone()), inner_r, outer_r)
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_r
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_r
    }

    fn tail_level(&self) -> Result<f64, ConvexFunError> {
        Ok(self.weight.eval(self.outer_r * self.outer_r)? / self.outer_r)
    }

    /// `F_R(x) = (f(x^2)/x - f(R^2)/R)^+`; positive on `(0, R)`, zero from
    /// `R` on.
    pub fn f_r_eval(&self, x: f64) -> Result<f64, SubharmonicError> {
        assert!(x > 0.0, "radial argument must be positive");
        if x >= self.outer_r {
            return Ok(0.0);
        }
        let v = self.weight.eval(x * x)? / x - self.tail_level()?;
        Ok(v.max(0.0))
    }

    /// One-sided radial derivatives of `F_R`: `-f(x^2)/x^2 + 2 f'_(+-)(x^2)`
    /// inside `(0, R)`, the left formula plus a zero right derivative at the
    /// kink `x = R`, and zero beyond.
    pub fn f_r_one_sided_derivative(&self, x: f64) -> Result<(f64, f64), SubharmonicError> {
        assert!(x > 0.0, "radial argument must be positive");
        if x > self.outer_r {
            return Ok((0.0, 0.0));
        }
        let x2 = x * x;
        let (dl, dr) = self.weight.one_sided(x2)?;
        let head = -self.weight.eval(x2)? / x2;
        if x == self.outer_r {
            return Ok((head + 2.0 * dl, 0.0));
        }
        Ok((head + 2.0 * dl, head + 2.0 * dr))
    }

    /// The profile without the positive-part truncation, `v(x) = f(x^2)/x -
    /// f(R^2)/R`; C^2 whenever the weight is.
    pub fn v_eval(&self, x: f64) -> Result<f64, SubharmonicError> {
        assert!(x > 0.0);
        Ok(self.weight.eval(x * x)? / x - self.tail_level()?)
    }

    /// Closed-form Laplacian of the radial profile at radius `r`:
    /// `f(r^2)/r^3 + 4 r f''(r^2)`, non-negative for convex positive weights.
    pub fn laplacian_closed_form(&self, r: f64) -> Result<f64, SubharmonicError> {
        assert!(r > 0.0);
        let x2 = r * r;
        let d2 = self
            .weight
            .second_derivative(x2)?
            .ok_or(SubharmonicError::NotTwiceDifferentiable(x2))?;
        Ok(self.weight.eval(x2)? / (x2 * r) + 4.0 * r * d2)
    }

    /// The inversion `V*` of the annulus profile across the inner circle,
    /// as a function of `|z|`: the profile itself on `(r, R]`, the reflected
    /// profile on `(r^2/R, r]`, zero elsewhere.
    pub fn v_star_radial(&self, rho: f64) -> Result<f64, SubharmonicError> {
        assert!(rho >= 0.0);
        let r = self.inner_r;
        let big_r = self.outer_r;
        if rho <= r * r / big_r || rho > big_r {
            return Ok(0.0);
        }
        let tail = self.tail_level()?;
        let v = if rho > r {
            self.weight.eval(rho * rho)? / rho - tail
        } else {
            let arg = (r * r / rho) * (r * r / rho);
            (rho / (r * r)) * self.weight.eval(arg)? - tail
        };
        Ok(v.max(0.0))
    }

    pub fn inversion_eval(&self, z: PlanePoint) -> Result<f64, SubharmonicError> {
        self.v_star_radial(z.abs())
    }

    /// Magnitude of the normal derivative of the profile on the circle of
    /// radius `rho`, the quantity the `3 f_1(r)/(r(r-1))` bound dominates.
    pub fn normal_derivative_magnitude(&self, rho: f64) -> Result<f64, SubharmonicError> {
        let (left, _) = self.f_r_one_sided_derivative(rho)?;
        Ok(left.abs())
    }

    /// Signed radial derivative of the profile on the inner circle, taken
    /// from inside the annulus (the derivative along the normal that points
    /// out of the inner disk). Non-positive for decreasing profiles; this is
    /// the factor the circle term of the mass inequality carries: the
    /// distributional Laplacian of the inversion profile puts the line
    /// density `2 (F_R)'_+(r)` on the inner circle.
    pub fn inner_circle_radial_derivative(&self, rho: f64) -> Result<f64, SubharmonicError> {
        let (_, right) = self.f_r_one_sided_derivative(rho)?;
        Ok(right)
    }
}

/// The explicit bound `3 f_1(r) / (r (r - 1))` dominating the outer normal
/// derivative of the whole profile family on the inner circle, valid for
/// `1 < r < R`. `dominating` must be a weight at or above every member of
/// the family (the first smoothing stage, or the base weight itself).
pub fn normal_derivative_bound(
    dominating: &RadialWeight,
    r: f64,
) -> Result<f64, SubharmonicError> {
    if !(r > 1.0) {
        return Err(SubharmonicError::BoundNeedsRAboveOne);
    }
    Ok(3.0 * dominating.eval(r)? / (r * (r - 1.0)))
}

/// Polar five-point finite-difference Laplacian of a radial function:
/// `d2/drho2 + (1/rho) d/drho` plus the angular second difference, which
/// vanishes identically for radial data but participates in the stencil.
pub fn polar_laplacian_fd(
    profile: impl Fn(f64) -> f64,
    rho: f64,
    rel_step: f64,
) -> f64 {
    let h = rel_step * rho;
    let center = profile(rho);
    let up = profile(rho + h);
    let down = profile(rho - h);
    let radial2 = (up - 2.0 * center + down) / (h * h);
    let radial1 = (up - down) / (2.0 * h);
    // Angular neighbors of a radial function coincide with the center value.
    let dtheta = 1e-3;
    let angular = (center - 2.0 * center + center) / (rho * rho * dtheta * dtheta);
    radial2 + radial1 / rho + angular
}
