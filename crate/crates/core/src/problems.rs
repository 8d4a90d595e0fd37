//! Manufactured problems with piecewise-constant diffusion whose closed-form
//! solutions keep both the value and the conormal flux continuous across the
//! interface.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{constant, CoefficientField, GradFn, ProblemSpec, ScalarFn};
use crate::geometry::{DomainSpec, InterfaceCurve, Point2, RegionId};

/// Piecewise closed-form solution, one branch per region. Branches must agree
/// in value on the interface and satisfy flux continuity there.
#[derive(Clone)]
pub struct ExactSolution {
    pub value1: ScalarFn,
    pub value2: ScalarFn,
    pub grad1: GradFn,
    pub grad2: GradFn,
    pub seminorm_h2: Option<f64>,
}

impl ExactSolution {
    pub fn value(&self, region: RegionId, p: Point2) -> f64 {
        match region {
            RegionId::Region1 => (self.value1)(p),
            RegionId::Region2 => (self.value2)(p),
        }
    }

    pub fn grad(&self, region: RegionId, p: Point2) -> [f64; 2] {
        match region {
            RegionId::Region1 => (self.grad1)(p),
            RegionId::Region2 => (self.grad2)(p),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidInput(format!(
            "{name} must lie in (0, 1), got {v}"
        )));
    }
    Ok(())
}

/// Unit disk with a concentric circular interface at radius `r0`. The
/// solution is a pair of paraboloids in r glued so that u and B du/dr are
/// continuous at r0; f = 4 and u = 0 on the outer circle.
pub fn radial_problem(b1: f64, b2: f64, r0: f64) -> Result<ProblemSpec> {
    check_positive("B1", b1)?;
    check_positive("B2", b2)?;
    check_unit_open("r0", r0)?;
    let center = Point2::new(0.0, 0.0);
    let domain = DomainSpec::disk(center, 1.0, InterfaceCurve::circle(center, r0)?)?;
    let a = r0 * r0 / b1 + (1.0 - r0 * r0) / b2;
    let exact = ExactSolution {
        value1: Arc::new(move |p: Point2| a - (p.x * p.x + p.y * p.y) / b1),
        value2: Arc::new(move |p: Point2| (1.0 - (p.x * p.x + p.y * p.y)) / b2),
        grad1: Arc::new(move |p: Point2| [-2.0 * p.x / b1, -2.0 * p.y / b1]),
        grad2: Arc::new(move |p: Point2| [-2.0 * p.x / b2, -2.0 * p.y / b2]),
        seminorm_h2: None,
    };
    Ok(ProblemSpec {
        domain,
        coeffs: CoefficientField {
            b1: constant(b1),
            b2: constant(b2),
            sigma: constant(0.0),
            f: constant(4.0),
        },
        dirichlet: constant(0.0),
        exact: Some(exact),
    })
}

/// Unit square split by the vertical line x = x0. The solution depends on x
/// only and solves -(B u')' = 1 with u(0) = u(1) = 0; Dirichlet data on the
/// top and bottom edges is the trace of that one-dimensional profile.
pub fn line_problem(b1: f64, b2: f64, x0: f64) -> Result<ProblemSpec> {
    check_positive("B1", b1)?;
    check_positive("B2", b2)?;
    check_unit_open("x0", x0)?;
    let curve = InterfaceCurve::polyline(vec![Point2::new(x0, 0.0), Point2::new(x0, 1.0)])?;
    let domain = DomainSpec::unit_square(curve)?;
    // flux B u' = c - x everywhere; c is fixed by u(1) = 0
    let c = (x0 * x0 / (2.0 * b1) + (1.0 - x0 * x0) / (2.0 * b2)) / (x0 / b1 + (1.0 - x0) / b2);
    let u1 = move |x: f64| (c * x - 0.5 * x * x) / b1;
    let u1_at_x0 = u1(x0);
    let u2 = move |x: f64| u1_at_x0 + (c * (x - x0) - 0.5 * (x * x - x0 * x0)) / b2;
    let exact = ExactSolution {
        value1: Arc::new(move |p: Point2| u1(p.x)),
        value2: Arc::new(move |p: Point2| u2(p.x)),
        grad1: Arc::new(move |p: Point2| [(c - p.x) / b1, 0.0]),
        grad2: Arc::new(move |p: Point2| [(c - p.x) / b2, 0.0]),
        seminorm_h2: None,
    };
    Ok(ProblemSpec {
        domain,
        coeffs: CoefficientField {
            b1: constant(b1),
            b2: constant(b2),
            sigma: constant(0.0),
            f: constant(1.0),
        },
        dirichlet: Arc::new(move |p: Point2| if p.x <= x0 { u1(p.x) } else { u2(p.x) }),
        exact: Some(exact),
    })
}

/// Continuous-coefficient control on the unit disk: B = 1 on both sides of a
/// geometrically present interface, u = 1 - r^2, f = 4.
pub fn smooth_problem() -> ProblemSpec {
    radial_problem(1.0, 1.0, 0.5).expect("constants are valid")
}

/// Radial paraboloid pair posed on the unit square, with the circular
/// interface centered at (1/2, 1/2) and scaled to radius r0/2 so it stays
/// strictly interior. Meant for meshes that do not fit the interface; the
/// boundary data is the trace of the outer branch.
pub fn radial_unfitted_problem(b1: f64, b2: f64, r0: f64) -> Result<ProblemSpec> {
    check_positive("B1", b1)?;
    check_positive("B2", b2)?;
    check_unit_open("r0", r0)?;
    let center = Point2::new(0.5, 0.5);
    let rho0 = 0.5 * r0;
    let domain = DomainSpec::unit_square(InterfaceCurve::circle(center, rho0)?)?;
    let a = rho0 * rho0 / b1 + (0.25 - rho0 * rho0) / b2;
    let rho2 = move |p: Point2| {
        let dx = p.x - 0.5;
        let dy = p.y - 0.5;
        dx * dx + dy * dy
    };
    let value2: ScalarFn = Arc::new(move |p: Point2| (0.25 - rho2(p)) / b2);
    let exact = ExactSolution {
        value1: Arc::new(move |p: Point2| a - rho2(p) / b1),
        value2: value2.clone(),
        grad1: Arc::new(move |p: Point2| [-2.0 * (p.x - 0.5) / b1, -2.0 * (p.y - 0.5) / b1]),
        grad2: Arc::new(move |p: Point2| [-2.0 * (p.x - 0.5) / b2, -2.0 * (p.y - 0.5) / b2]),
        seminorm_h2: None,
    };
    Ok(ProblemSpec {
        domain,
        coeffs: CoefficientField {
            b1: constant(b1),
            b2: constant(b2),
            sigma: constant(0.0),
            f: constant(4.0),
        },
        dirichlet: value2,
        exact: Some(exact),
    })
}
