//! Planar primitives and interface-curve predicates.
//!
//! The interface curve `S` splits the domain into two regions. Region 1 is
//! the inside of a circle, or the left side of an oriented polyline. All
//! classification is tolerance-banded: points within `tol` of the curve are
//! reported as [`Side::OnInterface`].

use crate::error::{Error, Result};

/// Relative snapping tolerance used by meshing: multiplied by the domain
/// diameter to get the absolute band around curves and boundaries.
pub const SNAP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Which of the two subdomains a point (or triangle) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionId {
    Region1,
    Region2,
}

/// Result of classifying a point against the interface curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Region1,
    Region2,
    OnInterface,
}

impl Side {
    /// Collapses the tolerance band onto a region, sending on-interface
    /// points to region 1. Used where a two-way choice is required
    /// (quadrature branch selection); the band has measure zero there.
    pub fn region_or_first(self) -> RegionId {
        match self {
            Side::Region2 => RegionId::Region2,
            _ => RegionId::Region1,
        }
    }
}

/// The discontinuity curve. A circle keeps region 1 inside; a polyline keeps
/// region 1 on its left side.
#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceCurve {
    Circle { center: Point2, radius: f64 },
    Polyline { vertices: Vec<Point2> },
}

impl InterfaceCurve {
    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidInput(format!(
                "circle interface needs finite center and radius > 0, got radius {radius}"
            )));
        }
        Ok(InterfaceCurve::Circle { center, radius })
    }

    pub fn polyline(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput(
                "polyline interface needs at least 2 vertices".into(),
            ));
        }
        for w in vertices.windows(2) {
            if w[0].dist(&w[1]) == 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "repeated consecutive polyline vertex ({}, {})",
                    w[0].x, w[0].y
                )));
            }
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite polyline vertex".into()));
        }
        Ok(InterfaceCurve::Polyline { vertices })
    }

    /// Signed distance-like quantity: negative in region 1, positive in
    /// region 2, zero on the curve. For circles this is the exact signed
    /// distance `|p - c| - r`; for polylines it is the distance to the curve
    /// signed by the side of the nearest segment (left = negative).
    pub fn signed_side(&self, p: Point2) -> f64 {
        match self {
            InterfaceCurve::Circle { center, radius } => p.dist(center) - radius,
            InterfaceCurve::Polyline { vertices } => {
                let mut best_d2 = f64::INFINITY;
                let mut best_sign = 0.0f64;
                let mut best_align = -1.0f64;
                for w in vertices.windows(2) {
                    let (d2, cross, align) = segment_dist2_cross(w[0], w[1], p);
                    // Among (near-)equidistant segments, prefer the one the
                    // point is most orthogonal to; this settles corners.
                    let closer = d2 < best_d2 * (1.0 - 1e-12);
                    let tie = (d2 - best_d2).abs() <= best_d2.max(1e-300) * 1e-12;
                    if closer || (tie && align > best_align) {
                        best_d2 = d2;
                        best_align = align;
                        best_sign = if cross > 0.0 {
                            -1.0
                        } else if cross < 0.0 {
                            1.0
                        } else {
                            0.0
                        };
                    }
                }
                best_sign * best_d2.sqrt()
            }
        }
    }
}

/// Squared distance from `p` to segment `ab`, the cross product
/// `(b-a) x (p-a)` (positive when `p` is left of the segment), and an
/// alignment score in [0,1] (1 = projection falls mid-segment).
fn segment_dist2_cross(a: Point2, b: Point2, p: Point2) -> (f64, f64, f64) {
    let ab = (b.x - a.x, b.y - a.y);
    let ap = (p.x - a.x, p.y - a.y);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    let t = ((ap.0 * ab.0 + ap.1 * ab.1) / len2).clamp(0.0, 1.0);
    let foot = (a.x + t * ab.0, a.y + t * ab.1);
    let dx = p.x - foot.0;
    let dy = p.y - foot.1;
    let cross = ab.0 * ap.1 - ab.1 * ap.0;
    let align = 1.0 - (2.0 * t - 1.0).abs();
    (dx * dx + dy * dy, cross, align)
}

/// Classifies `p` against the interface with an absolute tolerance band.
pub fn side_of_interface(curve: &InterfaceCurve, p: Point2, tol: f64) -> Side {
    debug_assert!(tol >= 0.0);
    let s = curve.signed_side(p);
    if s < -tol {
        Side::Region1
    } else if s > tol {
        Side::Region2
    } else {
        Side::OnInterface
    }
}

/// Nearest point on the curve. Circles reject their center (no unique
/// nearest point); polylines return the closest clamped foot point.
pub fn project_to_interface(curve: &InterfaceCurve, p: Point2) -> Result<Point2> {
    match curve {
        InterfaceCurve::Circle { center, radius } => {
            let d = p.dist(center);
            if d == 0.0 {
                return Err(Error::DegenerateGeometry(
                    "ambiguous projection: point coincides with circle center".into(),
                ));
            }
            let scale = radius / d;
            Ok(Point2::new(
                center.x + (p.x - center.x) * scale,
                center.y + (p.y - center.y) * scale,
            ))
        }
        InterfaceCurve::Polyline { vertices } => {
            let mut best = vertices[0];
            let mut best_d2 = f64::INFINITY;
            for w in vertices.windows(2) {
                let ab = (w[1].x - w[0].x, w[1].y - w[0].y);
                let len2 = ab.0 * ab.0 + ab.1 * ab.1;
                let t = (((p.x - w[0].x) * ab.0 + (p.y - w[0].y) * ab.1) / len2).clamp(0.0, 1.0);
                let foot = Point2::new(w[0].x + t * ab.0, w[0].y + t * ab.1);
                let d2 = p.dist(&foot).powi(2);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = foot;
                }
            }
            Ok(best)
        }
    }
}

/// Points along the curve with consecutive arc-length gaps at most
/// `spacing`. Every polyline vertex (a potentially non-smooth point of the
/// curve) is included exactly.
pub fn interface_sample_points(curve: &InterfaceCurve, spacing: f64) -> Result<Vec<Point2>> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sample spacing must be > 0, got {spacing}"
        )));
    }
    match curve {
        InterfaceCurve::Circle { center, radius } => {
            let circumference = 2.0 * std::f64::consts::PI * radius;
            let n = (circumference / spacing).ceil().max(3.0) as usize;
            Ok((0..n)
                .map(|k| {
                    let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                    Point2::new(
                        center.x + radius * theta.cos(),
                        center.y + radius * theta.sin(),
                    )
                })
                .collect())
        }
        InterfaceCurve::Polyline { vertices } => {
            let mut out = vec![vertices[0]];
            for w in vertices.windows(2) {
                let len = w[0].dist(&w[1]);
                let n = (len / spacing).ceil().max(1.0) as usize;
                for k in 1..=n {
                    let t = (k as f64) / (n as f64);
                    out.push(Point2::new(
                        w[0].x + t * (w[1].x - w[0].x),
                        w[0].y + t * (w[1].y - w[0].y),
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// The supported computational domains.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    /// Disk of given center and radius.
    Disk { center: Point2, radius: f64 },
    /// The unit square [0,1] x [0,1].
    UnitSquare,
}

/// A domain together with the interface curve that partitions it.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub interface: InterfaceCurve,
}

impl DomainSpec {
    pub fn disk(center: Point2, radius: f64, interface: InterfaceCurve) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "disk radius must be > 0, got {radius}"
            )));
        }
        let spec = DomainSpec {
            kind: DomainKind::Disk { center, radius },
            interface,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit_square(interface: InterfaceCurve) -> Result<Self> {
        let spec = DomainSpec {
            kind: DomainKind::UnitSquare,
            interface,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Diameter of the domain; scales snapping tolerances.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => 2.0 * radius,
            DomainKind::UnitSquare => std::f64::consts::SQRT_2,
        }
    }

    /// Absolute snapping tolerance for this domain.
    pub fn snap_tol(&self) -> f64 {
        SNAP_REL_TOL * self.diameter()
    }

    /// Signed distance to the domain boundary, negative inside.
    pub fn boundary_signed_dist(&self, p: Point2) -> f64 {
        match &self.kind {
            DomainKind::Disk { center, radius } => p.dist(center) - radius,
            DomainKind::UnitSquare => {
                let dx = (-p.x).max(p.x - 1.0);
                let dy = (-p.y).max(p.y - 1.0);
                if dx <= 0.0 && dy <= 0.0 {
                    // inside: negative distance to nearest edge
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
        }
    }

    /// Circle interfaces must lie strictly inside the domain; polyline
    /// interfaces may terminate on the boundary but interior vertices must
    /// stay strictly inside.
    fn validate(&self) -> Result<()> {
        let tol = self.snap_tol();
        match &self.interface {
            InterfaceCurve::Circle { center, radius } => {
                let worst = match &self.kind {
                    DomainKind::Disk {
                        center: dc,
                        radius: dr,
                    } => center.dist(dc) + radius - dr,
                    DomainKind::UnitSquare => {
                        let inside = self.boundary_signed_dist(*center);
                        inside + radius
                    }
                };
                if worst >= -tol {
                    return Err(Error::InvalidInput(
                        "circle interface must lie strictly inside the domain".into(),
                    ));
                }
            }
            InterfaceCurve::Polyline { vertices } => {
                for (i, v) in vertices.iter().enumerate() {
                    let d = self.boundary_signed_dist(*v);
                    let endpoint = i == 0 || i == vertices.len() - 1;
                    if endpoint {
                        if d > tol {
                            return Err(Error::InvalidInput(format!(
                                "polyline endpoint ({}, {}) lies outside the domain",
                                v.x, v.y
                            )));
                        }
                    } else if d > -tol {
                        return Err(Error::InvalidInput(format!(
                            "interior polyline vertex ({}, {}) must lie strictly inside",
                            v.x, v.y
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
