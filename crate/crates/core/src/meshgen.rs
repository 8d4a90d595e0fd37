//! Structured interface-fitted triangulations and their quality audit.
//!
//! Two fitted constructions (polar disk with a vertex ring on the interface
//! circle, tensor grid with a grid line on the interface chord) and one
//! deliberately unfitted uniform grid used as a negative control.

use crate::error::{Error, Result};
use crate::geometry::{
    side_of_interface, DomainKind, DomainSpec, InterfaceCurve, Point2, RegionId,
};
use crate::quadrature::signed_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexMarker {
    Interior,
    Boundary,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriClass {
    Regular,
    Irregular,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub domain: DomainSpec,
    pub vertices: Vec<Point2>,
    /// Counterclockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    pub vertex_marker: Vec<VertexMarker>,
    pub tri_region: Vec<RegionId>,
    pub tri_class: Vec<TriClass>,
    /// Longest edge over all triangles.
    pub h: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MeshQualityReport {
    pub h: f64,
    /// min over triangles of inradius / h.
    pub min_inradius_ratio: f64,
    pub n_regular: usize,
    pub n_irregular: usize,
    /// Every irregular triangle has at least two vertices on the interface.
    pub irregular_two_vertices_on_interface: bool,
}

impl Mesh {
    /// Validates raw mesh data, computes `h`, and classifies triangles
    /// against the domain's interface.
    pub fn new(
        domain: DomainSpec,
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        vertex_marker: Vec<VertexMarker>,
    ) -> Result<Mesh> {
        if vertex_marker.len() != vertices.len() {
            return Err(Error::InvalidInput(format!(
                "{} markers for {} vertices",
                vertex_marker.len(),
                vertices.len()
            )));
        }
        let tol = domain.snap_tol();
        let mut h = 0.0f64;
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidInput(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            if signed_area(a, b, c) <= 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "triangle {t} has non-positive area"
                )));
            }
            h = h.max(a.dist(&b)).max(b.dist(&c)).max(c.dist(&a));
        }
        for (i, (v, m)) in vertices.iter().zip(&vertex_marker).enumerate() {
            if *m == VertexMarker::Boundary && domain.boundary_signed_dist(*v).abs() > 10.0 * tol {
                return Err(Error::InvalidInput(format!(
                    "vertex {i} marked boundary but lies off the domain boundary"
                )));
            }
        }
        let n_tris = triangles.len();
        let mut mesh = Mesh {
            domain,
            vertices,
            triangles,
            vertex_marker,
            tri_region: vec![RegionId::Region1; n_tris],
            tri_class: vec![TriClass::Regular; n_tris],
            h,
        };
        let curve = mesh.domain.interface.clone();
        classify_triangles(&mut mesh, &curve);
        Ok(mesh)
    }

    pub fn tri_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Vertices not constrained by Dirichlet data.
    pub fn free_vertex_count(&self) -> usize {
        self.vertex_marker
            .iter()
            .filter(|m| **m != VertexMarker::Boundary)
            .count()
    }
}

/// Distance from `p` to segment `ab`.
fn point_segment_dist(a: Point2, b: Point2, p: Point2) -> f64 {
    let ab = (b.x - a.x, b.y - a.y);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    if len2 == 0.0 {
        return p.dist(&a);
    }
    let t = (((p.x - a.x) * ab.0 + (p.y - a.y) * ab.1) / len2).clamp(0.0, 1.0);
    p.dist(&Point2::new(a.x + t * ab.0, a.y + t * ab.1))
}

fn point_in_triangle(tri: &[Point2; 3], p: Point2) -> bool {
    let s0 = signed_area(tri[0], tri[1], p);
    let s1 = signed_area(tri[1], tri[2], p);
    let s2 = signed_area(tri[2], tri[0], p);
    s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0
}

/// True when the circle passes through the open interior of the triangle:
/// the closed triangle reaches strictly inside and strictly outside the
/// circle. Touching at vertices or along an inscribed chord does not count.
fn circle_crosses_interior(center: Point2, radius: f64, tri: &[Point2; 3], tol: f64) -> bool {
    let dmax = tri.iter().map(|v| v.dist(&center)).fold(0.0f64, f64::max);
    if dmax <= radius + tol {
        return false;
    }
    let dmin = if point_in_triangle(tri, center) {
        0.0
    } else {
        let mut d = f64::INFINITY;
        for k in 0..3 {
            d = d.min(point_segment_dist(tri[k], tri[(k + 1) % 3], center));
        }
        d
    };
    dmin < radius - tol
}

/// True when any polyline segment passes through the open interior.
fn polyline_crosses_interior(pts: &[Point2], tri: &[Point2; 3], tol: f64) -> bool {
    pts.windows(2)
        .any(|w| segment_crosses_interior(w[0], w[1], tri, tol))
}

fn segment_crosses_interior(p: Point2, q: Point2, tri: &[Point2; 3], tol: f64) -> bool {
    // Clip p + t(q-p) against the three CCW half-planes.
    let mut t_lo = 0.0f64;
    let mut t_hi = 1.0f64;
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let e = (b.x - a.x, b.y - a.y);
        let c0 = e.0 * (p.y - a.y) - e.1 * (p.x - a.x);
        let c1 = e.0 * (q.y - a.y) - e.1 * (q.x - a.x);
        if c0 < 0.0 && c1 < 0.0 {
            return false;
        }
        if c0 < 0.0 {
            t_lo = t_lo.max(c0 / (c0 - c1));
        } else if c1 < 0.0 {
            t_hi = t_hi.min(c0 / (c0 - c1));
        }
    }
    if t_lo >= t_hi {
        return false;
    }
    // The clipped chunk may run along an edge; demand its midpoint sit a
    // perpendicular distance > tol inside every edge.
    let tm = 0.5 * (t_lo + t_hi);
    let m = Point2::new(p.x + tm * (q.x - p.x), p.y + tm * (q.y - p.y));
    (0..3).all(|k| {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let cross = (b.x - a.x) * (m.y - a.y) - (b.y - a.y) * (m.x - a.x);
        cross > tol * a.dist(&b)
    })
}

/// Tags every triangle: irregular iff the curve crosses its open interior;
/// region from the centroid side (reporting only for irregular triangles).
pub fn classify_triangles(mesh: &mut Mesh, curve: &InterfaceCurve) {
    let tol = mesh.domain.snap_tol();
    for t in 0..mesh.triangles.len() {
        let tri = mesh.tri_points(t);
        let crossed = match curve {
            InterfaceCurve::Circle { center, radius } => {
                circle_crosses_interior(*center, *radius, &tri, tol)
            }
            InterfaceCurve::Polyline { vertices } => polyline_crosses_interior(vertices, &tri, tol),
        };
        let centroid = Point2::new(
            (tri[0].x + tri[1].x + tri[2].x) / 3.0,
            (tri[0].y + tri[1].y + tri[2].y) / 3.0,
        );
        mesh.tri_class[t] = if crossed {
            TriClass::Irregular
        } else {
            TriClass::Regular
        };
        mesh.tri_region[t] = side_of_interface(curve, centroid, tol).region_or_first();
    }
}

fn inradius(a: Point2, b: Point2, c: Point2) -> f64 {
    let area = signed_area(a, b, c).abs();
    let perimeter = a.dist(&b) + b.dist(&c) + c.dist(&a);
    2.0 * area / perimeter
}

pub fn quality_report(mesh: &Mesh) -> MeshQualityReport {
    let mut min_ratio = f64::INFINITY;
    let mut n_regular = 0;
    let mut n_irregular = 0;
    let mut two_on_interface = true;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        min_ratio = min_ratio.min(inradius(a, b, c) / mesh.h);
        match mesh.tri_class[t] {
            TriClass::Regular => n_regular += 1,
            TriClass::Irregular => {
                n_irregular += 1;
                let on_s = mesh.triangles[t]
                    .iter()
                    .filter(|&&v| mesh.vertex_marker[v] == VertexMarker::Interface)
                    .count();
                if on_s < 2 {
                    two_on_interface = false;
                }
            }
        }
    }
    MeshQualityReport {
        h: mesh.h,
        min_inradius_ratio: min_ratio,
        n_regular,
        n_irregular,
        irregular_two_vertices_on_interface: two_on_interface,
    }
}

/// Triangulates the band between two concentric vertex rings by walking both
/// angularly at once. Ring k of count n holds vertex k at angle 2πk/n, so
/// angle comparisons reduce to exact integer products.
fn annulus_triangles(inner: &[usize], outer: &[usize], out: &mut Vec<[usize; 3]>) {
    let p = inner.len();
    let q = outer.len();
    let mut i = 0usize;
    let mut j = 0usize;
    while i < p || j < q {
        let take_inner = if i >= p {
            false
        } else if j >= q {
            true
        } else {
            (i + 1) * q <= (j + 1) * p
        };
        if take_inner {
            out.push([inner[i], outer[j % q], inner[(i + 1) % p]]);
            i += 1;
        } else {
            out.push([outer[j], outer[(j + 1) % q], inner[i % p]]);
            j += 1;
        }
    }
}

/// Polar mesh of a disk with one vertex ring exactly on the concentric
/// interface circle and one exactly on the boundary. Ring counts grow with
/// radius so arc spacing tracks radial spacing.
pub fn build_disk_polar_mesh(domain: &DomainSpec, target_h: f64) -> Result<Mesh> {
    let (center, big_r) = match domain.kind {
        DomainKind::Disk { center, radius } => (center, radius),
        DomainKind::UnitSquare => {
            return Err(Error::InvalidInput(
                "polar mesh construction needs a disk domain".into(),
            ))
        }
    };
    let r0 = match &domain.interface {
        InterfaceCurve::Circle {
            center: c0,
            radius: r0,
        } => {
            if c0.dist(&center) > domain.snap_tol() {
                return Err(Error::InvalidInput(
                    "polar mesh needs the interface circle concentric with the disk".into(),
                ));
            }
            *r0
        }
        InterfaceCurve::Polyline { .. } => {
            return Err(Error::InvalidInput(
                "polar mesh needs a circle interface".into(),
            ))
        }
    };
    if !(r0 > 0.0 && r0 < big_r) {
        return Err(Error::InvalidInput(format!(
            "interface radius {r0} must lie in (0, {big_r})"
        )));
    }
    if !(target_h > 0.0) || target_h >= big_r {
        return Err(Error::InvalidInput(format!(
            "target_h {target_h} must lie in (0, {big_r})"
        )));
    }

    let m_in = (r0 / target_h).ceil().max(1.0) as usize;
    let gap_in = r0 / m_in as f64;
    // Outer count keeps spacing <= target_h while staying close to gap_in.
    let m_out = (((big_r - r0) / target_h).ceil().max(1.0) as usize)
        .max(((big_r - r0) / gap_in).round().max(1.0) as usize);
    let gap_out = (big_r - r0) / m_out as f64;

    let mut radii: Vec<f64> = (1..=m_in).map(|j| j as f64 * gap_in).collect();
    radii[m_in - 1] = r0;
    radii.extend((1..=m_out).map(|k| r0 + k as f64 * gap_out));
    radii[m_in + m_out - 1] = big_r;

    let n_rings = radii.len();
    let counts: Vec<usize> = (0..n_rings)
        .map(|j| {
            let below = if j == 0 {
                radii[0]
            } else {
                radii[j] - radii[j - 1]
            };
            let above = if j + 1 < n_rings {
                radii[j + 1] - radii[j]
            } else {
                below
            };
            let spacing = 0.5 * (below + above);
            ((2.0 * std::f64::consts::PI * radii[j] / spacing).round() as usize).max(6)
        })
        .collect();

    let mut vertices = vec![center];
    let mut markers = vec![VertexMarker::Interior];
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(n_rings);
    for (j, (&rho, &n)) in radii.iter().zip(&counts).enumerate() {
        let marker = if j == m_in - 1 {
            VertexMarker::Interface
        } else if j == n_rings - 1 {
            VertexMarker::Boundary
        } else {
            VertexMarker::Interior
        };
        let base = vertices.len();
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            vertices.push(Point2::new(
                center.x + rho * theta.cos(),
                center.y + rho * theta.sin(),
            ));
            markers.push(marker);
        }
        rings.push((base..base + n).collect());
    }

    let mut triangles = Vec::new();
    for k in 0..counts[0] {
        triangles.push([0, rings[0][k], rings[0][(k + 1) % counts[0]]]);
    }
    for j in 0..n_rings - 1 {
        annulus_triangles(&rings[j], &rings[j + 1], &mut triangles);
    }

    Mesh::new(domain.clone(), vertices, triangles, markers)
}

fn grid_breaks(from: f64, to: f64, pieces: usize) -> Vec<f64> {
    let step = (to - from) / pieces as f64;
    let mut v: Vec<f64> = (0..pieces).map(|i| from + i as f64 * step).collect();
    v.push(to);
    v
}

fn tensor_grid_mesh(
    domain: &DomainSpec,
    xs: &[f64],
    ys: &[f64],
    is_interface: impl Fn(f64, f64) -> bool,
) -> Result<Mesh> {
    let nx = xs.len();
    let ny = ys.len();
    let mut vertices = Vec::with_capacity(nx * ny);
    let mut markers = Vec::with_capacity(nx * ny);
    for (iy, &y) in ys.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            vertices.push(Point2::new(x, y));
            let on_boundary = ix == 0 || ix == nx - 1 || iy == 0 || iy == ny - 1;
            markers.push(if on_boundary {
                VertexMarker::Boundary
            } else if is_interface(x, y) {
                VertexMarker::Interface
            } else {
                VertexMarker::Interior
            });
        }
    }
    let at = |ix: usize, iy: usize| iy * nx + ix;
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            triangles.push([at(ix, iy), at(ix + 1, iy), at(ix + 1, iy + 1)]);
            triangles.push([at(ix, iy), at(ix + 1, iy + 1), at(ix, iy + 1)]);
        }
    }
    Mesh::new(domain.clone(), vertices, triangles, markers)
}

/// Tensor grid on the unit square with a grid line placed exactly on the
/// interface chord (a full-height vertical or full-width horizontal line).
pub fn build_square_line_mesh(domain: &DomainSpec, target_h: f64) -> Result<Mesh> {
    if domain.kind != DomainKind::UnitSquare {
        return Err(Error::InvalidInput(
            "line-fitted grid needs the unit square domain".into(),
        ));
    }
    if !(target_h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target_h must be > 0, got {target_h}"
        )));
    }
    let tol = domain.snap_tol();
    let pts = match &domain.interface {
        InterfaceCurve::Polyline { vertices } if vertices.len() == 2 => vertices.clone(),
        _ => {
            return Err(Error::InvalidInput(
                "line-fitted grid needs a two-point polyline interface".into(),
            ))
        }
    };
    let vertical = (pts[0].x - pts[1].x).abs() <= tol;
    let horizontal = (pts[0].y - pts[1].y).abs() <= tol;
    let full_span = |a: f64, b: f64| (a.min(b)).abs() <= tol && (a.max(b) - 1.0).abs() <= tol;
    let pieces = |len: f64| ((len / target_h).round().max(1.0)) as usize;
    if vertical && full_span(pts[0].y, pts[1].y) {
        let x0 = pts[0].x;
        if x0 <= tol || x0 >= 1.0 - tol {
            return Err(Error::InvalidInput(format!(
                "interface line x={x0} must cut the interior"
            )));
        }
        let mut xs = grid_breaks(0.0, x0, pieces(x0));
        xs.extend_from_slice(&grid_breaks(x0, 1.0, pieces(1.0 - x0))[1..]);
        let ys = grid_breaks(0.0, 1.0, pieces(1.0));
        tensor_grid_mesh(domain, &xs, &ys, |x, _| (x - x0).abs() <= tol)
    } else if horizontal && full_span(pts[0].x, pts[1].x) {
        let y0 = pts[0].y;
        if y0 <= tol || y0 >= 1.0 - tol {
            return Err(Error::InvalidInput(format!(
                "interface line y={y0} must cut the interior"
            )));
        }
        let xs = grid_breaks(0.0, 1.0, pieces(1.0));
        let mut ys = grid_breaks(0.0, y0, pieces(y0));
        ys.extend_from_slice(&grid_breaks(y0, 1.0, pieces(1.0 - y0))[1..]);
        tensor_grid_mesh(domain, &xs, &ys, |_, y| (y - y0).abs() <= tol)
    } else {
        Err(Error::InvalidInput(
            "interface polyline is not an axis-aligned chord of the square".into(),
        ))
    }
}

/// Uniform grid that ignores the interface. Straddling triangles come out
/// irregular with no interface vertices; this deliberately breaks the fitted
/// mesh guarantees.
pub fn build_unfitted_square_mesh(domain: &DomainSpec, target_h: f64) -> Result<Mesh> {
    if domain.kind != DomainKind::UnitSquare {
        return Err(Error::InvalidInput(
            "unfitted grid needs the unit square domain".into(),
        ));
    }
    if !(target_h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target_h must be > 0, got {target_h}"
        )));
    }
    let tol = domain.snap_tol();
    let m = ((1.0 / target_h).round().max(1.0)) as usize;
    let xs = grid_breaks(0.0, 1.0, m);
    let curve = domain.interface.clone();
    tensor_grid_mesh(domain, &xs, &xs, move |x, y| {
        side_of_interface(&curve, Point2::new(x, y), tol) == crate::geometry::Side::OnInterface
    })
}
