//! P1 element machinery: shape-function gradients, element matrices under a
//! piecewise diffusion coefficient, global assembly, Dirichlet elimination,
//! nodal interpolation, and field evaluation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{side_of_interface, DomainSpec, InterfaceCurve, Point2, RegionId};
use crate::meshgen::{Mesh, TriClass, VertexMarker};
use crate::problems::ExactSolution;
use crate::quadrature::{bary_to_point, signed_area, QuadNode, DEGREE4_RULE, MIDPOINT_RULE};
use crate::solver::{pcg, SolveStats, SolverConfig};
use crate::sparse::CsrMatrix;

pub type ScalarFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(Point2) -> [f64; 2] + Send + Sync>;

pub fn constant(c: f64) -> ScalarFn {
    Arc::new(move |_| c)
}

/// Piecewise diffusion coefficient, reaction, and source for one problem.
#[derive(Clone)]
pub struct CoefficientField {
    pub b1: ScalarFn,
    pub b2: ScalarFn,
    pub sigma: ScalarFn,
    pub f: ScalarFn,
}

impl CoefficientField {
    pub fn diffusion(&self, region: RegionId, p: Point2) -> f64 {
        match region {
            RegionId::Region1 => (self.b1)(p),
            RegionId::Region2 => (self.b2)(p),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub coeffs: CoefficientField,
    /// Dirichlet data on the whole boundary.
    pub dirichlet: ScalarFn,
    pub exact: Option<ExactSolution>,
}

/// Assembled sparse system. `free_dofs[k]` is the mesh vertex behind row k;
/// before elimination it is simply `0..n`.
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free_dofs: Vec<usize>,
}

/// Constant gradients of the three barycentric shape functions.
pub fn barycentric_gradients(tri: &[Point2; 3]) -> Result<[[f64; 2]; 3]> {
    let area2 = 2.0 * signed_area(tri[0], tri[1], tri[2]);
    if !(area2 > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "triangle ({}, {}), ({}, {}), ({}, {}) has non-positive area",
            tri[0].x, tri[0].y, tri[1].x, tri[1].y, tri[2].x, tri[2].y
        )));
    }
    Ok([
        [(tri[1].y - tri[2].y) / area2, (tri[2].x - tri[1].x) / area2],
        [(tri[2].y - tri[0].y) / area2, (tri[0].x - tri[2].x) / area2],
        [(tri[0].y - tri[1].y) / area2, (tri[1].x - tri[0].x) / area2],
    ])
}

/// Element stiffness and load. Regular elements take their single region's
/// coefficient branch; irregular elements re-classify every quadrature point
/// against the true curve so the jump inside the element is honored.
#[allow(clippy::too_many_arguments)]
pub fn element_matrices(
    tri: &[Point2; 3],
    class: TriClass,
    region: RegionId,
    coeffs: &CoefficientField,
    curve: &InterfaceCurve,
    tol: f64,
    rule_regular: &[QuadNode],
    rule_irregular: &[QuadNode],
) -> Result<([[f64; 3]; 3], [f64; 3])> {
    let grads = barycentric_gradients(tri)?;
    let area = signed_area(tri[0], tri[1], tri[2]).abs();
    let rule = match class {
        TriClass::Regular => rule_regular,
        TriClass::Irregular => rule_irregular,
    };
    let mut k = [[0.0f64; 3]; 3];
    let mut load = [0.0f64; 3];
    for node in rule {
        let p = bary_to_point(tri, node.bary);
        let reg = match class {
            TriClass::Regular => region,
            TriClass::Irregular => side_of_interface(curve, p, tol).region_or_first(),
        };
        let b = coeffs.diffusion(reg, p);
        if !(b > 0.0) {
            return Err(Error::CoefficientBound {
                name: "B",
                value: b,
                x: p.x,
                y: p.y,
                constraint: "B > 0",
            });
        }
        let sigma = (coeffs.sigma)(p);
        if sigma < 0.0 {
            return Err(Error::CoefficientBound {
                name: "sigma",
                value: sigma,
                x: p.x,
                y: p.y,
                constraint: "sigma >= 0",
            });
        }
        let fv = (coeffs.f)(p);
        let w = node.weight * area;
        for i in 0..3 {
            load[i] += w * fv * node.bary[i];
            for j in 0..3 {
                let diff = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                k[i][j] += w * (b * diff + sigma * node.bary[i] * node.bary[j]);
            }
        }
    }
    Ok((k, load))
}

/// Full vertex-indexed system for the weak form, before boundary conditions.
pub fn assemble(mesh: &Mesh, problem: &ProblemSpec) -> Result<LinearSystem> {
    let n = mesh.n_vertices();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in &mesh.triangles {
        for &a in tri {
            for &b in tri {
                if a != b {
                    neighbors[a].push(b);
                }
            }
        }
    }
    let mut matrix = CsrMatrix::from_pattern(n, &neighbors)?;
    let mut rhs = vec![0.0; n];
    let tol = mesh.domain.snap_tol();
    let curve = &mesh.domain.interface;
    for t in 0..mesh.n_triangles() {
        let tri = mesh.tri_points(t);
        let (k, load) = element_matrices(
            &tri,
            mesh.tri_class[t],
            mesh.tri_region[t],
            &problem.coeffs,
            curve,
            tol,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        )?;
        let idx = mesh.triangles[t];
        for i in 0..3 {
            rhs[idx[i]] += load[i];
            for j in 0..3 {
                matrix.add_at(idx[i], idx[j], k[i][j])?;
            }
        }
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        free_dofs: (0..n).collect(),
    })
}

/// Eliminates boundary rows/columns, shifting known values to the rhs.
pub fn apply_dirichlet(system: &LinearSystem, mesh: &Mesh, g: &ScalarFn) -> LinearSystem {
    let n = mesh.n_vertices();
    debug_assert_eq!(system.matrix.n, n);
    let boundary_value: Vec<Option<f64>> = (0..n)
        .map(|i| (mesh.vertex_marker[i] == VertexMarker::Boundary).then(|| g(mesh.vertices[i])))
        .collect();
    let mut old_to_new = vec![usize::MAX; n];
    let mut free = Vec::new();
    for i in 0..n {
        if boundary_value[i].is_none() {
            old_to_new[i] = free.len();
            free.push(i);
        }
    }
    let m = free.len();
    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut rhs = Vec::with_capacity(m);
    row_ptr.push(0);
    for &i in &free {
        let mut b = system.rhs[i];
        for k in system.matrix.row_ptr[i]..system.matrix.row_ptr[i + 1] {
            let j = system.matrix.col_idx[k];
            match boundary_value[j] {
                Some(gj) => b -= system.matrix.values[k] * gj,
                None => {
                    col_idx.push(old_to_new[j]);
                    values.push(system.matrix.values[k]);
                }
            }
        }
        row_ptr.push(col_idx.len());
        rhs.push(b);
    }
    LinearSystem {
        matrix: CsrMatrix {
            n: m,
            row_ptr,
            col_idx,
            values,
        },
        rhs,
        free_dofs: free,
    }
}

/// Assembles, eliminates, solves, and scatters back to a full vertex vector
/// (boundary entries hold the Dirichlet data).
pub fn solve_problem(
    mesh: &Mesh,
    problem: &ProblemSpec,
    config: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    let system = assemble(mesh, problem)?;
    let reduced = apply_dirichlet(&system, mesh, &problem.dirichlet);
    let (x, stats) = pcg(&reduced.matrix, &reduced.rhs, config)?;
    let mut full = vec![0.0; mesh.n_vertices()];
    for (i, v) in mesh.vertices.iter().enumerate() {
        if mesh.vertex_marker[i] == VertexMarker::Boundary {
            full[i] = (problem.dirichlet)(*v);
        }
    }
    for (k, &i) in reduced.free_dofs.iter().enumerate() {
        full[i] = x[k];
    }
    Ok((full, stats))
}

/// Vertex values of the exact solution. Interface vertices check that both
/// branches agree, since a discontinuous "exact solution" would silently
/// poison every error norm downstream.
pub fn nodal_interpolant(mesh: &Mesh, exact: &ExactSolution) -> Result<Vec<f64>> {
    let curve = &mesh.domain.interface;
    let tol = mesh.domain.snap_tol();
    let mut coeffs = Vec::with_capacity(mesh.n_vertices());
    for (v, marker) in mesh.vertices.iter().zip(&mesh.vertex_marker) {
        let value = if *marker == VertexMarker::Interface {
            let v1 = exact.value(RegionId::Region1, *v);
            let v2 = exact.value(RegionId::Region2, *v);
            if (v1 - v2).abs() > 1e-9 {
                return Err(Error::BranchMismatch {
                    x: v.x,
                    y: v.y,
                    gap: (v1 - v2).abs(),
                });
            }
            v1
        } else {
            let region = side_of_interface(curve, *v, tol).region_or_first();
            exact.value(region, *v)
        };
        coeffs.push(value);
    }
    Ok(coeffs)
}

fn barycentric_coords(tri: &[Point2; 3], p: Point2) -> [f64; 3] {
    let total = signed_area(tri[0], tri[1], tri[2]);
    [
        signed_area(p, tri[1], tri[2]) / total,
        signed_area(tri[0], p, tri[2]) / total,
        signed_area(tri[0], tri[1], p) / total,
    ]
}

const CONTAIN_TOL: f64 = -1e-12;

fn eval_in_triangle(
    mesh: &Mesh,
    coeffs: &[f64],
    t: usize,
    bary: [f64; 3],
) -> Result<(f64, [f64; 2])> {
    let tri = mesh.tri_points(t);
    let grads = barycentric_gradients(&tri)?;
    let idx = mesh.triangles[t];
    let mut value = 0.0;
    let mut grad = [0.0, 0.0];
    for i in 0..3 {
        value += coeffs[idx[i]] * bary[i];
        grad[0] += coeffs[idx[i]] * grads[i][0];
        grad[1] += coeffs[idx[i]] * grads[i][1];
    }
    Ok((value, grad))
}

/// Evaluates the P1 field at `p` by scanning for the first containing
/// triangle (lowest index wins on shared edges).
pub fn evaluate_field(mesh: &Mesh, coeffs: &[f64], p: Point2) -> Result<(f64, [f64; 2])> {
    for t in 0..mesh.n_triangles() {
        let bary = barycentric_coords(&mesh.tri_points(t), p);
        if bary.iter().all(|&l| l >= CONTAIN_TOL) {
            return eval_in_triangle(mesh, coeffs, t, bary);
        }
    }
    Err(Error::PointOutsideMesh { x: p.x, y: p.y })
}

/// Uniform-grid spatial index over triangle bounding boxes. Finds the same
/// lowest-index containing triangle as the linear scan.
pub struct PointLocator {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new(mesh: &Mesh) -> PointLocator {
        let xs = mesh.vertices.iter().map(|v| v.x);
        let ys = mesh.vertices.iter().map(|v| v.y);
        let x0 = xs.clone().fold(f64::INFINITY, f64::min);
        let x1 = xs.fold(f64::NEG_INFINITY, f64::max);
        let y0 = ys.clone().fold(f64::INFINITY, f64::min);
        let y1 = ys.fold(f64::NEG_INFINITY, f64::max);
        let cell = mesh.h.max(1e-12);
        let nx = (((x1 - x0) / cell).ceil() as usize).max(1);
        let ny = (((y1 - y0) / cell).ceil() as usize).max(1);
        let mut bins = vec![Vec::new(); nx * ny];
        let clamp_x = |x: f64| (((x - x0) / cell) as usize).min(nx - 1);
        let clamp_y = |y: f64| (((y - y0) / cell) as usize).min(ny - 1);
        for (t, _) in mesh.triangles.iter().enumerate() {
            let pts = mesh.tri_points(t);
            let (ix0, ix1) = (
                clamp_x(pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min)),
                clamp_x(pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max)),
            );
            let (iy0, iy1) = (
                clamp_y(pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)),
                clamp_y(pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max)),
            );
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    bins[iy * nx + ix].push(t);
                }
            }
        }
        PointLocator {
            x0,
            y0,
            cell,
            nx,
            ny,
            bins,
        }
    }

    pub fn locate(&self, mesh: &Mesh, p: Point2) -> Option<(usize, [f64; 3])> {
        let fx = (p.x - self.x0) / self.cell;
        let fy = (p.y - self.y0) / self.cell;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let ix = (fx as usize).min(self.nx.checked_sub(1)?);
        let iy = (fy as usize).min(self.ny.checked_sub(1)?);
        if fx > self.nx as f64 || fy > self.ny as f64 {
            return None;
        }
        for &t in &self.bins[iy * self.nx + ix] {
            let bary = barycentric_coords(&mesh.tri_points(t), p);
            if bary.iter().all(|&l| l >= CONTAIN_TOL) {
                return Some((t, bary));
            }
        }
        None
    }

    pub fn evaluate(&self, mesh: &Mesh, coeffs: &[f64], p: Point2) -> Result<(f64, [f64; 2])> {
        match self.locate(mesh, p) {
            Some((t, bary)) => eval_in_triangle(mesh, coeffs, t, bary),
            None => Err(Error::PointOutsideMesh { x: p.x, y: p.y }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Side;
    use crate::meshgen::{build_disk_polar_mesh, build_square_line_mesh};
    use crate::problems::{line_problem, radial_problem};
    use approx::assert_relative_eq;

    fn unit_right() -> [Point2; 3] {
        [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]
    }

    fn unit_coeffs(b: f64, sigma: f64, f: f64) -> CoefficientField {
        CoefficientField {
            b1: constant(b),
            b2: constant(b),
            sigma: constant(sigma),
            f: constant(f),
        }
    }

    fn far_curve() -> InterfaceCurve {
        InterfaceCurve::circle(Point2::new(50.0, 50.0), 1.0).unwrap()
    }

    fn radial_domain() -> DomainSpec {
        DomainSpec::disk(
            Point2::new(0.0, 0.0),
            1.0,
            InterfaceCurve::circle(Point2::new(0.0, 0.0), 0.5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gradients_unit_right_triangle() {
        let g = barycentric_gradients(&unit_right()).unwrap();
        assert_eq!(g[0], [-1.0, -1.0]);
        assert_eq!(g[1], [1.0, 0.0]);
        assert_eq!(g[2], [0.0, 1.0]);
    }

    #[test]
    fn gradients_sum_to_zero_and_scale() {
        let tri = [
            Point2::new(0.2, 1.1),
            Point2::new(2.3, 0.4),
            Point2::new(1.1, 2.9),
        ];
        let g = barycentric_gradients(&tri).unwrap();
        for d in 0..2 {
            assert_relative_eq!(g[0][d] + g[1][d] + g[2][d], 0.0, epsilon = 1e-14);
        }
        let doubled = [
            Point2::new(0.4, 2.2),
            Point2::new(4.6, 0.8),
            Point2::new(2.2, 5.8),
        ];
        let g2 = barycentric_gradients(&doubled).unwrap();
        for i in 0..3 {
            for d in 0..2 {
                assert_relative_eq!(g2[i][d], g[i][d] / 2.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gradients_reject_degenerate_triangle() {
        let flat = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 2.0),
        ];
        assert!(barycentric_gradients(&flat).is_err());
    }

    #[test]
    fn stiffness_unit_right_triangle() {
        let (k, load) = element_matrices(
            &unit_right(),
            TriClass::Regular,
            RegionId::Region1,
            &unit_coeffs(1.0, 0.0, 0.0),
            &far_curve(),
            1e-10,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        )
        .unwrap();
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            assert!(load[i].abs() < 1e-15);
            for j in 0..3 {
                assert!(
                    (k[i][j] - want[i][j]).abs() <= 1e-14,
                    "k[{i}][{j}]={}",
                    k[i][j]
                );
            }
        }
    }

    #[test]
    fn load_constant_source() {
        let (_, load) = element_matrices(
            &unit_right(),
            TriClass::Regular,
            RegionId::Region1,
            &unit_coeffs(1.0, 0.0, 1.0),
            &far_curve(),
            1e-10,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        )
        .unwrap();
        for i in 0..3 {
            assert_relative_eq!(load[i], 1.0 / 6.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn stiffness_scales_linearly_in_b() {
        let args = |b| {
            element_matrices(
                &unit_right(),
                TriClass::Regular,
                RegionId::Region1,
                &unit_coeffs(b, 0.0, 0.0),
                &far_curve(),
                1e-10,
                &MIDPOINT_RULE,
                &DEGREE4_RULE,
            )
            .unwrap()
            .0
        };
        let (k1, k7) = (args(1.0), args(7.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(k7[i][j], 7.0 * k1[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn element_matrix_psd_with_constant_kernel() {
        let tri = [
            Point2::new(0.3, 0.2),
            Point2::new(1.4, 0.5),
            Point2::new(0.6, 1.7),
        ];
        let (k, _) = element_matrices(
            &tri,
            TriClass::Regular,
            RegionId::Region2,
            &unit_coeffs(2.5, 0.0, 0.0),
            &far_curve(),
            1e-10,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        )
        .unwrap();
        // constants in the kernel
        for i in 0..3 {
            let row_sum: f64 = k[i].iter().sum();
            assert!(row_sum.abs() < 1e-13);
        }
        // quadratic form nonnegative on a spread of directions
        for s in 0..20 {
            let v = [
                ((s * 7) % 5) as f64 - 2.0,
                ((s * 3) % 7) as f64 - 3.0,
                ((s * 11) % 3) as f64 - 1.0,
            ];
            let mut q = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    q += v[i] * k[i][j] * v[j];
                }
            }
            assert!(q >= -1e-12, "direction {v:?} gives {q}");
        }
    }

    #[test]
    fn sigma_adds_mass_and_negative_sigma_rejected() {
        let (k_mass, _) = element_matrices(
            &unit_right(),
            TriClass::Regular,
            RegionId::Region1,
            &unit_coeffs(1.0, 6.0, 0.0),
            &far_curve(),
            1e-10,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        )
        .unwrap();
        // mass matrix of the unit right triangle: (area/12) * [[2,1,1],...]
        // with area 1/2, so sigma = 6 adds 1/2 on the diagonal and 1/4 off it
        assert_relative_eq!(k_mass[0][0], 1.0 + 0.5, epsilon = 1e-13);
        assert_relative_eq!(k_mass[0][1], -0.5 + 0.25, epsilon = 1e-13);

        let bad = element_matrices(
            &unit_right(),
            TriClass::Regular,
            RegionId::Region1,
            &unit_coeffs(1.0, -1.0, 0.0),
            &far_curve(),
            1e-10,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        );
        assert!(matches!(
            bad,
            Err(Error::CoefficientBound { name: "sigma", .. })
        ));
    }

    #[test]
    fn nonpositive_diffusion_rejected_with_location() {
        let bad = element_matrices(
            &unit_right(),
            TriClass::Regular,
            RegionId::Region1,
            &unit_coeffs(0.0, 0.0, 0.0),
            &far_curve(),
            1e-10,
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        );
        match bad {
            Err(Error::CoefficientBound {
                name: "B", x, y, ..
            }) => {
                assert!(x.is_finite() && y.is_finite());
            }
            other => panic!("expected coefficient error, got {other:?}"),
        }
    }

    #[test]
    fn single_triangle_assembly_matches_element() {
        let domain = DomainSpec::unit_square(
            InterfaceCurve::polyline(vec![Point2::new(0.9, 0.0), Point2::new(0.9, 1.0)]).unwrap(),
        )
        .unwrap();
        let mesh = Mesh::new(
            domain.clone(),
            unit_right().to_vec(),
            vec![[0, 1, 2]],
            vec![VertexMarker::Interior; 3],
        )
        .unwrap();
        let problem = ProblemSpec {
            domain,
            coeffs: unit_coeffs(3.0, 1.0, 2.0),
            dirichlet: constant(0.0),
            exact: None,
        };
        let system = assemble(&mesh, &problem).unwrap();
        let (k, load) = element_matrices(
            &unit_right(),
            mesh.tri_class[0],
            mesh.tri_region[0],
            &problem.coeffs,
            &mesh.domain.interface,
            mesh.domain.snap_tol(),
            &MIDPOINT_RULE,
            &DEGREE4_RULE,
        )
        .unwrap();
        for i in 0..3 {
            assert_relative_eq!(system.rhs[i], load[i], epsilon = 1e-15);
            for j in 0..3 {
                assert_relative_eq!(system.matrix.get(i, j), k[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn assembled_matrix_symmetric_with_constants_in_kernel() {
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.2).unwrap();
        let system = assemble(&mesh, &problem).unwrap();
        assert!(system.matrix.asymmetry() <= 1e-12);
        let ones = vec![1.0; mesh.n_vertices()];
        let mut out = vec![0.0; mesh.n_vertices()];
        system.matrix.matvec(&ones, &mut out);
        let scale = system
            .matrix
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, v) in out.iter().enumerate() {
            assert!(v.abs() <= 1e-10 * scale, "row {i}: {v}");
        }
    }

    #[test]
    fn vertex_relabeling_permutes_system() {
        let problem = radial_problem(1.0, 10.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.45).unwrap();
        let system = assemble(&mesh, &problem).unwrap();

        // relabel vertices in reverse
        let n = mesh.n_vertices();
        let perm = |i: usize| n - 1 - i;
        let vertices: Vec<Point2> = (0..n).map(|i| mesh.vertices[perm(i)]).collect();
        let markers: Vec<VertexMarker> = (0..n).map(|i| mesh.vertex_marker[perm(i)]).collect();
        let triangles: Vec<[usize; 3]> = mesh
            .triangles
            .iter()
            .map(|t| [perm(t[0]), perm(t[1]), perm(t[2])])
            .collect();
        let relabeled = Mesh::new(mesh.domain.clone(), vertices, triangles, markers).unwrap();
        let system2 = assemble(&relabeled, &problem).unwrap();

        for i in 0..n {
            assert_relative_eq!(system2.rhs[perm(i)], system.rhs[i], epsilon = 1e-14);
            for k in system.matrix.row_ptr[i]..system.matrix.row_ptr[i + 1] {
                let j = system.matrix.col_idx[k];
                assert_relative_eq!(
                    system2.matrix.get(perm(i), perm(j)),
                    system.matrix.values[k],
                    epsilon = 1e-13
                );
            }
        }
    }

    #[test]
    fn dirichlet_zero_keeps_free_rhs() {
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.3).unwrap();
        let system = assemble(&mesh, &problem).unwrap();
        let reduced = apply_dirichlet(&system, &mesh, &constant(0.0));
        assert_eq!(reduced.free_dofs.len(), mesh.free_vertex_count());
        for (k, &i) in reduced.free_dofs.iter().enumerate() {
            assert_eq!(reduced.rhs[k], system.rhs[i]);
        }
        assert!(reduced.matrix.asymmetry() <= 1e-12);
    }

    #[test]
    fn all_boundary_mesh_solves_to_dirichlet_data() {
        let domain = DomainSpec::unit_square(
            InterfaceCurve::polyline(vec![Point2::new(0.9, 0.0), Point2::new(0.9, 1.0)]).unwrap(),
        )
        .unwrap();
        let mesh = Mesh::new(
            domain.clone(),
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
            vec![VertexMarker::Boundary; 3],
        )
        .unwrap();
        let g: ScalarFn = Arc::new(|p: Point2| 1.0 + p.x + 2.0 * p.y);
        let problem = ProblemSpec {
            domain,
            coeffs: unit_coeffs(1.0, 0.0, 1.0),
            dirichlet: g.clone(),
            exact: None,
        };
        let (u, stats) = solve_problem(&mesh, &problem, &SolverConfig::default()).unwrap();
        assert_eq!(stats.iterations, 0);
        for (i, v) in mesh.vertices.iter().enumerate() {
            assert_eq!(u[i], g(*v));
        }
    }

    #[test]
    fn single_free_vertex_reduces_to_scalar_equation() {
        // fan of six triangles around one interior vertex
        let domain = radial_domain();
        let mut vertices = vec![Point2::new(0.0, 0.0)];
        let mut markers = vec![VertexMarker::Interior];
        for k in 0..6 {
            let th = std::f64::consts::PI * k as f64 / 3.0;
            vertices.push(Point2::new(th.cos(), th.sin()));
            markers.push(VertexMarker::Boundary);
        }
        let triangles: Vec<[usize; 3]> = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let mesh = Mesh::new(domain.clone(), vertices, triangles, markers).unwrap();
        let problem = ProblemSpec {
            domain,
            coeffs: unit_coeffs(2.0, 0.0, 3.0),
            dirichlet: constant(0.0),
            exact: None,
        };
        let system = assemble(&mesh, &problem).unwrap();
        let reduced = apply_dirichlet(&system, &mesh, &problem.dirichlet);
        assert_eq!(reduced.free_dofs, vec![0]);
        assert_eq!(reduced.matrix.n, 1);
        let expected = reduced.rhs[0] / reduced.matrix.get(0, 0);
        let (u, _) = solve_problem(&mesh, &problem, &SolverConfig::default()).unwrap();
        assert_relative_eq!(u[0], expected, epsilon = 1e-12);
    }

    #[test]
    fn inhomogeneous_dirichlet_reproduces_linear_solution() {
        // with B constant and f = 0, u(x,y) = 1 + 2x - y solves the PDE and
        // P1 captures it exactly, boundary data included
        let problem0 = line_problem(1.0, 1.0, 0.5).unwrap();
        let mesh = build_square_line_mesh(&problem0.domain, 0.25).unwrap();
        let g: ScalarFn = Arc::new(|p: Point2| 1.0 + 2.0 * p.x - p.y);
        let problem = ProblemSpec {
            domain: problem0.domain.clone(),
            coeffs: unit_coeffs(3.0, 0.0, 0.0),
            dirichlet: g.clone(),
            exact: None,
        };
        let (u, _) = solve_problem(&mesh, &problem, &SolverConfig::default()).unwrap();
        for (i, v) in mesh.vertices.iter().enumerate() {
            assert_relative_eq!(u[i], g(*v), epsilon = 1e-9);
        }
    }

    #[test]
    fn scaling_b_inversely_scales_solution() {
        let p1 = radial_problem(1.0, 100.0, 0.5).unwrap();
        let p2 = radial_problem(5.0, 500.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&p1.domain, 0.25).unwrap();
        let (u1, _) = solve_problem(&mesh, &p1, &SolverConfig::default()).unwrap();
        let (u2, _) = solve_problem(&mesh, &p2, &SolverConfig::default()).unwrap();
        let scale = u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in u1.iter().zip(&u2) {
            assert!((a - 5.0 * b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn interpolant_branch_mismatch_detected() {
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.4).unwrap();
        let broken = ExactSolution {
            value1: constant(1.0),
            value2: constant(2.0),
            grad1: Arc::new(|_| [0.0, 0.0]),
            grad2: Arc::new(|_| [0.0, 0.0]),
            seminorm_h2: None,
        };
        assert!(matches!(
            nodal_interpolant(&mesh, &broken),
            Err(Error::BranchMismatch { .. })
        ));
    }

    #[test]
    fn interpolant_of_linear_function_is_exact_everywhere() {
        let problem = radial_problem(1.0, 1.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.3).unwrap();
        let lin = |p: Point2| 3.0 * p.x - 2.0 * p.y + 1.0;
        let exact = ExactSolution {
            value1: Arc::new(lin),
            value2: Arc::new(lin),
            grad1: Arc::new(|_| [3.0, -2.0]),
            grad2: Arc::new(|_| [3.0, -2.0]),
            seminorm_h2: None,
        };
        let coeffs = nodal_interpolant(&mesh, &exact).unwrap();
        for (sx, sy) in [(0.1, 0.2), (-0.4, 0.3), (0.0, 0.0), (0.6, -0.1)] {
            let p = Point2::new(sx, sy);
            let (value, grad) = evaluate_field(&mesh, &coeffs, p).unwrap();
            assert_relative_eq!(value, lin(p), epsilon = 1e-12);
            assert_relative_eq!(grad[0], 3.0, epsilon = 1e-10);
            assert_relative_eq!(grad[1], -2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn field_value_at_vertices_and_shared_edges() {
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.3).unwrap();
        let coeffs: Vec<f64> = (0..mesh.n_vertices()).map(|i| (i as f64).sin()).collect();
        let (value, _) = evaluate_field(&mesh, &coeffs, mesh.vertices[5]).unwrap();
        assert_relative_eq!(value, coeffs[5], epsilon = 1e-12);

        // a point on the shared edge of triangles 0 and 1 of some annulus:
        // evaluate through each adjacent triangle directly
        let (a, b) = (mesh.triangles[10][0], mesh.triangles[10][1]);
        let mid = Point2::new(
            0.5 * (mesh.vertices[a].x + mesh.vertices[b].x),
            0.5 * (mesh.vertices[a].y + mesh.vertices[b].y),
        );
        let mut values = Vec::new();
        for t in 0..mesh.n_triangles() {
            let bary = barycentric_coords(&mesh.tri_points(t), mid);
            if bary.iter().all(|&l| l >= CONTAIN_TOL) {
                values.push(eval_in_triangle(&mesh, &coeffs, t, bary).unwrap().0);
            }
        }
        assert!(values.len() >= 2, "midpoint should sit on a shared edge");
        for w in values.windows(2) {
            assert_relative_eq!(w[0], w[1], epsilon = 1e-11);
        }
    }

    #[test]
    fn point_outside_mesh_is_an_error() {
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.4).unwrap();
        let coeffs = vec![0.0; mesh.n_vertices()];
        assert!(matches!(
            evaluate_field(&mesh, &coeffs, Point2::new(2.0, 2.0)),
            Err(Error::PointOutsideMesh { .. })
        ));
    }

    #[test]
    fn locator_agrees_with_linear_scan() {
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.22).unwrap();
        let locator = PointLocator::new(&mesh);
        let coeffs: Vec<f64> = (0..mesh.n_vertices())
            .map(|i| (i as f64 * 0.7).cos())
            .collect();
        let mut checked = 0;
        for i in 0..25 {
            for j in 0..25 {
                let p = Point2::new(-1.0 + i as f64 * 0.08, -1.0 + j as f64 * 0.08);
                let scanned = evaluate_field(&mesh, &coeffs, p);
                let located = locator.evaluate(&mesh, &coeffs, p);
                match (scanned, located) {
                    (Ok((v1, g1)), Ok((v2, g2))) => {
                        assert_eq!(v1, v2);
                        assert_eq!(g1, g2);
                        checked += 1;
                    }
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("scan {a:?} vs locator {b:?} at ({}, {})", p.x, p.y),
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn side_classification_feeds_branch_choice() {
        // the sliver between chord and arc gets region1 coefficients even
        // though the triangle's centroid region is region2
        let problem = radial_problem(1.0, 100.0, 0.5).unwrap();
        let mesh = build_disk_polar_mesh(&problem.domain, 0.25).unwrap();
        let t = (0..mesh.n_triangles())
            .find(|&t| mesh.tri_class[t] == TriClass::Irregular)
            .unwrap();
        assert_eq!(mesh.tri_region[t], RegionId::Region2);
        let chord: Vec<Point2> = mesh.triangles[t]
            .iter()
            .filter(|&&v| mesh.vertex_marker[v] == VertexMarker::Interface)
            .map(|&v| mesh.vertices[v])
            .collect();
        assert_eq!(chord.len(), 2);
        // chord midpoint lies strictly inside the circle
        let chord_mid = Point2::new(
            0.5 * (chord[0].x + chord[1].x),
            0.5 * (chord[0].y + chord[1].y),
        );
        assert_eq!(
            side_of_interface(&mesh.domain.interface, chord_mid, 1e-12),
            Side::Region1
        );
    }
}
