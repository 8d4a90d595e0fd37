//! Error measurement and rate extraction: norms split by element class,
//! quasi-optimality ratio, log-log rate fits with and without the
//! logarithmic correction, and the epsilon trade-off minimizer.

use crate::error::{Error, Result};
use crate::fem::barycentric_gradients;
use crate::geometry::side_of_interface;
use crate::meshgen::{Mesh, TriClass};
use crate::problems::ExactSolution;
use crate::quadrature::{bary_to_point, signed_area, DEGREE4_RULE};
use crate::solver::SolveStats;

/// Norms of u - u_h over one mesh. `h1_regular` and `h1_irregular` split the
/// full H1 norm by element class, so their squares sum to `h1` squared.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub h: f64,
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
    pub h1_regular: f64,
    pub h1_irregular: f64,
    pub dof_count: usize,
}

/// Least-squares slopes of ln(error) against ln(h), fitted twice: as a pure
/// power law and after dividing the error by |ln h|^(1/2).
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub slope_with_log: f64,
    pub residual_pure: f64,
    pub residual_log: f64,
}

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub err_uh: ErrorReport,
    pub err_ui: ErrorReport,
    pub cea_ratio: f64,
    pub stats: SolveStats,
}

/// Fits per error column; a column that contains zeros (for instance the
/// irregular split on a mesh family with no irregular elements) has no fit.
#[derive(Debug, Clone, Default)]
pub struct ColumnFits {
    pub l2_uh: Option<RateFit>,
    pub h1_uh: Option<RateFit>,
    pub h1_uh_regular: Option<RateFit>,
    pub h1_uh_irregular: Option<RateFit>,
    pub l2_ui: Option<RateFit>,
    pub h1_ui: Option<RateFit>,
    pub h1_ui_regular: Option<RateFit>,
    pub h1_ui_irregular: Option<RateFit>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    /// Ordered by strictly decreasing h.
    pub rows: Vec<StudyRow>,
    pub fits: ColumnFits,
}

/// Integrates (u - u_h)^2 and |grad u - grad u_h|^2 with the degree-4 rule.
/// On irregular triangles every quadrature point picks the exact-solution
/// branch from the true interface, matching how assembly treats them.
pub fn error_norms(mesh: &Mesh, coeffs: &[f64], exact: &ExactSolution) -> ErrorReport {
    assert_eq!(coeffs.len(), mesh.n_vertices());
    let curve = &mesh.domain.interface;
    let tol = mesh.domain.snap_tol();
    // [regular, irregular] buckets for the l2 and seminorm parts
    let mut l2_sq = [0.0f64; 2];
    let mut semi_sq = [0.0f64; 2];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.tri_points(t);
        let grads = barycentric_gradients(&tri).expect("mesh triangles are non-degenerate");
        let idx = mesh.triangles[t];
        let area = signed_area(tri[0], tri[1], tri[2]).abs();
        let mut uh_grad = [0.0, 0.0];
        for i in 0..3 {
            uh_grad[0] += coeffs[idx[i]] * grads[i][0];
            uh_grad[1] += coeffs[idx[i]] * grads[i][1];
        }
        let mut tri_l2 = 0.0;
        let mut tri_semi = 0.0;
        for node in DEGREE4_RULE.iter() {
            let p = bary_to_point(&tri, node.bary);
            let region = match mesh.tri_class[t] {
                TriClass::Regular => mesh.tri_region[t],
                TriClass::Irregular => side_of_interface(curve, p, tol).region_or_first(),
            };
            let u = exact.value(region, p);
            let gu = exact.grad(region, p);
            let mut uh = 0.0;
            for i in 0..3 {
                uh += coeffs[idx[i]] * node.bary[i];
            }
            let w = node.weight * area;
            tri_l2 += w * (u - uh) * (u - uh);
            let dx = gu[0] - uh_grad[0];
            let dy = gu[1] - uh_grad[1];
            tri_semi += w * (dx * dx + dy * dy);
        }
        let bucket = match mesh.tri_class[t] {
            TriClass::Regular => 0,
            TriClass::Irregular => 1,
        };
        l2_sq[bucket] += tri_l2;
        semi_sq[bucket] += tri_semi;
    }
    let l2_total = l2_sq[0] + l2_sq[1];
    let semi_total = semi_sq[0] + semi_sq[1];
    ErrorReport {
        h: mesh.h,
        l2: l2_total.sqrt(),
        h1_semi: semi_total.sqrt(),
        h1: (l2_total + semi_total).sqrt(),
        h1_regular: (l2_sq[0] + semi_sq[0]).sqrt(),
        h1_irregular: (l2_sq[1] + semi_sq[1]).sqrt(),
        dof_count: mesh.free_vertex_count(),
    }
}

/// Ratio of the solver's H1 error to the interpolant's.
pub fn cea_ratio(err_uh: &ErrorReport, err_ui: &ErrorReport) -> Result<f64> {
    if !(err_ui.h1 > 0.0) {
        return Err(Error::InvalidInput(
            "exact solution is in the FE space (interpolation error is zero)".into(),
        ));
    }
    Ok(err_uh.h1 / err_ui.h1)
}

fn least_squares_slope(xy: &[(f64, f64)]) -> (f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in xy {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for &(x, y) in xy {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    (slope, (ss / n).sqrt())
}

/// Fits ln(error) = slope ln(h) + const by least squares, both for the raw
/// errors and for errors divided by |ln h|^(1/2).
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 3 (h, error) pairs, got {}",
            pairs.len()
        )));
    }
    for w in pairs.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::InvalidInput(format!(
                "h values must be strictly decreasing, got {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    for &(h, e) in pairs {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidInput(format!(
                "h must lie in (0, 1), got {h}"
            )));
        }
        if !(e > 0.0) {
            return Err(Error::InvalidInput(format!(
                "errors must be positive to fit a rate, got {e} at h = {h}"
            )));
        }
    }
    let pure: Vec<(f64, f64)> = pairs.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let corrected: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(h, e)| (h.ln(), (e / h.ln().abs().sqrt()).ln()))
        .collect();
    let (slope, residual_pure) = least_squares_slope(&pure);
    let (slope_with_log, residual_log) = least_squares_slope(&corrected);
    Ok(RateFit {
        slope,
        slope_with_log,
        residual_pure,
        residual_log,
    })
}

/// Minimizer of h^(1-eps)/sqrt(eps) over eps.
pub fn epsilon_star(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon_star needs h in (0, 1), got {h}"
        )));
    }
    Ok(1.0 / (2.0 * h.ln().abs()))
}

/// The interpolation-bound trade-off h^(1-eps)/sqrt(eps) that epsilon_star
/// minimizes.
pub fn epsilon_tradeoff(h: f64, eps: f64) -> f64 {
    h.powf(1.0 - eps) / eps.sqrt()
}
