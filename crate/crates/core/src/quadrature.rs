//! Triangle quadrature rules, expressed in barycentric coordinates.
//!
//! Weights are normalized to sum to 1; integrals multiply by triangle area.

use crate::geometry::Point2;

/// One quadrature node: barycentric coordinates and weight.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Edge-midpoint rule, exact for quadratics. Used on elements where the
/// coefficient is constant.
pub const MIDPOINT_RULE: [QuadNode; 3] = [
    QuadNode {
        bary: [0.5, 0.5, 0.0],
        weight: 1.0 / 3.0,
    },
    QuadNode {
        bary: [0.0, 0.5, 0.5],
        weight: 1.0 / 3.0,
    },
    QuadNode {
        bary: [0.5, 0.0, 0.5],
        weight: 1.0 / 3.0,
    },
];

const D4_A1: f64 = 0.816_847_572_980_459;
const D4_B1: f64 = 0.091_576_213_509_771;
const D4_W1: f64 = 0.109_951_743_655_322;
const D4_A2: f64 = 0.108_103_018_168_070;
const D4_B2: f64 = 0.445_948_490_915_965;
const D4_W2: f64 = 0.223_381_589_678_011;

/// Six-point rule, exact for quartics. Used on interface-crossing elements
/// and for all error norms.
pub const DEGREE4_RULE: [QuadNode; 6] = [
    QuadNode {
        bary: [D4_A1, D4_B1, D4_B1],
        weight: D4_W1,
    },
    QuadNode {
        bary: [D4_B1, D4_A1, D4_B1],
        weight: D4_W1,
    },
    QuadNode {
        bary: [D4_B1, D4_B1, D4_A1],
        weight: D4_W1,
    },
    QuadNode {
        bary: [D4_A2, D4_B2, D4_B2],
        weight: D4_W2,
    },
    QuadNode {
        bary: [D4_B2, D4_A2, D4_B2],
        weight: D4_W2,
    },
    QuadNode {
        bary: [D4_B2, D4_B2, D4_A2],
        weight: D4_W2,
    },
];

/// Signed area of the triangle `(a, b, c)`; positive when counterclockwise.
pub fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Maps barycentric coordinates to the physical point.
pub fn bary_to_point(verts: &[Point2; 3], bary: [f64; 3]) -> Point2 {
    Point2::new(
        bary[0] * verts[0].x + bary[1] * verts[1].x + bary[2] * verts[2].x,
        bary[0] * verts[0].y + bary[1] * verts[1].y + bary[2] * verts[2].y,
    )
}

/// Integrates `f` over the triangle with the given rule.
pub fn integrate<F: FnMut(Point2) -> f64>(verts: &[Point2; 3], rule: &[QuadNode], mut f: F) -> f64 {
    let area = signed_area(verts[0], verts[1], verts[2]).abs();
    rule.iter()
        .map(|node| node.weight * f(bary_to_point(verts, node.bary)))
        .sum::<f64>()
        * area
}
