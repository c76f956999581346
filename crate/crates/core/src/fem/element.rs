//! Lagrange triangles of order 1 and 2 on the reference triangle
//! `(0,0), (1,0), (0,1)`, with isoparametric geometry.
//!
//! Node numbering follows Gmsh: vertices 0, 1, 2 counter-clockwise, then the
//! midside nodes of edges 0–1, 1–2 and 2–0.

use crate::geometry::ElementOrder;
use crate::tensor::Vec2;

pub const MAX_NODES: usize = 6;

/// Three-point rule, exact for degree 2. Weights sum to the reference area ½.
const RULE3_POINTS: [[f64; 2]; 3] = [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]];
const RULE3_WEIGHTS: [f64; 3] = [1.0 / 6.0; 3];

const A6: f64 = 0.445_948_490_915_965;
const B6: f64 = 0.091_576_213_509_771;
const WA6: f64 = 0.5 * 0.223_381_589_678_011;
const WB6: f64 = 0.5 * 0.109_951_743_655_322;

/// Six-point rule, exact for degree 4.
const RULE6_POINTS: [[f64; 2]; 6] = [
    [A6, A6],
    [1.0 - 2.0 * A6, A6],
    [A6, 1.0 - 2.0 * A6],
    [B6, B6],
    [1.0 - 2.0 * B6, B6],
    [B6, 1.0 - 2.0 * B6],
];
const RULE6_WEIGHTS: [f64; 6] = [WA6, WA6, WA6, WB6, WB6, WB6];

/// Three-point Gauss–Legendre rule on [0, 1], exact for degree 5.
pub const EDGE_POINTS: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
pub const EDGE_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

#[derive(Debug, Clone, Copy)]
pub struct QuadRule {
    pub points: &'static [[f64; 2]],
    pub weights: &'static [f64],
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// 3-point rule for linear elements, 6-point rule for quadratic ones.
pub fn triangle_rule(order: ElementOrder) -> QuadRule {
    match order {
        ElementOrder::Linear => QuadRule {
            points: &RULE3_POINTS,
            weights: &RULE3_WEIGHTS,
        },
        ElementOrder::Quadratic => QuadRule {
            points: &RULE6_POINTS,
            weights: &RULE6_WEIGHTS,
        },
    }
}

pub fn shape_values(order: ElementOrder, xi: [f64; 2]) -> [f64; MAX_NODES] {
    let (l2, l3) = (xi[0], xi[1]);
    let l1 = 1.0 - l2 - l3;
    match order {
        ElementOrder::Linear => [l1, l2, l3, 0.0, 0.0, 0.0],
        ElementOrder::Quadratic => [
            l1 * (2.0 * l1 - 1.0),
            l2 * (2.0 * l2 - 1.0),
            l3 * (2.0 * l3 - 1.0),
            4.0 * l1 * l2,
            4.0 * l2 * l3,
            4.0 * l3 * l1,
        ],
    }
}

/// Gradients with respect to the reference coordinates.
pub fn shape_gradients(order: ElementOrder, xi: [f64; 2]) -> [[f64; 2]; MAX_NODES] {
    let (l2, l3) = (xi[0], xi[1]);
    let l1 = 1.0 - l2 - l3;
    match order {
        ElementOrder::Linear => [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0], [0.0; 2], [0.0; 2], [0.0; 2]],
        ElementOrder::Quadratic => [
            [1.0 - 4.0 * l1, 1.0 - 4.0 * l1],
            [4.0 * l2 - 1.0, 0.0],
            [0.0, 4.0 * l3 - 1.0],
            [4.0 * (l1 - l2), -4.0 * l2],
            [4.0 * l3, 4.0 * l2],
            [-4.0 * l3, 4.0 * (l1 - l3)],
        ],
    }
}

/// Shape data mapped to physical coordinates at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    /// Quadrature weight times `det J`.
    pub weight: f64,
    pub det_j: f64,
    pub x: Vec2,
    pub n: [f64; MAX_NODES],
    /// `∂N_a/∂y_j`
    pub dn: [[f64; 2]; MAX_NODES],
}

pub fn eval_point(order: ElementOrder, coords: &[Vec2], xi: [f64; 2], weight: f64) -> PointEval {
    let nen = order.nodes_per_element();
    let n = shape_values(order, xi);
    let g = shape_gradients(order, xi);
    let mut jac = [[0.0; 2]; 2];
    let mut x = [0.0; 2];
    for a in 0..nen {
        for i in 0..2 {
            x[i] += n[a] * coords[a][i];
            for r in 0..2 {
                jac[i][r] += coords[a][i] * g[a][r];
            }
        }
    }
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
    let mut dn = [[0.0; 2]; MAX_NODES];
    for a in 0..nen {
        for j in 0..2 {
            dn[a][j] = g[a][0] * inv[0][j] + g[a][1] * inv[1][j];
        }
    }
    PointEval {
        weight: weight * det,
        det_j: det,
        x,
        n,
        dn,
    }
}

/// Local node indices of edge `e` (start, end, midside if quadratic).
pub fn edge_nodes(order: ElementOrder, edge: usize) -> &'static [usize] {
    const LIN: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
    const QUAD: [[usize; 3]; 3] = [[0, 1, 3], [1, 2, 4], [2, 0, 5]];
    match order {
        ElementOrder::Linear => &LIN[edge],
        ElementOrder::Quadratic => &QUAD[edge],
    }
}

/// 1D Lagrange basis on [0, 1] for an edge with nodes (start, end[, mid]),
/// returning values and derivatives.
pub fn edge_shape(order: ElementOrder, t: f64) -> ([f64; 3], [f64; 3]) {
    match order {
        ElementOrder::Linear => ([1.0 - t, t, 0.0], [-1.0, 1.0, 0.0]),
        ElementOrder::Quadratic => (
            [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)],
            [4.0 * t - 3.0, 4.0 * t - 1.0, 4.0 - 8.0 * t],
        ),
    }
}
