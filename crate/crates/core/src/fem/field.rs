//! Evaluation of nodal fields at quadrature points. Fields are stored node
//! by node with `components` values per node.

use super::element::PointEval;
use crate::geometry::Mesh;
use crate::tensor::{Mat2, Vec2};

pub fn value(mesh: &Mesh, e: usize, p: &PointEval, field: &[f64], components: usize) -> Vec2 {
    let mut v = [0.0; 2];
    for (a, &n) in mesh.element(e).iter().enumerate() {
        for (i, vi) in v.iter_mut().enumerate().take(components) {
            *vi += p.n[a] * field[n * components + i];
        }
    }
    v
}

/// `g[i][j] = ∂u_i/∂y_j`; a scalar field fills row 0.
pub fn gradient(mesh: &Mesh, e: usize, p: &PointEval, field: &[f64], components: usize) -> Mat2 {
    let mut g = [[0.0; 2]; 2];
    for (a, &n) in mesh.element(e).iter().enumerate() {
        for (i, row) in g.iter_mut().enumerate().take(components) {
            let u = field[n * components + i];
            row[0] += u * p.dn[a][0];
            row[1] += u * p.dn[a][1];
        }
    }
    g
}

/// Volume integral of every component over the solid.
pub fn integral(mesh: &Mesh, cache: &super::QuadCache, field: &[f64], components: usize) -> Vec2 {
    let mut s = [0.0; 2];
    for e in 0..mesh.num_elements() {
        for p in cache.element(e) {
            let v = value(mesh, e, p, field, components);
            s[0] += p.weight * v[0];
            s[1] += p.weight * v[1];
        }
    }
    s
}
