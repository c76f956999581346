use super::dof::DofMap;
use super::element::{edge_nodes, edge_shape, eval_point, triangle_rule, PointEval, EDGE_POINTS, EDGE_WEIGHTS};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryEdge, Mesh};
use crate::material::MaterialMap;
use crate::parallel::{map_indexed, ExecMode};
use crate::tensor::{Mat2, Vec2};

/// Shape data at every quadrature point of every element, computed once and
/// shared by assembly and post-processing.
#[derive(Debug, Clone)]
pub struct QuadCache {
    pub points_per_element: usize,
    pub points: Vec<PointEval>,
}

impl QuadCache {
    pub fn new(mesh: &Mesh, mode: ExecMode) -> Result<Self> {
        let rule = triangle_rule(mesh.order);
        let nq = rule.len();
        let per_element: Vec<Vec<PointEval>> = map_indexed(mode, mesh.num_elements(), |e| {
            let coords = mesh.element_coords(e);
            (0..nq)
                .map(|q| eval_point(mesh.order, &coords, rule.points[q], rule.weights[q]))
                .collect()
        });
        let mut points = Vec::with_capacity(nq * mesh.num_elements());
        for (e, pts) in per_element.into_iter().enumerate() {
            if let Some(p) = pts.iter().find(|p| !(p.det_j > 0.0)) {
                return Err(Error::Mesh(format!("element {e} has det J = {:e} at a quadrature point", p.det_j)));
            }
            points.extend(pts);
        }
        Ok(QuadCache {
            points_per_element: nq,
            points,
        })
    }

    #[inline]
    pub fn element(&self, e: usize) -> &[PointEval] {
        &self.points[e * self.points_per_element..(e + 1) * self.points_per_element]
    }

    pub fn solid_area(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearKind {
    /// `∫ C_ijkl ∂v_k/∂y_l ∂w_i/∂y_j`, two components per node.
    Elasticity,
    /// `∫ κ_ik ∂v/∂y_k ∂w/∂y_i`, one component per node.
    Conduction,
}

impl BilinearKind {
    pub fn components(self) -> usize {
        match self {
            BilinearKind::Elasticity => 2,
            BilinearKind::Conduction => 1,
        }
    }
}

pub fn assemble_bilinear(
    mesh: &Mesh,
    cache: &QuadCache,
    materials: &MaterialMap,
    dofs: &DofMap,
    kind: BilinearKind,
    mode: ExecMode,
) -> CsrMatrix {
    let nen = mesh.nodes_per_element();
    let nc = kind.components();
    assert_eq!(dofs.components, nc, "DOF map has the wrong number of components");
    let blocks: Vec<Vec<(usize, usize, f64)>> = map_indexed(mode, mesh.num_elements(), |e| {
        let mat = materials.get(mesh.regions[e]);
        let el = mesh.element(e);
        let n = nen * nc;
        let mut ke = vec![0.0; n * n];
        for p in cache.element(e) {
            match kind {
                BilinearKind::Elasticity => {
                    let c = &mat.stiffness;
                    for a in 0..nen {
                        for b in 0..nen {
                            for i in 0..2 {
                                for k in 0..2 {
                                    let mut s = 0.0;
                                    for j in 0..2 {
                                        for l in 0..2 {
                                            s += c.get(i, j, k, l) * p.dn[a][j] * p.dn[b][l];
                                        }
                                    }
                                    ke[(a * 2 + i) * n + b * 2 + k] += p.weight * s;
                                }
                            }
                        }
                    }
                }
                BilinearKind::Conduction => {
                    let kap = &mat.conductivity;
                    for a in 0..nen {
                        for b in 0..nen {
                            let mut s = 0.0;
                            for i in 0..2 {
                                for k in 0..2 {
                                    s += kap[i][k] * p.dn[b][k] * p.dn[a][i];
                                }
                            }
                            ke[a * n + b] += p.weight * s;
                        }
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(n * n);
        for a in 0..nen {
            for i in 0..nc {
                let r = dofs.dof(el[a], i);
                for b in 0..nen {
                    for k in 0..nc {
                        out.push((r, dofs.dof(el[b], k), ke[(a * nc + i) * n + b * nc + k]));
                    }
                }
            }
        }
        out
    });
    CsrMatrix::from_triplets(dofs.len(), blocks.into_iter().flatten().collect())
}

/// Load density at a quadrature point: a flux-like term tested against
/// `∂w_i/∂y_j` and a volume term tested against `w_i`, giving the Galerkin
/// right-hand side `∫ (s_ij ∂w_i/∂y_j + f_i w_i) dV`.
///
/// Scalar problems read row 0 of `s` as the flux and `f[0]` as the source.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoadDensity {
    pub flux: Mat2,
    pub source: Vec2,
}

/// Assembles `∫ (s : ∇w + f · w) dV` for the density returned by `load`,
/// called with (element, quadrature index, point data).
pub fn assemble_linear<F>(mesh: &Mesh, cache: &QuadCache, dofs: &DofMap, mode: ExecMode, load: F) -> Vec<f64>
where
    F: Fn(usize, usize, &PointEval) -> LoadDensity + Sync + Send,
{
    let nen = mesh.nodes_per_element();
    let nc = dofs.components;
    let parts: Vec<Vec<(usize, f64)>> = map_indexed(mode, mesh.num_elements(), |e| {
        let el = mesh.element(e);
        let mut fe = vec![0.0; nen * nc];
        for (q, p) in cache.element(e).iter().enumerate() {
            let d = load(e, q, p);
            for a in 0..nen {
                for i in 0..nc {
                    let s = d.flux[i][0] * p.dn[a][0] + d.flux[i][1] * p.dn[a][1] + d.source[i] * p.n[a];
                    fe[a * nc + i] += p.weight * s;
                }
            }
        }
        (0..nen * nc).map(|k| (dofs.dof(el[k / nc], k % nc), fe[k])).collect()
    });
    let mut rhs = vec![0.0; dofs.len()];
    for part in parts {
        for (r, v) in part {
            rhs[r] += v;
        }
    }
    rhs
}

/// Folds a matrix assembled on an unreduced map onto the periodic map by
/// summing follower rows and columns into their masters.
pub fn reduce_periodic_matrix(full: &CsrMatrix, full_map: &DofMap, reduced: &DofMap) -> CsrMatrix {
    let target = fold_index(full_map, reduced);
    let mut triplets = Vec::with_capacity(full.nnz());
    for i in 0..full.n {
        for (j, v) in full.row(i) {
            triplets.push((target[i], target[j], v));
        }
    }
    CsrMatrix::from_triplets(reduced.len(), triplets)
}

pub fn reduce_periodic_vector(full: &[f64], full_map: &DofMap, reduced: &DofMap) -> Vec<f64> {
    let target = fold_index(full_map, reduced);
    let mut out = vec![0.0; reduced.len()];
    for (i, v) in full.iter().enumerate() {
        out[target[i]] += v;
    }
    out
}

fn fold_index(full_map: &DofMap, reduced: &DofMap) -> Vec<usize> {
    assert_eq!(full_map.components, reduced.components);
    let nc = full_map.components;
    let mut target = vec![0; full_map.len()];
    for n in 0..full_map.node_slot.len() {
        for c in 0..nc {
            target[full_map.dof(n, c)] = reduced.dof(n, c);
        }
    }
    target
}

/// `∫ N_a dV` folded onto the reduced numbering, per component: the
/// weights of the volume mean of a discrete field.
pub fn mean_weights(mesh: &Mesh, cache: &QuadCache, dofs: &DofMap) -> Vec<f64> {
    let nen = mesh.nodes_per_element();
    let mut w = vec![0.0; dofs.len()];
    for e in 0..mesh.num_elements() {
        let el = mesh.element(e);
        for p in cache.element(e) {
            for a in 0..nen {
                for c in 0..dofs.components {
                    w[dofs.dof(el[a], c)] += p.weight * p.n[a];
                }
            }
        }
    }
    w
}

/// Second moment `I_kn = ∫_solid (x_k − X_c,k)(x_n − X_c,n) dV` about the
/// center of the full square.
pub fn volume_moment(mesh: &Mesh, cache: &QuadCache) -> Mat2 {
    let xc = mesh.cell.center();
    let mut m = [[0.0; 2]; 2];
    for p in &cache.points {
        let y = [p.x[0] - xc[0], p.x[1] - xc[1]];
        for k in 0..2 {
            for n in 0..2 {
                m[k][n] += p.weight * y[k] * y[n];
            }
        }
    }
    m
}

/// Quadrature point on a pore edge: position, the nodal basis of the edge
/// and `n ds` with `n` the outward normal of the solid.
#[derive(Debug, Clone, Copy)]
pub struct EdgePoint {
    pub x: Vec2,
    pub basis: [f64; 3],
    pub normal_ds: Vec2,
}

/// Quadrature on the pore surfaces; returns the edge's global nodes with
/// its points.
pub fn pore_edge_points(mesh: &Mesh, edge: BoundaryEdge) -> (Vec<usize>, [EdgePoint; 3]) {
    let el = mesh.element(edge.element);
    let local = edge_nodes(mesh.order, edge.local_edge);
    let nodes: Vec<usize> = local.iter().map(|&a| el[a]).collect();
    let pts = std::array::from_fn(|g| {
        let (v, dv) = edge_shape(mesh.order, EDGE_POINTS[g]);
        let mut x = [0.0; 2];
        let mut dx = [0.0; 2];
        for (k, &n) in nodes.iter().enumerate() {
            for i in 0..2 {
                x[i] += v[k] * mesh.nodes[n][i];
                dx[i] += dv[k] * mesh.nodes[n][i];
            }
        }
        // counter-clockwise elements keep the solid on the left of the edge
        EdgePoint {
            x,
            basis: v,
            normal_ds: [EDGE_WEIGHTS[g] * dx[1], -EDGE_WEIGHTS[g] * dx[0]],
        }
    });
    (nodes, pts)
}
