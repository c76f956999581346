use super::periodic::{periodic_pairs, PeriodicMap, DEFAULT_PAIRING_TOLERANCE};
use crate::error::{Error, Result};
use crate::fem::element::{edge_nodes, eval_point, triangle_rule, MAX_NODES};
use crate::tensor::Vec2;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Polynomial degree of the Lagrange triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ElementOrder {
    Linear,
    #[default]
    Quadratic,
}

impl ElementOrder {
    pub fn nodes_per_element(self) -> usize {
        match self {
            ElementOrder::Linear => 3,
            ElementOrder::Quadratic => 6,
        }
    }

    pub fn degree(self) -> u8 {
        match self {
            ElementOrder::Linear => 1,
            ElementOrder::Quadratic => 2,
        }
    }
}

impl TryFrom<u8> for ElementOrder {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(ElementOrder::Linear),
            2 => Ok(ElementOrder::Quadratic),
            _ => Err(format!("element order must be 1 or 2, got {v}")),
        }
    }
}

impl From<ElementOrder> for u8 {
    fn from(o: ElementOrder) -> u8 {
        o.degree()
    }
}

/// The square `[x0, x0 + L] × [y0, y0 + L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellBox {
    pub origin: Vec2,
    pub edge: f64,
}

impl CellBox {
    pub fn center(&self) -> Vec2 {
        [self.origin[0] + 0.5 * self.edge, self.origin[1] + 0.5 * self.edge]
    }

    pub fn area(&self) -> f64 {
        self.edge * self.edge
    }

    pub fn on_left(&self, p: Vec2, tol: f64) -> bool {
        (p[0] - self.origin[0]).abs() <= tol
    }

    pub fn on_right(&self, p: Vec2, tol: f64) -> bool {
        (p[0] - self.origin[0] - self.edge).abs() <= tol
    }

    pub fn on_bottom(&self, p: Vec2, tol: f64) -> bool {
        (p[1] - self.origin[1]).abs() <= tol
    }

    pub fn on_top(&self, p: Vec2, tol: f64) -> bool {
        (p[1] - self.origin[1] - self.edge).abs() <= tol
    }

    pub fn on_boundary(&self, p: Vec2, tol: f64) -> bool {
        self.on_left(p, tol) || self.on_right(p, tol) || self.on_bottom(p, tol) || self.on_top(p, tol)
    }
}

/// An element edge lying on a pore surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub element: usize,
    pub local_edge: usize,
}

/// Node sets of the four faces (sorted, corners included in two faces each)
/// and the edges of every pore surface.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTags {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub bottom: Vec<usize>,
    pub top: Vec<usize>,
    pub pores: Vec<Vec<BoundaryEdge>>,
}

impl BoundaryTags {
    /// Tags the faces by coordinate.
    pub fn faces_from_coordinates(cell: &CellBox, nodes: &[Vec2], tol: f64) -> Self {
        let pick = |f: &dyn Fn(Vec2) -> bool| (0..nodes.len()).filter(|&i| f(nodes[i])).collect::<Vec<_>>();
        BoundaryTags {
            left: pick(&|p| cell.on_left(p, tol)),
            right: pick(&|p| cell.on_right(p, tol)),
            bottom: pick(&|p| cell.on_bottom(p, tol)),
            top: pick(&|p| cell.on_top(p, tol)),
            pores: Vec::new(),
        }
    }
}

/// Periodic triangulation of the solid part of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub cell: CellBox,
    pub order: ElementOrder,
    pub nodes: Vec<Vec2>,
    /// Flat connectivity, `nodes_per_element` entries per triangle.
    pub connectivity: Vec<usize>,
    /// Material region of every element.
    pub regions: Vec<u32>,
    pub boundary: BoundaryTags,
    pub periodic: PeriodicMap,
}

impl Mesh {
    /// Builds a mesh and checks orientation and face periodicity.
    pub fn new(
        cell: CellBox,
        order: ElementOrder,
        nodes: Vec<Vec2>,
        connectivity: Vec<usize>,
        regions: Vec<u32>,
        boundary: BoundaryTags,
    ) -> Result<Self> {
        let nen = order.nodes_per_element();
        if connectivity.len() % nen != 0 || regions.len() != connectivity.len() / nen {
            return Err(Error::Mesh(format!(
                "connectivity of length {} and {} region tags do not describe {}-node triangles",
                connectivity.len(),
                regions.len(),
                nen
            )));
        }
        if let Some(&bad) = connectivity.iter().find(|&&n| n >= nodes.len()) {
            return Err(Error::Mesh(format!("connectivity references missing node {bad}")));
        }
        let mut mesh = Mesh {
            cell,
            order,
            nodes,
            connectivity,
            regions,
            boundary,
            periodic: PeriodicMap::default(),
        };
        mesh.check_orientation()?;
        mesh.periodic = periodic_pairs(&mesh, DEFAULT_PAIRING_TOLERANCE * cell.edge)?;
        Ok(mesh)
    }

    #[inline]
    pub fn nodes_per_element(&self) -> usize {
        self.order.nodes_per_element()
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.regions.len()
    }

    #[inline]
    pub fn element(&self, e: usize) -> &[usize] {
        let nen = self.nodes_per_element();
        &self.connectivity[e * nen..(e + 1) * nen]
    }

    pub fn element_coords(&self, e: usize) -> [Vec2; MAX_NODES] {
        let mut c = [[0.0; 2]; MAX_NODES];
        for (a, &n) in self.element(e).iter().enumerate() {
            c[a] = self.nodes[n];
        }
        c
    }

    /// Centroid of the vertex triangle.
    pub fn centroid(&self, e: usize) -> Vec2 {
        let v = self.element(e);
        let (a, b, c) = (self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Area of element `e` including curved edges.
    pub fn element_area(&self, e: usize) -> f64 {
        let rule = triangle_rule(self.order);
        let coords = self.element_coords(e);
        (0..rule.len())
            .map(|q| eval_point(self.order, &coords, rule.points[q], rule.weights[q]).weight)
            .sum()
    }

    /// Meshed solid area.
    pub fn solid_area(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.element_area(e)).sum()
    }

    /// Void fraction implied by the meshed solid, `1 − A_solid / L²`.
    pub fn measured_porosity(&self) -> f64 {
        1.0 - self.solid_area() / self.cell.area()
    }

    /// Inradius over circumradius of the vertex triangle; 1/2 for equilateral.
    pub fn element_quality(&self, e: usize) -> f64 {
        let v = self.element(e);
        triangle_quality(self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]])
    }

    pub fn min_quality(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.element_quality(e)).fold(f64::INFINITY, f64::min)
    }

    /// Fails on the first element with a nonpositive Jacobian determinant at
    /// a quadrature point or a vertex.
    pub fn check_orientation(&self) -> Result<()> {
        let rule = triangle_rule(self.order);
        let vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for e in 0..self.num_elements() {
            let coords = self.element_coords(e);
            let points = rule.points.iter().chain(vertices.iter());
            for xi in points {
                let det = eval_point(self.order, &coords, *xi, 1.0).det_j;
                if !(det > 0.0) {
                    return Err(Error::Mesh(format!(
                        "element {e} is inverted or degenerate (det J = {det:e} at reference point {xi:?})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Global nodes of a boundary edge in the order (start, end[, mid]).
    pub fn edge_global_nodes(&self, edge: BoundaryEdge) -> Vec<usize> {
        let el = self.element(edge.element);
        edge_nodes(self.order, edge.local_edge).iter().map(|&a| el[a]).collect()
    }

    /// Edges that belong to exactly one element, as (element, local edge).
    pub fn free_edges(&self) -> Vec<BoundaryEdge> {
        let mut count: HashMap<(usize, usize), (usize, BoundaryEdge)> = HashMap::new();
        for e in 0..self.num_elements() {
            let el = self.element(e);
            for k in 0..3 {
                let (a, b) = (el[k], el[(k + 1) % 3]);
                let entry = count.entry((a.min(b), a.max(b))).or_insert((0, BoundaryEdge { element: e, local_edge: k }));
                entry.0 += 1;
            }
        }
        let mut free: Vec<BoundaryEdge> = count.into_values().filter(|(n, _)| *n == 1).map(|(_, be)| be).collect();
        free.sort_by_key(|be| (be.element, be.local_edge));
        free
    }

    /// Relabels element regions from a predicate on the centroid.
    pub fn assign_regions(&mut self, region_of: impl Fn(Vec2) -> u32) {
        for e in 0..self.num_elements() {
            self.regions[e] = region_of(self.centroid(e));
        }
    }

    pub fn num_regions(&self) -> usize {
        self.regions.iter().max().map_or(0, |&r| r as usize + 1)
    }

    /// Debug dump with nodes, cells and tags.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn triangle_quality(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let la = (b[0] - c[0]).hypot(b[1] - c[1]);
    let lb = (a[0] - c[0]).hypot(a[1] - c[1]);
    let lc = (a[0] - b[0]).hypot(a[1] - b[1]);
    let area = signed_area(a, b, c);
    if area <= 0.0 {
        return 0.0;
    }
    let s = 0.5 * (la + lb + lc);
    let inradius = area / s;
    let circumradius = la * lb * lc / (4.0 * area);
    inradius / circumradius
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quality_of_reference_shapes() {
        let h = 3f64.sqrt() / 2.0;
        assert_relative_eq!(triangle_quality([0.0, 0.0], [1.0, 0.0], [0.5, h]), 0.5, epsilon = 1e-14);
        assert_relative_eq!(triangle_quality([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), 2f64.sqrt() - 1.0, epsilon = 1e-14);
        assert_eq!(triangle_quality([0.0, 0.0], [0.0, 1.0], [1.0, 0.0]), 0.0);
    }

    #[test]
    fn order_serializes_as_degree() {
        assert_eq!(serde_json::to_string(&ElementOrder::Linear).unwrap(), "1");
        let o: ElementOrder = serde_json::from_str("2").unwrap();
        assert_eq!(o, ElementOrder::Quadratic);
        assert!(serde_json::from_str::<ElementOrder>("3").is_err());
    }

    #[test]
    fn inverted_element_is_rejected() {
        let cell = CellBox { origin: [0.0, 0.0], edge: 1.0 };
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::new(cell, ElementOrder::Linear, nodes, vec![0, 2, 1], vec![0], BoundaryTags::default());
        assert!(matches!(err, Err(Error::Mesh(_))));
    }
}
