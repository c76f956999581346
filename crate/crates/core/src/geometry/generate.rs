//! Structured crossed-triangle meshing of a perforated square.
//!
//! Every grid square is split into four triangles through its center. Of
//! every edge crossing a pore circle, the endpoint nearer the circle (always
//! within half a cell of it) is projected radially onto it; projected
//! neighbours that nearly coincide are merged, elements whose centroid falls
//! in a pore are dropped, and the nodes near each pore get one smoothing pass.

use super::mesh::{signed_area, triangle_quality, BoundaryEdge, BoundaryTags, ElementOrder, Mesh};
use super::periodic::DEFAULT_PAIRING_TOLERANCE;
use super::RveSpec;
use crate::error::{Error, Result};
use crate::tensor::Vec2;
use std::collections::HashMap;

/// Lowest accepted inradius/circumradius ratio.
pub const MIN_QUALITY: f64 = 0.2;

/// Projected neighbours closer than this fraction of a cell are merged.
const COLLAPSE_RATIO: f64 = 0.35;

const NOT_SNAPPED: usize = usize::MAX;

fn project(pore: &super::Pore, v: Vec2) -> Vec2 {
    let s = pore.radius / pore.distance_from_center(v);
    [pore.center[0] + s * (v[0] - pore.center[0]), pore.center[1] + s * (v[1] - pore.center[1])]
}

pub fn generate_mesh(spec: &RveSpec, resolution: usize, order: ElementOrder) -> Result<Mesh> {
    spec.validate()?;
    let n = resolution;
    if n == 0 || (!spec.pores.is_empty() && n < 4) {
        return Err(Error::Geometry(format!(
            "resolution {n} is too coarse (at least 4 cells per edge with pores, 1 without)"
        )));
    }
    let cell = spec.cell();
    let l = cell.edge;
    let h = l / n as f64;
    let tol = DEFAULT_PAIRING_TOLERANCE * l;
    for (k, p) in spec.pores.iter().enumerate() {
        if p.radius < 2.0 * h {
            return Err(Error::Geometry(format!(
                "pore {k} of radius {} is below two cell widths ({}) at resolution {n}",
                p.radius,
                2.0 * h
            )));
        }
    }

    let [x0, y0] = cell.origin;
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let center = |i: usize, j: usize| (n + 1) * (n + 1) + j * n + i;
    let mut nodes: Vec<Vec2> = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([x0 + i as f64 * h, y0 + j as f64 * h]);
        }
    }
    for j in 0..n {
        for i in 0..n {
            nodes.push([x0 + (i as f64 + 0.5) * h, y0 + (j as f64 + 0.5) * h]);
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (c00, c10, c11, c01, m) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1), center(i, j));
            tris.extend_from_slice(&[[c00, c10, m], [c10, c11, m], [c11, c01, m], [c01, c00, m]]);
        }
    }

    // project the endpoint nearer the circle of every edge crossing a pore surface
    let mut snapped = vec![NOT_SNAPPED; nodes.len()];
    for t in &tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            for (p, pore) in spec.pores.iter().enumerate() {
                let ga = pore.distance_from_center(nodes[a]) - pore.radius;
                let gb = pore.distance_from_center(nodes[b]) - pore.radius;
                if ga * gb > 0.0 {
                    continue;
                }
                let v = if ga.abs() <= gb.abs() { a } else { b };
                if snapped[v] != NOT_SNAPPED && snapped[v] != p {
                    return Err(Error::Geometry(format!(
                        "node at {:?} lies near pores {} and {p}; refine the mesh",
                        nodes[v], snapped[v]
                    )));
                }
                if cell.on_boundary(nodes[v], tol) {
                    return Err(Error::Geometry(format!(
                        "pore {p} passes within half a cell of the boundary node {:?}; refine the mesh",
                        nodes[v]
                    )));
                }
                snapped[v] = p;
            }
        }
    }
    for (v, &p) in nodes.iter_mut().zip(&snapped) {
        if p != NOT_SNAPPED {
            *v = project(&spec.pores[p], *v);
        }
    }

    // merge projected neighbours that landed almost on top of each other
    let mut short: Vec<(f64, usize, usize)> = Vec::new();
    for t in &tris {
        for k in 0..3 {
            let (a, b) = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
            if snapped[a] != NOT_SNAPPED && snapped[a] == snapped[b] {
                let d = (nodes[a][0] - nodes[b][0]).hypot(nodes[a][1] - nodes[b][1]);
                if d < COLLAPSE_RATIO * h {
                    short.push((d, a, b));
                }
            }
        }
    }
    short.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    short.dedup();
    let mut merged_into: Vec<usize> = (0..nodes.len()).collect();
    let mut touched = vec![false; nodes.len()];
    for (_, a, b) in short {
        if touched[a] || touched[b] {
            continue;
        }
        touched[a] = true;
        touched[b] = true;
        merged_into[b] = a;
        let mid = [0.5 * (nodes[a][0] + nodes[b][0]), 0.5 * (nodes[a][1] + nodes[b][1])];
        nodes[a] = project(&spec.pores[snapped[a]], mid);
    }
    for t in tris.iter_mut() {
        for v in t.iter_mut() {
            *v = merged_into[*v];
        }
    }
    tris.retain(|t| t[0] != t[1] && t[1] != t[2] && t[2] != t[0]);

    tris.retain(|t| {
        let c = [
            (nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) / 3.0,
            (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0,
        ];
        !spec.pores.iter().any(|p| p.contains(c))
    });

    if !spec.pores.is_empty() {
        smooth_near_pores(&mut nodes, &tris, &snapped, &spec.pores, &cell, tol);
    }

    // drop orphan nodes, keeping the original order
    let mut used = vec![false; nodes.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    let mut renumber = vec![usize::MAX; nodes.len()];
    let mut kept_nodes = Vec::with_capacity(nodes.len());
    let mut kept_snapped = Vec::with_capacity(nodes.len());
    for (old, &u) in used.iter().enumerate() {
        if u {
            renumber[old] = kept_nodes.len();
            kept_nodes.push(nodes[old]);
            kept_snapped.push(snapped[old]);
        }
    }
    let mut nodes = kept_nodes;
    let snapped = kept_snapped;
    for t in tris.iter_mut() {
        for v in t.iter_mut() {
            *v = renumber[*v];
        }
    }

    for (e, t) in tris.iter().enumerate() {
        let q = triangle_quality(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        if signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= 0.0 {
            return Err(Error::Geometry(format!("element {e} inverted after projection onto the pores")));
        }
        if q < MIN_QUALITY {
            return Err(Error::Geometry(format!(
                "element {e} has quality {q:.3} below {MIN_QUALITY} after projection; change the resolution"
            )));
        }
    }

    let edge_use = {
        let mut m: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &tris {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    };
    let pore_of_edge = |a: usize, b: usize| -> Option<usize> {
        let on_same = snapped[a] != NOT_SNAPPED && snapped[a] == snapped[b];
        (on_same && edge_use[&(a.min(b), a.max(b))] == 1).then_some(snapped[a])
    };

    let nen = order.nodes_per_element();
    let mut connectivity = Vec::with_capacity(tris.len() * nen);
    let mut midside: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &tris {
        connectivity.extend_from_slice(t);
        if order == ElementOrder::Quadratic {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *midside.entry(key).or_insert_with(|| {
                    let mut m = [0.5 * (nodes[a][0] + nodes[b][0]), 0.5 * (nodes[a][1] + nodes[b][1])];
                    if let Some(k) = pore_of_edge(a, b) {
                        m = project(&spec.pores[k], m);
                    }
                    nodes.push(m);
                    nodes.len() - 1
                });
                connectivity.push(id);
            }
        }
    }

    let mut boundary = BoundaryTags::faces_from_coordinates(&cell, &nodes, tol);
    boundary.pores = vec![Vec::new(); spec.pores.len()];
    for (e, t) in tris.iter().enumerate() {
        for k in 0..3 {
            if let Some(p) = pore_of_edge(t[k], t[(k + 1) % 3]) {
                boundary.pores[p].push(BoundaryEdge { element: e, local_edge: k });
            }
        }
    }

    let regions = vec![0; tris.len()];
    Mesh::new(cell, order, nodes, connectivity, regions, boundary).map_err(|e| match e {
        Error::Mesh(m) => Error::Geometry(m),
        other => other,
    })
}

/// One Jacobi pass of smart Laplacian smoothing over the projected nodes and
/// the two rings of free nodes around them. Projected nodes slide along
/// their circle. A move is kept only if it raises the worst quality among
/// the incident elements, and moves that together degrade an element are
/// undone.
fn smooth_near_pores(
    nodes: &mut [Vec2],
    tris: &[[usize; 3]],
    snapped: &[usize],
    pores: &[super::Pore],
    cell: &super::CellBox,
    tol: f64,
) {
    let nn = nodes.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nn];
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); nn];
    for (e, t) in tris.iter().enumerate() {
        for k in 0..3 {
            incident[t[k]].push(e);
            for d in 1..3 {
                neighbours[t[k]].push(t[(k + d) % 3]);
            }
        }
    }
    for nb in neighbours.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    let mut ring = vec![usize::MAX; nn];
    for v in 0..nn {
        if snapped[v] != NOT_SNAPPED {
            ring[v] = 0;
        }
    }
    for level in 1..=2 {
        for v in 0..nn {
            if ring[v] == level - 1 {
                for &w in &neighbours[v] {
                    if ring[w] == usize::MAX {
                        ring[w] = level;
                    }
                }
            }
        }
    }

    let quality = |pos: &[Vec2], e: usize| {
        let t = tris[e];
        triangle_quality(pos[t[0]], pos[t[1]], pos[t[2]])
    };
    let old: Vec<Vec2> = nodes.to_vec();
    let before: Vec<f64> = (0..tris.len()).map(|e| quality(&old, e)).collect();
    let worst_with = |v: usize, p: Vec2| -> f64 {
        incident[v]
            .iter()
            .map(|&e| {
                let t = tris[e];
                let at = |i: usize| if i == v { p } else { old[i] };
                triangle_quality(at(t[0]), at(t[1]), at(t[2]))
            })
            .fold(f64::INFINITY, f64::min)
    };

    let mut moved = vec![false; nn];
    for v in 0..nn {
        if ring[v] > 2 || neighbours[v].is_empty() || cell.on_boundary(old[v], tol) {
            continue;
        }
        let k = neighbours[v].len() as f64;
        let mut target = neighbours[v].iter().fold([0.0, 0.0], |acc, &w| [acc[0] + old[w][0] / k, acc[1] + old[w][1] / k]);
        if snapped[v] != NOT_SNAPPED {
            target = project(&pores[snapped[v]], target);
        }
        let current = incident[v].iter().map(|&e| before[e]).fold(f64::INFINITY, f64::min);
        if worst_with(v, target) > current {
            nodes[v] = target;
            moved[v] = true;
        }
    }

    // simultaneous moves can still spoil a shared element
    loop {
        let mut reverted = false;
        for e in 0..tris.len() {
            if quality(nodes, e) < before[e] && quality(nodes, e) < 0.3 {
                for &v in &tris[e] {
                    if moved[v] {
                        nodes[v] = old[v];
                        moved[v] = false;
                        reverted = true;
                    }
                }
            }
        }
        if !reverted {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{porosity, RveSpec};
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_crossed_grid() {
        let mesh = generate_mesh(&RveSpec::homogeneous(1.0), 2, ElementOrder::Linear).unwrap();
        assert_eq!(mesh.num_elements(), 16);
        assert_eq!(mesh.num_nodes(), 13);
        assert_relative_eq!(mesh.solid_area(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn left_face_pairs_count_resolution_plus_one() {
        for n in [1, 3, 8] {
            let mesh = generate_mesh(&RveSpec::homogeneous(1.0), n, ElementOrder::Linear).unwrap();
            assert_eq!(mesh.periodic.left_right.len(), n + 1);
        }
    }

    #[test]
    fn quadratic_grid_counts() {
        let mesh = generate_mesh(&RveSpec::homogeneous(1.0), 2, ElementOrder::Quadratic).unwrap();
        // 6 horizontal and 6 vertical grid edges, 4 diagonals per square
        let expected_edges = 2 * 3 * 2 + 4 * 4;
        assert_eq!(mesh.num_nodes(), 13 + expected_edges);
        assert_relative_eq!(mesh.solid_area(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn single_pore_area_and_quality() {
        let spec = RveSpec::single_pore(1.0, 0.2);
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let mesh = generate_mesh(&spec, 64, order).unwrap();
            let p = mesh.measured_porosity();
            assert!((p - 0.2).abs() < 0.01 * 0.2, "porosity {p}");
            assert!(mesh.min_quality() >= MIN_QUALITY);
            assert_eq!(mesh.boundary.pores.len(), 1);
            assert!(!mesh.boundary.pores[0].is_empty());
        }
        assert_relative_eq!(porosity(&spec).unwrap(), 0.2, max_relative = 1e-14);
    }

    #[test]
    fn quadratic_hole_is_closer_to_the_circle() {
        let spec = RveSpec::single_pore(1.0, 0.2);
        let lin = generate_mesh(&spec, 32, ElementOrder::Linear).unwrap();
        let quad = generate_mesh(&spec, 32, ElementOrder::Quadratic).unwrap();
        assert!((quad.measured_porosity() - 0.2).abs() < 0.1 * (lin.measured_porosity() - 0.2).abs());
    }

    #[test]
    fn centro_symmetric_layouts_give_symmetric_node_sets() {
        for spec in [RveSpec::homogeneous(1.0), RveSpec::single_pore(1.0, 0.2), RveSpec::uniform_four(1.0, 0.2)] {
            let mesh = generate_mesh(&spec, 32, ElementOrder::Quadratic).unwrap();
            let c = mesh.cell.center();
            for v in &mesh.nodes {
                let r = [2.0 * c[0] - v[0], 2.0 * c[1] - v[1]];
                assert!(
                    mesh.nodes.iter().any(|w| (w[0] - r[0]).abs() < 1e-9 && (w[1] - r[1]).abs() < 1e-9),
                    "no reflection of {v:?}"
                );
            }
        }
    }

    #[test]
    #[ignore]
    fn quality_survey() {
        let specs = [
            RveSpec::single_pore(1.0, 0.2),
            RveSpec::uniform_four(1.0, 0.2),
            RveSpec::random_four(1.0, 0.2, 7, 0.05).unwrap(),
        ];
        for (s, spec) in specs.iter().enumerate() {
            for n in [16, 20, 24, 32, 40, 48, 64, 80, 96, 100, 128, 160, 200, 256] {
                match generate_mesh(spec, n, ElementOrder::Linear) {
                    Ok(m) => println!("{s} {n} q={:.3} p={:.5}", m.min_quality(), m.measured_porosity()),
                    Err(e) => println!("{s} {n} {e}"),
                }
            }
        }
    }

    #[test]
    fn too_coarse_for_pore_is_rejected() {
        let spec = RveSpec::single_pore(1.0, 0.2);
        assert!(matches!(generate_mesh(&spec, 4, ElementOrder::Linear), Err(Error::Geometry(_))));
    }

    #[test]
    fn corner_class_has_four_nodes() {
        let mesh = generate_mesh(&RveSpec::single_pore(1.0, 0.2), 16, ElementOrder::Quadratic).unwrap();
        let corner = (0..mesh.num_nodes())
            .find(|&v| mesh.nodes[v] == [0.0, 0.0])
            .unwrap();
        assert_eq!(mesh.periodic.class_of(corner).len(), 4);
        assert_eq!(mesh.periodic.master_of(corner), corner);
    }
}
