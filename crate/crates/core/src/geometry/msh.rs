//! Gmsh MSH 4.1 ASCII, restricted to 2D meshes of 3- or 6-node triangles
//! with line elements on tagged boundaries.
//!
//! Physical groups: curves `left`, `right`, `bottom`, `top`, `pore_<k>` and
//! surfaces `solid_<r>` (`k` and `r` zero-based).

use super::mesh::{signed_area, BoundaryEdge, BoundaryTags, CellBox, ElementOrder, Mesh};
use super::periodic::DEFAULT_PAIRING_TOLERANCE;
use crate::error::{Error, Result};
use crate::fem::element::edge_nodes;
use crate::tensor::Vec2;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeshFormat {
    #[default]
    Msh41,
}

const FACES: [&str; 4] = ["left", "right", "bottom", "top"];

fn line_type(order: ElementOrder) -> u32 {
    match order {
        ElementOrder::Linear => 1,
        ElementOrder::Quadratic => 8,
    }
}

fn triangle_type(order: ElementOrder) -> u32 {
    match order {
        ElementOrder::Linear => 2,
        ElementOrder::Quadratic => 9,
    }
}

/// Writes `mesh` as MSH 4.1 ASCII. Node and element tags are the
/// one-based indices, so a round trip keeps the numbering.
pub fn export_msh(mesh: &Mesh) -> String {
    let tol = DEFAULT_PAIRING_TOLERANCE * mesh.cell.edge;
    let free = mesh.free_edges();
    let mut face_lines: [Vec<Vec<usize>>; 4] = Default::default();
    for &be in &free {
        let nodes = mesh.edge_global_nodes(be);
        let (a, b) = (mesh.nodes[nodes[0]], mesh.nodes[nodes[1]]);
        let c = &mesh.cell;
        let tests = [
            c.on_left(a, tol) && c.on_left(b, tol),
            c.on_right(a, tol) && c.on_right(b, tol),
            c.on_bottom(a, tol) && c.on_bottom(b, tol),
            c.on_top(a, tol) && c.on_top(b, tol),
        ];
        if let Some(f) = tests.iter().position(|&t| t) {
            face_lines[f].push(nodes);
        }
    }
    let pore_lines: Vec<Vec<Vec<usize>>> = mesh
        .boundary
        .pores
        .iter()
        .map(|edges| edges.iter().map(|&be| mesh.edge_global_nodes(be)).collect())
        .collect();
    let n_regions = mesh.num_regions().max(1);
    let n_curves = 4 + pore_lines.len();

    let mut s = String::new();
    s.push_str("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n");
    let _ = writeln!(s, "$PhysicalNames\n{}", n_curves + n_regions);
    for (k, name) in FACES.iter().enumerate() {
        let _ = writeln!(s, "1 {} \"{name}\"", k + 1);
    }
    for k in 0..pore_lines.len() {
        let _ = writeln!(s, "1 {} \"pore_{k}\"", 5 + k);
    }
    for r in 0..n_regions {
        let _ = writeln!(s, "2 {} \"solid_{r}\"", n_curves + 1 + r);
    }
    s.push_str("$EndPhysicalNames\n");

    // one curve entity per physical curve, one surface entity per region
    let [x0, y0] = mesh.cell.origin;
    let (x1, y1) = (x0 + mesh.cell.edge, y0 + mesh.cell.edge);
    let _ = writeln!(s, "$Entities\n0 {n_curves} {n_regions} 0");
    for c in 0..n_curves {
        let _ = writeln!(s, "{} {x0} {y0} 0 {x1} {y1} 0 1 {} 0", c + 1, c + 1);
    }
    for r in 0..n_regions {
        let _ = writeln!(s, "{} {x0} {y0} 0 {x1} {y1} 0 1 {} 0", r + 1, n_curves + 1 + r);
    }
    s.push_str("$EndEntities\n");

    let nn = mesh.num_nodes();
    let _ = writeln!(s, "$Nodes\n1 {nn} 1 {nn}\n2 1 0 {nn}");
    for i in 1..=nn {
        let _ = writeln!(s, "{i}");
    }
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:?} {:?} 0", p[0], p[1]);
    }
    s.push_str("$EndNodes\n");

    let mut blocks: Vec<(u32, usize, u32, Vec<Vec<usize>>)> = Vec::new();
    for (f, lines) in face_lines.into_iter().enumerate() {
        blocks.push((1, f + 1, line_type(mesh.order), lines));
    }
    for (k, lines) in pore_lines.into_iter().enumerate() {
        blocks.push((1, 5 + k, line_type(mesh.order), lines));
    }
    let mut by_region: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n_regions];
    for e in 0..mesh.num_elements() {
        by_region[mesh.regions[e] as usize].push(mesh.element(e).to_vec());
    }
    // element tags follow element indices within the triangle blocks
    let n_lines: usize = blocks.iter().map(|b| b.3.len()).sum();
    for (r, tris) in by_region.into_iter().enumerate() {
        blocks.push((2, r + 1, triangle_type(mesh.order), tris));
    }
    let total = n_lines + mesh.num_elements();
    let _ = writeln!(s, "$Elements\n{} {total} 1 {total}", blocks.len());
    let mut tag = 1;
    for (dim, entity, ty, elems) in blocks {
        let _ = writeln!(s, "{dim} {entity} {ty} {}", elems.len());
        for el in elems {
            let _ = write!(s, "{tag}");
            for v in el {
                let _ = write!(s, " {}", v + 1);
            }
            s.push('\n');
            tag += 1;
        }
    }
    s.push_str("$EndElements\n");
    s
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines().enumerate().peekable(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, l) in self.lines.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(Error::MshParse {
            line: 0,
            message: "unexpected end of file".into(),
        })
    }

    fn numbers<T: std::str::FromStr>(&mut self, expect: usize) -> Result<(usize, Vec<T>)> {
        let (line, text) = self.next_line()?;
        let parsed: std::result::Result<Vec<T>, _> = text.split_whitespace().map(str::parse).collect();
        match parsed {
            Ok(v) if v.len() >= expect => Ok((line, v)),
            _ => Err(Error::MshParse {
                line,
                message: format!("expected {expect} numbers, found `{text}`"),
            }),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::MshParse {
        line,
        message: message.into(),
    }
}

/// Reads a mesh, orienting every triangle counter-clockwise, and rebuilds
/// the periodic identification by coordinate matching.
pub fn import_mesh(bytes: &[u8], format: MeshFormat) -> Result<Mesh> {
    let MeshFormat::Msh41 = format;
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, format!("not UTF-8: {e}")))?;
    let mut rd = Reader::new(text);

    let mut physical_names: HashMap<(u32, i64), String> = HashMap::new();
    let mut entity_group: HashMap<(u32, i64), i64> = HashMap::new();
    let mut node_index: HashMap<usize, usize> = HashMap::new();
    let mut nodes: Vec<Vec2> = Vec::new();
    let mut triangles: Vec<(Vec<usize>, u32, usize)> = Vec::new();
    let mut lines: Vec<(Vec<usize>, String, usize)> = Vec::new();
    let mut order: Option<ElementOrder> = None;
    let mut seen_format = false;

    while let Ok((line, header)) = rd.next_line() {
        match header {
            "$MeshFormat" => {
                let (l, t) = rd.next_line()?;
                let mut it = t.split_whitespace();
                if it.next() != Some("4.1") || it.next() != Some("0") {
                    return Err(parse_err(l, format!("only MSH 4.1 ASCII is supported, found `{t}`")));
                }
                seen_format = true;
            }
            "$PhysicalNames" => {
                let (_, n) = rd.numbers::<usize>(1)?;
                for _ in 0..n[0] {
                    let (l, t) = rd.next_line()?;
                    let mut parts = t.splitn(3, char::is_whitespace);
                    let dim = parts.next().and_then(|v| v.parse::<u32>().ok());
                    let tag = parts.next().and_then(|v| v.trim().parse::<i64>().ok());
                    let name = parts.next().map(|v| v.trim().trim_matches('"').to_string());
                    match (dim, tag, name) {
                        (Some(d), Some(g), Some(nm)) => {
                            physical_names.insert((d, g), nm);
                        }
                        _ => return Err(parse_err(l, format!("malformed physical name `{t}`"))),
                    }
                }
            }
            "$Entities" => {
                let (_, counts) = rd.numbers::<usize>(4)?;
                for dim in 0..4u32 {
                    for _ in 0..counts[dim as usize] {
                        let (l, t) = rd.next_line()?;
                        let v: Vec<f64> = t
                            .split_whitespace()
                            .map(str::parse)
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| parse_err(l, format!("malformed entity `{t}`")))?;
                        // points: tag x y z nphys tags...; others: tag box(6) nphys tags...
                        let at = if dim == 0 { 4 } else { 7 };
                        let nphys = *v.get(at).ok_or_else(|| parse_err(l, "truncated entity"))? as usize;
                        if nphys > 0 {
                            let g = *v.get(at + 1).ok_or_else(|| parse_err(l, "truncated entity"))?;
                            entity_group.insert((dim, v[0] as i64), g as i64);
                        }
                    }
                }
            }
            "$Nodes" => {
                let (_, head) = rd.numbers::<usize>(4)?;
                for _ in 0..head[0] {
                    let (_, block) = rd.numbers::<usize>(4)?;
                    if block[2] != 0 {
                        return Err(parse_err(line, "parametric node blocks are not supported"));
                    }
                    let mut tags = Vec::with_capacity(block[3]);
                    for _ in 0..block[3] {
                        tags.push(rd.numbers::<usize>(1)?.1[0]);
                    }
                    for tag in tags {
                        let (_, xyz) = rd.numbers::<f64>(3)?;
                        node_index.insert(tag, nodes.len());
                        nodes.push([xyz[0], xyz[1]]);
                    }
                }
            }
            "$Elements" => {
                let (_, head) = rd.numbers::<usize>(4)?;
                for _ in 0..head[0] {
                    let (bl, block) = rd.numbers::<i64>(4)?;
                    let (dim, entity, ty, count) = (block[0] as u32, block[1], block[2] as u32, block[3] as usize);
                    let (nen, el_order) = match ty {
                        1 => (2, ElementOrder::Linear),
                        8 => (3, ElementOrder::Quadratic),
                        2 => (3, ElementOrder::Linear),
                        9 => (6, ElementOrder::Quadratic),
                        15 => (1, ElementOrder::Linear),
                        _ => return Err(parse_err(bl, format!("unsupported element type {ty}"))),
                    };
                    if ty != 15 {
                        match order {
                            None => order = Some(el_order),
                            Some(o) if o != el_order => {
                                return Err(parse_err(bl, "mixed linear and quadratic elements"));
                            }
                            _ => {}
                        }
                    }
                    let group = entity_group.get(&(dim, entity)).copied();
                    let name = group.and_then(|g| physical_names.get(&(dim, g)).cloned());
                    for _ in 0..count {
                        let (l, v) = rd.numbers::<usize>(nen + 1)?;
                        let conn = v[1..=nen]
                            .iter()
                            .map(|t| node_index.get(t).copied().ok_or_else(|| parse_err(l, format!("unknown node tag {t}"))))
                            .collect::<Result<Vec<_>>>()?;
                        match dim {
                            2 => {
                                let region = match &name {
                                    Some(nm) => nm
                                        .strip_prefix("solid_")
                                        .and_then(|r| r.parse::<u32>().ok())
                                        .ok_or_else(|| parse_err(l, format!("unexpected surface group `{nm}`")))?,
                                    None => 0,
                                };
                                triangles.push((conn, region, l));
                            }
                            1 => {
                                if let Some(nm) = &name {
                                    lines.push((conn, nm.clone(), l));
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            h if h.starts_with("$End") => {}
            h if h.starts_with('$') => {
                // skip unknown sections
                let end = format!("$End{}", &h[1..]);
                loop {
                    let (_, t) = rd.next_line()?;
                    if t == end {
                        break;
                    }
                }
            }
            other => return Err(parse_err(line, format!("unexpected content `{other}`"))),
        }
    }
    if !seen_format {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }
    let order = order.ok_or_else(|| parse_err(0, "no triangles found"))?;
    if triangles.is_empty() {
        return Err(parse_err(0, "no triangles found"));
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &nodes {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let edge = hi[0] - lo[0];
    if !(edge > 0.0) || ((hi[1] - lo[1]) - edge).abs() > DEFAULT_PAIRING_TOLERANCE * edge {
        return Err(Error::Mesh(format!("mesh bounding box {lo:?}..{hi:?} is not a square")));
    }
    let cell = CellBox { origin: lo, edge };

    let mut connectivity = Vec::with_capacity(triangles.len() * order.nodes_per_element());
    let mut regions = Vec::with_capacity(triangles.len());
    for (mut t, region, _) in triangles {
        if signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            t.swap(1, 2);
            if order == ElementOrder::Quadratic {
                t.swap(3, 5);
            }
        }
        connectivity.extend_from_slice(&t);
        regions.push(region);
    }

    let nen = order.nodes_per_element();
    let mut edge_owner: HashMap<(usize, usize), BoundaryEdge> = HashMap::new();
    for e in 0..regions.len() {
        let el = &connectivity[e * nen..(e + 1) * nen];
        for k in 0..3 {
            let en = edge_nodes(order, k);
            let (a, b) = (el[en[0]], el[en[1]]);
            edge_owner.insert((a.min(b), a.max(b)), BoundaryEdge { element: e, local_edge: k });
        }
    }

    let mut face_sets: [Vec<usize>; 4] = Default::default();
    let mut pores: BTreeMap<usize, Vec<BoundaryEdge>> = BTreeMap::new();
    for (conn, name, l) in lines {
        if let Some(f) = FACES.iter().position(|&f| f == name) {
            face_sets[f].extend_from_slice(&conn);
        } else if let Some(k) = name.strip_prefix("pore_").and_then(|k| k.parse::<usize>().ok()) {
            let key = (conn[0].min(conn[1]), conn[0].max(conn[1]));
            let be = edge_owner
                .get(&key)
                .copied()
                .ok_or_else(|| parse_err(l, "pore boundary line is not an element edge"))?;
            pores.entry(k).or_default().push(be);
        }
    }
    for (f, set) in face_sets.iter_mut().enumerate() {
        if set.is_empty() {
            return Err(Error::Mesh(format!("physical group `{}` is missing or empty", FACES[f])));
        }
        set.sort_unstable();
        set.dedup();
    }
    let n_pores = pores.keys().next_back().map_or(0, |k| k + 1);
    let mut pore_edges = vec![Vec::new(); n_pores];
    for (k, edges) in pores {
        pore_edges[k] = edges;
    }
    let [left, right, bottom, top] = face_sets;
    let boundary = BoundaryTags {
        left,
        right,
        bottom,
        top,
        pores: pore_edges,
    };
    Mesh::new(cell, order, nodes, connectivity, regions, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mesh, RveSpec};

    #[test]
    fn round_trip_keeps_connectivity() {
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let mesh = generate_mesh(&RveSpec::single_pore(1.0, 0.2), 16, order).unwrap();
            let text = export_msh(&mesh);
            let back = import_mesh(text.as_bytes(), MeshFormat::Msh41).unwrap();
            assert_eq!(back.connectivity, mesh.connectivity);
            assert_eq!(back.nodes, mesh.nodes);
            assert_eq!(back.boundary.left, mesh.boundary.left);
            assert_eq!(back.periodic, mesh.periodic);
            assert_eq!(back.boundary.pores[0].len(), mesh.boundary.pores[0].len());
            assert_eq!(export_msh(&back), text);
        }
    }

    #[test]
    fn clockwise_triangles_are_reoriented() {
        let text = "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n$PhysicalNames\n4\n1 1 \"left\"\n1 2 \"right\"\n1 3 \"bottom\"\n1 4 \"top\"\n$EndPhysicalNames\n\
$Entities\n0 4 1 0\n1 0 0 0 1 1 0 1 1 0\n2 0 0 0 1 1 0 1 2 0\n3 0 0 0 1 1 0 1 3 0\n4 0 0 0 1 1 0 1 4 0\n1 0 0 0 1 1 0 0 0\n$EndEntities\n\
$Nodes\n1 4 1 4\n2 1 0 4\n1\n2\n3\n4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n$EndNodes\n\
$Elements\n5 6 1 6\n1 1 1 1\n1 1 4\n1 2 1 1\n2 2 3\n1 3 1 1\n3 1 2\n1 4 1 1\n4 4 3\n2 1 2 2\n5 1 3 2\n6 1 4 3\n$EndElements\n";
        let mesh = import_mesh(text.as_bytes(), MeshFormat::Msh41).unwrap();
        assert_eq!(mesh.num_elements(), 2);
        assert_eq!(mesh.element(0), &[0, 1, 2]);
        assert!((mesh.solid_area() - 1.0).abs() < 1e-14);
        assert_eq!(mesh.periodic.class_of(0).len(), 4);
    }

    #[test]
    fn perturbed_right_node_is_a_periodicity_error() {
        let mesh = generate_mesh(&RveSpec::homogeneous(1.0), 4, ElementOrder::Linear).unwrap();
        let mut moved = mesh.clone();
        let victim = mesh.boundary.right[2];
        moved.nodes[victim][1] += 1e-3;
        let err = import_mesh(export_msh(&moved).as_bytes(), MeshFormat::Msh41).unwrap_err();
        match err {
            Error::Periodicity { nodes, .. } => assert!(nodes.contains(&victim)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_face_group_is_reported() {
        let mesh = generate_mesh(&RveSpec::homogeneous(1.0), 2, ElementOrder::Linear).unwrap();
        let text = export_msh(&mesh).replace("\"top\"", "\"lid\"");
        assert!(matches!(import_mesh(text.as_bytes(), MeshFormat::Msh41), Err(Error::Mesh(_))));
    }
}
