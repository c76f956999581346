use super::mesh::Mesh;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default pairing tolerance as a fraction of the edge length.
pub const DEFAULT_PAIRING_TOLERANCE: f64 = 1e-8;

/// Identification of periodic images. Every node points at the smallest
/// node index of its equivalence class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodicMap {
    pub master: Vec<usize>,
    /// Matched (left, right) node pairs, sorted by y.
    pub left_right: Vec<(usize, usize)>,
    /// Matched (bottom, top) node pairs, sorted by x.
    pub bottom_top: Vec<(usize, usize)>,
}

impl PeriodicMap {
    #[inline]
    pub fn master_of(&self, node: usize) -> usize {
        self.master[node]
    }

    #[inline]
    pub fn is_master(&self, node: usize) -> bool {
        self.master[node] == node
    }

    pub fn num_masters(&self) -> usize {
        (0..self.master.len()).filter(|&n| self.is_master(n)).count()
    }

    /// All nodes identified with `node`, including itself.
    pub fn class_of(&self, node: usize) -> Vec<usize> {
        let m = self.master[node];
        (0..self.master.len()).filter(|&n| self.master[n] == m).collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // keep the smaller index as root
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi] = lo;
    }
}

/// Matches two opposite faces by their off-axis coordinate `axis`.
fn match_faces(
    mesh: &Mesh,
    lower: &[usize],
    upper: &[usize],
    axis: usize,
    tol: f64,
    unmatched: &mut Vec<usize>,
) -> Vec<(usize, usize)> {
    let key = |n: &usize| mesh.nodes[*n][axis];
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    lo.sort_by(|a, b| key(a).total_cmp(&key(b)));
    hi.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let (mut i, mut j) = (0, 0);
    let mut pairs = Vec::with_capacity(lo.len());
    while i < lo.len() && j < hi.len() {
        let (a, b) = (key(&lo[i]), key(&hi[j]));
        if (a - b).abs() <= tol {
            pairs.push((lo[i], hi[j]));
            i += 1;
            j += 1;
        } else if a < b {
            unmatched.push(lo[i]);
            i += 1;
        } else {
            unmatched.push(hi[j]);
            j += 1;
        }
    }
    unmatched.extend_from_slice(&lo[i..]);
    unmatched.extend_from_slice(&hi[j..]);
    pairs
}

/// Builds the left↔right and bottom↔top identification of a mesh with
/// tagged faces. `tol` is an absolute length.
pub fn periodic_pairs(mesh: &Mesh, tol: f64) -> Result<PeriodicMap> {
    let b = &mesh.boundary;
    let cell = &mesh.cell;
    let mut off_face = Vec::new();
    let checks: [(&[usize], &dyn Fn(usize) -> bool); 4] = [
        (&b.left, &|n| cell.on_left(mesh.nodes[n], tol)),
        (&b.right, &|n| cell.on_right(mesh.nodes[n], tol)),
        (&b.bottom, &|n| cell.on_bottom(mesh.nodes[n], tol)),
        (&b.top, &|n| cell.on_top(mesh.nodes[n], tol)),
    ];
    for (set, on_face) in checks {
        off_face.extend(set.iter().copied().filter(|&n| !on_face(n)));
    }
    if !off_face.is_empty() {
        off_face.sort_unstable();
        off_face.dedup();
        return Err(Error::Periodicity {
            message: format!("{} tagged face nodes lie off their face", off_face.len()),
            nodes: off_face,
        });
    }

    let mut unmatched = Vec::new();
    let left_right = match_faces(mesh, &b.left, &b.right, 1, tol, &mut unmatched);
    let bottom_top = match_faces(mesh, &b.bottom, &b.top, 0, tol, &mut unmatched);
    if !unmatched.is_empty() {
        unmatched.sort_unstable();
        unmatched.dedup();
        return Err(Error::Periodicity {
            message: format!("{} boundary nodes have no periodic partner within {tol:e}", unmatched.len()),
            nodes: unmatched,
        });
    }

    let mut parent: Vec<usize> = (0..mesh.num_nodes()).collect();
    for &(a, c) in left_right.iter().chain(bottom_top.iter()) {
        union(&mut parent, a, c);
    }
    let master: Vec<usize> = (0..parent.len()).map(|n| find(&mut parent, n)).collect();
    let map = PeriodicMap {
        master,
        left_right,
        bottom_top,
    };

    // every class is a single node, a face pair, or the four corners
    let mut size = vec![0usize; map.master.len()];
    for &m in &map.master {
        size[m] += 1;
    }
    let bad: Vec<usize> = (0..map.master.len()).filter(|&n| size[map.master[n]] > 4 || size[map.master[n]] == 3).collect();
    if !bad.is_empty() {
        return Err(Error::Periodicity {
            message: "periodic identification is not a bijection between opposite faces".into(),
            nodes: bad,
        });
    }
    Ok(map)
}
