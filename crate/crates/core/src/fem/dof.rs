use crate::geometry::Mesh;

/// Global numbering of the periodic unknowns: followers share the DOF of
/// their master, masters are numbered in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub components: usize,
    /// Reduced node index of every mesh node.
    pub node_slot: Vec<usize>,
    pub num_slots: usize,
}

impl DofMap {
    pub fn periodic(mesh: &Mesh, components: usize) -> Self {
        let mut node_slot = vec![usize::MAX; mesh.num_nodes()];
        let mut next = 0;
        for n in 0..mesh.num_nodes() {
            if mesh.periodic.is_master(n) {
                node_slot[n] = next;
                next += 1;
            }
        }
        for n in 0..mesh.num_nodes() {
            node_slot[n] = node_slot[mesh.periodic.master_of(n)];
        }
        DofMap {
            components,
            node_slot,
            num_slots: next,
        }
    }

    /// One DOF per node and component, no identification.
    pub fn unreduced(mesh: &Mesh, components: usize) -> Self {
        DofMap {
            components,
            node_slot: (0..mesh.num_nodes()).collect(),
            num_slots: mesh.num_nodes(),
        }
    }

    #[inline]
    pub fn dof(&self, node: usize, component: usize) -> usize {
        self.node_slot[node] * self.components + component
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.num_slots * self.components
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.num_slots == 0
    }

    /// Nodal values (node-major, `components` per node) from reduced DOFs.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let c = self.components;
        let mut full = vec![0.0; self.node_slot.len() * c];
        for (n, &s) in self.node_slot.iter().enumerate() {
            full[n * c..(n + 1) * c].copy_from_slice(&reduced[s * c..(s + 1) * c]);
        }
        full
    }
}
