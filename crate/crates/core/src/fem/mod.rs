//! Lagrange triangles, periodic DOF numbering, sparse assembly and the
//! constrained symmetric solve shared by all cell problems.

pub mod assembly;
pub mod dof;
pub mod element;
pub mod field;
pub mod solve;
pub mod sparse;

pub use assembly::{
    assemble_bilinear, assemble_linear, mean_weights, pore_edge_points, reduce_periodic_matrix, reduce_periodic_vector,
    volume_moment, BilinearKind, EdgePoint, LoadDensity, QuadCache,
};
pub use dof::DofMap;
pub use solve::{Solution, SolveDiagnostics, SpdSolver, SOLVER_TOLERANCE};
pub use sparse::CsrMatrix;
