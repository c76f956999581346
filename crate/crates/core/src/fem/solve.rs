//! Symmetric positive (semi-)definite solves with an optional zero-mean
//! constraint per component.
//!
//! The constrained problem is the bordered system
//! `[K C; Cᵀ 0] [u; λ] = [b; 0]` where column `c` of `C` holds the mean
//! weights `∫ N dV` of component `c`. Because the kernel of `K` is spanned by
//! the constant mode of each component, it is solved exactly by block
//! elimination: `λ` follows from the compatibility of `b − Cλ`, the singular
//! system is solved with one gauge DOF per component removed, and the
//! constant mode is then chosen to zero the mean.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, ExecMode};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

/// Relative residual accepted for every solve.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    /// `‖[K C; Cᵀ 0][u; λ] − [b; 0]‖ / ‖b‖`, zero for a zero load.
    pub relative_residual: f64,
    /// `max_c |Σ w_c u_c| / (Σ w_c · ‖u‖∞)`.
    pub mean_defect: f64,
    pub refined: bool,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub values: Vec<f64>,
    /// Lagrange multiplier per component, empty when unconstrained.
    pub multipliers: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

/// A factorized operator, reusable for any number of right-hand sides.
pub struct SpdSolver {
    matrix: CsrMatrix,
    components: usize,
    weights: Option<Vec<f64>>,
    /// Compressed index of every DOF, `usize::MAX` for gauge DOFs.
    compressed: Vec<usize>,
    dim: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl std::fmt::Debug for SpdSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdSolver")
            .field("n", &self.matrix.n)
            .field("components", &self.components)
            .field("constrained", &self.weights.is_some())
            .finish()
    }
}

impl SpdSolver {
    /// Factorizes `matrix`. With `mean_weights`, DOFs are interleaved by
    /// component (`dof % components`) and the zero-mean constraint is imposed.
    pub fn new(matrix: CsrMatrix, components: usize, mean_weights: Option<Vec<f64>>) -> Result<Self> {
        let n = matrix.n;
        if let Some(w) = &mean_weights {
            if w.len() != n {
                return Err(Error::Solver(format!("{} mean weights for {n} unknowns", w.len())));
            }
        }
        let mut compressed = vec![usize::MAX; n];
        let mut dim = 0;
        for (i, slot) in compressed.iter_mut().enumerate() {
            // the first DOF of each component is the gauge
            if mean_weights.is_some() && i < components {
                continue;
            }
            *slot = dim;
            dim += 1;
        }
        let mut triplets = Vec::with_capacity(matrix.nnz() / 2 + n);
        for i in 0..n {
            let ci = compressed[i];
            if ci == usize::MAX {
                continue;
            }
            for (j, v) in matrix.row(i) {
                let cj = compressed[j];
                if cj != usize::MAX && cj <= ci {
                    triplets.push(Triplet::new(ci, cj, v));
                }
            }
        }
        let sparse = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &triplets)
            .map_err(|e| Error::Solver(format!("sparse matrix construction failed: {e:?}")))?;
        let llt = sparse
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed (matrix not positive definite?): {e:?}")))?;
        Ok(SpdSolver {
            matrix,
            components,
            weights: mean_weights,
            compressed,
            dim,
            llt,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.n
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n == 0
    }

    /// Solves for every right-hand side; each result is checked against
    /// [`SOLVER_TOLERANCE`].
    pub fn solve_many(&self, rhs: &[Vec<f64>], mode: ExecMode) -> Result<Vec<Solution>> {
        let raw = self.eliminate(rhs);
        let checked: Vec<Result<Solution>> = map_indexed(mode, rhs.len(), |k| {
            let (values, multipliers) = raw[k].clone();
            self.finish(&rhs[k], values, multipliers)
        });
        checked.into_iter().collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Solution> {
        Ok(self.solve_many(&[rhs.to_vec()], ExecMode::Sequential)?.remove(0))
    }

    /// Block elimination for all right-hand sides at once.
    fn eliminate(&self, rhs: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
        let n = self.matrix.n;
        let nc = self.components;
        let mut lambdas = vec![Vec::new(); rhs.len()];
        let mut b = Mat::<f64>::zeros(self.dim, rhs.len());
        for (k, r) in rhs.iter().enumerate() {
            assert_eq!(r.len(), n, "right-hand side has the wrong length");
            let shifted: Vec<f64> = match &self.weights {
                Some(w) => {
                    let lam: Vec<f64> = (0..nc)
                        .map(|c| {
                            let (mut sb, mut sw) = (0.0, 0.0);
                            for i in (c..n).step_by(nc) {
                                sb += r[i];
                                sw += w[i];
                            }
                            sb / sw
                        })
                        .collect();
                    let s = (0..n).map(|i| r[i] - lam[i % nc] * w[i]).collect();
                    lambdas[k] = lam;
                    s
                }
                None => r.clone(),
            };
            for i in 0..n {
                if self.compressed[i] != usize::MAX {
                    b[(self.compressed[i], k)] = shifted[i];
                }
            }
        }
        self.llt.solve_in_place(b.as_mut());
        (0..rhs.len())
            .map(|k| {
                let mut u: Vec<f64> = (0..n)
                    .map(|i| match self.compressed[i] {
                        usize::MAX => 0.0,
                        ci => b[(ci, k)],
                    })
                    .collect();
                if let Some(w) = &self.weights {
                    for c in 0..nc {
                        let (mut su, mut sw) = (0.0, 0.0);
                        for i in (c..n).step_by(nc) {
                            su += w[i] * u[i];
                            sw += w[i];
                        }
                        let shift = su / sw;
                        for i in (c..n).step_by(nc) {
                            u[i] -= shift;
                        }
                    }
                }
                (u, std::mem::take(&mut lambdas[k]))
            })
            .collect()
    }

    /// Bordered-system residual `(r_u, r_mean)` of a candidate solution.
    fn residual(&self, rhs: &[f64], u: &[f64], lam: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nc = self.components;
        let mut r = self.matrix.matvec(u);
        for i in 0..r.len() {
            r[i] -= rhs[i];
        }
        let mut mean = Vec::new();
        if let Some(w) = &self.weights {
            for i in 0..r.len() {
                r[i] += lam[i % nc] * w[i];
            }
            mean = (0..nc).map(|c| (c..u.len()).step_by(nc).map(|i| w[i] * u[i]).sum()).collect();
        }
        (r, mean)
    }

    fn finish(&self, rhs: &[f64], mut u: Vec<f64>, mut lam: Vec<f64>) -> Result<Solution> {
        let bnorm = norm(rhs);
        if bnorm == 0.0 {
            return Ok(Solution {
                values: vec![0.0; rhs.len()],
                multipliers: vec![0.0; lam.len()],
                diagnostics: SolveDiagnostics::default(),
            });
        }
        let (mut r, mut mean) = self.residual(rhs, &u, &lam);
        let mut rel = (norm(&r).powi(2) + norm(&mean).powi(2)).sqrt() / bnorm;
        let mut refined = false;
        if rel > SOLVER_TOLERANCE {
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let (du, dl) = self.eliminate(&[neg]).remove(0);
            for (a, d) in u.iter_mut().zip(&du) {
                *a += d;
            }
            for (a, d) in lam.iter_mut().zip(&dl) {
                *a += d;
            }
            (r, mean) = self.residual(rhs, &u, &lam);
            rel = (norm(&r).powi(2) + norm(&mean).powi(2)).sqrt() / bnorm;
            refined = true;
        }
        if rel > SOLVER_TOLERANCE {
            return Err(Error::Solver(format!(
                "relative residual {rel:.3e} exceeds {SOLVER_TOLERANCE:e} after refinement"
            )));
        }
        let mean_defect = match &self.weights {
            Some(w) => {
                let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                let nc = self.components;
                (0..nc)
                    .map(|c| {
                        let sw: f64 = (c..w.len()).step_by(nc).map(|i| w[i]).sum();
                        mean[c].abs() / (sw * umax)
                    })
                    .fold(0.0, f64::max)
            }
            None => 0.0,
        };
        Ok(Solution {
            values: u,
            multipliers: lam,
            diagnostics: SolveDiagnostics {
                relative_residual: rel,
                mean_defect,
                refined,
            },
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Periodic 1D Laplacian on `n` nodes: singular with constant kernel.
    fn ring(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.extend_from_slice(&[(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)]);
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn zero_load_gives_zero_field() {
        let s = SpdSolver::new(ring(8), 1, Some(vec![1.0; 8])).unwrap();
        let sol = s.solve(&[0.0; 8]).unwrap();
        assert!(sol.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constrained_solve_matches_bordered_system() {
        let n = 10;
        let w: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let s = SpdSolver::new(ring(n), 1, Some(w.clone())).unwrap();
        // incompatible load: the multiplier absorbs the mean
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.3).collect();
        let sol = s.solve(&b).unwrap();
        assert!(sol.diagnostics.relative_residual < 1e-12);
        let mean: f64 = w.iter().zip(&sol.values).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-12);
        assert!((sol.multipliers[0] - b.iter().sum::<f64>() / w.iter().sum::<f64>()).abs() < 1e-14);
    }

    #[test]
    fn two_component_gauges() {
        // two decoupled rings interleaved as components
        let n = 6;
        let r = ring(n);
        let mut t = Vec::new();
        for i in 0..n {
            for (j, v) in r.row(i) {
                t.push((2 * i, 2 * j, v));
                t.push((2 * i + 1, 2 * j + 1, 2.0 * v));
            }
        }
        let k = CsrMatrix::from_triplets(2 * n, t);
        let s = SpdSolver::new(k, 2, Some(vec![1.0; 2 * n])).unwrap();
        let b: Vec<f64> = (0..2 * n).map(|i| if i % 4 == 0 { 1.0 } else if i % 4 == 2 { -1.0 } else { 0.5 * (i as f64).cos() }).collect();
        let sol = s.solve(&b).unwrap();
        assert!(sol.diagnostics.relative_residual < 1e-12);
        assert!(sol.diagnostics.mean_defect < 1e-12);
    }

    #[test]
    fn unconstrained_spd() {
        let k = CsrMatrix::from_triplets(2, vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let s = SpdSolver::new(k, 1, None).unwrap();
        let sol = s.solve(&[1.0, 2.0]).unwrap();
        assert!((sol.values[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((sol.values[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_a_solver_error() {
        let k = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SpdSolver::new(k, 1, None), Err(Error::Solver(_))));
    }
}
