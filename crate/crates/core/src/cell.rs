//! The periodic corrector problems, solved in dependency order:
//! φ (three strain cases) and P, then the first-pass stiffness and density,
//! then ψ (six strain-gradient cases), then R (two conduction cases).

use crate::error::{Error, Result};
use crate::fem::{
    assemble_bilinear, assemble_linear, field, mean_weights, BilinearKind, DofMap, LoadDensity, QuadCache,
    SolveDiagnostics, SpdSolver,
};
use crate::geometry::Mesh;
use crate::material::MaterialMap;
use crate::parallel::{reduce_indexed, ExecMode};
use crate::tensor::{double_dot, unit_dyad, Mat2, Tensor4};
use serde::{Deserialize, Serialize};

/// Strain cases `ab` in the order 11, 22, 12.
pub const STRAIN_CASES: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Strain-gradient cases `abc` in the order 111, 112, 221, 222, 121, 122.
pub const GRADIENT_CASES: [(usize, usize, usize); 6] = [(0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1), (0, 1, 0), (0, 1, 1)];

/// Index of the strain case `ab` (symmetric in a, b).
#[inline]
pub fn strain_index(a: usize, b: usize) -> usize {
    if a == b {
        a
    } else {
        2
    }
}

/// Index of the strain-gradient case `abc`.
#[inline]
pub fn gradient_index(a: usize, b: usize, c: usize) -> usize {
    2 * strain_index(a, b) + c
}

pub fn strain_label(k: usize) -> String {
    let (a, b) = STRAIN_CASES[k];
    format!("{}{}", a + 1, b + 1)
}

pub fn gradient_label(k: usize) -> String {
    let (a, b, c) = GRADIENT_CASES[k];
    format!("{}{}{}", a + 1, b + 1, c + 1)
}

/// Relative limit on the volume integral of each ψ load.
pub const SOLVABILITY_TOLERANCE: f64 = 1e-8;

/// Mesh, materials and the discretization shared by all corrector solves.
#[derive(Debug)]
pub struct CellProblem<'a> {
    pub mesh: &'a Mesh,
    pub materials: &'a MaterialMap,
    pub cache: QuadCache,
    pub elastic_dofs: DofMap,
    pub scalar_dofs: DofMap,
    pub mode: ExecMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDiagnostics {
    pub case: String,
    pub solve: SolveDiagnostics,
    /// `‖∫ load dV‖ / (V ‖C^M‖)` for ψ cases.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solvability: Option<f64>,
}

/// Stiffness, thermal stress and density from the φ and P correctors,
/// needed to set up the ψ loads.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstPass {
    pub stiffness: Tensor4,
    pub thermal_stress: Mat2,
    pub density: f64,
}

/// Nodal corrector fields, node-major. Vector fields carry two values per
/// node; R fields one.
#[derive(Debug, Clone)]
pub struct CellSolutions {
    pub phi: Vec<Vec<f64>>,
    pub p: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub first_pass: FirstPass,
    pub diagnostics: Vec<CaseDiagnostics>,
}

impl<'a> CellProblem<'a> {
    pub fn new(mesh: &'a Mesh, materials: &'a MaterialMap, mode: ExecMode) -> Result<Self> {
        if let Some(&r) = mesh.regions.iter().find(|&&r| r as usize >= materials.len()) {
            return Err(Error::Material(format!(
                "mesh region {r} has no material ({} given)",
                materials.len()
            )));
        }
        Ok(CellProblem {
            mesh,
            materials,
            cache: QuadCache::new(mesh, mode)?,
            elastic_dofs: DofMap::periodic(mesh, 2),
            scalar_dofs: DofMap::periodic(mesh, 1),
            mode,
        })
    }

    /// Area of the full square, pores included.
    pub fn cell_volume(&self) -> f64 {
        self.mesh.cell.area()
    }

    pub fn solid_volume(&self) -> f64 {
        self.cache.solid_area()
    }

    pub fn elastic_solver(&self) -> Result<SpdSolver> {
        let k = assemble_bilinear(
            self.mesh,
            &self.cache,
            self.materials,
            &self.elastic_dofs,
            BilinearKind::Elasticity,
            self.mode,
        );
        let w = mean_weights(self.mesh, &self.cache, &self.elastic_dofs);
        SpdSolver::new(k, 2, Some(w))
    }

    pub fn conduction_solver(&self) -> Result<SpdSolver> {
        let k = assemble_bilinear(
            self.mesh,
            &self.cache,
            self.materials,
            &self.scalar_dofs,
            BilinearKind::Conduction,
            self.mode,
        );
        let w = mean_weights(self.mesh, &self.cache, &self.scalar_dofs);
        SpdSolver::new(k, 1, Some(w))
    }

    fn run(
        &self,
        solver: &SpdSolver,
        dofs: &DofMap,
        rhs: Vec<Vec<f64>>,
        labels: Vec<String>,
    ) -> Result<(Vec<Vec<f64>>, Vec<CaseDiagnostics>)> {
        let sols = solver.solve_many(&rhs, self.mode)?;
        let mut fields = Vec::with_capacity(sols.len());
        let mut diags = Vec::with_capacity(sols.len());
        for (s, case) in sols.into_iter().zip(labels) {
            fields.push(dofs.expand(&s.values));
            diags.push(CaseDiagnostics {
                case,
                solve: s.diagnostics,
                solvability: None,
            });
        }
        Ok((fields, diags))
    }

    /// φ_ab for ab = 11, 22, 12: load `−∫ C_ijab ∂w_i/∂y_j`.
    pub fn solve_phi(&self, solver: &SpdSolver) -> Result<(Vec<Vec<f64>>, Vec<CaseDiagnostics>)> {
        let rhs = STRAIN_CASES
            .iter()
            .map(|&(a, b)| {
                assemble_linear(self.mesh, &self.cache, &self.elastic_dofs, self.mode, |e, _, _| {
                    let c = &self.materials.get(self.mesh.regions[e]).stiffness;
                    LoadDensity {
                        flux: [[-c.get(0, 0, a, b), -c.get(0, 1, a, b)], [-c.get(1, 0, a, b), -c.get(1, 1, a, b)]],
                        source: [0.0; 2],
                    }
                })
            })
            .collect();
        let labels = (0..3).map(|k| format!("phi_{}", strain_label(k))).collect();
        self.run(solver, &self.elastic_dofs, rhs, labels)
    }

    /// P: load `−∫ β_ij ∂w_i/∂y_j`.
    pub fn solve_p(&self, solver: &SpdSolver) -> Result<(Vec<f64>, CaseDiagnostics)> {
        let rhs = assemble_linear(self.mesh, &self.cache, &self.elastic_dofs, self.mode, |e, _, _| {
            let beta = &self.materials.get(self.mesh.regions[e]).thermal_stress;
            LoadDensity {
                flux: [[-beta[0][0], -beta[0][1]], [-beta[1][0], -beta[1][1]]],
                source: [0.0; 2],
            }
        });
        let (mut f, mut d) = self.run(solver, &self.elastic_dofs, vec![rhs], vec!["P".into()])?;
        Ok((f.remove(0), d.remove(0)))
    }

    /// `L_ab = e_a ⊗ e_b + ∇φ_ab` at a quadrature point.
    pub fn strain_localization(&self, phi: &[Vec<f64>], e: usize, q: usize) -> [Mat2; 3] {
        let p = &self.cache.element(e)[q];
        std::array::from_fn(|k| {
            let (a, b) = STRAIN_CASES[k];
            let mut l = field::gradient(self.mesh, e, p, &phi[k], 2);
            l[a][b] += 1.0;
            l
        })
    }

    /// `C^M = (1/V) ∫ L:C:L`, `β^M = (1/V) ∫ (L:C:Z − β:L)` and
    /// `ρ^M = (1/V) ∫ ρ`, with V the full cell.
    pub fn first_pass_macro(&self, phi: &[Vec<f64>], p_field: &[f64]) -> FirstPass {
        #[derive(Clone)]
        struct Acc {
            c: [[f64; 3]; 3],
            beta: [f64; 3],
            rho: f64,
        }
        let zero = Acc {
            c: [[0.0; 3]; 3],
            beta: [0.0; 3],
            rho: 0.0,
        };
        let acc = reduce_indexed(
            self.mode,
            self.mesh.num_elements(),
            zero.clone(),
            |e| {
                let mat = self.materials.get(self.mesh.regions[e]);
                let mut s = zero.clone();
                for (q, p) in self.cache.element(e).iter().enumerate() {
                    let l = self.strain_localization(phi, e, q);
                    let z = field::gradient(self.mesh, e, p, p_field, 2);
                    let cz = mat.stiffness.contract(&z);
                    for i in 0..3 {
                        let cl = mat.stiffness.contract(&l[i]);
                        for j in 0..3 {
                            s.c[i][j] += p.weight * double_dot(&cl, &l[j]);
                        }
                        s.beta[i] += p.weight * (double_dot(&l[i], &cz) - double_dot(&mat.thermal_stress, &l[i]));
                    }
                    s.rho += p.weight * mat.density;
                }
                s
            },
            |mut a, b| {
                for i in 0..3 {
                    for j in 0..3 {
                        a.c[i][j] += b.c[i][j];
                    }
                    a.beta[i] += b.beta[i];
                }
                a.rho += b.rho;
                a
            },
        );
        let v = self.cell_volume();
        let stiffness = Tensor4::from_fn(|i, j, k, l| acc.c[strain_index(i, j)][strain_index(k, l)] / v);
        let b = acc.beta.map(|x| x / v);
        FirstPass {
            stiffness,
            thermal_stress: [[b[0], b[2]], [b[2], b[1]]],
            density: acc.rho / v,
        }
    }

    /// ψ_abc: flux `−C_ijkc φ_abk` and body load
    /// `C_ickl L_abkl − (ρ/ρ^M) C^M_icab`. Every load must integrate to zero.
    pub fn solve_psi(
        &self,
        solver: &SpdSolver,
        phi: &[Vec<f64>],
        first: &FirstPass,
    ) -> Result<(Vec<Vec<f64>>, Vec<CaseDiagnostics>)> {
        let density = |e: usize| self.materials.get(self.mesh.regions[e]).density;
        let load = |k: usize, e: usize, q: usize, p: &crate::fem::element::PointEval| -> LoadDensity {
            let (a, b, c) = GRADIENT_CASES[k];
            let cm = &self.materials.get(self.mesh.regions[e]).stiffness;
            let ab = strain_index(a, b);
            let phi_ab = field::value(self.mesh, e, p, &phi[ab], 2);
            let l = self.strain_localization(phi, e, q);
            let cl = cm.contract(&l[ab]);
            let ratio = density(e) / first.density;
            let mut flux = [[0.0; 2]; 2];
            for (i, row) in flux.iter_mut().enumerate() {
                for (j, s) in row.iter_mut().enumerate() {
                    *s = -(cm.get(i, j, 0, c) * phi_ab[0] + cm.get(i, j, 1, c) * phi_ab[1]);
                }
            }
            let source = std::array::from_fn(|i| cl[i][c] - ratio * first.stiffness.get(i, c, a, b));
            LoadDensity { flux, source }
        };

        let scale = self.cell_volume() * first.stiffness.max_abs();
        let mut labels = Vec::with_capacity(6);
        let mut rhs = Vec::with_capacity(6);
        let mut solvability = Vec::with_capacity(6);
        for k in 0..6 {
            let total = reduce_indexed(
                self.mode,
                self.mesh.num_elements(),
                [0.0; 2],
                |e| {
                    let mut s = [0.0; 2];
                    for (q, p) in self.cache.element(e).iter().enumerate() {
                        let f = load(k, e, q, p).source;
                        s[0] += p.weight * f[0];
                        s[1] += p.weight * f[1];
                    }
                    s
                },
                |x, y| [x[0] + y[0], x[1] + y[1]],
            );
            let residual = total[0].hypot(total[1]) / scale;
            let case = format!("psi_{}", gradient_label(k));
            if residual > SOLVABILITY_TOLERANCE {
                return Err(Error::Solvability {
                    case,
                    residual,
                    limit: SOLVABILITY_TOLERANCE,
                });
            }
            solvability.push(residual);
            labels.push(case);
            rhs.push(assemble_linear(self.mesh, &self.cache, &self.elastic_dofs, self.mode, |e, q, p| load(k, e, q, p)));
        }
        let (fields, mut diags) = self.run(solver, &self.elastic_dofs, rhs, labels)?;
        for (d, s) in diags.iter_mut().zip(solvability) {
            d.solvability = Some(s);
        }
        Ok((fields, diags))
    }

    /// R_j: `∫ κ ∇R_j · ∇w = ∫ κ_ij ∂w/∂y_i`.
    pub fn solve_r(&self, solver: &SpdSolver) -> Result<(Vec<Vec<f64>>, Vec<CaseDiagnostics>)> {
        let rhs = (0..2)
            .map(|j| {
                assemble_linear(self.mesh, &self.cache, &self.scalar_dofs, self.mode, |e, _, _| {
                    let kap = &self.materials.get(self.mesh.regions[e]).conductivity;
                    LoadDensity {
                        flux: [[kap[0][j], kap[1][j]], [0.0; 2]],
                        source: [0.0; 2],
                    }
                })
            })
            .collect();
        let labels = (0..2).map(|j| format!("R_{}", j + 1)).collect();
        self.run(solver, &self.scalar_dofs, rhs, labels)
    }

    /// All corrector problems in order; one factorization per operator.
    pub fn solve_all(&self) -> Result<CellSolutions> {
        let elastic = self.elastic_solver()?;
        let (phi, mut diagnostics) = self.solve_phi(&elastic)?;
        let (p, pd) = self.solve_p(&elastic)?;
        diagnostics.push(pd);
        let first_pass = self.first_pass_macro(&phi, &p);
        let (psi, sd) = self.solve_psi(&elastic, &phi, &first_pass)?;
        diagnostics.extend(sd);
        drop(elastic);
        let conduction = self.conduction_solver()?;
        let (r, rd) = self.solve_r(&conduction)?;
        diagnostics.extend(rd);
        Ok(CellSolutions {
            phi,
            p,
            psi,
            r,
            first_pass,
            diagnostics,
        })
    }
}

/// Unit dyad for strain case `k`.
pub fn strain_dyad(k: usize) -> Mat2 {
    let (a, b) = STRAIN_CASES[k];
    unit_dyad(a, b)
}
