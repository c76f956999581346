//! Macroscale parameters from the corrector fields.
//!
//! All volume integrals run over the solid with the assembly quadrature and
//! are normalized by the full cell area `V`, unless stated otherwise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cell::{gradient_index, strain_index, CellProblem, CellSolutions, GRADIENT_CASES};
use crate::error::{Error, Result};
use crate::fem::{field, pore_edge_points};
use crate::material::MPA_TO_KJ_PER_KG;
use crate::parallel::reduce_indexed;
use crate::tensor::{double_dot, Mat2, Vec2};
use crate::voigt;

/// Corrector-derived quantities at one quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct PointFields {
    pub weight: f64,
    /// Position relative to the cell center.
    pub y: Vec2,
    /// `L_ab`, strain cases in Voigt order.
    pub l: [Mat2; 3],
    /// `Z = ∇P`.
    pub z: Mat2,
    /// `N_abc = φ_ab ⊗ e_c + ∇ψ_abc`, gradient cases in Voigt order.
    pub n: [Mat2; 6],
    /// `M_abc = y_c L_ab + N_abc`.
    pub m: [Mat2; 6],
    /// `∇R_j`.
    pub grad_r: [Vec2; 2],
}

/// Lazy evaluator of [`PointFields`] over a solved cell.
pub struct CorrectorFields<'a> {
    pub problem: &'a CellProblem<'a>,
    pub solutions: &'a CellSolutions,
    center: Vec2,
}

pub fn evaluate_correctors<'a>(problem: &'a CellProblem<'a>, solutions: &'a CellSolutions) -> CorrectorFields<'a> {
    CorrectorFields {
        problem,
        solutions,
        center: problem.mesh.cell.center(),
    }
}

impl CorrectorFields<'_> {
    pub fn at(&self, e: usize, q: usize) -> PointFields {
        let mesh = self.problem.mesh;
        let p = &self.problem.cache.element(e)[q];
        let s = self.solutions;
        let y = [p.x[0] - self.center[0], p.x[1] - self.center[1]];
        let l = self.problem.strain_localization(&s.phi, e, q);
        let z = field::gradient(mesh, e, p, &s.p, 2);
        let phi: [Vec2; 3] = std::array::from_fn(|k| field::value(mesh, e, p, &s.phi[k], 2));
        let n: [Mat2; 6] = std::array::from_fn(|k| {
            let (a, b, c) = GRADIENT_CASES[k];
            let ab = strain_index(a, b);
            let mut g = field::gradient(mesh, e, p, &s.psi[k], 2);
            g[0][c] += phi[ab][0];
            g[1][c] += phi[ab][1];
            g
        });
        let m = std::array::from_fn(|k| {
            let (a, b, c) = GRADIENT_CASES[k];
            let ab = strain_index(a, b);
            let mut mk = n[k];
            for i in 0..2 {
                for j in 0..2 {
                    mk[i][j] += y[c] * l[ab][i][j];
                }
            }
            mk
        });
        let grad_r = std::array::from_fn(|j| field::gradient(mesh, e, p, &s.r[j], 1)[0]);
        PointFields {
            weight: p.weight,
            y,
            l,
            z,
            n,
            m,
            grad_r,
        }
    }
}

/// Raw solid integrals shared by every macroscale parameter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Integrals {
    pub cell_volume: f64,
    pub solid_volume: f64,
    /// `∫ L_A:C:L_B`
    pub ll: [[f64; 3]; 3],
    /// `∫ L_A:C:M_θ`
    pub lm: [[f64; 6]; 3],
    /// `∫ M_θ:C:M_φ`
    pub mm: [[f64; 6]; 6],
    /// `∫ (L_A:C:Z − β:L_A)`
    pub lz: [f64; 3],
    /// `∫ (M_θ:C:Z − β:M_θ)`
    pub mz: [f64; 6],
    /// `∫ (Z:C:Z − 2β:Z)` in MPa/K², material by material.
    pub zz: f64,
    /// Same integrand converted to a specific energy (kJ/(kg·K²)).
    pub zz_specific: f64,
    /// `∫ a`
    pub a: f64,
    /// `∫ c`
    pub c: f64,
    /// `∫ ρ`
    pub rho: f64,
    /// `∫ (κ_ij − κ_ip ∂R_j/∂y_p)`
    pub kappa: Mat2,
    /// `∫ ∇φ_A`
    pub grad_phi: [Mat2; 3],
    /// `∫ Z` and `∫ |Z|`
    pub grad_p: Mat2,
    pub grad_p_abs: f64,
    /// `∫ ∇R_j` and `∫ |∇R|`
    pub grad_r: [Vec2; 2],
    pub grad_r_abs: f64,
}

fn add_mat(a: &mut Mat2, b: &Mat2) {
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] += b[i][j];
        }
    }
}

fn frobenius(a: &Mat2) -> f64 {
    double_dot(a, a).sqrt()
}

impl Integrals {
    fn merge(mut self, o: Self) -> Self {
        self.solid_volume += o.solid_volume;
        for i in 0..3 {
            for j in 0..3 {
                self.ll[i][j] += o.ll[i][j];
            }
            for j in 0..6 {
                self.lm[i][j] += o.lm[i][j];
            }
            self.lz[i] += o.lz[i];
            add_mat(&mut self.grad_phi[i], &o.grad_phi[i]);
        }
        for i in 0..6 {
            for j in 0..6 {
                self.mm[i][j] += o.mm[i][j];
            }
            self.mz[i] += o.mz[i];
        }
        self.zz += o.zz;
        self.zz_specific += o.zz_specific;
        self.a += o.a;
        self.c += o.c;
        self.rho += o.rho;
        add_mat(&mut self.kappa, &o.kappa);
        add_mat(&mut self.grad_p, &o.grad_p);
        self.grad_p_abs += o.grad_p_abs;
        for j in 0..2 {
            self.grad_r[j][0] += o.grad_r[j][0];
            self.grad_r[j][1] += o.grad_r[j][1];
        }
        self.grad_r_abs += o.grad_r_abs;
        self
    }
}

/// One pass over all quadrature points.
pub fn integrate(fields: &CorrectorFields) -> Integrals {
    let problem = fields.problem;
    let mesh = problem.mesh;
    let mut total = reduce_indexed(
        problem.mode,
        mesh.num_elements(),
        Integrals::default(),
        |e| {
            let mat = problem.materials.get(mesh.regions[e]);
            let cm = &mat.stiffness;
            let beta = &mat.thermal_stress;
            let kap = &mat.conductivity;
            let mut s = Integrals::default();
            for q in 0..problem.cache.points_per_element {
                let f = fields.at(e, q);
                let w = f.weight;
                let cl = f.l.map(|l| cm.contract(&l));
                let cmt = f.m.map(|m| cm.contract(&m));
                let cz = cm.contract(&f.z);
                for i in 0..3 {
                    for j in 0..3 {
                        s.ll[i][j] += w * double_dot(&cl[i], &f.l[j]);
                    }
                    for j in 0..6 {
                        s.lm[i][j] += w * double_dot(&cl[i], &f.m[j]);
                    }
                    s.lz[i] += w * (double_dot(&f.l[i], &cz) - double_dot(beta, &f.l[i]));
                    let mut g = f.l[i];
                    let (a, b) = crate::cell::STRAIN_CASES[i];
                    g[a][b] -= 1.0;
                    add_mat(&mut s.grad_phi[i], &g.map(|r| r.map(|v| w * v)));
                }
                for i in 0..6 {
                    for j in 0..6 {
                        s.mm[i][j] += w * double_dot(&cmt[i], &f.m[j]);
                    }
                    s.mz[i] += w * (double_dot(&f.m[i], &cz) - double_dot(beta, &f.m[i]));
                }
                let zz = double_dot(&f.z, &cz) - 2.0 * double_dot(beta, &f.z);
                s.zz += w * zz;
                s.zz_specific += w * zz * MPA_TO_KJ_PER_KG / mat.density;
                s.a += w * mat.heat_capacity;
                s.c += w * mat.specific_heat;
                s.rho += w * mat.density;
                s.solid_volume += w;
                for i in 0..2 {
                    for j in 0..2 {
                        s.kappa[i][j] += w * (kap[i][j] - kap[i][0] * f.grad_r[j][0] - kap[i][1] * f.grad_r[j][1]);
                    }
                }
                add_mat(&mut s.grad_p, &f.z.map(|r| r.map(|v| w * v)));
                s.grad_p_abs += w * frobenius(&f.z);
                for j in 0..2 {
                    s.grad_r[j][0] += w * f.grad_r[j][0];
                    s.grad_r[j][1] += w * f.grad_r[j][1];
                    s.grad_r_abs += w * f.grad_r[j][0].hypot(f.grad_r[j][1]);
                }
            }
            s
        },
        Integrals::merge,
    );
    total.cell_volume = problem.cell_volume();
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParameters {
    /// `C^M`, 3×3 (MPa).
    pub stiffness: [[f64; 3]; 3],
    /// `G^M`, 3×6 (N/mm).
    pub g: [[f64; 6]; 3],
    /// `D^M`, 6×6 (N).
    pub d: [[f64; 6]; 6],
    /// `D̄` before subtracting the macroscale gradient energy of `C^M`.
    pub d_bar: [[f64; 6]; 6],
    /// `I_kn = (1/V) ∫_cell (X − X_c)(X − X_c)` in macroscale units (mm²).
    pub moment: Mat2,
    pub stiffness_asymmetry: f64,
    pub d_asymmetry: f64,
}

/// `C^M = (1/V)∫ L:C:L`, `G^M = (ε/V)∫ L:C:M`, `D̄ = (ε²/V)∫ M:C:M` and
/// `D^M_ijklmn = D̄_ijklmn − C^M_ijlm I_kn`.
pub fn homogenize_mechanical(int: &Integrals, epsilon: f64, edge: f64) -> Result<MechanicalParameters> {
    let v = int.cell_volume;
    let stiffness = int.ll.map(|r| r.map(|x| x / v));
    let g = int.lm.map(|r| r.map(|x| epsilon * x / v));
    let d_bar = int.mm.map(|r| r.map(|x| epsilon * epsilon * x / v));
    let second = epsilon * epsilon * edge * edge / 12.0;
    let moment = [[second, 0.0], [0.0, second]];
    let mut d = d_bar;
    for (t, row) in d.iter_mut().enumerate() {
        let (i, j, k) = GRADIENT_CASES[t];
        for (f, x) in row.iter_mut().enumerate() {
            let (l, m, n) = GRADIENT_CASES[f];
            *x -= stiffness[strain_index(i, j)][strain_index(l, m)] * moment[k][n];
        }
    }
    let max_abs = |m: &[[f64; 6]; 6]| m.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    let c_scale = stiffness.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    let stiffness_asymmetry = voigt::ensure_symmetric("C", &stiffness, c_scale)?;
    // D^M can vanish identically, so its defect is measured against D̄
    let d_asymmetry = voigt::ensure_symmetric("D", &d, max_abs(&d_bar))?;
    Ok(MechanicalParameters {
        stiffness,
        g,
        d,
        d_bar,
        moment,
        stiffness_asymmetry,
        d_asymmetry,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalParameters {
    /// `β^M` (MPa/K).
    pub beta: Mat2,
    /// `γ^M`, 3×2 (N/K).
    pub gamma: [[f64; 2]; 3],
    /// `a^M`, with the strain energy of the thermal fluctuation converted to
    /// kJ/(kg·K²) through the local density.
    pub a: f64,
    /// `a^M` adding the fluctuation energy in MPa/K² unconverted.
    pub a_unconverted: f64,
    /// `c^M`
    pub c: f64,
    /// `ρ^M`
    pub density: f64,
}

/// `β^M = (1/V)∫(L:C:Z − β:L)`, `γ^M = −(ε/V)∫(M:C:Z − β:M)`,
/// `a^M = −(1/V)∫(Z:C:Z − 2β:Z − a)`, `c^M = (1/V)∫ c`.
pub fn homogenize_thermal(int: &Integrals, epsilon: f64) -> ThermalParameters {
    let v = int.cell_volume;
    let b = int.lz.map(|x| x / v);
    let mut gamma = [[0.0; 2]; 3];
    for (t, &(a, bb, c)) in GRADIENT_CASES.iter().enumerate() {
        gamma[strain_index(a, bb)][c] = -epsilon * int.mz[t] / v;
    }
    ThermalParameters {
        beta: [[b[0], b[2]], [b[2], b[1]]],
        gamma,
        a: -(int.zz_specific - int.a) / v,
        a_unconverted: -(int.zz - int.a) / v,
        c: int.c / v,
        density: int.rho / v,
    }
}

/// Volume used to normalize the conduction integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaNormalization {
    /// Divide by the full cell.
    CellAverage,
    /// Divide by the solid area only.
    #[default]
    SolidAverage,
}

impl FromStr for KappaNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell_average" | "cell" => Ok(KappaNormalization::CellAverage),
            "solid_average" | "solid" => Ok(KappaNormalization::SolidAverage),
            other => Err(Error::Config(format!("unknown conductivity normalization `{other}`"))),
        }
    }
}

impl fmt::Display for KappaNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KappaNormalization::CellAverage => "cell_average",
            KappaNormalization::SolidAverage => "solid_average",
        })
    }
}

/// `κ^M_ij = (1/V*) ∫ (κ_ij − κ_ip ∂R_j/∂y_p)`.
pub fn homogenize_conduction(int: &Integrals, normalization: KappaNormalization) -> Mat2 {
    let v = match normalization {
        KappaNormalization::CellAverage => int.cell_volume,
        KappaNormalization::SolidAverage => int.solid_volume,
    };
    int.kappa.map(|r| r.map(|x| x / v))
}

/// Residuals of the averaging identities, with the corrector fields
/// extended periodically through the pores: `(1/V)[∫_solid ∇u − ∮_pores u ⊗ n]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AveragingChecks {
    /// `max |⟨L_ab⟩ − e_a ⊗ e_b|`
    pub strain_localization: f64,
    /// `|⟨Z⟩|` relative to the mean of `|Z|`.
    pub thermal_gradient: f64,
    /// `|⟨∇R⟩|` relative to the mean of `|∇R|`.
    pub conduction_gradient: f64,
}

fn relative(num: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        num / scale
    } else {
        num
    }
}

pub fn averaging_checks(fields: &CorrectorFields, int: &Integrals) -> AveragingChecks {
    let mesh = fields.problem.mesh;
    let s = fields.solutions;
    let mut flux_phi = [[[0.0; 2]; 2]; 3];
    let mut flux_p = [[0.0; 2]; 2];
    let mut flux_r = [[0.0; 2]; 2];
    for pore in &mesh.boundary.pores {
        for &edge in pore {
            let (nodes, pts) = pore_edge_points(mesh, edge);
            for pt in &pts {
                let eval = |u: &[f64], nc: usize| -> Vec2 {
                    let mut v = [0.0; 2];
                    for (k, &node) in nodes.iter().enumerate() {
                        for (i, vi) in v.iter_mut().enumerate().take(nc) {
                            *vi += pt.basis[k] * u[node * nc + i];
                        }
                    }
                    v
                };
                let dyad = |acc: &mut Mat2, u: Vec2| {
                    for i in 0..2 {
                        for j in 0..2 {
                            acc[i][j] += u[i] * pt.normal_ds[j];
                        }
                    }
                };
                for k in 0..3 {
                    dyad(&mut flux_phi[k], eval(&s.phi[k], 2));
                }
                dyad(&mut flux_p, eval(&s.p, 2));
                for j in 0..2 {
                    let r = eval(&s.r[j], 1)[0];
                    flux_r[j][0] += r * pt.normal_ds[0];
                    flux_r[j][1] += r * pt.normal_ds[1];
                }
            }
        }
    }
    let v = int.cell_volume;
    let mut strain = 0.0_f64;
    for k in 0..3 {
        for i in 0..2 {
            for j in 0..2 {
                strain = strain.max(((int.grad_phi[k][i][j] - flux_phi[k][i][j]) / v).abs());
            }
        }
    }
    let mut dz = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            dz[i][j] = int.grad_p[i][j] - flux_p[i][j];
        }
    }
    let mut dr = 0.0_f64;
    for j in 0..2 {
        dr = dr.max((int.grad_r[j][0] - flux_r[j][0]).hypot(int.grad_r[j][1] - flux_r[j][1]));
    }
    AveragingChecks {
        strain_localization: strain,
        thermal_gradient: relative(frobenius(&dz), int.grad_p_abs),
        conduction_gradient: relative(dr, int.grad_r_abs),
    }
}

/// Every macroscale parameter of a solved cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedParameters {
    pub epsilon: f64,
    pub mechanical: MechanicalParameters,
    pub thermal: ThermalParameters,
    /// `κ^M` under the selected normalization (W/(m·K)).
    pub conductivity: Mat2,
    pub conductivity_normalization: KappaNormalization,
    pub conductivity_cell_average: Mat2,
    pub conductivity_solid_average: Mat2,
    pub cell_volume: f64,
    pub solid_volume: f64,
    pub checks: AveragingChecks,
}

pub fn homogenize(
    problem: &CellProblem,
    solutions: &CellSolutions,
    epsilon: f64,
    normalization: KappaNormalization,
) -> Result<HomogenizedParameters> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Config(format!("homothetic ratio must be positive, got {epsilon}")));
    }
    let fields = evaluate_correctors(problem, solutions);
    let int = integrate(&fields);
    let mechanical = homogenize_mechanical(&int, epsilon, problem.mesh.cell.edge)?;
    let thermal = homogenize_thermal(&int, epsilon);
    let checks = averaging_checks(&fields, &int);
    Ok(HomogenizedParameters {
        epsilon,
        mechanical,
        thermal,
        conductivity: homogenize_conduction(&int, normalization),
        conductivity_normalization: normalization,
        conductivity_cell_average: homogenize_conduction(&int, KappaNormalization::CellAverage),
        conductivity_solid_average: homogenize_conduction(&int, KappaNormalization::SolidAverage),
        cell_volume: int.cell_volume,
        solid_volume: int.solid_volume,
        checks,
    })
}

/// Entry `θ × φ` of a packed strain-gradient matrix by index triples.
pub fn gradient_entry(m: &[[f64; 6]; 6], a: (usize, usize, usize), b: (usize, usize, usize)) -> f64 {
    m[gradient_index(a.0, a.1, a.2)][gradient_index(b.0, b.1, b.2)]
}
