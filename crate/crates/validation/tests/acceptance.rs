//! End-to-end acceptance suite: one line per criterion, nonzero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use cellhom::cell::CellProblem;
use cellhom::geometry::{generate_mesh, ElementOrder, Mesh, RveSpec};
use cellhom::homogenize::{homogenize, HomogenizedParameters, KappaNormalization};
use cellhom::material::{log_expansion_error, taylor_log_validity, MaterialData, MaterialMap, MicroMaterial, ScalarOrTensor};
use cellhom::parallel::ExecMode;
use cellhom_validation::*;

struct Run {
    params: HomogenizedParameters,
    solvability: f64,
    elapsed: Duration,
}

fn solve(mesh: &Mesh, materials: &MaterialMap) -> Run {
    let start = Instant::now();
    let problem = CellProblem::new(mesh, materials, ExecMode::Parallel).expect("materials cover the mesh");
    let sol = problem.solve_all().expect("cell problems solve");
    let params = homogenize(&problem, &sol, 1.0, KappaNormalization::SolidAverage).expect("homogenization");
    let solvability = sol
        .diagnostics
        .iter()
        .filter_map(|d| d.solvability)
        .fold(0.0, f64::max);
    Run {
        params,
        solvability,
        elapsed: start.elapsed(),
    }
}

fn aluminium(spec: &RveSpec, resolution: usize) -> Run {
    let mesh = generate_mesh(spec, resolution, ElementOrder::Quadratic).expect("mesh");
    solve(&mesh, &MaterialMap::uniform(MicroMaterial::aluminium()))
}

struct Outcome {
    passed: bool,
    detail: String,
}

struct Checks {
    passed: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: String) {
        self.passed &= ok;
        self.notes.push(if ok { note } else { format!("{note} <-- out of bounds") });
    }

    fn within(&mut self, name: &str, value: f64, reference: f64, tol: f64) {
        let e = rel(value, reference);
        self.check(e <= tol, format!("{name} {value:.6} vs {reference} ({:.3}% / {:.1}%)", 100.0 * e, 100.0 * tol));
    }

    fn done(self) -> Outcome {
        Outcome {
            passed: self.passed,
            detail: self.notes.join("; "),
        }
    }
}

fn criterion_1() -> Outcome {
    let run = aluminium(&RveSpec::homogeneous(1.0), 8);
    let h = &run.params;
    let m = &h.mechanical;
    let t = &h.thermal;
    let mut c = Checks::new();
    for (i, j) in [(0, 0), (0, 1), (1, 1), (2, 2)] {
        c.within(&format!("C[{i}][{j}]"), m.stiffness[i][j], C_HOMOGENEOUS[i][j], 1e-3);
    }
    let off = m.stiffness[0][2].abs().max(m.stiffness[1][2].abs());
    c.check(off <= 1e-3 * C_HOMOGENEOUS[0][0], format!("C shear coupling {off:.1e}"));
    c.within("beta11", t.beta[0][0], -2.64, 5e-3);
    c.within("beta22", t.beta[1][1], -2.64, 5e-3);
    c.within("kappa11", h.conductivity[0][0], KAPPA_SOLID, 1e-3);
    c.within("kappa22", h.conductivity[1][1], KAPPA_SOLID, 1e-3);
    c.within("c", t.c, C_SOLID, 1e-10);
    c.within("a", t.a, A_SOLID, 1e-10);
    let cn = frobenius(&m.stiffness);
    let l = 1.0;
    let g = frobenius(&m.g);
    c.check(g <= 1e-8 * cn * l, format!("|G| {g:.1e}"));
    let gamma = frobenius(&t.gamma);
    c.check(gamma <= 1e-8 * frobenius(&t.beta) * l, format!("|gamma| {gamma:.1e}"));
    let d = frobenius(&m.d);
    c.check(d <= 1e-8 * cn * l * l, format!("|D| {d:.1e}"));
    c.done()
}

fn criterion_2(single: &Run) -> Outcome {
    let h = &single.params;
    let m = &h.mechanical;
    let t = &h.thermal;
    let mut c = Checks::new();
    c.within("C1111", m.stiffness[0][0], C_SINGLE[0][0], 0.02);
    c.within("C1122", m.stiffness[0][1], C_SINGLE[0][1], 0.03);
    c.within("C1212", m.stiffness[2][2], C_SINGLE[2][2], 0.03);
    c.within("beta11", t.beta[0][0], BETA_POROUS, 0.02);
    c.within("beta22", t.beta[1][1], BETA_POROUS, 0.02);
    c.check(t.beta[0][1].abs() <= 0.02 * BETA_POROUS.abs(), format!("beta12 {:.1e}", t.beta[0][1]));
    c.within("kappa11(solid)", h.conductivity_solid_average[0][0], KAPPA_SINGLE_SOLID_AVERAGE, 0.01);
    c.within("kappa22(solid)", h.conductivity_solid_average[1][1], KAPPA_SINGLE_SOLID_AVERAGE, 0.01);
    c.within("c", t.c, C_POROUS, 5e-3);
    c.within("a", t.a, A_POROUS, 0.02);
    let gamma = frobenius(&t.gamma);
    c.check(gamma <= 1e-6 * frobenius(&t.beta), format!("|gamma| {gamma:.1e}"));
    let secs = single.elapsed.as_secs_f64();
    c.check(secs < 300.0, format!("{secs:.1} s"));
    c.done()
}

fn criterion_3(single: &Run, uniform: &Run) -> Outcome {
    let s = to_printed(&single.params.mechanical.d);
    let u = to_printed(&uniform.params.mechanical.d);
    let mut c = Checks::new();
    let ratio = u[0][0] / s[0][0];
    c.check(rel(ratio, 0.25) <= 0.05, format!("D111111 ratio {ratio:.4}"));
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(rel(u[i][j] / s[i][j], 0.25));
        }
    }
    c.check(worst <= 0.08, format!("leading block worst ratio deviation {:.2}%", 100.0 * worst));
    c.done()
}

fn criterion_4(single: &Run) -> Outcome {
    let d = to_printed(&single.params.mechanical.d);
    let threshold = 0.05 * D_SINGLE[3][3].abs();
    let max = max_abs(&d);
    let mut c = Checks::new();
    let mut compared = 0;
    let mut worst = (0.0_f64, 0, 0);
    for i in 0..6 {
        for j in 0..6 {
            if D_SINGLE[i][j].abs() > threshold {
                compared += 1;
                let e = rel(d[i][j], D_SINGLE[i][j]);
                if e > worst.0 {
                    worst = (e, i, j);
                }
            }
        }
    }
    c.check(
        worst.0 <= 0.10,
        format!("{compared} large entries, worst {:.2}% at printed ({}, {})", 100.0 * worst.0, worst.1 + 1, worst.2 + 1),
    );
    let mut coupling = 0.0_f64;
    for i in 0..3 {
        for j in 3..6 {
            coupling = coupling.max(d[i][j].abs()).max(d[j][i].abs());
        }
    }
    c.check(coupling <= 1e-2 * max, format!("block coupling {:.1e} of max", coupling / max));
    for i in 0..6 {
        for j in 0..6 {
            if D_SINGLE[i][j].abs() > 1.0 && D_SINGLE[i][j].abs() <= threshold && d[i][j].signum() != D_SINGLE[i][j].signum() {
                c.check(false, format!("sign of printed ({}, {})", i + 1, j + 1));
            }
        }
    }
    c.done()
}

fn strip_material(young: f64, kappa: f64) -> MicroMaterial {
    MicroMaterial::new(&MaterialData {
        young,
        nu: 0.0,
        kappa: ScalarOrTensor::Scalar(kappa),
        ..MaterialData::default()
    })
    .expect("valid strip material")
}

fn criterion_5() -> Outcome {
    let (e1, e2) = (10_000.0, 100_000.0);
    let (k1, k2) = (20.0, 200.0);
    let mut mesh = generate_mesh(&RveSpec::homogeneous(1.0), 16, ElementOrder::Quadratic).expect("mesh");
    mesh.assign_regions(|x| if x[0] < 0.5 { 0 } else { 1 });
    let mats = MaterialMap::new(vec![strip_material(e1, k1), strip_material(e2, k2)]).expect("materials");
    let run = solve(&mesh, &mats);
    let h = &run.params;
    let cm = &h.mechanical.stiffness;
    let harmonic = |a: f64, b: f64| 2.0 / (1.0 / a + 1.0 / b);
    let mean = |a: f64, b: f64| 0.5 * (a + b);
    let mut c = Checks::new();
    c.within("kappa across", h.conductivity_cell_average[0][0], harmonic(k1, k2), 5e-3);
    c.within("kappa along", h.conductivity_cell_average[1][1], mean(k1, k2), 5e-3);
    c.within("C2222 along", cm[1][1], mean(e1, e2), 0.01);
    c.within("C1111 across", cm[0][0], harmonic(e1, e2), 0.01);
    c.within("C1212 across", cm[2][2], harmonic(e1 / 2.0, e2 / 2.0), 0.01);
    c.check(cm[0][1].abs() <= 0.01 * cm[0][0], format!("C1122 {:.1e}", cm[0][1]));
    c.done()
}

fn criterion_6(single: &Run) -> Outcome {
    let k = single.params.conductivity_cell_average[0][0];
    let voigt = (1.0 - POROSITY) * KAPPA_SOLID;
    let maxwell = KAPPA_SOLID * (1.0 - POROSITY) / (1.0 + POROSITY);
    let mut c = Checks::new();
    c.check((160.0..=172.0).contains(&k), format!("kappa11(cell) {k:.2} in [160, 172]"));
    c.within("kappa11(cell) vs Maxwell", k, maxwell, 0.04);
    c.check(k < voigt, format!("below Voigt bound {voigt:.1}"));
    c.done()
}

fn criterion_7(runs: &[(&str, &Run)]) -> Outcome {
    let mut c = Checks::new();
    for (name, run) in runs {
        let h = &run.params;
        let avg = &h.checks;
        let worst_avg = avg.strain_localization.max(avg.thermal_gradient).max(avg.conduction_gradient);
        let asym = h.mechanical.stiffness_asymmetry.max(h.mechanical.d_asymmetry);
        c.check(
            run.solvability <= 1e-8 && worst_avg <= 1e-10 && asym <= 1e-10,
            format!("{name}: solvability {:.1e}, averages {worst_avg:.1e}, symmetry {asym:.1e}", run.solvability),
        );
    }
    c.done()
}

fn criterion_8(random: &Run, spec: &RveSpec) -> Outcome {
    let h = &random.params;
    let mut c = Checks::new();
    c.check(!spec.is_centro_symmetric(1e-9), "layout not centro-symmetric".into());
    let gamma = frobenius(&h.thermal.gamma);
    let g = frobenius(&h.mechanical.g);
    let c1112 = h.mechanical.stiffness[0][2];
    let b12 = h.thermal.beta[0][1];
    c.check(gamma > 1e-3, format!("|gamma| {gamma:.3e} N/K"));
    c.check(g > 1.0, format!("|G| {g:.1} N/mm"));
    c.check(c1112.abs() > 1e-6 * h.mechanical.stiffness[0][0], format!("C1112 {c1112:.2}"));
    c.check(b12.abs() > 1e-8 * h.thermal.beta[0][0].abs(), format!("beta12 {b12:.2e}"));
    c.done()
}

fn criterion_9() -> Outcome {
    let t_ref = 300.0;
    let tol = log_expansion_error(180.0, t_ref);
    let v = taylor_log_validity(t_ref, tol).expect("valid inputs");
    let mut c = Checks::new();
    c.check((v.t_low - 180.0).abs() <= 5.0, format!("lower {:.1} K", v.t_low));
    c.check((v.t_high - 540.0).abs() <= 5.0, format!("upper {:.1} K (tol {tol:.5})", v.t_high));
    c.done()
}

fn main() {
    let single = aluminium(&RveSpec::single_pore(1.0, POROSITY), 128);
    let uniform = aluminium(&RveSpec::uniform_four(1.0, POROSITY), 128);
    let random_spec = RveSpec::random_four(1.0, POROSITY, 7, 0.02).expect("four pores fit");
    let random = aluminium(&random_spec, 64);

    let results = [
        ("homogeneous cell", criterion_1()),
        ("single pore", criterion_2(&single)),
        ("D scaling", criterion_3(&single, &uniform)),
        ("D magnitudes", criterion_4(&single)),
        ("laminate", criterion_5()),
        ("conduction bounds", criterion_6(&single)),
        (
            "solvability and averages",
            criterion_7(&[("single", &single), ("uniform4", &uniform), ("random4", &random)]),
        ),
        ("random pores", criterion_8(&random, &random_spec)),
        ("Taylor validity", criterion_9()),
    ];

    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("criterion {} [{name}]: {} | {}", k + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
