use approx::assert_relative_eq;
use cellhom::cell::CellProblem;
use cellhom::geometry::{generate_mesh, ElementOrder, RveSpec};
use cellhom::homogenize::{homogenize, HomogenizedParameters, KappaNormalization};
use cellhom::material::{MaterialData, MaterialMap, MicroMaterial, ScalarOrTensor};
use cellhom::parallel::ExecMode;
use proptest::prelude::*;

fn run_with(spec: &RveSpec, res: usize, order: ElementOrder, mat: MicroMaterial, mode: ExecMode, eps: f64) -> HomogenizedParameters {
    let mesh = generate_mesh(spec, res, order).unwrap();
    let mats = MaterialMap::uniform(mat);
    let problem = CellProblem::new(&mesh, &mats, mode).unwrap();
    let sol = problem.solve_all().unwrap();
    homogenize(&problem, &sol, eps, KappaNormalization::SolidAverage).unwrap()
}

fn run(spec: &RveSpec, res: usize) -> HomogenizedParameters {
    run_with(spec, res, ElementOrder::Quadratic, MicroMaterial::aluminium(), ExecMode::Parallel, 1.0)
}

fn max_abs<const R: usize, const C: usize>(m: &[[f64; C]; R]) -> f64 {
    m.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn homothetic_ratio_scales_higher_order_terms() {
    let spec = RveSpec::random_four(1.0, 0.2, 3, 0.05).unwrap();
    let mesh = generate_mesh(&spec, 24, ElementOrder::Quadratic).unwrap();
    let mats = MaterialMap::uniform(MicroMaterial::aluminium());
    let problem = CellProblem::new(&mesh, &mats, ExecMode::Parallel).unwrap();
    let sol = problem.solve_all().unwrap();
    let a = homogenize(&problem, &sol, 1.0, KappaNormalization::SolidAverage).unwrap();
    let s = 0.3;
    let b = homogenize(&problem, &sol, s, KappaNormalization::SolidAverage).unwrap();
    assert_eq!(a.mechanical.stiffness, b.mechanical.stiffness);
    assert_eq!(a.thermal.beta, b.thermal.beta);
    for r in 0..3 {
        for c in 0..6 {
            assert_relative_eq!(b.mechanical.g[r][c], s * a.mechanical.g[r][c], max_relative = 1e-12, epsilon = 1e-12);
        }
        for c in 0..2 {
            assert_relative_eq!(b.thermal.gamma[r][c], s * a.thermal.gamma[r][c], max_relative = 1e-12, epsilon = 1e-15);
        }
    }
    for r in 0..6 {
        for c in 0..6 {
            assert_relative_eq!(b.mechanical.d_bar[r][c], s * s * a.mechanical.d_bar[r][c], max_relative = 1e-12, epsilon = 1e-12);
        }
    }
}

#[test]
fn gradient_moduli_scale_with_cell_size() {
    let small = run(&RveSpec::single_pore(1.0, 0.2), 24);
    let large = run(&RveSpec::single_pore(2.0, 0.2), 24);
    let scale = max_abs(&small.mechanical.d);
    for r in 0..3 {
        for c in 0..3 {
            assert_relative_eq!(large.mechanical.stiffness[r][c], small.mechanical.stiffness[r][c], max_relative = 1e-9, epsilon = 1e-6);
        }
    }
    for r in 0..6 {
        for c in 0..6 {
            assert!((large.mechanical.d[r][c] - 4.0 * small.mechanical.d[r][c]).abs() <= 1e-9 * 4.0 * scale);
        }
    }
    assert_relative_eq!(large.conductivity[0][0], small.conductivity[0][0], max_relative = 1e-10);
}

#[test]
fn mirror_symmetric_cell_has_no_shear_coupling() {
    let h = run(&RveSpec::uniform_four(1.0, 0.2), 24);
    let c = &h.mechanical.stiffness;
    let scale = c[0][0];
    assert!(c[0][2].abs() < 1e-9 * scale && c[1][2].abs() < 1e-9 * scale);
    assert_relative_eq!(c[0][0], c[1][1], max_relative = 1e-9);
    assert!(h.thermal.beta[0][1].abs() < 1e-9);
    assert!(h.conductivity[0][1].abs() < 1e-9);
    assert!(max_abs(&h.mechanical.g) < 1e-8 * scale);
}

#[test]
fn conductivity_lies_between_bounds() {
    let h = run(&RveSpec::single_pore(1.0, 0.2), 32);
    let phi = 0.2;
    let k = 247.0;
    let cell = h.conductivity_cell_average[0][0];
    assert!(cell > 0.0 && cell < (1.0 - phi) * k);
    // Hashin–Shtrikman upper bound for an insulating inclusion
    assert!(cell <= k * (1.0 - phi) / (1.0 + phi) * 1.01);
    assert_relative_eq!(h.conductivity_solid_average[0][0] * h.solid_volume, cell * h.cell_volume, max_relative = 1e-12);
}

#[test]
fn stiffness_is_softened_by_pores() {
    let dense = run(&RveSpec::homogeneous(1.0), 8);
    let porous = run(&RveSpec::single_pore(1.0, 0.2), 24);
    for k in 0..3 {
        assert!(porous.mechanical.stiffness[k][k] < dense.mechanical.stiffness[k][k]);
    }
    assert!(porous.thermal.beta[0][0].abs() < dense.thermal.beta[0][0].abs());
}

#[test]
fn sequential_and_parallel_agree() {
    let spec = RveSpec::random_four(1.0, 0.2, 11, 0.05).unwrap();
    let mat = MicroMaterial::aluminium();
    let par = run_with(&spec, 16, ElementOrder::Quadratic, mat.clone(), ExecMode::Parallel, 1.0);
    let seq = run_with(&spec, 16, ElementOrder::Quadratic, mat.clone(), ExecMode::Sequential, 1.0);
    let again = run_with(&spec, 16, ElementOrder::Quadratic, mat, ExecMode::Sequential, 1.0);
    assert_eq!(seq.mechanical.d, again.mechanical.d);
    let scale = max_abs(&seq.mechanical.d);
    for r in 0..6 {
        for c in 0..6 {
            assert!((par.mechanical.d[r][c] - seq.mechanical.d[r][c]).abs() <= 1e-9 * scale);
        }
    }
    assert_relative_eq!(par.mechanical.stiffness[0][0], seq.mechanical.stiffness[0][0], max_relative = 1e-10);
    assert_relative_eq!(par.thermal.a, seq.thermal.a, max_relative = 1e-10);
}

#[test]
fn linear_and_quadratic_elements_converge_together() {
    let spec = RveSpec::single_pore(1.0, 0.2);
    let p1 = run_with(&spec, 64, ElementOrder::Linear, MicroMaterial::aluminium(), ExecMode::Parallel, 1.0);
    let p2 = run_with(&spec, 32, ElementOrder::Quadratic, MicroMaterial::aluminium(), ExecMode::Parallel, 1.0);
    assert_relative_eq!(p1.mechanical.stiffness[0][0], p2.mechanical.stiffness[0][0], max_relative = 0.03);
    assert_relative_eq!(p1.conductivity[0][0], p2.conductivity[0][0], max_relative = 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn homogeneous_cell_reproduces_plane_stress(young in 1e3f64..3e5, nu in 0.0f64..0.45, kappa in 1.0f64..400.0) {
        let mat = MicroMaterial::new(&MaterialData {
            young,
            nu,
            kappa: ScalarOrTensor::Scalar(kappa),
            ..MaterialData::default()
        })
        .unwrap();
        let h = run_with(&RveSpec::homogeneous(1.0), 4, ElementOrder::Quadratic, mat, ExecMode::Sequential, 1.0);
        let c = &h.mechanical.stiffness;
        let f = young / (1.0 - nu * nu);
        prop_assert!((c[0][0] - f).abs() <= 1e-9 * f);
        prop_assert!((c[0][1] - nu * f).abs() <= 1e-9 * f);
        prop_assert!((c[2][2] - young / (2.0 * (1.0 + nu))).abs() <= 1e-9 * f);
        prop_assert!((h.conductivity[0][0] - kappa).abs() <= 1e-9 * kappa);
        prop_assert!(max_abs(&h.mechanical.d) <= 1e-8 * f);
    }
}
