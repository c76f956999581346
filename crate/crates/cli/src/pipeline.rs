//! Config-driven stages: mesh, solve, homogenize, report.

use std::path::{Path, PathBuf};

use cellhom::cell::CellProblem;
use cellhom::geometry::{export_msh, generate_mesh, import_mesh, Mesh, MeshFormat};
use cellhom::homogenize::homogenize;
use cellhom::material::MaterialMap;
use cellhom::parallel::ExecMode;
use cellhom::{Error, Result};
use serde::Serialize;

use crate::config::{RunConfig, VerifyConfig};
use crate::report::{MeshInfo, Report};
use crate::verify::{compare, Verification};

/// The mesh described by the config, generated or imported.
pub fn build_mesh(cfg: &RunConfig) -> Result<(Mesh, MeshInfo)> {
    let spec = cfg.rve_spec()?;
    match &cfg.geometry.mesh_file {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| Error::Config(format!("cannot read mesh {}: {e}", path.display())))?;
            let mesh = import_mesh(&bytes, MeshFormat::Msh41)?;
            let info = MeshInfo::new(&mesh, None, &spec.pores);
            Ok((mesh, info))
        }
        None => {
            let mesh = generate_mesh(&spec, cfg.geometry.resolution, cfg.geometry.order)?;
            let info = MeshInfo::new(&mesh, Some(cfg.geometry.resolution), &spec.pores);
            Ok((mesh, info))
        }
    }
}

#[derive(Serialize)]
struct FieldDump<'a> {
    nodes: &'a [[f64; 2]],
    connectivity: &'a [usize],
    nodes_per_element: usize,
    phi: &'a [Vec<f64>],
    p: &'a [f64],
    psi: &'a [Vec<f64>],
    r: &'a [Vec<f64>],
}

pub fn fields_path(report: &Path) -> PathBuf {
    report.with_extension("fields.json")
}

/// Runs every stage and writes the configured outputs. Without a report
/// path the report is only returned.
pub fn run_homogenize(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.output.dump_fields && cfg.output.report.is_none() {
        return Err(Error::Config("dump_fields needs output.report to place the field file".into()));
    }
    let material = cfg.material()?;
    let (mesh, info) = build_mesh(cfg)?;
    let materials = MaterialMap::new(vec![material; mesh.num_regions().max(1)])?;
    let mode = ExecMode::deterministic(cfg.physics.deterministic);
    let problem = CellProblem::new(&mesh, &materials, mode)?;
    let sol = problem.solve_all()?;
    let params = homogenize(&problem, &sol, cfg.physics.epsilon, cfg.physics.kappa_normalization)?;
    let report = Report::success(info, &params, sol.diagnostics.clone());
    if let Some(path) = &cfg.output.report {
        report.write(path)?;
        if cfg.output.dump_fields {
            let dump = FieldDump {
                nodes: &mesh.nodes,
                connectivity: &mesh.connectivity,
                nodes_per_element: mesh.nodes_per_element(),
                phi: &sol.phi,
                p: &sol.p,
                psi: &sol.psi,
                r: &sol.r,
            };
            std::fs::write(fields_path(path), serde_json::to_string(&dump)?)?;
        }
    }
    if let Some(dir) = &cfg.output.csv_dir {
        report.write_csv(dir)?;
    }
    Ok(report)
}

/// Writes `<base>.msh` and `<base>.json`, returning both paths.
pub fn run_generate_mesh(cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    cfg.validate()?;
    let (mesh, _) = build_mesh(cfg)?;
    let base = cfg.output.mesh.clone().unwrap_or_else(|| PathBuf::from("mesh"));
    if let Some(dir) = base.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let msh = base.with_extension("msh");
    let json = base.with_extension("json");
    std::fs::write(&msh, export_msh(&mesh))?;
    std::fs::write(&json, mesh.to_json()?)?;
    Ok((msh, json))
}

pub fn run_verify(report: &Path, reference: &Path, tolerances: &VerifyConfig) -> Result<Verification> {
    let ours = Report::read(report)?;
    let theirs = Report::read(reference)?;
    compare(&ours, &theirs, tolerances)
}
