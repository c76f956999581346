//! Versioned JSON report.

use std::path::Path;

use cellhom::cell::CaseDiagnostics;
use cellhom::geometry::{Mesh, Pore};
use cellhom::homogenize::{AveragingChecks, HomogenizedParameters, KappaNormalization};
use cellhom::tensor::Mat2;
use cellhom::{Error, ErrorKind, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "cellhom-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub order: u8,
    /// Grid resolution for generated meshes.
    pub resolution: Option<usize>,
    pub nodes: usize,
    pub elements: usize,
    pub edge_length: f64,
    pub pores: Vec<Pore>,
    pub porosity_target: f64,
    pub porosity_measured: f64,
    pub min_quality: f64,
}

impl MeshInfo {
    pub fn new(mesh: &Mesh, resolution: Option<usize>, pores: &[Pore]) -> Self {
        let target = pores.iter().fold(0.0, |s, p| s + p.area()) / mesh.cell.area();
        MeshInfo {
            order: mesh.order.degree(),
            resolution,
            nodes: mesh.num_nodes(),
            elements: mesh.num_elements(),
            edge_length: mesh.cell.edge,
            pores: pores.to_vec(),
            porosity_target: target,
            porosity_measured: mesh.measured_porosity(),
            min_quality: mesh.min_quality(),
        }
    }
}

/// Packed macroscale parameters under the names used by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "C")]
    pub c_voigt: [[f64; 3]; 3],
    #[serde(rename = "G")]
    pub g: [[f64; 6]; 3],
    #[serde(rename = "D")]
    pub d: [[f64; 6]; 6],
    #[serde(rename = "D_bar")]
    pub d_bar: [[f64; 6]; 6],
    pub beta: Mat2,
    pub gamma: [[f64; 2]; 3],
    pub a: f64,
    pub a_unconverted: f64,
    pub c: f64,
    pub kappa: Mat2,
    pub kappa_normalization: KappaNormalization,
    pub kappa_cell_average: Mat2,
    pub kappa_solid_average: Mat2,
    pub rho: f64,
    #[serde(rename = "I")]
    pub moment: Mat2,
    pub epsilon: f64,
}

impl From<&HomogenizedParameters> for Parameters {
    fn from(h: &HomogenizedParameters) -> Self {
        Parameters {
            c_voigt: h.mechanical.stiffness,
            g: h.mechanical.g,
            d: h.mechanical.d,
            d_bar: h.mechanical.d_bar,
            beta: h.thermal.beta,
            gamma: h.thermal.gamma,
            a: h.thermal.a,
            a_unconverted: h.thermal.a_unconverted,
            c: h.thermal.c,
            kappa: h.conductivity,
            kappa_normalization: h.conductivity_normalization,
            kappa_cell_average: h.conductivity_cell_average,
            kappa_solid_average: h.conductivity_solid_average,
            rho: h.thermal.density,
            moment: h.mechanical.moment,
            epsilon: h.epsilon,
        }
    }
}

impl Parameters {
    /// Every comparable tensor as `(name, rows, cols, row-major values)`.
    pub fn tensors(&self) -> Vec<(&'static str, usize, usize, Vec<f64>)> {
        fn flat<const R: usize, const C: usize>(m: &[[f64; C]; R]) -> (usize, usize, Vec<f64>) {
            (R, C, m.iter().flatten().copied().collect())
        }
        let mut out = Vec::new();
        let mut push = |name, (r, c, v): (usize, usize, Vec<f64>)| out.push((name, r, c, v));
        push("C", flat(&self.c_voigt));
        push("G", flat(&self.g));
        push("D", flat(&self.d));
        push("beta", flat(&self.beta));
        push("gamma", flat(&self.gamma));
        push("a", (1, 1, vec![self.a]));
        push("c", (1, 1, vec![self.c]));
        push("kappa", flat(&self.kappa));
        push("kappa_cell_average", flat(&self.kappa_cell_average));
        push("kappa_solid_average", flat(&self.kappa_solid_average));
        push("rho", (1, 1, vec![self.rho]));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub cases: Vec<CaseDiagnostics>,
    pub averaging: AveragingChecks,
    pub stiffness_asymmetry: f64,
    pub d_asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mesh: Option<MeshInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parameters: Option<Parameters>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<Diagnostics>,
}

pub fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Config => "config",
        ErrorKind::Geometry => "geometry",
        ErrorKind::Solver => "solver",
        ErrorKind::Verify => "verify",
    }
}

impl Report {
    pub fn success(mesh: MeshInfo, h: &HomogenizedParameters, cases: Vec<CaseDiagnostics>) -> Self {
        Report {
            schema: SCHEMA.into(),
            status: Status::Ok,
            error: None,
            mesh: Some(mesh),
            parameters: Some(Parameters::from(h)),
            diagnostics: Some(Diagnostics {
                cases,
                averaging: h.checks.clone(),
                stiffness_asymmetry: h.mechanical.stiffness_asymmetry,
                d_asymmetry: h.mechanical.d_asymmetry,
            }),
        }
    }

    pub fn failure(err: &Error) -> Self {
        Report {
            schema: SCHEMA.into(),
            status: Status::Error,
            error: Some(ErrorInfo {
                kind: kind_name(err.kind()).into(),
                message: err.to_string(),
            }),
            mesh: None,
            parameters: None,
            diagnostics: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema != SCHEMA {
            return Err(Error::Verify(format!("unsupported report schema `{}`, expected `{SCHEMA}`", r.schema)));
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One `<name>.csv` per tensor.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        let Some(p) = &self.parameters else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)?;
        for (name, rows, cols, values) in p.tensors() {
            let mut text = String::new();
            for r in 0..rows {
                let line: Vec<String> = values[r * cols..(r + 1) * cols].iter().map(|v| format!("{v:e}")).collect();
                text.push_str(&line.join(","));
                text.push('\n');
            }
            std::fs::write(dir.join(format!("{name}.csv")), text)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_stub_round_trips() {
        let r = Report::failure(&Error::Geometry("pore 0 touches the boundary".into()));
        let text = r.to_json().unwrap();
        assert!(!text.contains("parameters"));
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.error.unwrap().kind, "geometry");
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let text = r#"{"schema": "other/9", "status": "ok"}"#;
        assert!(matches!(Report::from_json(text), Err(Error::Verify(_))));
    }
}
