//! TOML run configuration.
//!
//! ```toml
//! [geometry]
//! preset = "single"        # homogeneous | single | uniform4 | random4 | custom
//! edge_length = 1.0        # mm
//! porosity = 0.2
//! resolution = 128
//! order = 2
//!
//! [material]               # any subset; the rest defaults to aluminium
//! E = 75000.0
//!
//! [physics]
//! epsilon = 1.0
//! T_ref = 300.0
//! T_eval = 400.0
//! kappa_normalization = "solid_average"
//!
//! [output]
//! report = "report.json"
//!
//! [verify.tolerances]
//! C = 0.005
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cellhom::geometry::{ElementOrder, Pore, RveSpec};
use cellhom::homogenize::KappaNormalization;
use cellhom::material::{MaterialData, MicroMaterial, ScalarOrTensor};
use cellhom::tensor::Vec2;
use cellhom::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOLERANCE: f64 = 0.005;
/// Gap kept by the seeded four-pore generator, as a fraction of the edge.
pub const RANDOM_GAP_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Homogeneous,
    #[default]
    Single,
    Uniform4,
    Random4,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub preset: Preset,
    pub edge_length: f64,
    pub porosity: f64,
    /// Pore centers for `random4`.
    pub centers: Option<Vec<Vec2>>,
    /// Lets `random4` place its pores with a seeded generator.
    pub random_seed: Option<u64>,
    /// Explicit pores for `custom`.
    pub pores: Vec<Pore>,
    pub resolution: usize,
    pub order: ElementOrder,
    /// Read the mesh from an MSH 4.1 file instead of generating it.
    pub mesh_file: Option<PathBuf>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            preset: Preset::Single,
            edge_length: 1.0,
            porosity: 0.2,
            centers: None,
            random_seed: None,
            pores: Vec::new(),
            resolution: 64,
            order: ElementOrder::Quadratic,
            mesh_file: None,
        }
    }
}

/// Material keys without the temperatures, which live in `[physics]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(rename = "E")]
    pub young: Option<f64>,
    pub nu: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<ScalarOrTensor>,
    pub c: Option<f64>,
    pub kappa: Option<ScalarOrTensor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub epsilon: f64,
    #[serde(rename = "T_ref")]
    pub t_ref: f64,
    #[serde(rename = "T_eval")]
    pub t_eval: f64,
    pub kappa_normalization: KappaNormalization,
    /// Sequential execution with run-to-run identical output.
    pub deterministic: bool,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            epsilon: 1.0,
            t_ref: 300.0,
            t_eval: 400.0,
            kappa_normalization: KappaNormalization::SolidAverage,
            deterministic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub dump_fields: bool,
    /// Directory for one CSV file per packed matrix.
    pub csv_dir: Option<PathBuf>,
    /// Base path for `mesh` output; `.msh` and `.json` are appended.
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub reference: Option<PathBuf>,
    /// Relative tolerance per tensor name; missing names use the default.
    pub tolerances: BTreeMap<String, f64>,
    pub default_tolerance: Option<f64>,
}

impl VerifyConfig {
    pub fn tolerance(&self, tensor: &str) -> f64 {
        self.tolerances
            .get(tensor)
            .copied()
            .unwrap_or(self.default_tolerance.unwrap_or(DEFAULT_TOLERANCE))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    pub physics: PhysicsConfig,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = dir.join(&*q);
                }
            }
        };
        fix(&mut self.geometry.mesh_file);
        fix(&mut self.output.report);
        fix(&mut self.output.csv_dir);
        fix(&mut self.output.mesh);
        fix(&mut self.verify.reference);
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if !(g.edge_length > 0.0) {
            return Err(Error::Config(format!("edge_length must be positive, got {}", g.edge_length)));
        }
        if matches!(g.preset, Preset::Single | Preset::Uniform4 | Preset::Random4) && !(g.porosity > 0.0 && g.porosity < 1.0) {
            return Err(Error::Config(format!("porosity must lie in (0, 1), got {}", g.porosity)));
        }
        if g.resolution == 0 {
            return Err(Error::Config("resolution must be at least 1".into()));
        }
        if g.preset != Preset::Custom && !g.pores.is_empty() {
            return Err(Error::Config("`pores` is only read by the custom preset".into()));
        }
        if g.preset == Preset::Random4 {
            match (&g.centers, g.random_seed) {
                (Some(c), _) if c.len() != 4 => {
                    return Err(Error::Config(format!("random4 needs exactly 4 centers, got {}", c.len())));
                }
                (None, None) => {
                    return Err(Error::Config(
                        "random4 needs explicit `centers`, or `random_seed` to place pores with a seeded generator".into(),
                    ));
                }
                _ => {}
            }
        }
        let p = &self.physics;
        if !(p.epsilon > 0.0 && p.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", p.epsilon)));
        }
        if !(p.t_eval > 0.0 && p.t_ref > 0.0) {
            return Err(Error::Config("temperatures must be positive".into()));
        }
        let v = &self.verify;
        for (name, &t) in &v.tolerances {
            if !(t > 0.0) {
                return Err(Error::Config(format!("tolerance for {name} must be positive, got {t}")));
            }
        }
        if let Some(t) = v.default_tolerance {
            if !(t > 0.0) {
                return Err(Error::Config(format!("default tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Expands the preset into an explicit pore list.
    pub fn rve_spec(&self) -> Result<RveSpec> {
        let g = &self.geometry;
        let l = g.edge_length;
        let spec = match g.preset {
            Preset::Homogeneous => RveSpec::homogeneous(l),
            Preset::Single => RveSpec::single_pore(l, g.porosity),
            Preset::Uniform4 => RveSpec::uniform_four(l, g.porosity),
            Preset::Random4 => match (&g.centers, g.random_seed) {
                (Some(c), _) => RveSpec::equal_pores_at(l, g.porosity, c),
                (None, Some(seed)) => RveSpec::random_four(l, g.porosity, seed, RANDOM_GAP_FRACTION * l)?,
                (None, None) => unreachable!("rejected by validate"),
            },
            Preset::Custom => {
                let mut s = RveSpec::homogeneous(l);
                s.pores = g.pores.clone();
                s
            }
        };
        let spec = spec.with_homothetic_ratio(self.physics.epsilon);
        spec.validate()?;
        Ok(spec)
    }

    pub fn material_data(&self) -> MaterialData {
        let d = MaterialData::default();
        let m = &self.material;
        MaterialData {
            young: m.young.unwrap_or(d.young),
            nu: m.nu.unwrap_or(d.nu),
            rho: m.rho.unwrap_or(d.rho),
            alpha: m.alpha.unwrap_or(d.alpha),
            c: m.c.unwrap_or(d.c),
            kappa: m.kappa.unwrap_or(d.kappa),
            t_ref: self.physics.t_ref,
            t_eval: self.physics.t_eval,
        }
    }

    pub fn material(&self) -> Result<MicroMaterial> {
        MicroMaterial::new(&self.material_data())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.geometry.preset, Preset::Single);
        assert_eq!(cfg.physics.t_eval, 400.0);
        assert_eq!(cfg.material_data(), MaterialData::default());
        assert_eq!(cfg.verify.tolerance("C"), DEFAULT_TOLERANCE);
    }

    #[test]
    fn presets_expand_to_pores() {
        let mut cfg = RunConfig::default();
        cfg.geometry.preset = Preset::Uniform4;
        let spec = cfg.rve_spec().unwrap();
        assert_eq!(spec.pores.len(), 4);
        assert!((cellhom::geometry::porosity(&spec).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn random4_refuses_to_guess() {
        let err = RunConfig::from_toml("[geometry]\npreset = \"random4\"\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let cfg = RunConfig::from_toml("[geometry]\npreset = \"random4\"\nrandom_seed = 3\n").unwrap();
        let a = cfg.rve_spec().unwrap();
        assert_eq!(a, cfg.rve_spec().unwrap());
        assert!(!a.is_centro_symmetric(1e-9));
    }

    #[test]
    fn temperatures_belong_to_physics() {
        assert!(RunConfig::from_toml("[material]\nT_ref = 290.0\n").is_err());
        let cfg = RunConfig::from_toml("[physics]\nT_ref = 290.0\n[material]\nkappa = [[200.0, 0.0], [0.0, 100.0]]\n").unwrap();
        let m = cfg.material_data();
        assert_eq!(m.t_ref, 290.0);
        assert_eq!(m.kappa.to_tensor()[1][1], 100.0);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            "[physics]\nepsilon = 0.0\n",
            "[geometry]\nresolution = 0\n",
            "[verify.tolerances]\nC = -1.0\n",
            "[geometry]\npreset = \"hexagonal\"\n",
            "[physics]\nkappa_normalization = \"volume\"\n",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn touching_pore_is_a_geometry_error() {
        let cfg = RunConfig::from_toml(
            "[geometry]\npreset = \"custom\"\npores = [{ center = [0.5, 0.5], radius = 0.5 }]\n",
        )
        .unwrap();
        assert!(matches!(cfg.rve_spec(), Err(Error::Geometry(_))));
    }
}
