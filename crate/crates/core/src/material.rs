//! Microscale constitutive data.
//!
//! Units are mm–MPa–N–K. The specific heat is carried as the raw number
//! `c` (kJ/(kg·K)) and the density in kg/m³, so the thermal scalars keep the
//! numeric convention of the aluminium reference data.

use crate::error::{Error, Result};
use crate::tensor::{mat_scale, Mat2, Tensor4, IDENTITY2};
use serde::{Deserialize, Serialize};

/// Converts a mechanical energy density in MPa into kJ/kg for a density in
/// kg/m³ (1 MPa = 10⁶ J/m³ = 10³ kJ/m³).
pub const MPA_TO_KJ_PER_KG: f64 = 1.0e3;

/// Isotropic scalar or a full 2×2 tensor, as accepted in material input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrTensor {
    Scalar(f64),
    Tensor(Mat2),
}

impl ScalarOrTensor {
    pub fn to_tensor(self) -> Mat2 {
        match self {
            ScalarOrTensor::Scalar(s) => mat_scale(&IDENTITY2, s),
            ScalarOrTensor::Tensor(t) => t,
        }
    }
}

/// Raw material input, keyed the way the run configuration spells it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialData {
    #[serde(rename = "E")]
    pub young: f64,
    pub nu: f64,
    pub rho: f64,
    pub alpha: ScalarOrTensor,
    pub c: f64,
    pub kappa: ScalarOrTensor,
    #[serde(rename = "T_ref")]
    pub t_ref: f64,
    #[serde(rename = "T_eval")]
    pub t_eval: f64,
}

impl Default for MaterialData {
    /// Aluminium: E = 75 GPa, ν = 0.33, ρ = 2700, α = 2.36e-5 1/K,
    /// c = 0.9 kJ/(kg K), κ = 247 W/(m K); T_ref = 300 K, T_eval = 400 K.
    fn default() -> Self {
        MaterialData {
            young: 75_000.0,
            nu: 0.33,
            rho: 2700.0,
            alpha: ScalarOrTensor::Scalar(2.36e-5),
            c: 0.9,
            kappa: ScalarOrTensor::Scalar(247.0),
            t_ref: 300.0,
            t_eval: 400.0,
        }
    }
}

/// A single solid phase with its derived tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroMaterial {
    pub young: f64,
    pub poisson: f64,
    pub density: f64,
    pub expansion: Mat2,
    pub specific_heat: f64,
    pub conductivity: Mat2,
    pub t_ref: f64,
    pub t_eval: f64,
    /// Plane-stress `C^m_ijkl`.
    pub stiffness: Tensor4,
    /// `β^m_ij = C^m_ijkl α^m_kl`.
    pub thermal_stress: Mat2,
    /// `a^m = c^m / T_eval`.
    pub heat_capacity: f64,
}

impl MicroMaterial {
    pub fn new(data: &MaterialData) -> Result<Self> {
        if !(data.rho > 0.0) {
            return Err(Error::Material(format!("density must be positive, got {}", data.rho)));
        }
        if !(data.t_ref > 0.0) {
            return Err(Error::Material(format!("T_ref must be positive, got {}", data.t_ref)));
        }
        let stiffness = plane_stress_stiffness(data.young, data.nu)?;
        let expansion = data.alpha.to_tensor();
        let conductivity = data.kappa.to_tensor();
        if (expansion[0][1] - expansion[1][0]).abs() > 0.0 || (conductivity[0][1] - conductivity[1][0]).abs() > 0.0 {
            return Err(Error::Material("alpha and kappa tensors must be symmetric".into()));
        }
        let det = conductivity[0][0] * conductivity[1][1] - conductivity[0][1] * conductivity[1][0];
        if !(conductivity[0][0] > 0.0 && det > 0.0) {
            return Err(Error::Material("conductivity must be positive definite".into()));
        }
        Ok(MicroMaterial {
            young: data.young,
            poisson: data.nu,
            density: data.rho,
            expansion,
            specific_heat: data.c,
            conductivity,
            t_ref: data.t_ref,
            t_eval: data.t_eval,
            thermal_stress: thermal_stress(&stiffness, &expansion),
            heat_capacity: heat_capacity_parameter(data.c, data.t_eval)?,
            stiffness,
        })
    }

    pub fn aluminium() -> Self {
        Self::new(&MaterialData::default()).expect("reference data is valid")
    }
}

/// Per-region materials; element region tags index into `regions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialMap {
    pub regions: Vec<MicroMaterial>,
}

impl MaterialMap {
    pub fn uniform(material: MicroMaterial) -> Self {
        MaterialMap { regions: vec![material] }
    }

    pub fn new(regions: Vec<MicroMaterial>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Material("at least one region material is required".into()));
        }
        Ok(MaterialMap { regions })
    }

    #[inline]
    pub fn get(&self, region: u32) -> &MicroMaterial {
        &self.regions[region as usize]
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Plane-stress stiffness of an isotropic solid.
pub fn plane_stress_stiffness(young: f64, nu: f64) -> Result<Tensor4> {
    if !(young > 0.0) {
        return Err(Error::Material(format!("Young's modulus must be positive, got {young}")));
    }
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::Material(format!("Poisson's ratio {nu} outside (-1, 0.5)")));
    }
    let lambda = young * nu / (1.0 - nu * nu);
    let mu = young / (2.0 * (1.0 + nu));
    Ok(Tensor4::isotropic(lambda, mu))
}

pub fn thermal_stress(stiffness: &Tensor4, expansion: &Mat2) -> Mat2 {
    stiffness.contract(expansion)
}

pub fn heat_capacity_parameter(specific_heat: f64, t_eval: f64) -> Result<f64> {
    if !(t_eval > 0.0) {
        return Err(Error::Material(format!("evaluation temperature must be positive, got {t_eval}")));
    }
    Ok(specific_heat / t_eval)
}

/// Temperature range in which the two-term logarithm expansion is usable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorValidity {
    pub t_ref: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub tolerance: f64,
}

/// `ln ξ − [(ξ−1)/ξ + (ξ−1)²/(2ξ²)]`; monotonically increasing in ξ and zero at ξ = 1.
pub fn log_expansion_residual(xi: f64) -> f64 {
    xi.ln() - ((xi - 1.0) / xi + (xi - 1.0).powi(2) / (2.0 * xi * xi))
}

/// Absolute expansion error at temperature `t`.
pub fn log_expansion_error(t: f64, t_ref: f64) -> f64 {
    log_expansion_residual(t / t_ref).abs()
}

/// The expansion is only admissible for ξ = T/T_ref ≥ 1/2.
pub const MIN_TEMPERATURE_RATIO: f64 = 0.5;

pub fn taylor_log_validity(t_ref: f64, tol: f64) -> Result<TaylorValidity> {
    if !(t_ref > 0.0) || !(tol > 0.0) {
        return Err(Error::Material(format!("need T_ref > 0 and tol > 0, got {t_ref}, {tol}")));
    }
    // The residual is monotone, so each endpoint is a bracketed root.
    let root = |target: f64, mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if log_expansion_residual(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let xi_low = if log_expansion_residual(MIN_TEMPERATURE_RATIO) >= -tol {
        MIN_TEMPERATURE_RATIO
    } else {
        root(-tol, MIN_TEMPERATURE_RATIO, 1.0)
    };
    let mut upper = 2.0;
    while log_expansion_residual(upper) < tol {
        upper *= 2.0;
    }
    let xi_high = root(tol, 1.0, upper);
    Ok(TaylorValidity {
        t_ref,
        t_low: xi_low * t_ref,
        t_high: xi_high * t_ref,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn aluminium_plane_stress_values() {
        let c = plane_stress_stiffness(75_000.0, 0.33).unwrap();
        assert_relative_eq!(c.get(0, 0, 0, 0), 84165.6, max_relative = 1e-6);
        assert_relative_eq!(c.get(1, 1, 1, 1), 84165.6, max_relative = 1e-6);
        assert_relative_eq!(c.get(0, 0, 1, 1), 27774.7, max_relative = 2e-6);
        assert_relative_eq!(c.get(0, 1, 0, 1), 28195.5, max_relative = 1e-6);
        assert_eq!(c.get(0, 0, 0, 1), 0.0);
    }

    #[test]
    fn zero_poisson_is_diagonal() {
        let c = plane_stress_stiffness(10.0, 0.0).unwrap();
        assert_eq!(c.get(0, 0, 0, 0), 10.0);
        assert_eq!(c.get(1, 1, 1, 1), 10.0);
        assert_eq!(c.get(0, 0, 1, 1), 0.0);
        assert_eq!(c.get(0, 1, 0, 1), 5.0);
    }

    #[test]
    fn unit_modulus_quarter_poisson() {
        let c = plane_stress_stiffness(1.0, 0.25).unwrap();
        assert_relative_eq!(c.get(0, 0, 0, 0), 16.0 / 15.0, max_relative = 1e-15);
    }

    #[test]
    fn poisson_out_of_range() {
        assert!(plane_stress_stiffness(1.0, 0.5).is_err());
        assert!(plane_stress_stiffness(1.0, -1.0).is_err());
        assert!(plane_stress_stiffness(-1.0, 0.2).is_err());
    }

    #[test]
    fn aluminium_thermal_stress() {
        let m = MicroMaterial::aluminium();
        let c = &m.stiffness;
        let expected = (c.get(0, 0, 0, 0) + c.get(0, 0, 1, 1)) * 2.36e-5;
        assert_relative_eq!(m.thermal_stress[0][0], expected, max_relative = 1e-14);
        assert_relative_eq!(m.thermal_stress[0][0], 2.6418, max_relative = 1e-4);
        assert_relative_eq!(m.thermal_stress[1][1], 2.6418, max_relative = 1e-4);
        assert_eq!(m.thermal_stress[0][1], 0.0);
    }

    #[test]
    fn zero_expansion_gives_zero_thermal_stress() {
        let c = plane_stress_stiffness(1.0, 0.3).unwrap();
        assert_eq!(thermal_stress(&c, &[[0.0; 2]; 2]), [[0.0; 2]; 2]);
    }

    #[test]
    fn heat_capacity_values() {
        assert_relative_eq!(heat_capacity_parameter(0.9, 400.0).unwrap(), 0.00225, max_relative = 1e-14);
        assert_relative_eq!(heat_capacity_parameter(0.72, 400.0).unwrap(), 0.0018, max_relative = 1e-14);
        assert_eq!(heat_capacity_parameter(3.5, 3.5).unwrap(), 1.0);
        assert!(heat_capacity_parameter(1.0, 0.0).is_err());
        assert!(heat_capacity_parameter(1.0, -5.0).is_err());
    }

    #[test]
    fn expansion_is_exact_at_reference() {
        assert_eq!(log_expansion_error(300.0, 300.0), 0.0);
    }

    #[test]
    fn validity_interval_lower_end_reproduces_calibration() {
        let tol = log_expansion_error(180.0, 300.0);
        let v = taylor_log_validity(300.0, tol).unwrap();
        assert_relative_eq!(v.t_low, 180.0, max_relative = 1e-9);
        assert!(v.t_high > 300.0);
        let v2 = taylor_log_validity(600.0, tol).unwrap();
        assert_relative_eq!(v2.t_low, 360.0, max_relative = 1e-9);
        assert_relative_eq!(v2.t_high / 600.0, v.t_high / 300.0, max_relative = 1e-9);
    }

    #[test]
    fn large_tolerance_hits_the_half_ratio_cap() {
        let v = taylor_log_validity(300.0, 10.0).unwrap();
        assert_eq!(v.t_low, 150.0);
    }

    proptest! {
        #[test]
        fn stiffness_voigt_is_spd(e in 1.0e-3f64..1.0e6, nu in -0.99f64..0.49) {
            let c = plane_stress_stiffness(e, nu).unwrap();
            let m = [
                [c.get(0,0,0,0), c.get(0,0,1,1), c.get(0,0,0,1)],
                [c.get(1,1,0,0), c.get(1,1,1,1), c.get(1,1,0,1)],
                [c.get(0,1,0,0), c.get(0,1,1,1), c.get(0,1,0,1)],
            ];
            prop_assert_eq!(c.symmetry_defect(), 0.0);
            let d1 = m[0][0];
            let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let d3 = d2 * m[2][2];
            prop_assert!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0);
        }

        #[test]
        fn thermal_stress_is_linear_in_stiffness(e in 1.0f64..1.0e5, nu in 0.0f64..0.45,
                                                 alpha in 1.0e-7f64..1.0e-3, s in 0.1f64..10.0) {
            let c = plane_stress_stiffness(e, nu).unwrap();
            let a = [[alpha, 0.0], [0.0, alpha]];
            let b1 = thermal_stress(&(c * s), &a);
            let b0 = thermal_stress(&c, &a);
            for i in 0..2 { for j in 0..2 {
                prop_assert!((b1[i][j] - s * b0[i][j]).abs() <= 1e-12 * b1[i][j].abs().max(1e-300));
            }}
        }

        #[test]
        fn validity_scales_with_reference(t_ref in 1.0f64..2000.0, tol in 1.0e-4f64..0.2) {
            let v = taylor_log_validity(t_ref, tol).unwrap();
            let unit = taylor_log_validity(1.0, tol).unwrap();
            prop_assert!((v.t_low / t_ref - unit.t_low).abs() < 1e-9);
            prop_assert!((v.t_high / t_ref - unit.t_high).abs() < 1e-9);
        }
    }
}
