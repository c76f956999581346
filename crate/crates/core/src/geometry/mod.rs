//! Unit-cell description, periodic meshing and mesh exchange.

mod generate;
mod mesh;
mod msh;
mod periodic;

pub use generate::generate_mesh;
pub use mesh::{BoundaryEdge, BoundaryTags, CellBox, ElementOrder, Mesh};
pub use msh::{export_msh, import_mesh, MeshFormat};
pub use periodic::{periodic_pairs, PeriodicMap, DEFAULT_PAIRING_TOLERANCE};

use crate::error::{Error, Result};
use crate::tensor::Vec2;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A circular void.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pore {
    pub center: Vec2,
    pub radius: f64,
}

impl Pore {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Pore { center, radius }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    #[inline]
    pub fn distance_from_center(&self, p: Vec2) -> f64 {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1])
    }

    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        self.distance_from_center(p) < self.radius
    }
}

/// Square periodic cell with circular voids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RveSpec {
    /// Edge length `L` in mm.
    pub edge_length: f64,
    /// Geometric center `X_c` of the square.
    pub center: Vec2,
    pub pores: Vec<Pore>,
    /// Homothetic ratio ε between micro- and macroscale lengths.
    pub homothetic_ratio: f64,
}

impl RveSpec {
    pub fn homogeneous(edge_length: f64) -> Self {
        RveSpec {
            edge_length,
            center: [0.5 * edge_length, 0.5 * edge_length],
            pores: Vec::new(),
            homothetic_ratio: 1.0,
        }
    }

    /// One centered pore occupying `porosity` of the cell.
    pub fn single_pore(edge_length: f64, porosity: f64) -> Self {
        let mut spec = Self::homogeneous(edge_length);
        let radius = edge_length * (porosity / PI).sqrt();
        spec.pores.push(Pore::new(spec.center, radius));
        spec
    }

    /// Four equal pores on a 2×2 lattice; the cell is a 2×2 tiling of the
    /// single-pore cell scaled by ½.
    pub fn uniform_four(edge_length: f64, porosity: f64) -> Self {
        let mut spec = Self::homogeneous(edge_length);
        let radius = edge_length * (porosity / (4.0 * PI)).sqrt();
        let q = 0.25 * edge_length;
        for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
            spec.pores.push(Pore::new([spec.center[0] + dx, spec.center[1] + dy], radius));
        }
        spec
    }

    /// Equal pores at explicit centers, sized so that together they occupy `porosity`.
    pub fn equal_pores_at(edge_length: f64, porosity: f64, centers: &[Vec2]) -> Self {
        let mut spec = Self::homogeneous(edge_length);
        let radius = edge_length * (porosity / (centers.len() as f64 * PI)).sqrt();
        spec.pores = centers.iter().map(|&c| Pore::new(c, radius)).collect();
        spec
    }

    /// Four equal pores placed by a seeded generator. Each pore keeps at
    /// least `gap` from the cell faces and from the other pores.
    pub fn random_four(edge_length: f64, porosity: f64, seed: u64, gap: f64) -> Result<Self> {
        let radius = edge_length * (porosity / (4.0 * PI)).sqrt();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let lo = radius + gap;
        let hi = edge_length - radius - gap;
        if hi <= lo {
            return Err(Error::Geometry(format!("gap {gap} leaves no room for pores of radius {radius}")));
        }
        let mut centers: Vec<Vec2> = Vec::with_capacity(4);
        let mut attempts = 0usize;
        while centers.len() < 4 {
            attempts += 1;
            if attempts > 100_000 {
                return Err(Error::Geometry(format!("could not place four pores with gap {gap}")));
            }
            let c = [rng.random_range(lo..hi), rng.random_range(lo..hi)];
            if centers
                .iter()
                .all(|o| (c[0] - o[0]).hypot(c[1] - o[1]) > 2.0 * radius + gap)
            {
                centers.push(c);
            }
        }
        Ok(Self::equal_pores_at(edge_length, porosity, &centers))
    }

    pub fn with_homothetic_ratio(mut self, epsilon: f64) -> Self {
        self.homothetic_ratio = epsilon;
        self
    }

    pub fn origin(&self) -> Vec2 {
        [self.center[0] - 0.5 * self.edge_length, self.center[1] - 0.5 * self.edge_length]
    }

    pub fn cell(&self) -> CellBox {
        CellBox {
            origin: self.origin(),
            edge: self.edge_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.edge_length > 0.0) {
            return Err(Error::Geometry(format!("edge length must be positive, got {}", self.edge_length)));
        }
        if !(self.homothetic_ratio > 0.0) {
            return Err(Error::Geometry(format!(
                "homothetic ratio must be positive, got {}",
                self.homothetic_ratio
            )));
        }
        let [x0, y0] = self.origin();
        let (x1, y1) = (x0 + self.edge_length, y0 + self.edge_length);
        for (k, p) in self.pores.iter().enumerate() {
            if !(p.radius > 0.0) {
                return Err(Error::Geometry(format!("pore {k} has non-positive radius {}", p.radius)));
            }
            let [cx, cy] = p.center;
            if cx - p.radius <= x0 || cx + p.radius >= x1 || cy - p.radius <= y0 || cy + p.radius >= y1 {
                return Err(Error::Geometry(format!(
                    "pore {k} (center {:?}, radius {}) touches or crosses the cell boundary",
                    p.center, p.radius
                )));
            }
        }
        for (a, pa) in self.pores.iter().enumerate() {
            for (b, pb) in self.pores.iter().enumerate().skip(a + 1) {
                let d = (pa.center[0] - pb.center[0]).hypot(pa.center[1] - pb.center[1]);
                if d <= pa.radius + pb.radius {
                    return Err(Error::Geometry(format!("pores {a} and {b} overlap")));
                }
            }
        }
        Ok(())
    }

    /// `true` if point reflection about the center maps the pore set onto itself.
    pub fn is_centro_symmetric(&self, tol: f64) -> bool {
        self.pores.iter().all(|p| {
            let r = [2.0 * self.center[0] - p.center[0], 2.0 * self.center[1] - p.center[1]];
            self.pores.iter().any(|q| {
                (q.center[0] - r[0]).abs() <= tol && (q.center[1] - r[1]).abs() <= tol && (q.radius - p.radius).abs() <= tol
            })
        })
    }
}

/// Void area fraction `Σ π r² / L²`.
pub fn porosity(spec: &RveSpec) -> Result<f64> {
    spec.validate()?;
    let voids: f64 = spec.pores.iter().map(Pore::area).sum();
    Ok(voids / (spec.edge_length * spec.edge_length))
}
