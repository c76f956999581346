//! Small fixed-size tensors in two dimensions.
//!
//! Everything here is indexed from zero, so the component written `C_1122`
//! in the usual engineering notation lives at `c[0][0][1][1]`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
pub const ZERO2: Mat2 = [[0.0; 2]; 2];

#[inline]
pub fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `e_a ⊗ e_b`
#[inline]
pub fn unit_dyad(a: usize, b: usize) -> Mat2 {
    let mut m = ZERO2;
    m[a][b] = 1.0;
    m
}

#[inline]
pub fn double_dot(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[inline]
pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

#[inline]
pub fn mat_scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn mat_max_abs(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Fourth-order tensor `C_ijkl` on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor4(pub [[[[f64; 2]; 2]; 2]; 2]);

impl Default for Tensor4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Tensor4 {
    pub fn zero() -> Self {
        Tensor4([[[[0.0; 2]; 2]; 2]; 2])
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        t.0[i][j][k][l] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Isotropic tensor `λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        Self::from_fn(|i, j, k, l| {
            lambda * delta(i, j) * delta(k, l) + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[i][j][k][l]
    }

    /// `(C : E)_ij = C_ijkl E_kl`
    #[inline]
    pub fn contract(&self, e: &Mat2) -> Mat2 {
        let mut s = ZERO2;
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let c = &self.0[i][j];
                *v = c[0][0] * e[0][0] + c[0][1] * e[0][1] + c[1][0] * e[1][0] + c[1][1] * e[1][1];
            }
        }
        s
    }

    /// `A_ij C_ijkl B_kl`
    #[inline]
    pub fn energy(&self, a: &Mat2, b: &Mat2) -> f64 {
        double_dot(a, &self.contract(b))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest violation of `C_ijkl = C_jikl = C_ijlk = C_klij`, relative to `max |C|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let c = self.get(i, j, k, l);
                        worst = worst
                            .max((c - self.get(j, i, k, l)).abs())
                            .max((c - self.get(i, j, l, k)).abs())
                            .max((c - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst / scale
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: Tensor4) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| self.get(i, j, k, l) + rhs.get(i, j, k, l))
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: Tensor4) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| self.get(i, j, k, l) - rhs.get(i, j, k, l))
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(self, s: f64) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| self.get(i, j, k, l) * s)
    }
}
