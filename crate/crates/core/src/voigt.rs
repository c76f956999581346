//! Voigt layouts for the macroscale tensors.
//!
//! Strain pairs use `A = {11, 22, 12}`, strain-gradient triples use
//! `θ = {111, 112, 221, 222, 121, 122}` where the first two indices form a
//! symmetric pair. Shear entries are stored unscaled.

use crate::cell::{gradient_index, strain_index, GRADIENT_CASES, STRAIN_CASES};
use crate::error::{Error, Result};

/// Tolerance for symmetry violations while packing, relative to the largest entry.
pub const PACK_TOLERANCE: f64 = 1e-8;

/// Dense 2D tensor of arbitrary rank, last index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTensor {
    rank: usize,
    data: Vec<f64>,
}

impl FullTensor {
    pub fn zeros(rank: usize) -> Self {
        FullTensor {
            rank,
            data: vec![0.0; 1 << rank],
        }
    }

    pub fn from_fn(rank: usize, f: impl Fn(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(rank);
        let mut idx = vec![0; rank];
        for flat in 0..t.data.len() {
            decode(flat, &mut idx);
            t.data[flat] = f(&idx);
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank, "index rank mismatch");
        idx.iter().fold(0, |o, &i| {
            debug_assert!(i < 2);
            (o << 1) | i
        })
    }

    /// Largest deviation from the values implied by `canonical`, relative to
    /// the largest entry.
    fn defect(&self, canonical: impl Fn(&[usize]) -> f64) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut idx = vec![0; self.rank];
        let mut worst = 0.0_f64;
        for (flat, v) in self.data.iter().enumerate() {
            decode(flat, &mut idx);
            worst = worst.max((v - canonical(&idx)).abs());
        }
        worst / scale
    }
}

fn decode(flat: usize, idx: &mut [usize]) {
    let r = idx.len();
    for (k, i) in idx.iter_mut().enumerate() {
        *i = (flat >> (r - 1 - k)) & 1;
    }
}

fn matrix_defect<const R: usize, const C: usize>(m: &[[f64; C]; R]) -> f64 {
    let scale = m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..R.min(C) {
        for j in 0..R.min(C) {
            worst = worst.max((m[i][j] - m[j][i]).abs());
        }
    }
    worst / scale
}

/// `max |M_ij − M_ji| / max |M|` for a square matrix.
pub fn asymmetry<const N: usize>(m: &[[f64; N]; N]) -> f64 {
    matrix_defect(m)
}

/// Asymmetry of a square Voigt matrix relative to `scale`, or an error
/// above [`PACK_TOLERANCE`].
pub fn ensure_symmetric<const N: usize>(name: &str, m: &[[f64; N]; N], scale: f64) -> Result<f64> {
    let mut worst = 0.0_f64;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((m[i][j] - m[j][i]).abs());
        }
    }
    let d = if scale > 0.0 { worst / scale } else { worst };
    check(name, d)?;
    Ok(d)
}

fn check(name: &str, defect: f64) -> Result<()> {
    if defect > PACK_TOLERANCE {
        Err(Error::Symmetry {
            tensor: name.to_string(),
            asymmetry: defect,
        })
    } else {
        Ok(())
    }
}

fn pair(k: usize) -> [usize; 2] {
    let (a, b) = STRAIN_CASES[k];
    [a, b]
}

fn triple(k: usize) -> [usize; 3] {
    let (a, b, c) = GRADIENT_CASES[k];
    [a, b, c]
}

pub fn pack_stiffness(t: &FullTensor) -> Result<[[f64; 3]; 3]> {
    assert_eq!(t.rank, 4);
    let m: [[f64; 3]; 3] =
        std::array::from_fn(|a| std::array::from_fn(|b| t.get(&[pair(a), pair(b)].concat())));
    check("C", t.defect(|i| m[strain_index(i[0], i[1])][strain_index(i[2], i[3])]))?;
    check("C", matrix_defect(&m))?;
    Ok(m)
}

pub fn unpack_stiffness(m: &[[f64; 3]; 3]) -> FullTensor {
    FullTensor::from_fn(4, |i| m[strain_index(i[0], i[1])][strain_index(i[2], i[3])])
}

pub fn pack_g(t: &FullTensor) -> Result<[[f64; 6]; 3]> {
    assert_eq!(t.rank, 5);
    let m: [[f64; 6]; 3] =
        std::array::from_fn(|a| std::array::from_fn(|b| t.get(&[&pair(a)[..], &triple(b)[..]].concat())));
    check("G", t.defect(|i| m[strain_index(i[0], i[1])][gradient_index(i[2], i[3], i[4])]))?;
    Ok(m)
}

pub fn unpack_g(m: &[[f64; 6]; 3]) -> FullTensor {
    FullTensor::from_fn(5, |i| m[strain_index(i[0], i[1])][gradient_index(i[2], i[3], i[4])])
}

pub fn pack_d(t: &FullTensor) -> Result<[[f64; 6]; 6]> {
    assert_eq!(t.rank, 6);
    let m: [[f64; 6]; 6] =
        std::array::from_fn(|a| std::array::from_fn(|b| t.get(&[triple(a), triple(b)].concat())));
    check("D", t.defect(|i| m[gradient_index(i[0], i[1], i[2])][gradient_index(i[3], i[4], i[5])]))?;
    check("D", matrix_defect(&m))?;
    Ok(m)
}

pub fn unpack_d(m: &[[f64; 6]; 6]) -> FullTensor {
    FullTensor::from_fn(6, |i| m[gradient_index(i[0], i[1], i[2])][gradient_index(i[3], i[4], i[5])])
}

pub fn pack_gamma(t: &FullTensor) -> Result<[[f64; 2]; 3]> {
    assert_eq!(t.rank, 3);
    let m: [[f64; 2]; 3] = std::array::from_fn(|a| std::array::from_fn(|k| t.get(&[pair(a)[0], pair(a)[1], k])));
    check("gamma", t.defect(|i| m[strain_index(i[0], i[1])][i[2]]))?;
    Ok(m)
}

pub fn unpack_gamma(m: &[[f64; 2]; 3]) -> FullTensor {
    FullTensor::from_fn(3, |i| m[strain_index(i[0], i[1])][i[2]])
}
