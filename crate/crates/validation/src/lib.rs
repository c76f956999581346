//! Published macroscale parameters for the 1 mm aluminium cell at 20 %
//! porosity, and small helpers for comparing against them.

/// Homogeneous `C^M` (MPa).
pub const C_HOMOGENEOUS: [[f64; 3]; 3] = [[84165.6, 27774.7, 0.0], [27774.7, 84165.6, 0.0], [0.0, 0.0, 28195.5]];

/// Single centered pore, `C^M` (MPa).
pub const C_SINGLE: [[f64; 3]; 3] = [[49935.8, 14164.6, 0.0], [14164.6, 49935.9, 0.0], [0.0, 0.0, 13570.9]];

/// Single centered pore, `D^M` (N) as printed.
pub const D_SINGLE: [[f64; 6]; 6] = [
    [-1351.692, -782.368, -327.905, -0.001, -0.002, 0.003],
    [-782.368, 2006.51, 626.348, 0.0, 0.001, 0.0],
    [-327.905, 626.348, -37.827, 0.0, 0.0, -0.002],
    [-0.001, 0.0, 0.0, -1351.697, -782.372, -327.905],
    [-0.002, 0.001, 0.0, -782.372, 2006.502, 626.349],
    [0.003, 0.0, -0.002, -327.905, 626.349, -37.816],
];

/// Four uniformly spaced pores, `D^M` (N) as printed.
pub const D_UNIFORM4: [[f64; 6]; 6] = [
    [-338.017, -194.6, -81.655, -0.002, -0.038, -0.015],
    [-194.6, 500.881, 155.739, 0.026, 0.001, 0.003],
    [-81.655, 155.739, -9.859, 0.001, -0.031, -0.007],
    [-0.002, 0.026, 0.001, -337.971, -194.617, -81.662],
    [-0.038, 0.001, -0.031, -194.617, 500.888, 155.733],
    [-0.015, 0.003, -0.007, -81.662, 155.733, -9.817],
];

/// Row `r` of the printed strain-gradient matrices is row `PRINTED_ORDER[r]`
/// of the packed `(111, 112, 221, 222, 121, 122)` layout.
pub const PRINTED_ORDER: [usize; 6] = [0, 2, 5, 3, 1, 4];

pub const BETA_POROUS: f64 = -1.51;
pub const KAPPA_SOLID: f64 = 247.0;
pub const KAPPA_SINGLE_SOLID_AVERAGE: f64 = 205.9;
pub const C_SOLID: f64 = 0.9;
pub const C_POROUS: f64 = 0.72;
pub const A_SOLID: f64 = 0.00225;
pub const A_POROUS: f64 = 0.0018;
pub const POROSITY: f64 = 0.2;

/// Reorders a packed 6×6 matrix into the printed layout.
pub fn to_printed(m: &[[f64; 6]; 6]) -> [[f64; 6]; 6] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[PRINTED_ORDER[r]][PRINTED_ORDER[c]]))
}

pub fn frobenius<const R: usize, const C: usize>(m: &[[f64; C]; R]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs<const R: usize, const C: usize>(m: &[[f64; C]; R]) -> f64 {
    m.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn rel(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_order_is_a_block_permutation() {
        let mut seen = [false; 6];
        for &k in &PRINTED_ORDER {
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
        // both printed blocks repeat the same values
        for r in 0..3 {
            for c in 0..3 {
                assert!((D_SINGLE[r][c] - D_SINGLE[r + 3][c + 3]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn printed_matrices_are_symmetric() {
        for m in [&D_SINGLE, &D_UNIFORM4] {
            for r in 0..6 {
                for c in 0..6 {
                    assert_eq!(m[r][c], m[c][r]);
                }
            }
        }
    }
}
