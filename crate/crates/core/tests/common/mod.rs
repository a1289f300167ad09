//! Independent reference computations used by the integration tests.
//!
//! None of these call into the numeric kernels they are used to check.
#![allow(dead_code)]

use kway_relay::numkernel::{CMatrix, C64};

/// Textbook Gauss-Jordan elimination with full-row pivot search.
pub fn gauss_jordan_inverse(a: &CMatrix) -> Option<Vec<Vec<C64>>> {
    let n = a.rows();
    let mut aug: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut row: Vec<C64> = (0..n).map(|j| a[(i, j)]).collect();
            row.extend((0..n).map(|j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].norm().total_cmp(&aug[y][col].norm()))?;
        if aug[piv][col].norm() == 0.0 {
            return None;
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                for c in 0..2 * n {
                    let t = aug[col][c];
                    aug[r][c] -= f * t;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Roots of the characteristic polynomial of a 1×1, 2×2 or 3×3 matrix.
pub fn characteristic_roots(a: &CMatrix) -> Vec<C64> {
    let n = a.rows();
    let e = |i: usize, j: usize| a[(i, j)];
    match n {
        1 => vec![e(0, 0)],
        2 => {
            // λ² − tr·λ + det
            let tr = e(0, 0) + e(1, 1);
            let det = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
            let disc = (tr * tr - det * 4.0).sqrt();
            vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
        }
        3 => {
            // λ³ + b λ² + c λ + d with b = −tr, c = sum of principal 2×2 minors, d = −det.
            let tr = e(0, 0) + e(1, 1) + e(2, 2);
            let minors = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0)
                + e(1, 1) * e(2, 2)
                - e(1, 2) * e(2, 1);
            let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
            cubic_roots(-tr, minors, -det)
        }
        _ => panic!("characteristic oracle only covers dims 1..=3"),
    }
}

/// Cardano's formula for `x³ + b x² + c x + d`.
pub fn cubic_roots(b: C64, c: C64, d: C64) -> Vec<C64> {
    // Depress with x = t − b/3: t³ + p t + q.
    let p = c - b * b / 3.0;
    let q = b * b * b * (2.0 / 27.0) - b * c / 3.0 + d;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut inner = -q / 2.0 + disc;
    if inner.norm() < (-q / 2.0 - disc).norm() {
        inner = -q / 2.0 - disc;
    }
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let shift = -b / 3.0;
    if inner.norm() == 0.0 {
        return vec![shift; 3];
    }
    let u = inner.powf(1.0 / 3.0);
    (0..3)
        .map(|k| {
            let uk = u * omega.powu(k);
            uk - p / (uk * 3.0) + shift
        })
        .collect()
}

/// Singular values of a 2×2 matrix from the closed-form eigenvalues of AᴴA.
pub fn singular_values_2x2(a: &CMatrix) -> (f64, f64) {
    let g = a.adjoint().mul_mat(a);
    let tr = (g[(0, 0)] + g[(1, 1)]).re;
    let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    ((tr / 2.0 + disc).sqrt(), (tr / 2.0 - disc).max(0.0).sqrt())
}

/// Standard normal upper tail `Q(x)` via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Numerical Recipes `erfcc` (fractional error < 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07
                                + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Brute force over all 2^K bit tuples: which satisfy `w_l ⊕ w_{l+1} = chain_l`?
pub fn consistent_tuples(chain_bits: &[bool], known: &[(usize, bool)]) -> Vec<Vec<bool>> {
    let k = chain_bits.len() + 1;
    (0u32..1 << k)
        .map(|mask| (0..k).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|w| chain_bits.iter().enumerate().all(|(l, &c)| (w[l] ^ w[l + 1]) == c))
        .filter(|w| known.iter().all(|&(u, b)| w[u] == b))
        .collect()
}
