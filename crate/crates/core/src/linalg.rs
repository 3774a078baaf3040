// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix exponential by scaling and squaring.
//!
//! Diagonal Padé approximants of degree 3, 5, 7, 9 or 13 are selected from the
//! 1-norm of the argument (Higham 2005, "The scaling and squaring method for
//! the matrix exponential revisited"); the thresholds bound the backward error
//! by the unit roundoff. The rational function is evaluated with one blocked
//! LU solve, so all `O(n³)` work runs through `gemm`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const BLOCK: usize = 48;

/// Maximum absolute column sum.
pub fn norm1(a: ArrayView2<'_, Complex64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn is_finite(a: ArrayView2<'_, Complex64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.dot(b)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::param(
            "matrix",
            format!("expm needs a square matrix, got {}x{}", n, a.ncols()),
        ));
    }
    if !is_finite(a.view()) {
        return Err(Error::Numeric("non-finite entry in exponent".into()));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    if n == 1 {
        return Ok(Array2::from_elem((1, 1), a[[0, 0]].exp()));
    }

    let norm = norm1(a.view());
    let eye = Array2::<Complex64>::eye(n);
    let a2 = matmul(a, a);

    let low_degree: [(f64, &[f64]); 4] = [
        (THETA_3, &PADE_3),
        (THETA_5, &PADE_5),
        (THETA_7, &PADE_7),
        (THETA_9, &PADE_9),
    ];
    for (theta, coeffs) in low_degree {
        if norm <= theta {
            let (u, v) = pade_low(a, &a2, &eye, coeffs);
            return rational(u, v);
        }
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let result = if squarings == 0 {
        let (u, v) = pade_13(a, &a2, &eye);
        rational(u, v)?
    } else {
        let scale = 0.5f64.powi(squarings);
        let scaled = a.mapv(|z| z * scale);
        let scaled2 = a2.mapv(|z| z * (scale * scale));
        let (u, v) = pade_13(&scaled, &scaled2, &eye);
        let mut r = rational(u, v)?;
        for _ in 0..squarings {
            r = matmul(&r, &r);
        }
        r
    };
    if !is_finite(result.view()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(result)
}

/// Odd part `U` and even part `V` of a Padé numerator of degree <= 9.
fn pade_low(
    a: &Array2<Complex64>,
    a2: &Array2<Complex64>,
    eye: &Array2<Complex64>,
    b: &[f64],
) -> (Array2<Complex64>, Array2<Complex64>) {
    let mut odd = eye.mapv(|z| z * b[1]);
    let mut even = eye.mapv(|z| z * b[0]);
    let mut power = a2.clone();
    let mut k = 2;
    while k < b.len() {
        odd.scaled_add(Complex64::from(b[k + 1]), &power);
        even.scaled_add(Complex64::from(b[k]), &power);
        k += 2;
        if k < b.len() {
            power = matmul(&power, a2);
        }
    }
    (matmul(a, &odd), even)
}

fn pade_13(
    a: &Array2<Complex64>,
    a2: &Array2<Complex64>,
    eye: &Array2<Complex64>,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let b = PADE_13.map(Complex64::from);
    let a4 = matmul(a2, a2);
    let a6 = matmul(&a4, a2);

    let mut inner = &a6 * b[13];
    inner.scaled_add(b[11], &a4);
    inner.scaled_add(b[9], a2);
    let mut odd = matmul(&a6, &inner);
    odd.scaled_add(b[7], &a6);
    odd.scaled_add(b[5], &a4);
    odd.scaled_add(b[3], a2);
    odd.scaled_add(b[1], eye);
    let u = matmul(a, &odd);

    let mut inner = &a6 * b[12];
    inner.scaled_add(b[10], &a4);
    inner.scaled_add(b[8], a2);
    let mut v = matmul(&a6, &inner);
    v.scaled_add(b[6], &a6);
    v.scaled_add(b[4], &a4);
    v.scaled_add(b[2], a2);
    v.scaled_add(b[0], eye);
    (u, v)
}

/// Solves `(V - U) X = V + U`.
fn rational(u: Array2<Complex64>, v: Array2<Complex64>) -> Result<Array2<Complex64>> {
    let mut numer = v.clone();
    numer += &u;
    let mut denom = v;
    denom -= &u;
    solve(denom, numer)
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
pub fn solve(mut a: Array2<Complex64>, mut b: Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() || b.nrows() != n {
        return Err(Error::param(
            "matrix",
            format!(
                "incompatible shapes {}x{} and {}x{}",
                n,
                a.ncols(),
                b.nrows(),
                b.ncols()
            ),
        ));
    }
    let pivots = lu_in_place(&mut a)?;
    for (i, &p) in pivots.iter().enumerate() {
        if p != i {
            swap_rows(&mut b, i, p);
        }
    }
    forward_unit_lower(&a, &mut b);
    backward_upper(&a, &mut b);
    Ok(b)
}

fn swap_rows(m: &mut Array2<Complex64>, i: usize, j: usize) {
    let (mut ri, mut rj) = m.multi_slice_mut((s![i, ..], s![j, ..]));
    Zip::from(&mut ri).and(&mut rj).for_each(std::mem::swap);
}

/// Right-looking blocked LU. On return `a` holds `L` (unit diagonal, below)
/// and `U` (on and above the diagonal); row `k` was swapped with `pivots[k]`.
fn lu_in_place(a: &mut Array2<Complex64>) -> Result<Vec<usize>> {
    let n = a.nrows();
    let mut pivots = vec![0usize; n];
    for k0 in (0..n).step_by(BLOCK) {
        let k1 = (k0 + BLOCK).min(n);
        // Panel factorization of columns k0..k1.
        for j in k0..k1 {
            let mut p = j;
            let mut best = a[[j, j]].norm();
            for i in j + 1..n {
                let v = a[[i, j]].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Numeric(format!(
                    "singular matrix in LU factorization (column {j})"
                )));
            }
            pivots[j] = p;
            if p != j {
                swap_rows(a, j, p);
            }
            let inv = ONE / a[[j, j]];
            for i in j + 1..n {
                a[[i, j]] *= inv;
            }
            for i in j + 1..n {
                let l = a[[i, j]];
                if l == ZERO {
                    continue;
                }
                for c in j + 1..k1 {
                    let u = a[[j, c]];
                    a[[i, c]] -= l * u;
                }
            }
        }
        if k1 == n {
            break;
        }
        // U12 = L11^{-1} A12.
        for j in k0..k1 {
            for i in j + 1..k1 {
                let l = a[[i, j]];
                if l == ZERO {
                    continue;
                }
                let (src, mut dst) = a.multi_slice_mut((s![j, k1..], s![i, k1..]));
                dst.scaled_add(-l, &src);
            }
        }
        // A22 -= L21 U12.
        let (l21, u12, mut a22) =
            a.multi_slice_mut((s![k1.., k0..k1], s![k0..k1, k1..], s![k1.., k1..]));
        general_mat_mul(-ONE, &l21.view(), &u12.view(), ONE, &mut a22);
    }
    Ok(pivots)
}

/// `B <- L^{-1} B` for the unit lower factor stored in `lu`.
fn forward_unit_lower(lu: &Array2<Complex64>, b: &mut Array2<Complex64>) {
    let n = lu.nrows();
    for k0 in (0..n).step_by(BLOCK) {
        let k1 = (k0 + BLOCK).min(n);
        for j in k0..k1 {
            for i in j + 1..k1 {
                let l = lu[[i, j]];
                if l == ZERO {
                    continue;
                }
                let (src, mut dst) = b.multi_slice_mut((s![j, ..], s![i, ..]));
                dst.scaled_add(-l, &src);
            }
        }
        if k1 < n {
            let (top, mut rest) = b.multi_slice_mut((s![k0..k1, ..], s![k1.., ..]));
            general_mat_mul(-ONE, &lu.slice(s![k1.., k0..k1]), &top.view(), ONE, &mut rest);
        }
    }
}

/// `B <- U^{-1} B` for the upper factor stored in `lu`.
fn backward_upper(lu: &Array2<Complex64>, b: &mut Array2<Complex64>) {
    let n = lu.nrows();
    let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
    for &k0 in starts.iter().rev() {
        let k1 = (k0 + BLOCK).min(n);
        for j in (k0..k1).rev() {
            let inv = ONE / lu[[j, j]];
            b.row_mut(j).mapv_inplace(|z| z * inv);
            for i in k0..j {
                let u = lu[[i, j]];
                if u == ZERO {
                    continue;
                }
                let (src, mut dst) = b.multi_slice_mut((s![j, ..], s![i, ..]));
                dst.scaled_add(-u, &src);
            }
        }
        if k0 > 0 {
            let (mut above, solved) = b.multi_slice_mut((s![..k0, ..], s![k0..k1, ..]));
            general_mat_mul(
                -ONE,
                &lu.slice(s![..k0, k0..k1]),
                &solved.view(),
                ONE,
                &mut above,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// Deterministic pseudo-random test matrix.
    fn test_matrix(n: usize, scale: f64, seed: u64) -> Array2<Complex64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        Array2::from_shape_fn((n, n), |_| c(next() * scale, next() * scale))
    }

    /// Taylor series with many terms, summed at a small scale then squared.
    fn taylor_oracle(a: &Array2<Complex64>) -> Array2<Complex64> {
        let n = a.nrows();
        let squarings = 10;
        let scaled = a.mapv(|z| z / 1024.0);
        let mut term = Array2::<Complex64>::eye(n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.dot(&scaled).mapv(|z| z / k as f64);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = sum.dot(&sum);
        }
        sum
    }

    #[test]
    fn diagonal_matrix() {
        let a = Array2::from_diag(&ndarray::arr1(&[c(-0.5, 0.0), c(0.0, 2.0), c(1.0, -1.0)]));
        let e = expm(&a).unwrap();
        for i in 0..3 {
            assert!((e[[i, i]] - a[[i, i]].exp()).norm() < 1e-14);
        }
        assert_eq!(e[[0, 1]], ZERO);
    }

    #[test]
    fn nilpotent_jordan_block() {
        // exp([[0,1],[0,0]] t) = [[1,t],[0,1]]
        let a = ndarray::arr2(&[[ZERO, c(3.0, 0.0)], [ZERO, ZERO]]);
        let e = expm(&a).unwrap();
        assert!((e[[0, 1]] - c(3.0, 0.0)).norm() < 1e-13);
        assert!((e[[0, 0]] - ONE).norm() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let theta = 2.3;
        let a = ndarray::arr2(&[[ZERO, c(-theta, 0.0)], [c(theta, 0.0), ZERO]]);
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]].re - theta.cos()).abs() < 1e-14);
        assert!((e[[1, 0]].re - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn matches_taylor_across_degrees() {
        // Norms chosen to exercise every Padé degree and the squaring branch.
        for (k, scale) in [0.001, 0.02, 0.1, 0.3, 0.6, 2.0].iter().enumerate() {
            let a = test_matrix(12, *scale, k as u64);
            let e = expm(&a).unwrap();
            let oracle = taylor_oracle(&a);
            let rel = max_abs_diff(&e, &oracle) / oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(rel < 1e-12, "scale {scale}: relative error {rel:e}");
        }
    }

    #[test]
    fn blocked_solve_matches_residual() {
        let n = 130; // spans several blocks
        let mut a = test_matrix(n, 1.0, 99);
        for i in 0..n {
            a[[i, i]] += c(4.0, 0.0);
        }
        let b = test_matrix(n, 1.0, 7);
        let x = solve(a.clone(), b.clone()).unwrap();
        let resid = max_abs_diff(&a.dot(&x), &b);
        assert!(resid < 1e-12, "residual {resid:e}");
    }

    #[test]
    fn solve_with_pivoting() {
        let a = ndarray::arr2(&[[ZERO, ONE], [ONE, ZERO]]);
        let b = ndarray::arr2(&[[c(2.0, 0.0)], [c(3.0, 0.0)]]);
        let x = solve(a, b).unwrap();
        assert_eq!(x[[0, 0]], c(3.0, 0.0));
        assert_eq!(x[[1, 0]], c(2.0, 0.0));
    }

    #[test]
    fn singular_and_nonfinite_inputs() {
        let a = Array2::<Complex64>::zeros((3, 3));
        assert!(matches!(solve(a, Array2::zeros((3, 1))), Err(Error::Numeric(_))));
        let mut a = Array2::<Complex64>::zeros((2, 2));
        a[[0, 1]] = c(f64::NAN, 0.0);
        assert!(matches!(expm(&a), Err(Error::Numeric(_))));
        assert!(expm(&Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn exp_of_sum_of_commuting_parts() {
        // exp(A) exp(A) == exp(2A)
        let a = test_matrix(20, 0.4, 3);
        let e1 = expm(&a).unwrap();
        let e2 = expm(&a.mapv(|z| z * 2.0)).unwrap();
        assert!(max_abs_diff(&e1.dot(&e1), &e2) < 1e-11);
    }
}
