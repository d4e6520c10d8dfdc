//! Dense matrix exponential by scaling-and-squaring with the order-13 Pade
//! approximant, for the small per-wavenumber complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

const PADE13: [f64; 14] = [
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

const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    let (rows, cols) = a.shape();
    let mut best = 0.0f64;
    for j in 0..cols {
        let mut s = 0.0;
        for i in 0..rows {
            s += a[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = a.nrows();
    debug_assert_eq!(m, a.ncols());
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a_scaled = a.map(|z| z / 2f64.powi(s as i32));

    let ident = DMatrix::<Complex64>::identity(m, m);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = |i: usize| Complex64::new(PADE13[i], 0.0);

    let u_inner = &a6 * (a6.map(|z| z * b(13)) + a4.map(|z| z * b(11)) + a2.map(|z| z * b(9)))
        + a6.map(|z| z * b(7))
        + a4.map(|z| z * b(5))
        + a2.map(|z| z * b(3))
        + ident.map(|z| z * b(1));
    let u = &a_scaled * u_inner;
    let v = &a6 * (a6.map(|z| z * b(12)) + a4.map(|z| z * b(10)) + a2.map(|z| z * b(8)))
        + a6.map(|z| z * b(6))
        + a4.map(|z| z * b(4))
        + a2.map(|z| z * b(2))
        + ident.map(|z| z * b(0));

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled matrices");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) <= tol
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<Complex64>::zeros(3, 3);
        assert!(approx_eq(&expm(&z), &DMatrix::identity(3, 3), 1e-15));
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = DMatrix::<Complex64>::zeros(2, 2);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 1)] = Complex64::new(-2.0, 0.5);
        let e = expm(&a);
        assert!((e[(0, 0)] - Complex64::new(1f64.exp(), 0.0)).norm() <= 1e-14);
        assert!((e[(1, 1)] - Complex64::new(-2.0, 0.5).exp()).norm() <= 1e-14);
        assert!(e[(0, 1)].norm() <= 1e-16);
    }

    #[test]
    fn skew_block_is_rotation() {
        // exp([[0, w], [-w, 0]]) = [[cos w, sin w], [-sin w, cos w]]
        let w = 37.5; // forces several squaring steps
        let mut a = DMatrix::<Complex64>::zeros(2, 2);
        a[(0, 1)] = Complex64::new(w, 0.0);
        a[(1, 0)] = Complex64::new(-w, 0.0);
        let e = expm(&a);
        assert!((e[(0, 0)].re - w.cos()).abs() <= 1e-12);
        assert!((e[(0, 1)].re - w.sin()).abs() <= 1e-12);
        // unitary: |det| = 1
        let det = e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)];
        assert!((det.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn semigroup_property() {
        let mut a = DMatrix::<Complex64>::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = Complex64::new(
                    (i as f64 - j as f64) * 0.7,
                    0.3 * (i + j) as f64,
                );
            }
        }
        let full = expm(&a);
        let half = expm(&a.map(|z| z * 0.5));
        assert!(approx_eq(&full, &(&half * &half), 1e-11));
    }
}
