//! Shared oracle machinery for the integration tests: an adaptive
//! Dormand-Prince 5(4) integrator for small complex ODE systems, kept
//! independent of the library's spectral stepping path.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Adaptive DP5(4) for `y' = f(t, y)` on small complex vectors.
pub fn dp45<F>(f: F, y0: Vec<Complex64>, t0: f64, t1: f64, rtol: f64, atol: f64) -> Vec<Complex64>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let n = y0.len();
    let mut t = t0;
    let mut y = y0;
    let mut h = (t1 - t0) / 100.0;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; 7];

    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        k[0] = f(t, &y);
        for stage in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for (yi, ki) in ys.iter_mut().zip(kj) {
                        *yi += h * a * ki;
                    }
                }
            }
            k[stage + 1] = f(t + C[stage] * h, &ys);
        }
        let mut y5 = y.clone();
        let mut err: f64 = 0.0;
        let mut y4 = y.clone();
        for (j, kj) in k.iter().enumerate() {
            for i in 0..n {
                y5[i] += h * B5[j] * kj[i];
                y4[i] += h * B4[j] * kj[i];
            }
        }
        for i in 0..n {
            let scale = atol + rtol * y5[i].norm().max(y[i].norm());
            err = err.max((y5[i] - y4[i]).norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= factor;
        if h < 1e-14 * (t1 - t0) {
            panic!("dp45 step collapsed at t = {t}");
        }
    }
    y
}

/// Oracle for linear constant-coefficient systems `y' = M y`.
pub fn dp45_linear(m: &DMatrix<Complex64>, y0: Vec<Complex64>, t1: f64, rtol: f64) -> Vec<Complex64> {
    let f = |_t: f64, y: &[Complex64]| {
        let mut out = vec![Complex64::default(); y.len()];
        for i in 0..y.len() {
            for j in 0..y.len() {
                out[i] += m[(i, j)] * y[j];
            }
        }
        out
    };
    dp45(f, y0, 0.0, t1, rtol, 1e-16)
}

#[allow(dead_code)]
pub fn max_field_diff(a: &lowmach::SpectralField, b: &lowmach::SpectralField) -> f64 {
    a.sub(b).unwrap().max_norm()
}
