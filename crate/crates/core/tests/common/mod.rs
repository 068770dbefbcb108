//! Adaptive Dormand-Prince 5(4) integrator used as an oracle.

#![allow(dead_code)]

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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

/// Integrates `x' = f(t, x)` from `t0` and returns the state at each of
/// `checkpoints` (ascending, all `>= t0`).
pub fn dopri<F>(f: F, t0: f64, x0: &[f64], checkpoints: &[f64], tol: f64) -> Vec<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut h: f64 = 1e-3;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while target - t > 1e-13 {
            let step = h.min(target - t);
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
            for s in 0..7 {
                let xs: Vec<f64> = (0..n)
                    .map(|i| x[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                    .collect();
                k.push(f(t + C[s] * step, &xs));
            }
            let x5: Vec<f64> = (0..n)
                .map(|i| x[i] + step * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>())
                .collect();
            let err = (0..n)
                .map(|i| {
                    let e = step * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
                    e.abs() / (tol * (1.0 + x[i].abs().max(x5[i].abs())))
                })
                .fold(0.0f64, f64::max);
            if err <= 1.0 {
                t += step;
                x = x5;
            }
            h = step * (0.9 * err.max(1e-10).powf(-0.2f64)).clamp(0.2, 5.0);
        }
        out.push(x.clone());
    }
    out
}
