#![allow(dead_code)]

//! Independent reference computations shared by the integration tests.

/// Return-map values of paper-4d from a separate eighth-order integration
/// (relative and absolute tolerance 1e-13): `(theta, G, T, D)`.
pub const RETURN_PI: (f64, f64, f64, f64) = (
    std::f64::consts::PI,
    2.980746106450053,
    4.850527879932424,
    0.26473965216672546,
);
pub const RETURN_2_5: (f64, f64, f64, f64) = (2.5, 3.2673137460544996, 58.80008145251709, 10.731277405034906);

/// Fixed points `(theta*, D(theta*))` of the same reference map.
pub const FIXED_POINTS: [(f64, f64); 3] = [
    (3.0850382350040784, 0.29130856645695896),
    (3.2996602452921904, 0.5749523649655734),
    (3.3671810543815073, 0.6785442473259433),
];

pub type Mat = Vec<Vec<f64>>;

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// `exp(A t)` by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &Mat, t: f64) -> Mat {
    let n = a.len();
    let norm: f64 = a
        .iter()
        .map(|r| r.iter().map(|v| (v * t).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let s = t / 2f64.powi(squarings as i32);
    let scaled: Mat = a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect();
    let mut sum: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = sum.clone();
    for k in 1..30 {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
