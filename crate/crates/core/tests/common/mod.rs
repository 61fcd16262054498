#![allow(dead_code)]

use erasure_welch::Frame;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Three unit vectors at 120° in the plane.
pub fn mercedes_benz() -> Frame {
    let angles = [90.0f64, 210.0, 330.0].map(f64::to_radians);
    let mut rows = Vec::new();
    rows.extend(angles.iter().map(|a| a.cos()));
    rows.extend(angles.iter().map(|a| a.sin()));
    Frame::from_real_rows(2, 3, &rows).unwrap()
}

/// `(1/n) E tr((X'X)^d)` by explicit enumeration: every keep-pattern builds
/// `X = F P` with erased columns set to zero and takes plain matrix powers.
pub fn naive_moment(frame: &Frame, p: f64, d: u32) -> f64 {
    let f = frame.matrix();
    let n = frame.n();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as i32;
        let weight = p.powi(k) * (1.0 - p).powi(n as i32 - k);
        if weight == 0.0 {
            continue;
        }
        let mut x = f.clone();
        for j in 0..n {
            if mask & (1 << j) == 0 {
                x.column_mut(j).fill(Complex64::new(0.0, 0.0));
            }
        }
        let a = x.adjoint() * &x;
        let mut power = DMatrix::<Complex64>::identity(n, n);
        for _ in 0..d {
            power = &power * &a;
        }
        total += weight * power.trace().re;
    }
    total / n as f64
}

pub fn p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}
