//! Cyclic Jacobi eigenvalues for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of `a_pq` and then applies the real
//! plane rotation that annihilates `|a_pq|`. Sweeps run over all pairs `p < q`
//! until the off-diagonal Frobenius mass is negligible relative to the matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues (unsorted) of a Hermitian matrix.
pub fn jacobi_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::InvalidParameter(format!(
            "matrix is {rows}x{cols}, not square"
        )));
    }
    let n = rows;
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i..n {
            asym = asym.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(asym));
    }

    // row-major working copy, Hermitian-averaged
    let mut w = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        w[i * n + i] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            w[i * n + j] = v;
            w[j * n + i] = v.conj();
        }
    }
    let total: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let threshold = (f64::EPSILON * f64::EPSILON) * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * w[i * n + j].norm_sqr())
            .sum();
        if off <= threshold {
            return Ok((0..n).map(|i| w[i * n + i].re).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, n, p, q);
            }
        }
    }
    Err(Error::Eigen(format!(
        "Jacobi did not converge in {MAX_SWEEPS} sweeps"
    )))
}

fn rotate(w: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = w[p * n + q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let alpha = w[p * n + p].re;
    let beta = w[q * n + q].re;
    // rotation in the (p, q) plane: U = D R with D = diag(1, e^{-iφ}), R real
    let phase = apq / g; // e^{iφ}
    let tau = (beta - alpha) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // U_pp = c, U_pq = s, U_qp = -s e^{-iφ}, U_qq = c e^{-iφ}
    let e = phase.conj();
    let (u_pp, u_pq, u_qp, u_qq) = (
        Complex64::new(c, 0.0),
        Complex64::new(s, 0.0),
        -e * s,
        e * c,
    );
    // A ← A U (columns p, q)
    for k in 0..n {
        let akp = w[k * n + p];
        let akq = w[k * n + q];
        w[k * n + p] = akp * u_pp + akq * u_qp;
        w[k * n + q] = akp * u_pq + akq * u_qq;
    }
    // A ← U^H A (rows p, q)
    for k in 0..n {
        let apk = w[p * n + k];
        let aqk = w[q * n + k];
        w[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        w[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    w[p * n + p] = Complex64::new(alpha - t * g, 0.0);
    w[q * n + q] = Complex64::new(beta + t * g, 0.0);
    w[p * n + q] = Complex64::new(0.0, 0.0);
    w[q * n + p] = Complex64::new(0.0, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{harmonic_etf, random_frame, Field};
    use approx::assert_abs_diff_eq;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    #[test]
    fn real_two_by_two() {
        let a =
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]).map(|x| Complex64::new(x, 0.0));
        let ev = sorted(jacobi_eigenvalues(&a).unwrap());
        assert_abs_diff_eq!(ev[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let ev = sorted(jacobi_eigenvalues(&a).unwrap());
        assert_abs_diff_eq!(ev[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn matches_characteristic_roots_of_gram_matrices() {
        // eigenvalues of F'F are those of FF' padded with zeros; FF' is checked
        // against nalgebra's independent symmetric eigensolver on its real embedding
        for seed in 0..10 {
            let f = random_frame(4, 9, Field::Complex, seed).unwrap();
            let s = f.frame_operator();
            let g = f.matrix().adjoint() * f.matrix();
            let ours = sorted(jacobi_eigenvalues(&g).unwrap());
            let m = 4;
            let embed = nalgebra::DMatrix::from_fn(2 * m, 2 * m, |r, c| {
                let z = s[(r % m, c % m)];
                match (r < m, c < m) {
                    (true, true) | (false, false) => z.re,
                    (true, false) => -z.im,
                    (false, true) => z.im,
                }
            });
            let mut reference: Vec<f64> = embed.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(|a, b| b.total_cmp(a));
            for i in 0..m {
                assert_abs_diff_eq!(ours[i], reference[2 * i], epsilon = 1e-10);
            }
            for v in &ours[m..] {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_hermitian_converges() {
        let f = harmonic_etf(43).unwrap();
        let g = f.matrix().adjoint() * f.matrix();
        let ev = sorted(jacobi_eigenvalues(&g).unwrap());
        let top = 43.0 / 22.0;
        assert!(ev[..22].iter().all(|v| (v - top).abs() < 1e-10));
        assert!(ev[22..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a =
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]).map(|x| Complex64::new(x, 0.0));
        assert!(matches!(
            jacobi_eigenvalues(&a),
            Err(Error::NotHermitian(_))
        ));
    }
}
