use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{utf_residual, Field, Frame};
use crate::error::{Error, Result};
use crate::rng;

/// Gaussian frame: i.i.d. standard normal entries (independent real and
/// imaginary parts for complex frames), columns normalized.
pub fn random_frame(m: usize, n: usize, field: Field, seed: u64) -> Result<Frame> {
    if m == 0 || n < m {
        return Err(Error::InvalidDimensions { m, n });
    }
    let mut rng = rng::stream(seed, rng::FRAME_STREAM);
    // column-major fill so the draw order is column by column
    let data = DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => rng.sample(StandardNormal),
        };
        Complex64::new(re, im)
    });
    Frame::from_unnormalized(field, data)
}

/// Regular simplex in `R^m`: `m + 1` unit vectors with pairwise inner product `-1/m`.
///
/// Coordinates are taken in the Helmert basis of the orthogonal complement
/// of the all-ones vector in `R^{m+1}`.
pub fn simplex_etf(m: usize) -> Result<Frame> {
    if m == 0 {
        return Err(Error::InvalidDimensions { m, n: 1 });
    }
    let n = m + 1;
    // Helmert row k (1-based): (1, ..., 1, -k, 0, ...) / sqrt(k(k+1)), k ones.
    let data = DMatrix::from_fn(m, n, |row, col| {
        let k = row + 1;
        let norm = ((k * (k + 1)) as f64).sqrt();
        let v = if col < k {
            1.0
        } else if col == k {
            -(k as f64)
        } else {
            0.0
        };
        Complex64::new(v / norm, 0.0)
    });
    Frame::from_unnormalized(Field::Real, data)
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Harmonic ETF from the quadratic-residue difference set of a prime
/// `q ≡ 3 (mod 4)`: the DFT rows indexed by `{0} ∪ QR(q)`, giving
/// `m = (q + 1) / 2`, `n = q`.
pub fn harmonic_etf(q: u64) -> Result<Frame> {
    if !is_prime(q) || q % 4 != 3 {
        return Err(Error::InvalidHarmonicOrder(q));
    }
    let mut rows: Vec<u64> = (1..q).map(|a| a * a % q).collect();
    rows.push(0);
    rows.sort_unstable();
    rows.dedup();
    let n = q as usize;
    let m = rows.len();
    debug_assert_eq!(m, n.div_ceil(2));
    let scale = 1.0 / (m as f64).sqrt();
    let data = DMatrix::from_fn(m, n, |r, c| {
        let phase = (rows[r] * c as u64 % q) as f64 * 2.0 * PI / q as f64;
        Complex64::from_polar(scale, phase)
    });
    Frame::from_unnormalized(Field::Complex, data)
}

/// `copies` concatenated copies of the standard basis of `R^m`.
pub fn repeated_onb(m: usize, copies: usize) -> Result<Frame> {
    if m == 0 || copies == 0 {
        return Err(Error::InvalidDimensions { m, n: m * copies });
    }
    let data = DMatrix::from_fn(m, m * copies, |r, c| {
        Complex64::new(if c % m == r { 1.0 } else { 0.0 }, 0.0)
    });
    Frame::new(Field::Real, data)
}

#[derive(Clone, Debug)]
pub struct NearestUtf {
    pub frame: Frame,
    /// Relative residual, see [`utf_residual`].
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternating projections between tight frames and unit-norm frames.
///
/// Each step replaces `F` with `sqrt(n/m) U V'` from the thin SVD `F = U Σ V'`
/// and then renormalizes the columns. Stops once the relative tightness
/// residual is at most `tol`; otherwise returns the last iterate with
/// `converged = false`.
pub fn nearest_utf(frame: &Frame, max_iters: usize, tol: f64) -> Result<NearestUtf> {
    let m = frame.m();
    let scale = (frame.n() as f64 / m as f64).sqrt();
    let mut current = frame.clone();
    let mut residual = utf_residual(&current);
    let mut iterations = 0;
    while residual > tol && iterations < max_iters {
        let svd = current.matrix().clone().svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::InvalidParameter("SVD failed".into())),
        };
        let mut tight = u * v_t;
        tight.iter_mut().for_each(|z| *z *= scale);
        if current.field() == Field::Real {
            tight.iter_mut().for_each(|z| z.im = 0.0);
        }
        current = Frame::from_unnormalized(current.field(), tight)?;
        residual = utf_residual(&current);
        iterations += 1;
    }
    Ok(NearestUtf {
        frame: current,
        residual,
        iterations,
        converged: residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{coherence, gram, is_etf, is_utf, CLASSIFY_TOL};
    use approx::assert_abs_diff_eq;

    #[test]
    fn random_frame_contract() {
        let a = random_frame(4, 8, Field::Real, 1).unwrap();
        let b = random_frame(4, 8, Field::Real, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_frame(4, 8, Field::Real, 2).unwrap());
        for col in a.matrix().column_iter() {
            let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let c = random_frame(3, 5, Field::Complex, 1).unwrap();
        assert!(c.matrix().iter().any(|z| z.im != 0.0));
    }

    #[test]
    fn random_scalar_frame() {
        let r = random_frame(1, 1, Field::Real, 4).unwrap();
        assert_eq!(r.matrix()[(0, 0)].re.abs(), 1.0);
        let c = random_frame(1, 1, Field::Complex, 4).unwrap();
        assert!((c.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(random_frame(0, 3, Field::Real, 0).is_err());
        assert!(random_frame(3, 2, Field::Real, 0).is_err());
    }

    #[test]
    fn simplex_small_cases() {
        let s1 = simplex_etf(1).unwrap();
        assert_eq!(s1.n(), 2);
        assert_abs_diff_eq!(s1.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s1.matrix()[(0, 1)].re, -1.0, epsilon = 1e-15);

        let s2 = simplex_etf(2).unwrap();
        assert!(is_etf(&s2, CLASSIFY_TOL));

        let s5 = simplex_etf(5).unwrap();
        let c = coherence(&s5).unwrap();
        assert_abs_diff_eq!(c.welch_floor, 1.0 / 25.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.max_sq, 1.0 / 25.0, epsilon = 1e-14);
        let g = gram(&s5);
        assert_abs_diff_eq!(g.get(0, 3).re, -0.2, epsilon = 1e-14);
    }

    #[test]
    fn shipped_etf_families_pass() {
        for m in 1..=64 {
            assert!(is_etf(&simplex_etf(m).unwrap(), 1e-8), "simplex m={m}");
        }
        for q in [3, 7, 11, 19, 23, 31, 43] {
            let f = harmonic_etf(q).unwrap();
            assert_eq!(f.n(), q as usize);
            assert_eq!(f.m(), (q as usize).div_ceil(2));
            assert!(is_etf(&f, 1e-8), "harmonic q={q}");
        }
    }

    #[test]
    fn harmonic_q7_hits_welch_floor() {
        let c = coherence(&harmonic_etf(7).unwrap()).unwrap();
        assert_abs_diff_eq!(c.welch_floor, 1.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.max_sq, 1.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn harmonic_rejects_bad_orders() {
        for q in [0, 1, 2, 5, 9, 13, 15, 21] {
            assert!(
                matches!(harmonic_etf(q), Err(Error::InvalidHarmonicOrder(_))),
                "q={q}"
            );
        }
    }

    #[test]
    fn nearest_utf_fixed_point() {
        let f = repeated_onb(2, 2).unwrap();
        let out = nearest_utf(&f, 100, 1e-12).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.frame, f);
    }

    #[test]
    fn nearest_utf_converges_for_generic_frame() {
        let f = random_frame(3, 6, Field::Real, 7).unwrap();
        let out = nearest_utf(&f, 10_000, 1e-9).unwrap();
        assert!(out.converged, "residual {}", out.residual);
        assert!(is_utf(&out.frame, 1e-9));
        assert_eq!(out.frame.field(), Field::Real);
    }

    #[test]
    fn nearest_utf_square_gives_orthonormal_basis() {
        let f = Frame::from_real_rows(2, 2, &[1.0, 0.6, 0.0, 0.8]).unwrap();
        let out = nearest_utf(&f, 100, 1e-12).unwrap();
        assert!(out.converged);
        let g = gram(&out.frame);
        assert!(g.abs_sq(0, 1) < 1e-20);
    }

    #[test]
    fn nearest_utf_reports_non_convergence() {
        let f = random_frame(3, 6, Field::Real, 7).unwrap();
        let out = nearest_utf(&f, 1, 1e-14).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 1);
        assert!(out.residual > 1e-14);
    }
}
