//! Eigenvalue spectra of erased subframes and their distance to the MANOVA law.
//!
//! Pooling convention: each trial contributes the eigenvalues of the `k × k`
//! Gram submatrix of the kept columns, truncated to its `min(k, m)` largest
//! values. Those are the eigenvalues that can be nonzero; the remaining
//! `k − m` (when `k > m`) are structural zeros from the rank bound, and erased
//! columns contribute nothing. The pooled values are compared with the MANOVA
//! probability law, whose mass is spread over `min(p, γ) n` dimensions.

mod eigen;

pub use eigen::{jacobi_eigenvalues, HERMITIAN_TOL};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::erasure_moments::{ErasureModel, MomentEstimate};
use crate::error::{Error, Result};
use crate::frames::{gram, Frame};
use crate::manova::{ManovaLaw, ManovaParams};
use crate::numeric::mean_and_stderr;

/// Eigenvalues below `-PSD_CLAMP` are an error for positive semidefinite inputs.
pub const PSD_CLAMP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Nonincreasing.
    pub values: Vec<f64>,
    pub source_dims: (usize, usize),
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ λ^d`.
    pub fn power_sum(&self, d: usize) -> f64 {
        self.values.iter().map(|v| v.powi(d as i32)).sum()
    }
}

/// Eigenvalues of a Hermitian matrix, checked against its trace and Frobenius norm.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Spectrum> {
    let mut values = jacobi_eigenvalues(a)?;
    values.sort_by(|x, y| y.total_cmp(x));
    let trace: f64 = a.diagonal().iter().map(|z| z.re).sum();
    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    let tol = 1e-8 * frob.sqrt().max(1.0);
    if (sum - trace).abs() > tol || (sum_sq - frob).abs() > 1e-8 * frob.max(1.0) {
        return Err(Error::Eigen(format!(
            "consistency check failed: Σλ={sum} vs tr={trace}, Σλ²={sum_sq} vs ‖A‖²={frob}"
        )));
    }
    Ok(Spectrum {
        values,
        source_dims: a.shape(),
    })
}

/// As [`hermitian_eigenvalues`], for positive semidefinite input: values in
/// `[-PSD_CLAMP, 0)` become 0, anything more negative is an error.
pub fn psd_eigenvalues(a: &DMatrix<Complex64>) -> Result<Spectrum> {
    let mut s = hermitian_eigenvalues(a)?;
    for v in s.values.iter_mut() {
        if *v < -PSD_CLAMP {
            return Err(Error::NegativeEigenvalue(*v));
        }
        *v = v.max(0.0);
    }
    Ok(s)
}

/// One spectrum per trial; trial `t` uses the keep-pattern from stream `t`.
/// Empty keep-patterns give empty spectra.
pub fn subset_spectrum_samples(
    frame: &Frame,
    model: &ErasureModel,
    trials: usize,
) -> Result<Vec<Spectrum>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let g = gram(frame);
    let n = frame.n();
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let keep = model.sample_keep(n, t);
            if keep.is_empty() {
                return Ok(Spectrum {
                    values: Vec::new(),
                    source_dims: (0, 0),
                });
            }
            psd_eigenvalues(&g.principal_submatrix(&keep))
        })
        .collect()
}

/// Pooled eigenvalues under the rank-truncation convention (see module docs).
pub fn pooled_eigenvalues(spectra: &[Spectrum], m: usize) -> Vec<f64> {
    spectra
        .iter()
        .flat_map(|s| s.values.iter().take(s.len().min(m)).copied())
        .collect()
}

/// Per-trial `(1/n) Σ λ^d`, averaged: an estimate of `m_d` from the spectra.
pub fn spectral_moment(spectra: &[Spectrum], n: usize, d: usize) -> MomentEstimate {
    let per_trial: Vec<f64> = spectra.iter().map(|s| s.power_sum(d) / n as f64).collect();
    let (value, stderr) = mean_and_stderr(&per_trial);
    MomentEstimate {
        value,
        stderr,
        trials: spectra.len(),
    }
}

/// Kolmogorov–Smirnov distance `sup_t |F_N(t) − F(t)|` for a distribution
/// function with possible jumps, given both `F(t)` and `F(t−)`.
pub fn ks_statistic<C, L>(samples: &[f64], cdf: C, cdf_left: L) -> Result<f64>
where
    C: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let total = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        // ECDF jumps from i/N to j/N at v
        d = d.max((j as f64 / total - cdf(v)).abs());
        d = d.max((i as f64 / total - cdf_left(v)).abs());
        i = j;
    }
    Ok(d.min(1.0))
}

/// KS distance of pooled eigenvalues to MANOVA(γ, p).
///
/// Values within a relative `1e-8` of the atom location `1/γ` are treated as
/// lying on the atom, so rounding in the eigensolver cannot split it.
pub fn ks_distance(samples: &[f64], params: &ManovaParams) -> Result<f64> {
    let law = ManovaLaw::new(*params)?;
    ks_distance_to(samples, &law)
}

pub fn ks_distance_to(samples: &[f64], law: &ManovaLaw) -> Result<f64> {
    let atom = law.support().atom_location;
    let snapped: Vec<f64> = samples
        .iter()
        .map(|&v| {
            if (v - atom).abs() <= 1e-8 * atom {
                atom
            } else {
                v
            }
        })
        .collect();
    ks_statistic(&snapped, |t| law.cdf(t), |t| law.cdf_left(t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub gamma: f64,
    pub p: f64,
    pub pool_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub distance: f64,
}

/// Samples subset spectra of `frame`, pools them and measures the KS distance
/// to MANOVA(m/n, p).
pub fn subset_ks_report(frame: &Frame, model: &ErasureModel, trials: usize) -> Result<KsReport> {
    let spectra = subset_spectrum_samples(frame, model, trials)?;
    let pool = pooled_eigenvalues(&spectra, frame.m());
    let params = ManovaParams::for_frame(frame.m(), frame.n(), model.p())?;
    Ok(KsReport {
        gamma: params.gamma(),
        p: params.p(),
        pool_size: pool.len(),
        trials,
        seed: model.seed(),
        distance: ks_distance(&pool, &params)?,
    })
}
