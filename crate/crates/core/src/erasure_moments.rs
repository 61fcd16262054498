//! Expected moments `m_d = E[tr((X'X)^d)] / n` of Bernoulli-erased frames `X = F P`.
//!
//! `m_d` is a polynomial in the keep-probability `p` with no constant term,
//! `m_d(p) = Σ_k a_{d,k} p^k`, where `a_{d,k}` collects the normalized
//! correlation cycles `c_{i1 i2} c_{i2 i3} ⋯ c_{id i1}` whose index tuple takes
//! exactly `k` distinct values. For `d <= 4` the coefficients follow from pair
//! sums of `|c_ij|²` and the traces `T_d = tr((FF')^d) / n`, without
//! enumerating index tuples.
//!
//! Two independent routes are provided for checking: exhaustive enumeration
//! over all `2^n` keep-patterns ([`bruteforce_moment`]) and Monte Carlo
//! ([`montecarlo_moment`]). Enumeration weights `p^k (1-p)^(n-k)` are formed
//! directly; with `n <= 24` they stay far from underflow for `p >= 1e-9`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{gram, Frame, GramMatrix};
use crate::numeric::{compensated_sum, mean_and_stderr, CompensatedSum};
use crate::rng;

/// Highest moment order with closed coefficient identities.
pub const MAX_CLOSED_ORDER: usize = 4;

/// Enumeration guard for [`bruteforce_moment`].
pub const MAX_BRUTEFORCE_N: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureModel {
    p: f64,
    seed: u64,
}

impl ErasureModel {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { p, seed })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Keep-pattern for trial `trial`; depends only on `(seed, trial)`.
    pub fn sample_keep(&self, n: usize, trial: u64) -> Vec<usize> {
        if self.p >= 1.0 {
            return (0..n).collect();
        }
        if self.p <= 0.0 {
            return Vec::new();
        }
        let mut rng = rng::stream(self.seed, trial);
        (0..n).filter(|_| rng.random_bool(self.p)).collect()
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn check_order(d: usize) -> Result<()> {
    if (1..=MAX_CLOSED_ORDER).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder {
            d,
            min: 1,
            max: MAX_CLOSED_ORDER,
        })
    }
}

/// Coefficients `a_{d,1}, …, a_{d,d}` of `m_d` as a polynomial in `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPolynomial {
    pub d: usize,
    pub coeffs: Vec<f64>,
}

impl MomentPolynomial {
    /// Horner evaluation of `Σ_k coeffs[k-1] p^k`.
    pub fn eval(&self, p: f64) -> f64 {
        p * self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * p + a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Pair statistics of `|c_ij|²` used by the coefficient identities.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSums {
    /// `(1/n) Σ_{i≠j} |c_ij|²`, equal to `a_{2,2}`.
    pub second: f64,
    /// `(1/n) Σ_{i≠j} |c_ij|⁴`.
    pub fourth: f64,
    /// Row energies `C_i = Σ_{j≠i} |c_ij|²`.
    pub row_energy: Vec<f64>,
    /// `(1/n) Σ_i C_i²`.
    pub row_energy_sq: f64,
}

impl CorrelationSums {
    pub fn of(g: &GramMatrix) -> Self {
        let n = g.n();
        let mut row_energy = vec![CompensatedSum::new(); n];
        let mut fourth = CompensatedSum::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = g.abs_sq(i, j);
                row_energy[i].add(v);
                row_energy[j].add(v);
                fourth.add(2.0 * v * v);
            }
        }
        let row_energy: Vec<f64> = row_energy.iter().map(CompensatedSum::value).collect();
        let nf = n as f64;
        Self {
            second: compensated_sum(row_energy.iter().copied()) / nf,
            fourth: fourth.value() / nf,
            row_energy_sq: compensated_sum(row_energy.iter().map(|c| c * c)) / nf,
            row_energy,
        }
    }
}

/// `T_d = tr((FF')^d) / n` by repeated multiplication of the `m × m` frame operator.
pub fn normalized_trace_power(frame: &Frame, d: usize) -> f64 {
    let n = frame.n() as f64;
    if d == 0 {
        return frame.m() as f64 / n;
    }
    let s = frame.frame_operator();
    trace_power(&s, d) / n
}

/// Real part of `tr(A^d)` for Hermitian `A`, `d >= 1`.
fn trace_power(a: &DMatrix<Complex64>, d: usize) -> f64 {
    match d {
        0 => a.nrows() as f64,
        1 => a.diagonal().iter().map(|z| z.re).sum(),
        2 => a.iter().map(|z| z.norm_sqr()).sum(),
        _ => {
            // tr(A^d) = <A^h, A^(d-h)> with h = floor(d/2); both factors Hermitian.
            let half = d / 2;
            let mut low = a.clone();
            for _ in 1..half {
                low = &low * a;
            }
            let high = if d.is_multiple_of(2) {
                low.clone()
            } else {
                &low * a
            };
            low.iter()
                .zip(high.iter())
                .map(|(x, y)| (x.conj() * y).re)
                .sum()
        }
    }
}

/// Exact coefficients `a_{d,k}` for `d ∈ 1..=4`.
pub fn moment_polynomial(frame: &Frame, d: usize) -> Result<MomentPolynomial> {
    check_order(d)?;
    if d == 1 {
        return Ok(MomentPolynomial {
            d,
            coeffs: vec![1.0],
        });
    }
    let sums = CorrelationSums::of(&gram(frame));
    Ok(polynomial_from_parts(frame, d, &sums))
}

fn polynomial_from_parts(frame: &Frame, d: usize, sums: &CorrelationSums) -> MomentPolynomial {
    let a22 = sums.second;
    let coeffs = match d {
        1 => vec![1.0],
        2 => vec![1.0, a22],
        3 => {
            let a32 = 3.0 * a22;
            let a33 = normalized_trace_power(frame, 3) - 1.0 - a32;
            vec![1.0, a32, a33]
        }
        4 => {
            let a33 = normalized_trace_power(frame, 3) - 1.0 - 3.0 * a22;
            let s4 = sums.fourth;
            let a42 = 6.0 * a22 + s4;
            let a43 = 4.0 * a33 + 2.0 * (sums.row_energy_sq - s4);
            let a44 = normalized_trace_power(frame, 4) - 1.0 - a42 - a43;
            vec![1.0, a42, a43, a44]
        }
        _ => unreachable!("order checked by caller"),
    };
    MomentPolynomial { d, coeffs }
}

/// `m_d(p)` from the coefficient identities.
pub fn expected_moment(frame: &Frame, p: f64, d: usize) -> Result<f64> {
    check_probability(p)?;
    Ok(moment_polynomial(frame, d)?.eval(p))
}

/// Per-size sums `Σ_{|S|=k} tr(G_S^d)` over every keep-pattern `S`.
///
/// Built once by enumerating all `2^n` principal submatrices of the Gram
/// matrix; any `p` is then a weighted sum over `k`.
#[derive(Clone, Debug)]
pub struct SubsetTraceTable {
    n: usize,
    /// `sums[d - 1][k]`
    sums: Vec<Vec<f64>>,
}

impl SubsetTraceTable {
    pub fn enumerate(frame: &Frame, max_order: usize) -> Result<Self> {
        let n = frame.n();
        if n > MAX_BRUTEFORCE_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_BRUTEFORCE_N,
            });
        }
        if max_order == 0 {
            return Err(Error::UnsupportedOrder {
                d: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        let g = gram(frame);
        let total: u64 = 1 << n;
        let chunks: u64 = total.min(256);
        let chunk_len = total / chunks;
        let partials: Vec<Vec<Vec<CompensatedSum>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![vec![CompensatedSum::new(); n + 1]; max_order];
                let mut idx = Vec::with_capacity(n);
                for mask in c * chunk_len..(c + 1) * chunk_len {
                    idx.clear();
                    idx.extend((0..n).filter(|&i| mask >> i & 1 == 1));
                    let k = idx.len();
                    if k == 0 {
                        continue;
                    }
                    let sub = g.principal_submatrix(&idx);
                    let mut power = sub.clone();
                    acc[0][k].add(k as f64);
                    for row in acc.iter_mut().skip(1) {
                        power = &power * &sub;
                        row[k].add(power.diagonal().iter().map(|z| z.re).sum());
                    }
                }
                acc
            })
            .collect();
        let sums = (0..max_order)
            .map(|d| {
                (0..=n)
                    .map(|k| {
                        let mut s = CompensatedSum::new();
                        for part in &partials {
                            s.add(part[d][k].value());
                        }
                        s.value()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, sums })
    }

    pub fn max_order(&self) -> usize {
        self.sums.len()
    }

    pub fn moment(&self, p: f64, d: usize) -> Result<f64> {
        check_probability(p)?;
        if d == 0 || d > self.max_order() {
            return Err(Error::UnsupportedOrder {
                d,
                min: 1,
                max: self.max_order(),
            });
        }
        let n = self.n;
        let total = compensated_sum(
            self.sums[d - 1]
                .iter()
                .enumerate()
                .map(|(k, s)| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32) * s),
        );
        Ok(total / n as f64)
    }
}

/// `m_d(p)` by exhaustive enumeration of keep-patterns (`n <= 24`); any `d >= 1`.
pub fn bruteforce_moment(frame: &Frame, p: f64, d: usize) -> Result<f64> {
    check_probability(p)?;
    SubsetTraceTable::enumerate(frame, d)?.moment(p, d)
}

/// `(1/n) tr(G_S^d)` for one keep-pattern.
pub(crate) fn subset_trace_power(g: &GramMatrix, keep: &[usize], d: usize) -> f64 {
    if keep.is_empty() {
        return 0.0;
    }
    trace_power(&g.principal_submatrix(keep), d) / g.n() as f64
}

/// Monte-Carlo estimate of `m_d(p)`; trial `t` draws its pattern from stream `t`.
pub fn montecarlo_moment(
    frame: &Frame,
    model: &ErasureModel,
    d: usize,
    trials: usize,
) -> Result<MomentEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if d == 0 {
        return Err(Error::UnsupportedOrder {
            d,
            min: 1,
            max: usize::MAX,
        });
    }
    let g = gram(frame);
    let n = frame.n();
    if model.p() <= 0.0 || model.p() >= 1.0 {
        let keep = model.sample_keep(n, 0);
        return Ok(MomentEstimate {
            value: subset_trace_power(&g, &keep, d),
            stderr: 0.0,
            trials,
        });
    }
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| subset_trace_power(&g, &model.sample_keep(n, t), d))
        .collect();
    let (value, stderr) = mean_and_stderr(&values);
    Ok(MomentEstimate {
        value,
        stderr,
        trials,
    })
}

/// Mean squared cross-correlation of a random subset, normalized by the
/// expected subset size `k = p n`: `(m_2 / p − 1) / (k − 1)`.
pub fn subset_rms(frame: &Frame, p: f64) -> Result<f64> {
    check_probability(p)?;
    let k = p * frame.n() as f64;
    if !(k > 1.0) {
        return Err(Error::SubsetTooSmall(k));
    }
    let m2 = expected_moment(frame, p, 2)?;
    Ok((m2 / p - 1.0) / (k - 1.0))
}
