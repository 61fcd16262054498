//! The erasure Welch bound and its relatives, with equality classification.
//!
//! For an `m × n` unit-norm frame and `d ∈ {2, 3, 4}`,
//! `m_d(p) >= M_d(m/n, p) + Δ_d(p, n)`, where `M_d` is the normalized MANOVA
//! moment and `Δ_4 = p²(1−p)² x²/(n−1)` (zero for `d = 2, 3`). Equality holds
//! for `d = 2, 3` exactly on tight frames and for `d = 4` exactly on
//! equiangular tight frames, for `0 < p < 1`.
//!
//! As `n → ∞`, equality at `d = 4` also holds for tight frames with equal
//! row energies `C_i` and vanishing mean fourth power of the correlations;
//! only the finite-`n` statement is classified here.

use serde::{Deserialize, Serialize};

use crate::erasure_moments::{check_probability, expected_moment, normalized_trace_power};
use crate::error::{Error, Result};
use crate::frames::{is_etf, is_utf, Frame, FrameMeta, CLASSIFY_TOL};
use crate::manova::{delta_correction, moment_closed, ManovaParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqualityClass {
    #[serde(rename = "ETF-equality")]
    EtfEquality,
    #[serde(rename = "UTF-equality")]
    UtfEquality,
    #[serde(rename = "strict")]
    Strict,
    #[serde(rename = "violation")]
    Violation,
}

impl std::fmt::Display for EqualityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EqualityClass::EtfEquality => "ETF-equality",
            EqualityClass::UtfEquality => "UTF-equality",
            EqualityClass::Strict => "strict",
            EqualityClass::Violation => "violation",
        })
    }
}

/// Tolerances for [`check_bound`] and [`trace_inequality_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Slack below `-violation` is a violation.
    pub violation: f64,
    /// `|slack| <= equality` is a candidate for an equality class.
    pub equality: f64,
    /// Tolerance passed to `is_utf` / `is_etf`.
    pub classify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            violation: 1e-9,
            equality: 1e-9,
            classify: CLASSIFY_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub moment: f64,
    pub bound: f64,
    pub slack: f64,
    pub equality_class: EqualityClass,
    pub params: BoundParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameMeta>,
}

impl BoundReport {
    pub fn with_frame_meta(mut self, meta: Option<FrameMeta>) -> Self {
        self.frame = meta;
        self
    }
}

fn check_bound_order(d: usize) -> Result<()> {
    if (2..=4).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder { d, min: 2, max: 4 })
    }
}

/// `M_d(m/n, p) + Δ_d(p, n)`.
pub fn erasure_welch_bound(m: usize, n: usize, p: f64, d: usize) -> Result<f64> {
    check_bound_order(d)?;
    let params = ManovaParams::for_frame(m, n, p)?;
    // Δ needs n >= 2; at n = 1 the frame is a single vector and x = 0
    let delta = if n >= 2 {
        delta_correction(&params, d, n)?
    } else {
        0.0
    };
    Ok(moment_closed(&params, d)? + delta)
}

/// Classifies the slack of `moment >= bound`.
///
/// Equality classes require the frame predicate as well as `|slack| <= tol`,
/// so near-tight numerical frames land in `strict`.
fn classify(frame: &Frame, slack: f64, tol: &Tolerances, etf_relevant: bool) -> EqualityClass {
    if slack < -tol.violation {
        EqualityClass::Violation
    } else if slack.abs() > tol.equality {
        EqualityClass::Strict
    } else if etf_relevant && is_etf(frame, tol.classify) {
        EqualityClass::EtfEquality
    } else if is_utf(frame, tol.classify) {
        EqualityClass::UtfEquality
    } else {
        EqualityClass::Strict
    }
}

/// Evaluates the erasure Welch bound of order `d` for `frame` at `p`.
pub fn check_bound(frame: &Frame, p: f64, d: usize, tol: &Tolerances) -> Result<BoundReport> {
    check_bound_order(d)?;
    check_probability(p)?;
    let (m, n) = (frame.m(), frame.n());
    let moment = expected_moment(frame, p, d)?;
    let bound = erasure_welch_bound(m, n, p, d)?;
    let slack = moment - bound;
    Ok(BoundReport {
        moment,
        bound,
        slack,
        equality_class: classify(frame, slack, tol, true),
        params: BoundParams { m, n, p, d },
        frame: None,
    })
}

/// `tr((FF')^d)/n >= (n/m)^(d−1)`, with equality exactly on tight frames.
pub fn trace_inequality_check(frame: &Frame, d: usize, tol: &Tolerances) -> Result<BoundReport> {
    if d == 0 {
        return Err(Error::UnsupportedOrder {
            d,
            min: 1,
            max: usize::MAX,
        });
    }
    let (m, n) = (frame.m(), frame.n());
    let moment = normalized_trace_power(frame, d);
    let bound = (n as f64 / m as f64).powi(d as i32 - 1);
    let slack = moment - bound;
    Ok(BoundReport {
        moment,
        bound,
        slack,
        equality_class: classify(frame, slack, tol, false),
        params: BoundParams { m, n, p: 1.0, d },
        frame: None,
    })
}

/// Lower bound on the subset mean squared correlation for expected subset
/// size `k`: `(k/m − k/n) / (k − 1)`.
pub fn subset_rms_bound(k: f64, m: usize, n: usize) -> Result<f64> {
    if !(k > 1.0) {
        return Err(Error::SubsetTooSmall(k));
    }
    if m == 0 || n < m || k > n as f64 {
        return Err(Error::InvalidParameter(format!(
            "need 1 < k <= n and m <= n (k={k}, m={m}, n={n})"
        )));
    }
    Ok((k / m as f64 - k / n as f64) / (k - 1.0))
}
