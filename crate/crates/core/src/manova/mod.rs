//! Wachter's MANOVA(γ, p) law.
//!
//! The law has a continuous bulk on `[r−, r+]`,
//!
//! ```text
//! ρ(t) = γ √((t − r−)(r+ − t)) / (2π t (1 − γ t) min(p, γ)),
//! r± = (√((p/γ)(1 − γ)) ± √(1 − p))²,
//! ```
//!
//! plus an atom of weight `(p + γ − 1)⁺ / min(p, γ)` at `1/γ`. Two
//! normalizations are in play and are kept apart on purpose:
//!
//! * [`ManovaLaw::cdf`] is the distribution function of the probability law
//!   (bulk plus atom, total mass 1);
//! * [`moment_closed`] and [`moment_numeric`] return `min(p, γ)` times the
//!   law's moments, i.e. moments normalized by the full frame size `n`, which is
//!   the scale of the erased-frame moments `m_d`.
//!
//! Bulk integrals substitute `t = r− + (r+ − r−) sin²θ`, which turns the square
//! root edge factors into `sin θ cos θ` and leaves a smooth integrand on
//! `[0, π/2]`. The bulk never extends past the atom: `r+ ≤ 1/γ` with equality
//! exactly when `p + γ = 1`.
//!
//! `p = 0` is the degenerate law with unit mass at 0 and all moments 0.

pub mod quadrature;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::{adaptive, GaussLegendre};

const QUAD_ORDER: usize = 20;
const CDF_PANELS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManovaParams {
    gamma: f64,
    p: f64,
}

impl ManovaParams {
    pub fn new(gamma: f64, p: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma={gamma} outside (0, 1]"
            )));
        }
        crate::erasure_moments::check_probability(p)?;
        Ok(Self { gamma, p })
    }

    /// Parameters of an `m × n` frame erased with keep-probability `p`.
    pub fn for_frame(m: usize, n: usize, p: f64) -> Result<Self> {
        if m == 0 || n < m {
            return Err(Error::InvalidDimensions { m, n });
        }
        Self::new(m as f64 / n as f64, p)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `1/γ − 1`.
    pub fn x(&self) -> f64 {
        1.0 / self.gamma - 1.0
    }

    /// `min(p, γ)`: fraction of the `n` dimensions that carry eigenvalue mass.
    pub fn active_fraction(&self) -> f64 {
        self.p.min(self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManovaSupport {
    pub r_minus: f64,
    pub r_plus: f64,
    pub atom_location: f64,
    pub atom_weight: f64,
}

pub fn support(params: &ManovaParams) -> ManovaSupport {
    let (gamma, p) = (params.gamma, params.p);
    if p == 0.0 {
        return ManovaSupport {
            r_minus: 0.0,
            r_plus: 0.0,
            atom_location: 1.0 / gamma,
            atom_weight: 0.0,
        };
    }
    let a = (p / gamma * (1.0 - gamma)).sqrt();
    let b = (1.0 - p).sqrt();
    ManovaSupport {
        r_minus: (a - b) * (a - b),
        r_plus: (a + b) * (a + b),
        atom_location: 1.0 / gamma,
        atom_weight: ((p + gamma - 1.0).max(0.0) / p.min(gamma)).min(1.0),
    }
}

fn is_atomic_only(params: &ManovaParams, s: &ManovaSupport) -> bool {
    params.p == 0.0 || params.p == 1.0 || !(s.r_plus > s.r_minus)
}

/// Bulk density at `t` (zero outside `(r−, r+)`; the atom is reported by [`support`]).
pub fn density(t: f64, params: &ManovaParams) -> Result<f64> {
    let s = support(params);
    if is_atomic_only(params, &s) {
        return Err(Error::AtomicOnly {
            gamma: params.gamma,
            p: params.p,
        });
    }
    if !(t > s.r_minus && t < s.r_plus) {
        return Ok(0.0);
    }
    let g = params.gamma;
    Ok(g * ((t - s.r_minus) * (s.r_plus - t)).sqrt()
        / (2.0 * PI * t * (1.0 - g * t) * params.active_fraction()))
}

/// Closed-form `min(p, γ) ∫ t^d dμ` for `d ∈ 1..=4`.
pub fn moment_closed(params: &ManovaParams, d: usize) -> Result<f64> {
    let p = params.p;
    let x = params.x();
    let v = match d {
        1 => p,
        2 => p + p * p * x,
        3 => p + p * p * 3.0 * x + p.powi(3) * (x * x - x),
        4 => {
            p + p * p * 6.0 * x
                + p.powi(3) * (6.0 * x * x - 4.0 * x)
                + p.powi(4) * (x.powi(3) - 3.0 * x * x + x)
        }
        _ => return Err(Error::UnsupportedOrder { d, min: 1, max: 4 }),
    };
    Ok(v)
}

/// Finite-size correction: `p²(1−p)² x² / (n−1)` at `d = 4`, zero at `d = 2, 3`.
pub fn delta_correction(params: &ManovaParams, d: usize, n: usize) -> Result<f64> {
    if !(2..=4).contains(&d) {
        return Err(Error::UnsupportedOrder { d, min: 2, max: 4 });
    }
    if n < 2 {
        return Err(Error::TooFewVectors { n, needed: 2 });
    }
    if d < 4 {
        return Ok(0.0);
    }
    let p = params.p;
    let x = params.x();
    Ok(p * p * (1.0 - p) * (1.0 - p) * x * x / (n - 1) as f64)
}

/// `min(p, γ) [∫ t^d ρ(t) dt + atom_weight · γ^(−d)]` by quadrature.
pub fn moment_numeric(params: &ManovaParams, d: usize) -> Result<f64> {
    moment_numeric_with_order(params, d, QUAD_ORDER)
}

pub fn moment_numeric_with_order(params: &ManovaParams, d: usize, order: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::UnsupportedOrder {
            d,
            min: 1,
            max: usize::MAX,
        });
    }
    let law = ManovaLaw::new(*params)?;
    let bulk = law.bulk_integral(|t| t.powi(d as i32), order)?;
    let atom = law.support.atom_weight * law.support.atom_location.powi(d as i32);
    Ok(params.active_fraction() * (bulk + atom))
}

/// Distribution function of the full law at `t`.
pub fn cdf(t: f64, params: &ManovaParams) -> Result<f64> {
    Ok(ManovaLaw::new(*params)?.cdf(t))
}

/// A MANOVA law with its bulk distribution function tabulated on `θ` panels.
#[derive(Clone, Debug)]
pub struct ManovaLaw {
    params: ManovaParams,
    support: ManovaSupport,
    /// `1/γ − r+`, clamped at 0.
    gap: f64,
    rule: GaussLegendre,
    /// Bulk mass below panel boundary `k`, `cumulative.len() == CDF_PANELS + 1`.
    cumulative: Vec<f64>,
}

impl ManovaLaw {
    pub fn new(params: ManovaParams) -> Result<Self> {
        let support = support(&params);
        let raw_gap = support.atom_location - support.r_plus;
        if raw_gap < -1e-12 * support.atom_location {
            return Err(Error::InvalidParameter(format!(
                "bulk edge {} beyond atom location {}",
                support.r_plus, support.atom_location
            )));
        }
        let mut law = Self {
            params,
            support,
            gap: raw_gap.max(0.0),
            rule: GaussLegendre::new(QUAD_ORDER),
            cumulative: vec![0.0; CDF_PANELS + 1],
        };
        if !law.is_atomic_only() {
            let h = FRAC_PI_2 / CDF_PANELS as f64;
            let mut acc = crate::numeric::CompensatedSum::new();
            for k in 0..CDF_PANELS {
                let lo = k as f64 * h;
                acc.add(
                    law.rule
                        .integrate(|th| law.theta_integrand(th, 1.0), lo, lo + h),
                );
                law.cumulative[k + 1] = acc.value();
            }
        }
        Ok(law)
    }

    pub fn params(&self) -> &ManovaParams {
        &self.params
    }

    pub fn support(&self) -> &ManovaSupport {
        &self.support
    }

    pub fn is_atomic_only(&self) -> bool {
        is_atomic_only(&self.params, &self.support)
    }

    fn width(&self) -> f64 {
        self.support.r_plus - self.support.r_minus
    }

    fn t_of_theta(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.support.r_minus + self.width() * s * s
    }

    /// `ρ(t(θ)) dt/dθ · weight`, written so the edge factors cancel analytically.
    fn theta_integrand(&self, theta: f64, weight: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let w = self.width();
        let t = self.support.r_minus + w * s * s;
        weight * w * w * s * s * c * c
            / (PI * t * (self.gap + w * c * c) * self.params.active_fraction())
    }

    /// `∫ g(t) ρ(t) dt` over the bulk (adaptive Gauss–Legendre in `θ`).
    pub fn bulk_integral<G: Fn(f64) -> f64>(&self, g: G, order: usize) -> Result<f64> {
        if self.is_atomic_only() {
            return Ok(0.0);
        }
        let rule = if order == QUAD_ORDER {
            self.rule.clone()
        } else {
            GaussLegendre::new(order)
        };
        let f = |th: f64| self.theta_integrand(th, g(self.t_of_theta(th)));
        let scale = g(self.support.r_plus)
            .abs()
            .max(g(self.support.r_minus).abs())
            .max(1.0);
        Ok(adaptive(&rule, &f, 0.0, FRAC_PI_2, 1e-13 * scale)?.value)
    }

    /// Total bulk mass; equals `1 − atom_weight` up to quadrature error.
    pub fn bulk_mass(&self) -> f64 {
        self.cumulative[CDF_PANELS]
    }

    fn theta_of_t(&self, t: f64) -> f64 {
        let u = ((t - self.support.r_minus) / self.width()).clamp(0.0, 1.0);
        u.sqrt().asin()
    }

    fn bulk_cdf_theta(&self, theta: f64) -> f64 {
        let h = FRAC_PI_2 / CDF_PANELS as f64;
        let k = ((theta / h) as usize).min(CDF_PANELS - 1);
        let lo = k as f64 * h;
        self.cumulative[k]
            + self
                .rule
                .integrate(|th| self.theta_integrand(th, 1.0), lo, theta)
    }

    fn bulk_cdf(&self, t: f64) -> f64 {
        if self.is_atomic_only() || t <= self.support.r_minus {
            0.0
        } else if t >= self.support.r_plus {
            self.bulk_mass()
        } else {
            self.bulk_cdf_theta(self.theta_of_t(t))
        }
    }

    /// `P(T <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if self.params.p == 0.0 {
            return if t >= 0.0 { 1.0 } else { 0.0 };
        }
        if t >= self.upper_edge() {
            return 1.0;
        }
        let atom = if t >= self.support.atom_location {
            self.support.atom_weight
        } else {
            0.0
        };
        (self.bulk_cdf(t) + atom).min(1.0)
    }

    /// Top of the support: the atom if it carries mass, else `r+`.
    fn upper_edge(&self) -> f64 {
        if self.support.atom_weight > 0.0 {
            self.support.atom_location
        } else {
            self.support.r_plus
        }
    }

    /// `P(T < t)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        if self.params.p == 0.0 {
            return if t > 0.0 { 1.0 } else { 0.0 };
        }
        if t > self.upper_edge() {
            return 1.0;
        }
        let atom = if t > self.support.atom_location {
            self.support.atom_weight
        } else {
            0.0
        };
        (self.bulk_cdf(t) + atom).min(1.0)
    }

    /// Smallest `t` with `cdf(t) >= u`.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.params.p == 0.0 {
            return 0.0;
        }
        let bulk = self.bulk_mass();
        if self.is_atomic_only() || u > bulk {
            return self.support.atom_location;
        }
        if u <= 0.0 {
            return self.support.r_minus;
        }
        let h = FRAC_PI_2 / CDF_PANELS as f64;
        let k = self
            .cumulative
            .partition_point(|&c| c < u)
            .clamp(1, CDF_PANELS)
            - 1;
        let (mut lo, mut hi) = (k as f64 * h, (k + 1) as f64 * h);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.bulk_cdf_theta(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 {
                break;
            }
        }
        self.t_of_theta(hi)
    }
}
