//! Continuous-time limit and long-time tails.

use num_complex::Complex64;

use super::{CtParams, Evaluator, PdtpParams, Resolved, Route, CLAMP_TOL};
use crate::error::{Error, Result};
use crate::laplace::{self, Inversion};
use crate::specfun::{self, SeriesEval};

/// Absolute accuracy requested from each Prabhakar evaluation, before
/// rescaling by the power prefactor.
const CT_TOL: f64 = 1e-15;

/// GFPP state probability
/// `x^{nν} [E^{nν}_{α,αnν+1}(-x) - x^ν E^{(n+1)ν}_{α,α(n+1)ν+1}(-x)]`, `x = ξ₀ t^α`.
///
/// Returns the evaluation record; `converged = false` when either Prabhakar
/// series hit the cancellation guard or the term cap.
pub fn ct_state_prob_eval(ct: &CtParams, n: u64, t: f64) -> Result<SeriesEval> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("ct_state_prob: need t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(SeriesEval {
            value: if n == 0 { 1.0 } else { 0.0 },
            est_abs_error: 0.0,
            terms_used: 1,
            converged: true,
            cancellation: 1.0,
        });
    }
    let (alpha, nu) = (ct.alpha(), ct.nu());
    let x = ct.xi0() * t.powf(alpha);
    let order = n as f64 * nu;
    let next = (n + 1) as f64 * nu;

    let pref_lo = x.powf(order);
    let pref_hi = x.powf(next);
    let lower = specfun::prabhakar_e(alpha, alpha * order + 1.0, order, -x, CT_TOL / pref_lo.max(1.0))?;
    let upper = specfun::prabhakar_e(alpha, alpha * next + 1.0, next, -x, CT_TOL / pref_hi.max(1.0))?;

    let raw = pref_lo * lower.value - pref_hi * upper.value;
    Ok(SeriesEval {
        value: if (-1e-12..0.0).contains(&raw) { 0.0 } else { raw },
        est_abs_error: pref_lo * lower.est_abs_error + pref_hi * upper.est_abs_error,
        terms_used: lower.terms_used.max(upper.terms_used),
        converged: lower.converged && upper.converged,
        cancellation: lower.cancellation.max(upper.cancellation),
    })
}

/// Series results with a larger error estimate than this go to the
/// Laplace route.
const SERIES_TRUST: f64 = 1e-13;
/// Largest error estimate a GFPP value may carry and still be returned.
const CT_ACCEPT: f64 = 1e-10;
/// Rounding of one series term relative to its size.
const SERIES_ROUNDING: f64 = 64.0 * f64::EPSILON;

/// How a GFPP value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtMethod {
    /// Prabhakar power series.
    Series,
    /// Talbot inversion of the renewal transform.
    Laplace,
}

impl CtMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CtMethod::Series => "series",
            CtMethod::Laplace => "laplace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtEval {
    pub value: f64,
    pub est_abs_error: f64,
    pub method: CtMethod,
    /// `est_abs_error` within the acceptance threshold.
    pub converged: bool,
}

/// GFPP state probability by inverting
/// `Φ̃⁽ⁿ⁾(s) = ψ̃(s)ⁿ (1 - ψ̃(s)) / s`, `ψ̃(s) = (ξ₀ / (s^α + ξ₀))^ν`.
pub fn ct_state_prob_laplace(ct: &CtParams, n: u64, t: f64) -> Result<Inversion> {
    let (alpha, nu, ln_xi0) = (ct.alpha(), ct.nu(), ct.xi0().ln());
    let xi0 = ct.xi0();
    laplace::talbot(
        |s: Complex64| {
            let log_psi = nu * (ln_xi0 - (s.powf(alpha) + xi0).ln());
            let psi_n = (n as f64 * log_psi).exp();
            -psi_n * (log_psi.exp() - 1.0) / s
        },
        t,
    )
}

/// GFPP state probability from the series where it is accurate and from
/// Laplace inversion otherwise.
pub fn ct_state_prob_routed(ct: &CtParams, n: u64, t: f64) -> Result<CtEval> {
    let series = ct_state_prob_eval(ct, n, t)?;
    // per-term gamma and power rounding grows with the cancellation ratio
    let series_err = series.est_abs_error + SERIES_ROUNDING * series.cancellation;
    let (value, est_abs_error, method) = if series.converged && series_err <= SERIES_TRUST {
        (series.value, series_err, CtMethod::Series)
    } else {
        let inv = ct_state_prob_laplace(ct, n, t)?;
        if series.converged && series_err <= inv.est_abs_error {
            (series.value, series_err, CtMethod::Series)
        } else {
            (inv.value, inv.est_abs_error, CtMethod::Laplace)
        }
    };
    let value = if (-CLAMP_TOL..0.0).contains(&value) { 0.0 } else { value };
    Ok(CtEval {
        value,
        est_abs_error,
        method,
        converged: est_abs_error <= CT_ACCEPT,
    })
}

/// GFPP state probability; an unreliable value becomes an error.
pub fn ct_state_prob(ct: &CtParams, n: u64, t: f64) -> Result<f64> {
    let e = ct_state_prob_routed(ct, n, t)?;
    if e.converged {
        Ok(e.value)
    } else {
        Err(Error::NonConvergence {
            what: "ct_state_prob",
            terms: 0,
            est_error: e.est_abs_error,
            cancellation: f64::NAN,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// `Φ⁽ⁿ⁾(t) ~ (ν/ξ) t^{-α} / Γ(1-α)`, the same for every `n`.
    State,
    /// `θ(t) ~ (αν/ξ) t^{-α-1} / Γ(1-α)`.
    Interarrival,
}

/// Power-law long-time asymptote for `α ∈ (0, 1)`.
///
/// Both laws are written in the discrete parameter `ξ`.
pub fn tail_asymptote(p: &PdtpParams, mode: TailMode, t: f64) -> Result<f64> {
    let alpha = p.alpha();
    if alpha >= 1.0 {
        return Err(Error::domain("tail_asymptote: no power-law tail at alpha = 1"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("tail_asymptote: need t > 0, got {t}")));
    }
    let scale = p.nu() / p.xi() / specfun::gamma(1.0 - alpha)?;
    Ok(match mode {
        TailMode::State => scale * t.powf(-alpha),
        TailMode::Interarrival => alpha * scale * t.powf(-alpha - 1.0),
    })
}

/// One step length of a well-scaled limit probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitProbeRow {
    pub h: f64,
    /// `round(t / h)`.
    pub steps: u64,
    /// `t / h - steps`.
    pub rounding_residue: f64,
    /// `ξ₀ h^α`.
    pub xi: f64,
    pub route: Resolved,
    pub discrete: f64,
    pub continuous: f64,
    /// `|discrete - continuous|`.
    pub gap: f64,
}

/// Compares `Φ⁽ⁿ⁾(round(t/h), ξ₀ h^α)` against the GFPP value at `t` for each `h`.
///
/// Steps whose scaled `ξ` falls in the oracle band are evaluated by the
/// oracle; the row records which route was used.
pub fn scaled_limit_probe(ct: &CtParams, n: u64, t: f64, h_list: &[f64]) -> Result<Vec<LimitProbeRow>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("scaled_limit_probe: need t > 0, got {t}")));
    }
    let continuous = ct_state_prob(ct, n, t)?;
    let evaluator = Evaluator::new(Route::Auto);
    h_list
        .iter()
        .map(|&h| {
            let p = ct.discretize(h)?;
            let exact_steps = t / h;
            let steps = exact_steps.round();
            let (discrete, route) = evaluator.state_prob_routed(&p, n, steps as u64)?;
            Ok(LimitProbeRow {
                h,
                steps: steps as u64,
                rounding_residue: exact_steps - steps,
                xi: p.xi(),
                route,
                discrete,
                continuous,
                gap: (discrete - continuous).abs(),
            })
        })
        .collect()
}
