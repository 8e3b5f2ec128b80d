//! Series-in-`m` kernels behind the closed-form pmf and state probabilities.
//!
//! Both branches reduce to sums of the shape
//!
//! ```text
//! S(len) = Σ_{m≥0} c_m · Π_{i<len} (s_m + i) / (i + 1),
//! c_m    = (-1)^m (μ)_m x^m / m!
//! ```
//!
//! * low branch (`ξ < 1`): `x = ξ`, `s_m = α(m + μ) + offset`, the product is
//!   the gamma ratio `Γ(α(m+μ)+offset+len) / (Γ(α(m+μ)+offset) len!)`;
//! * high branch (`ξ > 1`): `x = 1/ξ`, `s_m = offset - αm`, the product is
//!   `(-1)^len C(αm - offset, len)`, which vanishes exactly at gamma poles.
//!
//! Gamma ratios are never formed from gamma values; every factor of the
//! product is a ratio of order `s_m / i`. One pass over `m` serves every
//! prefix length `0..=max_len` at once.

use crate::error::{Error, Result};
use crate::extended::{DoubleDouble, Scalar};
use crate::specfun::Precision;

/// Truncation policy for the closed-form series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormConfig {
    /// Stop once `|term| < tol · |partial sum|` on the decaying side.
    pub tol: f64,
    pub max_terms: usize,
    pub precision: Precision,
    /// Largest tolerated rounding error estimate.
    pub rounding_guard: f64,
}

impl Default for ClosedFormConfig {
    fn default() -> Self {
        ClosedFormConfig {
            tol: 1e-17,
            max_terms: 10_000,
            precision: Precision::Extended,
            rounding_guard: 1e-10,
        }
    }
}

impl ClosedFormConfig {
    /// Hardware doubles only.
    pub fn double() -> Self {
        ClosedFormConfig {
            precision: Precision::Double,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kernel {
    /// `s_m = α(m + μ) + offset`, `x = ξ`.
    Low { offset: f64 },
    /// `s_m = offset - αm`, `x = 1/ξ`.
    High { offset: f64 },
}

/// Multiplier on the observed shadow gap.
const ROUNDING_SAFETY: f64 = 10.0;

/// Unit roundoff of double-double arithmetic, `2^-104`.
const DD_UNIT_ROUNDOFF: f64 = 4.930380657631324e-32;

/// Number of consecutive shrinking terms required before stopping.
const DECREASING_RUN: u32 = 3;

struct LenState {
    prev_mag: f64,
    run: u32,
    done: bool,
    abs_sum: f64,
}

/// `scale · S(len)` for every `len` in `0..=max_len`; the rounding guard
/// applies to the scaled values.
pub(crate) fn prefix_sums(
    kernel: Kernel,
    alpha: f64,
    order: Order,
    xi: f64,
    max_len: usize,
    scale: f64,
    cfg: &ClosedFormConfig,
) -> Result<Vec<f64>> {
    match cfg.precision {
        Precision::Double => prefix_sums_in::<f64>(kernel, alpha, order, xi, max_len, scale, cfg, f64::EPSILON),
        Precision::Extended => {
            prefix_sums_in::<DoubleDouble>(kernel, alpha, order, xi, max_len, scale, cfg, DD_UNIT_ROUNDOFF)
        }
    }
}

/// The order `μ = n ν` kept as an exact product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Order {
    pub n: f64,
    pub nu: f64,
}

impl Order {
    pub fn is_zero(&self) -> bool {
        self.n == 0.0 || self.nu == 0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn prefix_sums_in<S: Scalar>(
    kernel: Kernel,
    alpha: f64,
    order: Order,
    xi: f64,
    max_len: usize,
    scale: f64,
    cfg: &ClosedFormConfig,
    unit: f64,
) -> Result<Vec<f64>> {
    // (0)_m = 0 for m ≥ 1: only the m = 0 term survives
    if order.is_zero() {
        return Ok(zero_order_sums(kernel, max_len)
            .into_iter()
            .map(|v| scale * v)
            .collect());
    }

    let one = S::one();
    let mu = S::product(order.n, order.nu);
    let alpha_s = S::from_f64(alpha);
    let x = match kernel {
        Kernel::Low { .. } => S::from_f64(xi),
        Kernel::High { .. } => one / S::from_f64(xi),
    };
    let inv: Vec<S> = (0..max_len).map(|i| one / S::from_f64(i as f64 + 1.0)).collect();

    // a shadow evaluation with a different association order; the gap
    // between the two sums measures the rounding error actually incurred
    let mut sums = vec![S::zero(); max_len + 1];
    let mut shadow = vec![S::zero(); max_len + 1];
    let mut states: Vec<LenState> = (0..=max_len)
        .map(|_| LenState {
            prev_mag: f64::INFINITY,
            run: 0,
            done: false,
            abs_sum: 0.0,
        })
        .collect();
    let mut remaining = max_len + 1;
    let mut coeff = one;
    let mut coeff_shadow = one;

    for m in 0..cfg.max_terms {
        let mf = m as f64;
        let base = match kernel {
            Kernel::Low { offset } => alpha_s * (S::from_f64(mf) + mu) + S::from_f64(offset),
            Kernel::High { offset } => S::from_f64(offset) - S::product(alpha, mf),
        };
        let mut factor = base;
        let mut prod = coeff;
        let mut prod_shadow = coeff_shadow;
        for len in 0..=max_len {
            if len > 0 {
                prod *= factor * inv[len - 1];
                factor += one;
                prod_shadow = prod_shadow * (base + S::from_f64((len - 1) as f64)) / S::from_f64(len as f64);
            }
            sums[len] += prod;
            shadow[len] += prod_shadow;
            let mag = prod.abs().to_f64();
            let st = &mut states[len];
            st.abs_sum += mag;
            if st.done {
                continue;
            }
            st.run = if mag < st.prev_mag || mag == 0.0 { st.run + 1 } else { 0 };
            st.prev_mag = mag;
            let past_sign_changes = match kernel {
                Kernel::Low { .. } => true,
                Kernel::High { offset } => alpha * mf > len as f64 + offset + 1.0,
            };
            if past_sign_changes && st.run >= DECREASING_RUN && mag <= cfg.tol * sums[len].abs().to_f64() {
                st.done = true;
                remaining -= 1;
            }
        }
        if remaining == 0 {
            return finish(sums, &shadow, &states, m + 1, scale, cfg, unit);
        }
        coeff *= -(mu + S::from_f64(mf)) * x * (one / S::from_f64(mf + 1.0));
        coeff_shadow = -(coeff_shadow * x) * (mu + S::from_f64(mf)) / S::from_f64(mf + 1.0);
        if coeff.is_zero() {
            // x^m underflowed while some prefix still needs terms
            return Err(Error::NonConvergence {
                what: "closed-form series (coefficient underflow)",
                terms: m + 1,
                est_error: f64::NAN,
                cancellation: f64::NAN,
            });
        }
    }

    let worst = states
        .iter()
        .filter(|s| !s.done)
        .map(|s| s.prev_mag)
        .fold(0.0, f64::max);
    Err(Error::NonConvergence {
        what: "closed-form series",
        terms: cfg.max_terms,
        est_error: worst,
        cancellation: f64::NAN,
    })
}

fn zero_order_sums(kernel: Kernel, max_len: usize) -> Vec<f64> {
    let offset = match kernel {
        Kernel::Low { offset } | Kernel::High { offset } => offset,
    };
    // m = 0: Π_{i<len} (offset + i)/(i + 1), which is 1 for offset 1 and
    // δ_{len,0} for offset 0
    let mut out = Vec::with_capacity(max_len + 1);
    let mut prod = 1.0;
    for len in 0..=max_len {
        if len > 0 {
            prod *= (offset + (len - 1) as f64) / len as f64;
        }
        out.push(prod);
    }
    out
}

fn finish<S: Scalar>(
    sums: Vec<S>,
    shadow: &[S],
    states: &[LenState],
    terms: usize,
    scale: f64,
    cfg: &ClosedFormConfig,
    unit: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sums.len());
    for ((sum, twin), st) in sums.into_iter().zip(shadow).zip(states) {
        let value = sum.to_f64();
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                what: "closed-form series (overflow)",
                terms,
                est_error: f64::INFINITY,
                cancellation: f64::NAN,
            });
        }
        let cancellation = if value == 0.0 {
            if st.abs_sum == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            st.abs_sum / value.abs()
        };
        let rounding = scale * ROUNDING_SAFETY * ((sum - *twin).abs().to_f64() + unit * value.abs());
        if rounding > cfg.rounding_guard {
            return Err(Error::NonConvergence {
                what: "closed-form series (rounding guard)",
                terms,
                est_error: rounding,
                cancellation,
            });
        }
        out.push(scale * value);
    }
    Ok(out)
}
