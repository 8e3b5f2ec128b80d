//! Scalar special-function kernels.
//!
//! Everything here works with signed logarithms so that gamma ratios spanning
//! hundreds of orders of magnitude never overflow. A gamma pole is encoded as
//! `sign == 0` with `log_abs == +inf`, which makes every `1/Γ` factor an exact
//! zero instead of a NaN.
//!
//! The Prabhakar function
//!
//! ```text
//! E_{a,b}^c(z) = Σ_{m≥0} (c)_m z^m / (m! Γ(a m + b))
//! ```
//!
//! is summed directly. For large negative `z` the alternating series loses
//! digits to cancellation; rather than return garbage the evaluator reports
//! `converged = false` once `Σ|term| / |Σ term|` exceeds the configured guard.

use crate::counting::CtParams;
use crate::error::{Error, Result};
use crate::extended::{CompensatedSum, DoubleDouble, Scalar};

/// Signed natural logarithm of a real quantity: `value = sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub log_abs: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog { log_abs: 0.0, sign: 1 };
    pub const ZERO: SignedLog = SignedLog {
        log_abs: f64::NEG_INFINITY,
        sign: 0,
    };
    /// Marker for a gamma pole: `|Γ| = ∞`, sign undefined.
    pub const POLE: SignedLog = SignedLog {
        log_abs: f64::INFINITY,
        sign: 0,
    };

    pub fn is_zero(&self) -> bool {
        self.sign == 0 && self.log_abs == f64::NEG_INFINITY
    }

    pub fn is_pole(&self) -> bool {
        self.sign == 0 && self.log_abs == f64::INFINITY
    }

    pub fn exp(&self) -> f64 {
        match self.sign {
            0 => {
                if self.is_pole() {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// `1 / self`; a pole becomes an exact zero.
    pub fn recip(&self) -> SignedLog {
        if self.is_pole() {
            SignedLog::ZERO
        } else if self.is_zero() {
            SignedLog::POLE
        } else {
            SignedLog {
                log_abs: -self.log_abs,
                sign: self.sign,
            }
        }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `log|Γ(x)|` together with the sign of `Γ(x)`.
///
/// Poles at `0, -1, -2, …` return [`SignedLog::POLE`].
pub fn log_gamma_signed(x: f64) -> Result<SignedLog> {
    if !x.is_finite() {
        return Err(Error::domain(format!("log_gamma_signed: non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Ok(SignedLog::POLE);
    }
    let (lg, sign) = libm::lgamma_r(x);
    Ok(SignedLog {
        log_abs: lg,
        sign: if sign < 0 { -1 } else { 1 },
    })
}

/// `Γ(x)` for moderate arguments; poles map to `+inf`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma: non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Ok(f64::INFINITY);
    }
    Ok(libm::tgamma(x))
}

/// Direct-product cutoff for the Pochhammer symbol; beyond it the log-gamma
/// difference is cheaper and accurate enough.
const POCHHAMMER_DIRECT_MAX: u64 = 64;

/// Signed log of the rising factorial `(c)_m = Γ(c+m)/Γ(c)`.
pub fn pochhammer_log(c: f64, m: u64) -> Result<SignedLog> {
    if !c.is_finite() {
        return Err(Error::domain(format!("pochhammer_log: non-finite argument {c}")));
    }
    if m == 0 {
        return Ok(SignedLog::ONE);
    }
    // (c)_m contains the factor (c + i) = 0 for some i < m
    if is_nonpositive_integer(c) && -c < m as f64 {
        return Ok(SignedLog::ZERO);
    }
    if m <= POCHHAMMER_DIRECT_MAX || c < 0.0 {
        let mut log_abs = 0.0;
        let mut negatives = 0u64;
        for i in 0..m {
            let f = c + i as f64;
            if f < 0.0 {
                negatives += 1;
            }
            log_abs += f.abs().ln();
        }
        return Ok(SignedLog {
            log_abs,
            sign: if negatives % 2 == 1 { -1 } else { 1 },
        });
    }
    let num = log_gamma_signed(c + m as f64)?;
    let den = log_gamma_signed(c)?;
    Ok(SignedLog {
        log_abs: num.log_abs - den.log_abs,
        sign: num.sign * den.sign,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Hardware doubles with Neumaier compensation.
    Double,
    /// Double-double accumulation.
    Extended,
}

/// Truncation and accuracy policy for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub tol: f64,
    pub max_terms: usize,
    pub cancellation_guard: f64,
    pub precision: Precision,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tol: 1e-15,
            max_terms: 10_000,
            cancellation_guard: 1e8,
            precision: Precision::Double,
        }
    }
}

impl SeriesConfig {
    pub fn with_tol(tol: f64) -> Self {
        SeriesConfig { tol, ..Self::default() }
    }
}

/// Outcome of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    /// Magnitude of the first neglected term.
    pub est_abs_error: f64,
    pub terms_used: usize,
    pub converged: bool,
    /// `Σ|term| / |Σ term|`.
    pub cancellation: f64,
}

impl SeriesEval {
    pub fn into_result(self, what: &'static str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                what,
                terms: self.terms_used,
                est_error: self.est_abs_error,
                cancellation: self.cancellation,
            })
        }
    }
}

/// Three-parameter Mittag-Leffler (Prabhakar) function `E_{a,b}^c(z)` with
/// an absolute tolerance `tol` and otherwise default settings.
pub fn prabhakar_e(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<SeriesEval> {
    prabhakar_e_with(a, b, c, z, &SeriesConfig::with_tol(tol))
}

pub fn prabhakar_e_with(a: f64, b: f64, c: f64, z: f64, cfg: &SeriesConfig) -> Result<SeriesEval> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::domain(format!(
            "prabhakar_e: need a > 0 and b > 0, got a = {a}, b = {b}"
        )));
    }
    if !c.is_finite() || !z.is_finite() {
        return Err(Error::domain("prabhakar_e: non-finite c or z"));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::domain(format!(
            "prabhakar_e: tol must be positive, got {}",
            cfg.tol
        )));
    }
    prabhakar_sum(a, b, c, z, cfg.precision, cfg)
}

/// Signed log of the `m`-th Prabhakar term.
fn prabhakar_term(a: f64, b: f64, c: f64, ln_abs_z: f64, z_neg: bool, m: u64) -> Result<SignedLog> {
    let poch = pochhammer_log(c, m)?;
    if poch.is_zero() {
        return Ok(SignedLog::ZERO);
    }
    let inv_gamma = log_gamma_signed(a * m as f64 + b)?.recip();
    if inv_gamma.is_zero() {
        return Ok(SignedLog::ZERO);
    }
    let log_fact = libm::lgamma(m as f64 + 1.0);
    let z_power = if m == 0 { 0.0 } else { m as f64 * ln_abs_z };
    let mut sign = poch.sign * inv_gamma.sign;
    if z_neg && m % 2 == 1 {
        sign = -sign;
    }
    Ok(SignedLog {
        log_abs: poch.log_abs + z_power - log_fact + inv_gamma.log_abs,
        sign,
    })
}

fn prabhakar_sum(a: f64, b: f64, c: f64, z: f64, precision: Precision, cfg: &SeriesConfig) -> Result<SeriesEval> {
    let ln_abs_z = z.abs().ln();
    let z_neg = z < 0.0;
    let mut wide = DoubleDouble::ZERO;
    let mut abs_sum = 0.0;
    let mut comp = CompensatedSum::new();
    let mut prev_mag = f64::INFINITY;
    let mut decreasing_run = 0usize;
    let mut terms = 0usize;
    let mut stopped = false;

    for m in 0..cfg.max_terms as u64 {
        let term = if z == 0.0 && m > 0 {
            SignedLog::ZERO
        } else {
            prabhakar_term(a, b, c, ln_abs_z, z_neg, m)?
        };
        let value = term.exp();
        let mag = value.abs();
        match precision {
            Precision::Double => comp.add(value),
            Precision::Extended => wide = wide.add_f64(value),
        }
        abs_sum += mag;
        terms += 1;

        decreasing_run = if mag < prev_mag || mag == 0.0 {
            decreasing_run + 1
        } else {
            0
        };
        prev_mag = mag;
        // past every sign change of (c)_m, below tolerance and on the
        // decaying side of the envelope
        if m >= 1 && mag < cfg.tol && decreasing_run >= 3 && (c + m as f64 > 0.0 || mag == 0.0) {
            stopped = true;
            break;
        }
        if m >= 1 && term.is_zero() && pochhammer_log(c, m)?.is_zero() {
            // (c)_m vanishes for every later m as well
            stopped = true;
            break;
        }
    }

    let value = match precision {
        Precision::Double => comp.value(),
        Precision::Extended => wide.to_f64(),
    };
    let est_abs_error = if stopped {
        prabhakar_term(a, b, c, ln_abs_z, z_neg, terms as u64)?.exp().abs()
    } else {
        prev_mag
    };
    let cancellation = if value == 0.0 {
        if abs_sum == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        abs_sum / value.abs()
    };
    let converged = stopped && est_abs_error <= cfg.tol && cancellation <= cfg.cancellation_guard;
    Ok(SeriesEval {
        value,
        est_abs_error,
        terms_used: terms,
        converged,
        cancellation,
    })
}

/// Continuous-time Prabhakar waiting-time density
/// `χ(t) = ξ₀^ν t^{να-1} E_{α,να}^ν(-ξ₀ t^α)`.
///
/// Non-convergence is reported through the returned [`SeriesEval`] flag.
pub fn prabhakar_density(ct: &CtParams, t: f64) -> Result<SeriesEval> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("prabhakar_density: need t > 0, got {t}")));
    }
    let (alpha, nu, xi0) = (ct.alpha(), ct.nu(), ct.xi0());
    let prefactor = xi0.powf(nu) * t.powf(nu * alpha - 1.0);
    let tol = 1e-15 / prefactor.max(1.0);
    let e = prabhakar_e(alpha, nu * alpha, nu, -xi0 * t.powf(alpha), tol)?;
    Ok(SeriesEval {
        value: (prefactor * e.value).max(0.0),
        est_abs_error: prefactor * e.est_abs_error,
        ..e
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_special_points() {
        assert_eq!(log_gamma_signed(1.0).unwrap(), SignedLog::ONE);
        let half = log_gamma_signed(0.5).unwrap();
        assert_eq!(half.sign, 1);
        assert!((half.log_abs - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-15);
        let pole = log_gamma_signed(-1.0).unwrap();
        assert!(pole.is_pole());
        assert_eq!(pole.recip().exp(), 0.0);
        assert!(log_gamma_signed(0.0).unwrap().is_pole());
        assert!(log_gamma_signed(f64::NAN).is_err());
        assert!(log_gamma_signed(f64::INFINITY).is_err());
    }

    #[test]
    fn log_gamma_against_reference() {
        // 50-digit references
        let cases: &[(f64, f64, i8)] = &[
            (1e-8, 18.42068073818020888445275, 1),
            (0.1, 2.252712651734205902006238, 1),
            (1.5, -0.1207822376352452223455184, 1),
            (2.5, 0.2846828704729191596324947, 1),
            (3.7, 1.428072326665388129200498, 1),
            (10.25, 13.36802367147604629543091, 1),
            (123.456, 469.605547129929483500194, 1),
            (1000.3, 5907.292644785879214962401, 1),
            (500000.7, 6061185.232113329902342946, 1),
            (-0.5, 1.265512123484645396488946, -1),
            (-1.5, 0.8600470153764810145109327, 1),
            (-2.3, 0.3695666634550080374591892, -1),
            (-10.7, -15.41678909641663612406447, -1),
        ];
        for &(x, want, sign) in cases {
            let got = log_gamma_signed(x).unwrap();
            assert_eq!(got.sign, sign, "sign at {x}");
            assert!(rel(got.log_abs, want) < 1e-13, "x = {x}: {} vs {want}", got.log_abs);
        }
    }

    #[test]
    fn pochhammer_cases() {
        assert_eq!(pochhammer_log(1.754, 0).unwrap(), SignedLog::ONE);
        assert!(pochhammer_log(0.0, 3).unwrap().is_zero());
        let p = pochhammer_log(0.5, 2).unwrap();
        assert_eq!(p.sign, 1);
        assert!((p.log_abs - 0.75f64.ln()).abs() < 1e-15);
        // (-2)_2 = (-2)(-1) = 2, (-2)_3 = 0
        assert!((pochhammer_log(-2.0, 2).unwrap().exp() - 2.0).abs() < 1e-15);
        assert!(pochhammer_log(-2.0, 3).unwrap().is_zero());
        // (-0.5)_3 = (-0.5)(0.5)(1.5)
        assert!((pochhammer_log(-0.5, 3).unwrap().exp() + 0.375).abs() < 1e-15);
        // large m goes through the log-gamma difference
        let big = pochhammer_log(2.5, 200).unwrap();
        let direct: f64 = (0..200).map(|i| (2.5 + i as f64).ln()).sum();
        assert!(rel(big.log_abs, direct) < 1e-13);
    }

    #[test]
    fn prabhakar_at_zero_is_reciprocal_gamma() {
        for &(a, b) in &[(0.5, 1.0), (0.3, 0.7), (1.0, 2.5), (0.9, 4.0)] {
            let e = prabhakar_e(a, b, 1.3, 0.0, 1e-15).unwrap();
            assert!(e.converged);
            assert!((e.value - 1.0 / gamma(b).unwrap()).abs() < 1e-15);
        }
        let e = prabhakar_e(0.5, 1.0, 1.0, 0.0, 1e-15).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn prabhakar_reduces_to_exponential() {
        let tol = 1e-14;
        for i in 0..=50 {
            let z = -5.0 * i as f64 / 50.0;
            let e = prabhakar_e(1.0, 1.0, 1.0, z, tol).unwrap();
            assert!(e.converged);
            // each term carries a few ulps from exp(log)
            let budget = 10.0 * tol + 1e-14 * e.cancellation * e.value.abs();
            assert!((e.value - z.exp()).abs() <= budget, "z = {z}");
        }
    }

    #[test]
    fn prabhakar_against_high_precision_oracle() {
        let cases = [
            ((0.5, 0.25, 0.5, -1.0), 0.0869688573853260829569846),
            ((0.5, 0.5, 1.0, -1.0), 0.1366060073919492825373291),
            ((0.7, 1.3, 1.754, -2.5), 0.05652722370650577470355059),
            ((0.5, 1.0, 1.0, -3.0), 0.1790011511813899504192948),
            ((0.9, 2.0, -1.5, 0.8), 0.3966846444452767814819592),
        ];
        for ((a, b, c, z), want) in cases {
            let e = prabhakar_e(a, b, c, z, 1e-15).unwrap();
            assert!(e.converged, "{a} {b} {c} {z}: {e:?}");
            let budget = 1e-13f64.max(1e-14 * e.cancellation * want.abs());
            assert!(
                (e.value - want).abs() < budget,
                "{a} {b} {c} {z}: {} vs {want}",
                e.value
            );
            let x = prabhakar_e_with(
                a,
                b,
                c,
                z,
                &SeriesConfig {
                    precision: Precision::Extended,
                    ..SeriesConfig::default()
                },
            )
            .unwrap();
            assert!((x.value - want).abs() < budget);
        }
    }

    #[test]
    fn halving_tol_never_hurts() {
        let want = 0.05652722370650577470355059;
        let mut last = f64::INFINITY;
        let mut tol = 1e-4;
        while tol > 1e-16 {
            let e = prabhakar_e(0.7, 1.3, 1.754, -2.5, tol).unwrap();
            let err = (e.value - want).abs();
            assert!(err <= last.max(1e-13), "tol {tol}: {err} > {last}");
            last = err;
            tol /= 2.0;
        }
    }

    #[test]
    fn cancellation_is_flagged_not_hidden() {
        // E_{1/2,1}(-12) = exp(144) erfc(12): Σ|term| ~ 2 exp(144)
        let e = prabhakar_e(0.5, 1.0, 1.0, -12.0, 1e-15).unwrap();
        assert!(!e.converged);
        assert!(e.cancellation > 1e8);
        assert!(e.into_result("E").is_err());
    }

    #[test]
    fn max_terms_cap_reports_non_convergence() {
        let cfg = SeriesConfig {
            max_terms: 5,
            ..SeriesConfig::default()
        };
        let e = prabhakar_e_with(1.0, 1.0, 1.0, -3.0, &cfg).unwrap();
        assert!(!e.converged);
        assert_eq!(e.terms_used, 5);
    }

    #[test]
    fn domain_errors() {
        assert!(prabhakar_e(0.0, 1.0, 1.0, -1.0, 1e-10).is_err());
        assert!(prabhakar_e(0.5, -1.0, 1.0, -1.0, 1e-10).is_err());
        assert!(prabhakar_e(0.5, 1.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn density_cases() {
        let exp = CtParams::new(1.0, 1.0, 1.0).unwrap();
        let d = prabhakar_density(&exp, 1.0).unwrap();
        assert!(d.converged);
        assert!((d.value - (-1.0f64).exp()).abs() < 1e-15);

        // classical Mittag-Leffler density t^{α-1} E_{α,α}(-t^α) at t = 1
        let ml = CtParams::new(0.5, 1.0, 1.0).unwrap();
        let d = prabhakar_density(&ml, 1.0).unwrap();
        assert!((d.value - 0.1366060073919492825373291).abs() < 1e-13);

        let gen = CtParams::new(0.5, 1.754, 1.0).unwrap();
        let d = prabhakar_density(&gen, 0.7).unwrap();
        assert!((d.value - 0.2096475638075537301339031).abs() < 1e-13);
        assert!(prabhakar_density(&gen, 0.0).is_err());
    }

    #[test]
    fn exponential_density_integrates_to_one() {
        // trapezoid on a log grid; α = 1 is the exponential case
        let ct = CtParams::new(1.0, 1.0, 1.0).unwrap();
        let (lo, hi, k) = (1e-8f64, 10.0f64, 4000);
        let step = (hi / lo).ln() / k as f64;
        let mut integral = lo; // ∫_0^lo e^{-t} dt ≈ lo
        let mut prev = (lo, prabhakar_density(&ct, lo).unwrap().value);
        for i in 1..=k {
            let t = lo * (step * i as f64).exp();
            let f = prabhakar_density(&ct, t).unwrap().value;
            integral += 0.5 * (f + prev.1) * (t - prev.0);
            prev = (t, f);
        }
        // the exponential tail beyond hi has mass f(hi)
        integral += prev.1;
        assert!((integral - 1.0).abs() < 1e-5, "{integral}");
    }
}
