//! Truncated formal power series.
//!
//! This is the independent route to every distribution in the crate: the
//! pmf and state probabilities are read off as coefficients of their
//! generating functions,
//!
//! ```text
//! φ̄(u) = ξ^ν / (ξ + (1-u)^α)^ν,   θ̄(u) = f̄(u) φ̄(u),
//! Φ̄⁽ⁿ⁾(u) = (1 - u φ̄(u)) / (1 - u) · uⁿ φ̄(u)ⁿ.
//! ```
//!
//! All convolution sums are accumulated in double-double and rounded once per
//! coefficient.

use crate::counting::PdtpParams;
use crate::error::{Error, Result};
use crate::extended::{DoubleDouble, Scalar};

/// Default oracle length.
pub const DEFAULT_LEN: usize = 128;

/// First `L` coefficients of a formal power series in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("truncated series needs at least one coefficient"));
        }
        Ok(TruncatedSeries { coeffs })
    }

    pub fn zeros(len: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![0.0; len.max(1)],
        }
    }

    /// `1 + 0u + …`
    pub fn one(len: usize) -> Self {
        let mut s = Self::zeros(len);
        s.coeffs[0] = 1.0;
        s
    }

    /// The monomial `u^k`, truncated.
    pub fn monomial(k: usize, len: usize) -> Self {
        let mut s = Self::zeros(len);
        if k < s.len() {
            s.coeffs[k] = 1.0;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Pads with zeros or truncates to `len`.
    pub fn resized(&self, len: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len.max(1), 0.0);
        TruncatedSeries { coeffs }
    }

    pub fn scale(&self, factor: f64) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Multiplication by `u^k`, keeping the length.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![0.0; self.len()];
        if k < self.len() {
            coeffs[k..].copy_from_slice(&self.coeffs[..self.len() - k]);
        }
        TruncatedSeries { coeffs }
    }

    /// Partial sums `Σ_{j≤k} c_j`, i.e. multiplication by `1/(1-u)`.
    pub fn cumulative(&self) -> Self {
        let mut acc = DoubleDouble::ZERO;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| {
                acc = acc.add_f64(c);
                acc.to_f64()
            })
            .collect();
        TruncatedSeries { coeffs }
    }
}

/// Coefficients of `(1-u)^α`: `(-1)^k C(α, k)`.
pub fn binomial_series(alpha: f64, len: usize) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(len.max(1));
    let mut c = 1.0;
    coeffs.push(c);
    for k in 1..len {
        c *= (k as f64 - 1.0 - alpha) / k as f64;
        coeffs.push(c);
    }
    TruncatedSeries { coeffs }
}

/// Cauchy product truncated to the common length.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let len = a.len();
    // skip structural zeros of the sparser factor
    let support: Vec<usize> = (0..len).filter(|&j| a.coeffs[j] != 0.0).collect();
    let coeffs = (0..len)
        .map(|k| {
            let mut acc = DoubleDouble::ZERO;
            for &j in support.iter().take_while(|&&j| j <= k) {
                acc += DoubleDouble::mul_f64(a.coeffs[j], b.coeffs[k - j]);
            }
            acc.to_f64()
        })
        .collect();
    Ok(TruncatedSeries { coeffs })
}

/// `s(u)^ρ` for real `ρ` via the first-order recurrence obtained from
/// `s · p' = ρ · s' · p`:
///
/// ```text
/// p_k = 1/(k s_0) · Σ_{j=1..k} ((ρ+1) j - k) s_j p_{k-j}
/// ```
pub fn series_real_power(s: &TruncatedSeries, rho: f64) -> Result<TruncatedSeries> {
    let s0 = s.coeffs[0];
    if s0 == 0.0 {
        return Err(Error::domain("series_real_power: zero constant term"));
    }
    if !rho.is_finite() {
        return Err(Error::domain(format!("series_real_power: non-finite exponent {rho}")));
    }
    if s0 < 0.0 && rho.fract() != 0.0 {
        return Err(Error::domain(
            "series_real_power: negative constant term with non-integer exponent",
        ));
    }
    let len = s.len();
    let support: Vec<usize> = (1..len).filter(|&j| s.coeffs[j] != 0.0).collect();
    let mut p = Vec::with_capacity(len);
    p.push(s0.powf(rho));
    for k in 1..len {
        let mut acc = DoubleDouble::ZERO;
        for &j in support.iter().take_while(|&&j| j <= k) {
            let weight = (rho + 1.0) * j as f64 - k as f64;
            acc += DoubleDouble::mul_f64(weight * s.coeffs[j], p[k - j]);
        }
        p.push(acc.to_f64() / (k as f64 * s0));
    }
    Ok(TruncatedSeries { coeffs: p })
}

/// `φ(k)` for `k < len`: coefficients of `ξ^μ / (ξ + (1-u)^α)^μ`.
fn phi_coeffs_order(alpha: f64, mu: f64, xi: f64, len: usize) -> Result<TruncatedSeries> {
    if mu == 0.0 {
        return Ok(TruncatedSeries::one(len));
    }
    let mut base = binomial_series(alpha, len);
    base.coeffs[0] += xi;
    Ok(series_real_power(&base, -mu)?.scale(xi.powf(mu)))
}

/// Coefficients of `φ̄(u) = ξ^ν/(ξ + (1-u)^α)^ν`, i.e. `φ(k, ξ)` for `k < len`.
pub fn phi_coeffs(p: &PdtpParams, len: usize) -> Result<TruncatedSeries> {
    phi_coeffs_order(p.alpha(), p.nu(), p.xi(), len)
}

/// Inter-arrival pmf `θ(t)` for a general prefactor `f̄(u)`: `θ̄ = f̄ φ̄`.
///
/// `f` must have `f(0) = 0`, nonnegative coefficients and total mass at most 1.
pub fn theta_coeffs(p: &PdtpParams, f: &TruncatedSeries, len: usize) -> Result<TruncatedSeries> {
    check_prefactor(f)?;
    let phi = phi_coeffs(p, len)?;
    series_mul(&f.resized(len), &phi)
}

/// `θ(t) = φ(t-1)` for the default prefactor `f̄(u) = u`.
pub fn theta_unit_coeffs(p: &PdtpParams, len: usize) -> Result<TruncatedSeries> {
    Ok(phi_coeffs(p, len)?.shift(1))
}

fn check_prefactor(f: &TruncatedSeries) -> Result<()> {
    if f.coeffs[0] != 0.0 {
        return Err(Error::domain(format!(
            "prefactor series must vanish at u = 0 (zero-length inter-arrival times), got f(0) = {}",
            f.coeffs[0]
        )));
    }
    if f.coeffs.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::domain(
            "prefactor series must have finite nonnegative coefficients",
        ));
    }
    let mass: f64 = f.coeffs.iter().sum();
    if mass > 1.0 + 1e-9 {
        return Err(Error::domain(format!("prefactor series has mass {mass} > 1")));
    }
    Ok(())
}

/// Survival coefficients `P(Z > t) = 1 - Σ_{k≤t} θ(k)`, i.e. `(1 - θ̄)/(1 - u)`.
pub fn survival_coeffs(theta: &TruncatedSeries) -> TruncatedSeries {
    let cdf = theta.cumulative();
    TruncatedSeries {
        coeffs: cdf.coeffs.iter().map(|c| 1.0 - c).collect(),
    }
}

/// State probabilities `Φ⁽ⁿ⁾(t)` for `t < len` from
/// `(1 - uφ̄)/(1 - u) · uⁿ φ̄^{(nν)}`.
pub fn state_prob_coeffs(p: &PdtpParams, n: usize, len: usize) -> Result<TruncatedSeries> {
    let survival = survival_coeffs(&theta_unit_coeffs(p, len)?);
    if n >= len {
        return Ok(TruncatedSeries::zeros(len));
    }
    let phi_n = phi_coeffs_order(p.alpha(), n as f64 * p.nu(), p.xi(), len)?;
    Ok(series_mul(&phi_n, &survival)?.shift(n))
}

/// All `Φ⁽ⁿ⁾` for `n ≤ n_max`, sharing the survival series.
pub fn state_prob_table(p: &PdtpParams, n_max: usize, len: usize) -> Result<Vec<TruncatedSeries>> {
    let survival = survival_coeffs(&theta_unit_coeffs(p, len)?);
    (0..=n_max)
        .map(|n| {
            if n >= len {
                return Ok(TruncatedSeries::zeros(len));
            }
            let phi_n = phi_coeffs_order(p.alpha(), n as f64 * p.nu(), p.xi(), len)?;
            Ok(series_mul(&phi_n, &survival)?.shift(n))
        })
        .collect()
}

/// State probabilities for an arbitrary inter-arrival series via
/// `Φ̄⁽ⁿ⁾ = (1 - θ̄)/(1 - u) · θ̄ⁿ`.
pub fn renewal_state_coeffs(theta: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    let mut acc = survival_coeffs(theta);
    for _ in 0..n {
        acc = series_mul(theta, &acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(alpha: f64, nu: f64, xi: f64) -> PdtpParams {
        PdtpParams::new(alpha, nu, xi).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= tol, "coefficient {k}: {g} vs {w}");
        }
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_series(1.0, 3).coeffs(), &[1.0, -1.0, 0.0]);
        assert_eq!(binomial_series(0.5, 4).coeffs(), &[1.0, -0.5, -0.125, -0.0625]);
        assert_eq!(binomial_series(0.0, 2).coeffs(), &[1.0, 0.0]);
    }

    #[test]
    fn mul_examples() {
        let a = TruncatedSeries::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(series_mul(&a, &a).unwrap().coeffs(), &[1.0, 2.0, 1.0]);

        let b = TruncatedSeries::new(vec![0.3, -2.0, 7.5]).unwrap();
        assert_eq!(series_mul(&TruncatedSeries::one(3), &b).unwrap(), b);

        let q: f64 = 0.4;
        let geom = TruncatedSeries::new((0..6).map(|k| q.powi(k)).collect()).unwrap();
        let one_minus_u = binomial_series(1.0, 6);
        let want: Vec<f64> = (0..6)
            .map(|k| if k == 0 { 1.0 } else { q.powi(k) - q.powi(k - 1) })
            .collect();
        assert_close(series_mul(&geom, &one_minus_u).unwrap().coeffs(), &want, 1e-16);

        let short = TruncatedSeries::one(2);
        assert!(matches!(
            series_mul(&a, &short),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn real_power_examples() {
        let s = TruncatedSeries::new(vec![1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(series_real_power(&s, -1.0).unwrap().coeffs(), &[1.0; 5]);
        assert_close(
            series_real_power(&s, 0.5).unwrap().coeffs(),
            binomial_series(0.5, 5).coeffs(),
            1e-16,
        );
        let t = TruncatedSeries::new(vec![2.0, 0.5, -0.25, 1.0]).unwrap();
        assert_close(series_real_power(&t, 1.0).unwrap().coeffs(), t.coeffs(), 1e-15);
        assert!(series_real_power(&TruncatedSeries::zeros(3), 2.0).is_err());
    }

    #[test]
    fn phi_examples() {
        let geom = phi_coeffs(&params(1.0, 1.0, 1.0), 30).unwrap();
        let want: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k + 1)).collect();
        assert_close(geom.coeffs(), &want, 1e-17);

        for &(a, n, x) in &[(0.3, 0.5, 0.25), (0.9, 1.754, 4.0), (0.5, 2.0, 1.0)] {
            let phi = phi_coeffs(&params(a, n, x), 4).unwrap();
            assert!((phi.coeff(0) - (x / (1.0 + x)).powf(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_examples() {
        let p = params(0.5, 0.5, 0.5);
        let phi = phi_coeffs(&p, 20).unwrap();
        let theta = theta_coeffs(&p, &TruncatedSeries::monomial(1, 20), 20).unwrap();
        assert_eq!(theta.coeff(0), 0.0);
        for t in 1..20 {
            assert_eq!(theta.coeff(t), phi.coeff(t - 1));
        }

        let geom = theta_unit_coeffs(&params(1.0, 1.0, 1.0), 25).unwrap();
        for t in 1..25 {
            assert!((geom.coeff(t) - 0.5f64.powi(t as i32)).abs() < 1e-17);
        }

        let f = TruncatedSeries::new(vec![0.0, 0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let mixed = theta_coeffs(&p, &f, 6).unwrap();
        let want = series_mul(&f, &phi_coeffs(&p, 6).unwrap()).unwrap();
        assert_eq!(mixed, want);

        let bad = TruncatedSeries::new(vec![0.1, 0.9]).unwrap();
        assert!(theta_coeffs(&p, &bad, 4).is_err());
    }

    #[test]
    fn state_prob_examples() {
        let p = params(0.5, 1.754, 0.3);
        assert_eq!(state_prob_coeffs(&p, 0, 10).unwrap().coeff(0), 1.0);

        let bern = params(1.0, 1.0, 1.0);
        assert!((state_prob_coeffs(&bern, 1, 5).unwrap().coeff(2) - 0.5).abs() < 1e-16);

        let s2 = state_prob_coeffs(&p, 2, 10).unwrap();
        assert_eq!(s2.coeff(1), 0.0);
        assert_eq!(s2.coeff(0), 0.0);
        assert!((s2.coeff(2) - (0.3f64 / 1.3).powf(2.0 * 1.754)).abs() < 1e-15);
    }

    #[test]
    fn renewal_factorization_and_completeness() {
        for &(a, n, x) in &[(0.5, 0.5, 0.5), (0.3, 1.754, 2.0), (1.0, 1.0, 0.25), (0.9, 0.5, 1.0)] {
            let p = params(a, n, x);
            let len = 64;
            let theta = theta_unit_coeffs(&p, len).unwrap();
            let table = state_prob_table(&p, len - 1, len).unwrap();
            for k in 1..8 {
                let conv = series_mul(&theta, &table[k - 1]).unwrap();
                assert_close(conv.coeffs(), table[k].coeffs(), 1e-12);
            }
            for t in 0..len {
                let total: f64 = table.iter().map(|s| s.coeff(t)).sum();
                assert!((total - 1.0).abs() < 1e-12, "t = {t}: {total}");
            }
        }
    }

    #[test]
    fn phi_partial_sums_are_bounded() {
        let phi = phi_coeffs(&params(0.3, 0.5, 0.25), 512).unwrap();
        let mut last = 0.0;
        for c in phi.cumulative().coeffs() {
            assert!(*c >= last && *c <= 1.0);
            last = *c;
        }
    }

    proptest! {
        #[test]
        fn power_round_trip(
            tail in proptest::collection::vec(-0.3f64..0.3, 15),
            rho in prop_oneof![Just(0.5), Just(2.0), Just(-1.0)],
        ) {
            let mut coeffs = vec![1.0];
            coeffs.extend(tail);
            let s = TruncatedSeries::new(coeffs).unwrap();
            let back = series_real_power(&series_real_power(&s, rho).unwrap(), 1.0 / rho).unwrap();
            for (g, w) in back.coeffs().iter().zip(s.coeffs()) {
                prop_assert!((g - w).abs() < 1e-10);
            }
        }

        #[test]
        fn mul_is_commutative(
            a in proptest::collection::vec(-2.0f64..2.0, 12),
            b in proptest::collection::vec(-2.0f64..2.0, 12),
        ) {
            let a = TruncatedSeries::new(a).unwrap();
            let b = TruncatedSeries::new(b).unwrap();
            let ab = series_mul(&a, &b).unwrap();
            let ba = series_mul(&b, &a).unwrap();
            for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()));
            }
        }
    }
}
