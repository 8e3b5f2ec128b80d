//! The Prabhakar discrete-time counting process.
//!
//! Inter-arrival times `Z ∈ {1, 2, …}` have generating function
//! `u ξ^ν / (ξ + (1-u)^α)^ν`. This module evaluates the closed-form series for
//! the pmf `θ(t)` and the state probabilities `Φ⁽ⁿ⁾(t) = P(N(t) = n)`, with the
//! generating-function oracle in [`crate::powerseries`] as an alternative
//! route, plus the continuous-time (GFPP) counterparts and tail laws.
//!
//! The closed forms come in two series branches, one for `ξ < 1` and one for
//! `ξ > 1`. Neither converges usefully near `ξ = 1`, so parameters inside
//! [`ORACLE_BAND`] are served only by the oracle route.

mod closed_form;
mod continuous;

pub use closed_form::ClosedFormConfig;
pub use continuous::{
    ct_state_prob, ct_state_prob_eval, ct_state_prob_laplace, ct_state_prob_routed, scaled_limit_probe, tail_asymptote,
    CtEval, CtMethod, LimitProbeRow, TailMode,
};

use closed_form::{prefix_sums, Kernel, Order};

use crate::error::{Error, Result};
use crate::powerseries;

/// Closed `ξ` interval routed exclusively through the oracle.
pub const ORACLE_BAND: (f64, f64) = (0.95, 1.05);

/// Largest roundoff undershoot silently clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Normalization residual tolerated by [`Evaluator::state_distribution`].
pub const NORMALIZATION_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `ξ < 1`: series in powers of `ξ`.
    Low,
    /// `ξ > 1`: series in powers of `1/ξ`.
    High,
    /// `ξ` inside [`ORACLE_BAND`].
    OracleOnly,
}

/// Discrete process parameters `(α, ν, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdtpParams {
    alpha: f64,
    nu: f64,
    xi: f64,
}

fn check_alpha_nu(alpha: f64, nu: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::domain(format!("nu must be positive, got {nu}")));
    }
    Ok(())
}

impl PdtpParams {
    pub fn new(alpha: f64, nu: f64, xi: f64) -> Result<Self> {
        check_alpha_nu(alpha, nu)?;
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::domain(format!("xi must be positive, got {xi}")));
        }
        Ok(PdtpParams { alpha, nu, xi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn branch(&self) -> Branch {
        if self.xi >= ORACLE_BAND.0 && self.xi <= ORACLE_BAND.1 {
            Branch::OracleOnly
        } else if self.xi < 1.0 {
            Branch::Low
        } else {
            Branch::High
        }
    }

    /// `P(Z = 1) = (ξ/(1+ξ))^ν`.
    pub fn unit_step_prob(&self) -> f64 {
        (self.xi / (1.0 + self.xi)).powf(self.nu)
    }
}

/// Continuous-time (GFPP) parameters `(α, ν, ξ₀)`; `ξ₀` carries units of
/// `time^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtParams {
    alpha: f64,
    nu: f64,
    xi0: f64,
}

impl CtParams {
    pub fn new(alpha: f64, nu: f64, xi0: f64) -> Result<Self> {
        check_alpha_nu(alpha, nu)?;
        if !(xi0 > 0.0) || !xi0.is_finite() {
            return Err(Error::domain(format!("xi0 must be positive, got {xi0}")));
        }
        Ok(CtParams { alpha, nu, xi0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    /// Discrete parameters for step length `h`: `ξ(h) = ξ₀ h^α`.
    pub fn discretize(&self, h: f64) -> Result<PdtpParams> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("step length must be positive, got {h}")));
        }
        PdtpParams::new(self.alpha, self.nu, self.xi0 * h.powf(self.alpha))
    }
}

/// `P(N(t) = n)` for `n = 0..=t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    t: u64,
    probs: Vec<f64>,
}

impl StateDistribution {
    fn checked(t: u64, mut probs: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(probs.len() as u64, t + 1);
        for p in probs.iter_mut() {
            *p = clamp_roundoff(*p, t)?;
        }
        let residual = crate::extended::accurate_sum(&probs) - 1.0;
        if residual.abs() > NORMALIZATION_LIMIT || !residual.is_finite() {
            return Err(Error::Integrity {
                t,
                residual,
                limit: NORMALIZATION_LIMIT,
            });
        }
        Ok(StateDistribution { t, probs })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        crate::extended::accurate_sum(&self.probs)
    }
}

fn clamp_roundoff(p: f64, t: u64) -> Result<f64> {
    if p >= 0.0 {
        Ok(p)
    } else if p >= -CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Integrity {
            t,
            residual: p,
            limit: CLAMP_TOL,
        })
    }
}

/// How probabilities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Closed-form series; fails inside [`ORACLE_BAND`].
    #[default]
    ClosedForm,
    /// Generating-function coefficients.
    Oracle,
    /// Closed form where it converges, oracle otherwise.
    Auto,
}

/// The route an evaluation actually took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved {
    ClosedForm,
    Oracle,
}

impl Resolved {
    pub fn as_str(&self) -> &'static str {
        match self {
            Resolved::ClosedForm => "closed-form",
            Resolved::Oracle => "oracle",
        }
    }
}

/// Route plus series policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Evaluator {
    pub route: Route,
    pub closed_form: ClosedFormConfig,
}

impl Evaluator {
    pub fn new(route: Route) -> Self {
        Evaluator {
            route,
            closed_form: ClosedFormConfig::default(),
        }
    }

    /// Runs `closed` or `oracle` according to the route.
    fn dispatch<T>(
        &self,
        p: &PdtpParams,
        closed: impl FnOnce() -> Result<T>,
        oracle: impl FnOnce() -> Result<T>,
    ) -> Result<(T, Resolved)> {
        match (self.route, p.branch()) {
            (Route::Oracle, _) | (Route::Auto, Branch::OracleOnly) => Ok((oracle()?, Resolved::Oracle)),
            (Route::ClosedForm, Branch::OracleOnly) => Err(Error::OracleOnlyBand {
                xi: p.xi,
                lo: ORACLE_BAND.0,
                hi: ORACLE_BAND.1,
            }),
            (Route::ClosedForm, _) => Ok((closed()?, Resolved::ClosedForm)),
            (Route::Auto, _) => match closed() {
                Ok(v) => Ok((v, Resolved::ClosedForm)),
                Err(Error::NonConvergence { .. }) => Ok((oracle()?, Resolved::Oracle)),
                Err(e) => Err(e),
            },
        }
    }

    /// Inter-arrival pmf `θ(t) = φ(t-1)`; `θ(0) = 0`.
    pub fn interarrival_pmf(&self, p: &PdtpParams, t: u64) -> Result<f64> {
        if t == 0 {
            return Ok(0.0);
        }
        Ok(*self.interarrival_table(p, t)?.last().unwrap_or(&0.0))
    }

    /// `θ(t)` for `t = 0..=t_max`.
    pub fn interarrival_table(&self, p: &PdtpParams, t_max: u64) -> Result<Vec<f64>> {
        Ok(self.interarrival_table_routed(p, t_max)?.0)
    }

    pub fn interarrival_table_routed(&self, p: &PdtpParams, t_max: u64) -> Result<(Vec<f64>, Resolved)> {
        let t_max = t_max as usize;
        self.dispatch(
            p,
            || closed_pmf_table(p, t_max, &self.closed_form),
            || Ok(powerseries::theta_unit_coeffs(p, t_max + 1)?.into_coeffs()),
        )
    }

    /// `Φ⁽ⁿ⁾(t)`: exactly 0 for `t < n`, exactly 1 at `(0, 0)`.
    pub fn state_prob(&self, p: &PdtpParams, n: u64, t: u64) -> Result<f64> {
        Ok(self.state_prob_routed(p, n, t)?.0)
    }

    pub fn state_prob_routed(&self, p: &PdtpParams, n: u64, t: u64) -> Result<(f64, Resolved)> {
        if t < n {
            return Ok((0.0, Resolved::ClosedForm));
        }
        if t == 0 {
            return Ok((1.0, Resolved::ClosedForm));
        }
        let (value, route) = self.dispatch(
            p,
            || {
                let upper = arrival_cdf_closed(p, n, t, &self.closed_form)?;
                let next = arrival_cdf_closed(p, n + 1, t, &self.closed_form)?;
                Ok(upper[t as usize] - next[t as usize])
            },
            || Ok(powerseries::state_prob_coeffs(p, n as usize, t as usize + 1)?.coeff(t as usize)),
        )?;
        Ok((clamp_roundoff(value, t)?, route))
    }

    /// `Φ⁽ⁿ⁾(t)` for `n = 0..=t`, checked for normalization.
    pub fn state_distribution(&self, p: &PdtpParams, t: u64) -> Result<StateDistribution> {
        let mut table = self.state_table(p, t)?;
        Ok(table.pop().expect("state table has t_max + 1 entries"))
    }

    /// State distributions for every `t = 0..=t_max`, in one pass per state.
    pub fn state_table(&self, p: &PdtpParams, t_max: u64) -> Result<Vec<StateDistribution>> {
        Ok(self.state_table_routed(p, t_max)?.0)
    }

    pub fn state_table_routed(&self, p: &PdtpParams, t_max: u64) -> Result<(Vec<StateDistribution>, Resolved)> {
        let (grid, route) = self.state_columns_routed(p, t_max, t_max)?;
        let table = grid
            .into_iter()
            .enumerate()
            .map(|(t, probs)| StateDistribution::checked(t as u64, probs))
            .collect::<Result<Vec<_>>>()?;
        Ok((table, route))
    }
}

impl Evaluator {
    /// `grid[t][n] = Φ⁽ⁿ⁾(t)` for `n ≤ min(n_max, t)`, `t ≤ t_max`.
    ///
    /// Only the requested states enter the route decision, so low states
    /// stay on the closed form where the full table would not.
    pub fn state_columns_routed(&self, p: &PdtpParams, n_max: u64, t_max: u64) -> Result<(Vec<Vec<f64>>, Resolved)> {
        let n_max = n_max.min(t_max);
        let (mut grid, route) = self.dispatch(
            p,
            || closed_state_grid(p, n_max, t_max, &self.closed_form),
            || oracle_state_grid(p, n_max, t_max),
        )?;
        for (t, row) in grid.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v = clamp_roundoff(*v, t as u64)?;
            }
        }
        Ok((grid, route))
    }
}

/// `θ(t)` by the closed form, strict route.
pub fn interarrival_pmf(p: &PdtpParams, t: u64) -> Result<f64> {
    Evaluator::default().interarrival_pmf(p, t)
}

/// `Φ⁽ⁿ⁾(t)` by the closed form, strict route.
pub fn state_prob(p: &PdtpParams, n: u64, t: u64) -> Result<f64> {
    Evaluator::default().state_prob(p, n, t)
}

/// `(Φ⁽⁰⁾(t), …, Φ⁽ᵗ⁾(t))` by the closed form, strict route.
pub fn state_distribution(p: &PdtpParams, t: u64) -> Result<StateDistribution> {
    Evaluator::default().state_distribution(p, t)
}

fn closed_pmf_table(p: &PdtpParams, t_max: usize, cfg: &ClosedFormConfig) -> Result<Vec<f64>> {
    let mut out = vec![0.0];
    if t_max == 0 {
        return Ok(out);
    }
    let order = Order { n: 1.0, nu: p.nu };
    let sums = match p.branch() {
        Branch::Low => prefix_sums(
            Kernel::Low { offset: 0.0 },
            p.alpha,
            order,
            p.xi,
            t_max - 1,
            p.xi.powf(p.nu),
            cfg,
        )?,
        Branch::High => prefix_sums(Kernel::High { offset: 0.0 }, p.alpha, order, p.xi, t_max - 1, 1.0, cfg)?,
        Branch::OracleOnly => unreachable!("dispatch keeps the oracle band away from closed forms"),
    };
    out.extend(sums);
    Ok(out)
}

/// `F_n(t) = P(N(t) ≥ n)` for `t = 0..=t_max` (zero below `t = n`).
///
/// The two sums of each state probability are `F_n` and `F_{n+1}`, so
/// `Φ⁽ⁿ⁾(t) = F_n(t) - F_{n+1}(t)`.
fn arrival_cdf_closed(p: &PdtpParams, n: u64, t_max: u64, cfg: &ClosedFormConfig) -> Result<Vec<f64>> {
    let mut out = vec![0.0; t_max as usize + 1];
    if n > t_max {
        return Ok(out);
    }
    let order = Order { n: n as f64, nu: p.nu };
    let max_len = (t_max - n) as usize;
    let sums = match p.branch() {
        Branch::Low => {
            let pref = p.xi.powf(n as f64 * p.nu);
            prefix_sums(Kernel::Low { offset: 1.0 }, p.alpha, order, p.xi, max_len, pref, cfg)?
        }
        Branch::High => prefix_sums(Kernel::High { offset: 1.0 }, p.alpha, order, p.xi, max_len, 1.0, cfg)?,
        Branch::OracleOnly => unreachable!("dispatch keeps the oracle band away from closed forms"),
    };
    for (len, s) in sums.into_iter().enumerate() {
        out[n as usize + len] = s;
    }
    Ok(out)
}

/// `grid[t][n] = Φ⁽ⁿ⁾(t)` for `n ≤ min(n_max, t)`, closed form.
fn closed_state_grid(p: &PdtpParams, n_max: u64, t_max: u64, cfg: &ClosedFormConfig) -> Result<Vec<Vec<f64>>> {
    let mut grid: Vec<Vec<f64>> = (0..=t_max).map(|t| vec![0.0; t.min(n_max) as usize + 1]).collect();
    let mut upper = arrival_cdf_closed(p, 0, t_max, cfg)?;
    for n in 0..=n_max {
        let next = arrival_cdf_closed(p, n + 1, t_max, cfg)?;
        for t in n..=t_max {
            grid[t as usize][n as usize] = upper[t as usize] - next[t as usize];
        }
        upper = next;
    }
    grid[0][0] = 1.0;
    Ok(grid)
}

fn oracle_state_grid(p: &PdtpParams, n_max: u64, t_max: u64) -> Result<Vec<Vec<f64>>> {
    let len = t_max as usize + 1;
    let table = powerseries::state_prob_table(p, n_max as usize, len)?;
    Ok((0..len)
        .map(|t| (0..=t.min(n_max as usize)).map(|n| table[n].coeff(t)).collect())
        .collect())
}
