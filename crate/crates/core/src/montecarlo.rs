//! Seeded simulation of PDTP counting paths and subordinated walkers.
//!
//! Every walker draws from its own ChaCha8 stream `(seed, walker index)`, and
//! ensembles are collected in walker order, so results do not depend on the
//! thread count or the schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::counting::{Evaluator, PdtpParams, Route};
use crate::csv;
use crate::error::{Error, Result};
use crate::extended::{DoubleDouble, Scalar};
use crate::graphwalk::Graph;
use crate::powerseries;

pub const DEFAULT_EPS_TAIL: f64 = 1e-6;
/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

const SURVIVAL_CHECK_T: usize = 256;
const SURVIVAL_CHECK_TOL: f64 = 1e-9;

/// Table sizing for [`build_sampler_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub eps_tail: f64,
    /// Initial table length; doubled while the survival exceeds `eps_tail`.
    pub initial_len: usize,
    /// `α < 1`: the power-law tail starts here at the latest.
    pub tail_start: usize,
    /// `α = 1`: giving up point.
    pub hard_cap: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            eps_tail: DEFAULT_EPS_TAIL,
            initial_len: 64,
            tail_start: 4096,
            hard_cap: 1 << 14,
        }
    }
}

/// What happens to the mass beyond the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerTail {
    /// Survival below `eps_tail`; the table is renormalized.
    Renormalized,
    /// `P(Z > t) = S(T) (T/t)^α` for `t ≥ T`, pmf exponent `1 + α`.
    PowerLaw {
        alpha: f64,
        /// Relative slope mismatch `|θ(T) T / (α S(T)) - 1|` at the seam.
        seam_mismatch: f64,
        /// `S(T) · seam_mismatch`, the reported asymptote-matching error.
        tv_bound: f64,
    },
}

/// Inverse-CDF sampler for inter-arrival times.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerTable {
    params: PdtpParams,
    /// `cdf[t] = P(Z ≤ t)`, `t = 0..=T_max`.
    cdf: Vec<f64>,
    truncation_mass: f64,
    tail: SamplerTail,
}

pub fn build_sampler(p: &PdtpParams, eps_tail: f64) -> Result<SamplerTable> {
    build_sampler_with(
        p,
        &SamplerConfig {
            eps_tail,
            ..SamplerConfig::default()
        },
    )
}

pub fn build_sampler_with(p: &PdtpParams, cfg: &SamplerConfig) -> Result<SamplerTable> {
    if !(cfg.eps_tail > 0.0 && cfg.eps_tail <= 1e-3) {
        return Err(Error::domain(format!(
            "eps_tail must lie in (0, 1e-3], got {}",
            cfg.eps_tail
        )));
    }
    let heavy = p.alpha() < 1.0;
    let cap = if heavy { cfg.tail_start } else { cfg.hard_cap };
    let mut t_max = cfg.initial_len.clamp(2, cap.max(2));
    let (theta, cdf) = loop {
        let theta = powerseries::theta_unit_coeffs(p, t_max + 1)?.into_coeffs();
        let cdf = cumulative(&theta);
        let survival = 1.0 - cdf[t_max];
        if survival < cfg.eps_tail {
            break (theta, cdf);
        }
        if t_max >= cap {
            if heavy {
                break (theta, cdf);
            }
            return Err(Error::TailBudget {
                t_max,
                achieved: survival,
                eps_tail: cfg.eps_tail,
            });
        }
        t_max = (2 * t_max).min(cap);
    };

    cross_check_survival(p, &cdf)?;

    // shortest table meeting the budget
    let (theta, cdf) = match cdf.iter().position(|c| 1.0 - c < cfg.eps_tail) {
        Some(t) => (theta[..=t].to_vec(), cdf[..=t].to_vec()),
        None => (theta, cdf),
    };
    let t_max = cdf.len() - 1;

    let survival = (1.0 - cdf[t_max]).max(0.0);
    let (cdf, tail) = if survival < cfg.eps_tail {
        let total = cdf[t_max];
        (cdf.iter().map(|c| c / total).collect(), SamplerTail::Renormalized)
    } else {
        let alpha = p.alpha();
        let seam_mismatch = (theta[t_max] * t_max as f64 / (alpha * survival) - 1.0).abs();
        (
            cdf,
            SamplerTail::PowerLaw {
                alpha,
                seam_mismatch,
                tv_bound: survival * seam_mismatch,
            },
        )
    };
    Ok(SamplerTable {
        params: *p,
        cdf,
        truncation_mass: survival,
        tail,
    })
}

fn cumulative(theta: &[f64]) -> Vec<f64> {
    let mut acc = DoubleDouble::ZERO;
    theta
        .iter()
        .map(|&x| {
            acc = acc.add_f64(x);
            acc.to_f64()
        })
        .collect()
}

/// `1 - cdf[t]` against `Φ⁽⁰⁾(t)` from the counting module.
fn cross_check_survival(p: &PdtpParams, cdf: &[f64]) -> Result<()> {
    let t = (cdf.len() - 1).min(SURVIVAL_CHECK_T);
    let phi0 = Evaluator::new(Route::Auto).state_prob(p, 0, t as u64)?;
    let residual = (1.0 - cdf[t]) - phi0;
    if residual.abs() > SURVIVAL_CHECK_TOL {
        return Err(Error::Integrity {
            t: t as u64,
            residual,
            limit: SURVIVAL_CHECK_TOL,
        });
    }
    Ok(())
}

impl SamplerTable {
    pub fn params(&self) -> &PdtpParams {
        &self.params
    }

    pub fn t_max(&self) -> usize {
        self.cdf.len() - 1
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// `1 - P(Z ≤ T_max)` under the exact law.
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn tail(&self) -> SamplerTail {
        self.tail
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> u64 {
        let t_max = self.t_max();
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx <= t_max {
            return idx.max(1) as u64;
        }
        match self.tail {
            // only reachable through rounding of the last cdf entry
            SamplerTail::Renormalized => t_max as u64,
            SamplerTail::PowerLaw { alpha, .. } => {
                let s = 1.0 - u;
                let ratio = (self.truncation_mass / s).powf(1.0 / alpha);
                let z = (t_max as f64 * ratio).ceil();
                if z.is_finite() && z < u64::MAX as f64 {
                    (z as u64).max(t_max as u64 + 1)
                } else {
                    u64::MAX
                }
            }
        }
    }
}

/// One inter-arrival time `Z ≥ 1`.
pub fn sample_interarrival<R: Rng + ?Sized>(s: &SamplerTable, rng: &mut R) -> u64 {
    s.quantile(rng.random::<f64>())
}

/// `N(t)` for `t = 0..=horizon`.
pub fn simulate_counting<R: Rng + ?Sized>(s: &SamplerTable, horizon: u64, rng: &mut R) -> Vec<u64> {
    let mut path = Vec::with_capacity(horizon as usize + 1);
    let mut count = 0u64;
    let mut next = sample_interarrival(s, rng);
    for t in 0..=horizon {
        if t == next {
            count += 1;
            next = next.saturating_add(sample_interarrival(s, rng));
        }
        path.push(count);
    }
    path
}

/// Arrival times `J_0 = 0 < J_1 < …` up to the horizon and the node held
/// from each of them on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    pub arrival_times: Vec<u64>,
    pub node_sequence: Vec<usize>,
    pub horizon: u64,
}

impl WalkPath {
    /// Node occupied at time `t ≤ horizon`.
    pub fn node_at(&self, t: u64) -> usize {
        let idx = self.arrival_times.partition_point(|&j| j <= t);
        self.node_sequence[idx - 1]
    }

    pub fn arrivals(&self) -> usize {
        self.arrival_times.len() - 1
    }
}

/// Walker subordinated to the PDTP; one uniform neighbor hop per arrival.
pub fn simulate_walk<R: Rng + ?Sized>(
    g: &Graph,
    s: &SamplerTable,
    horizon: u64,
    start: usize,
    rng: &mut R,
) -> Result<WalkPath> {
    g.check_node(start)?;
    let mut arrival_times = vec![0];
    let mut node_sequence = vec![start];
    let mut node = start;
    let mut t = 0u64;
    loop {
        t = t.saturating_add(sample_interarrival(s, rng));
        if t > horizon {
            break;
        }
        let nbrs = g.neighbors(node);
        node = nbrs[rng.random_range(0..nbrs.len())];
        arrival_times.push(t);
        node_sequence.push(node);
    }
    Ok(WalkPath {
        arrival_times,
        node_sequence,
        horizon,
    })
}

/// Master seed and ensemble size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub walkers: usize,
}

/// The RNG stream owned by walker `index`.
pub fn walker_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Counting paths, one per walker, in walker order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingEnsemble {
    pub horizon: u64,
    pub paths: Vec<Vec<u64>>,
}

pub fn simulate_counting_ensemble(s: &SamplerTable, horizon: u64, cfg: &EnsembleConfig) -> CountingEnsemble {
    let paths = (0..cfg.walkers as u64)
        .into_par_iter()
        .map(|w| simulate_counting(s, horizon, &mut walker_rng(cfg.seed, w)))
        .collect();
    CountingEnsemble { horizon, paths }
}

/// Walk paths, one per walker, in walker order.
pub fn simulate_walk_ensemble(
    g: &Graph,
    s: &SamplerTable,
    horizon: u64,
    start: usize,
    cfg: &EnsembleConfig,
) -> Result<Vec<WalkPath>> {
    g.check_node(start)?;
    (0..cfg.walkers as u64)
        .into_par_iter()
        .map(|w| simulate_walk(g, s, horizon, start, &mut walker_rng(cfg.seed, w)))
        .collect()
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn wilson(k: u64, n: u64, z: f64) -> Interval {
        let nf = n as f64;
        let p = k as f64 / nf;
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        Interval {
            lo: (center - half).max(0.0),
            hi: (center + half).min(1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn halfwidth(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Counts over cells (states or nodes) at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub t: u64,
    pub samples: u64,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn from_cells(t: u64, cells: impl Iterator<Item = usize>, n_cells: usize) -> Result<Histogram> {
        let mut counts = vec![0u64; n_cells];
        let mut samples = 0u64;
        for c in cells {
            if c >= counts.len() {
                counts.resize(c + 1, 0);
            }
            counts[c] += 1;
            samples += 1;
        }
        if samples == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Histogram { t, samples, counts })
    }

    pub fn frequency(&self, cell: usize) -> f64 {
        self.counts.get(cell).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|c| self.frequency(c)).collect()
    }

    /// 99% Wilson interval of cell `cell`.
    pub fn wilson(&self, cell: usize) -> Interval {
        Interval::wilson(self.counts.get(cell).copied().unwrap_or(0), self.samples, Z_99)
    }
}

/// Histogram of `N(t)` over the ensemble; cells `0..=t`.
pub fn empirical_state_probs(ensemble: &CountingEnsemble, t: u64) -> Result<Histogram> {
    if t > ensemble.horizon {
        return Err(Error::domain(format!(
            "t = {t} beyond the simulated horizon {}",
            ensemble.horizon
        )));
    }
    Histogram::from_cells(t, ensemble.paths.iter().map(|p| p[t as usize] as usize), t as usize + 1)
}

/// Histogram of the occupied node at time `t`; cells are nodes.
pub fn empirical_occupation(paths: &[WalkPath], n_nodes: usize, t: u64) -> Result<Histogram> {
    if let Some(p) = paths.iter().find(|p| t > p.horizon) {
        return Err(Error::domain(format!(
            "t = {t} beyond the simulated horizon {}",
            p.horizon
        )));
    }
    Histogram::from_cells(t, paths.iter().map(|p| p.node_at(t)), n_nodes)
}

/// One line of an empirical-versus-analytic comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: u64,
    /// State index or node.
    pub n: usize,
    pub empirical: f64,
    pub analytic: f64,
    pub wilson_halfwidth: f64,
    pub within_band: bool,
}

/// Pairs every histogram cell with `analytic(t, cell)`.
pub fn compare(
    histograms: &[Histogram],
    mut analytic: impl FnMut(u64, usize) -> Result<f64>,
) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for h in histograms {
        for n in 0..h.counts.len() {
            let a = analytic(h.t, n)?;
            let band = h.wilson(n);
            rows.push(ComparisonRow {
                t: h.t,
                n,
                empirical: h.frequency(n),
                analytic: a,
                wilson_halfwidth: band.halfwidth(),
                within_band: band.contains(a),
            });
        }
    }
    Ok(rows)
}

/// Fraction of rows whose analytic value lies inside the band.
pub fn coverage(rows: &[ComparisonRow]) -> f64 {
    rows.iter().filter(|r| r.within_band).count() as f64 / rows.len().max(1) as f64
}

pub const ENSEMBLE_CSV_HEADER: &str = "t,n,empirical,analytic,wilson_halfwidth\n";

pub fn ensemble_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(ENSEMBLE_CSV_HEADER);
    for r in rows {
        out.push_str(&csv::record([
            r.t.to_string(),
            r.n.to_string(),
            csv::fmt_real(r.empirical),
            csv::fmt_real(r.analytic),
            csv::fmt_real(r.wilson_halfwidth),
        ]));
    }
    out
}
