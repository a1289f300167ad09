//! Rates, multicast rates, DoF slope, and Monte Carlo message error rates.
//!
//! Rates use the Gaussian-signalling proxy `log2(1 + P / (σ² ρ))` per
//! zero-forced stream, where `ρ` is the stream's noise amplification
//! `[A⁻¹ A⁻ᴴ]_ll`. The proxy has the right pre-log, which is all a DoF
//! estimate needs.

use crate::channel::{db_to_linear, linear_to_db, SimConfig};
use crate::error::{Error, Result};
use crate::numkernel::{invert, CMatrix};
use crate::protocol::{self, AlignedSetup, Scheme, TdmaSetup};

/// Received power of a coherent BPSK pair sum on one relay dimension.
pub const MAC_PAIR_SIGNAL_POWER: f64 = 2.0;
/// Received power of one unit-power broadcast stream.
pub const BC_SIGNAL_POWER: f64 = 1.0;
/// Minimum number of points used by the slope fit.
pub const MIN_FIT_POINTS: usize = 4;
/// Minimum SNR span (dB) covered by the fitted points.
pub const MIN_FIT_SPAN_DB: f64 = 15.0;

/// Diagonal of `A⁻¹ A⁻ᴴ`: squared row norms of the inverse.
pub fn noise_amplification(a: &CMatrix) -> Result<Vec<f64>> {
    let inv = invert(a)?;
    Ok((0..inv.rows())
        .map(|i| (0..inv.cols()).map(|j| inv[(i, j)].norm_sqr()).sum())
        .collect())
}

/// Rate of each stream after zero forcing through `a`.
pub fn zf_stream_rates(a: &CMatrix, signal_power: f64, noise_variance: f64) -> Result<Vec<f64>> {
    Ok(noise_amplification(a)?
        .into_iter()
        .map(|rho| (1.0 + signal_power / (noise_variance * rho)).log2())
        .collect())
}

/// Per-link rates at the relay for the aligned scheme.
pub fn stream_rates_mac(u: &CMatrix, noise_variance: f64) -> Result<Vec<f64>> {
    zf_stream_rates(u, MAC_PAIR_SIGNAL_POWER, noise_variance)
}

/// Per-stream rates at one user, `q = H_down · V`.
pub fn stream_rates_bc(q: &CMatrix, noise_variance: f64) -> Result<Vec<f64>> {
    zf_stream_rates(q, BC_SIGNAL_POWER, noise_variance)
}

/// Multicast rate of every message in the aligned two-phase scheme.
///
/// A stream's end-to-end rate is half (two phases) the minimum of its MAC
/// rate and its BC rate at every user. Every message has to cross every chain
/// link to reach all destinations, so each `R_i` is the minimum over links.
pub fn multicast_rates(mac: &[f64], bc_per_user: &[Vec<f64>]) -> Vec<f64> {
    let users = mac.len() + 1;
    let bottleneck = end_to_end_stream_rates(mac, bc_per_user).into_iter().fold(f64::INFINITY, f64::min);
    vec![bottleneck.max(0.0); users]
}

/// `½ · min(mac_l, min_j bc_{j,l})` for every link `l`.
pub fn end_to_end_stream_rates(mac: &[f64], bc_per_user: &[Vec<f64>]) -> Vec<f64> {
    mac.iter()
        .enumerate()
        .map(|(l, &m)| 0.5 * bc_per_user.iter().map(|bc| bc[l]).fold(m, f64::min))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub snr_db: f64,
    pub per_stream_mac: Vec<f64>,
    /// `[user][stream]`
    pub per_stream_bc_per_user: Vec<Vec<f64>>,
    pub multicast_rates: Vec<f64>,
    pub sum_rate: f64,
}

impl RateReport {
    pub fn new(snr_db: f64, per_stream_mac: Vec<f64>, per_stream_bc_per_user: Vec<Vec<f64>>, multicast_rates: Vec<f64>) -> Self {
        let sum_rate = multicast_rates.iter().sum();
        Self { snr_db, per_stream_mac, per_stream_bc_per_user, multicast_rates, sum_rate }
    }
}

/// Least-squares slope of sum rate against `log2(SNR)`.
///
/// Fits the upper half of the grid, widened to at least [`MIN_FIT_POINTS`]
/// points; the fitted window must span [`MIN_FIT_SPAN_DB`].
pub fn dof_slope(snr_db: &[f64], sum_rates: &[f64]) -> Result<f64> {
    if snr_db.len() != sum_rates.len() {
        return Err(Error::LengthMismatch { expected: snr_db.len(), found: sum_rates.len() });
    }
    let n = snr_db.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientGrid(format!("{n} points, need at least {MIN_FIT_POINTS}")));
    }
    if snr_db.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InsufficientGrid("SNR grid must be strictly increasing".into()));
    }
    let fit = n.div_ceil(2).max(MIN_FIT_POINTS);
    let xs: Vec<f64> = snr_db[n - fit..].iter().map(|db| db / 10.0 * 10f64.log2()).collect();
    let ys = &sum_rates[n - fit..];
    let span = snr_db[n - 1] - snr_db[n - fit];
    if span < MIN_FIT_SPAN_DB - 1e-9 {
        return Err(Error::InsufficientGrid(format!(
            "fitted points span {span} dB, need at least {MIN_FIT_SPAN_DB} dB"
        )));
    }
    let mx = xs.iter().sum::<f64>() / fit as f64;
    let my = ys.iter().sum::<f64>() / fit as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Average sum rate per SNR point and the fitted DoF slope.
#[derive(Debug, Clone, PartialEq)]
pub struct DofEstimate {
    pub scheme: Scheme,
    pub snr_grid_db: Vec<f64>,
    pub sum_rates: Vec<f64>,
    pub slope: f64,
    /// Channel resamples summed over all trials (the same at every SNR point).
    pub resamples: u64,
}

/// Inclusive dB grid `start, start + step, …, ≤ stop`.
pub fn snr_grid(start_db: f64, stop_db: f64, step_db: f64) -> Result<Vec<f64>> {
    if !(step_db > 0.0) || stop_db < start_db {
        return Err(Error::InsufficientGrid(format!("empty grid {start_db}..{stop_db} step {step_db}")));
    }
    let n = ((stop_db - start_db) / step_db + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start_db + i as f64 * step_db).collect())
}

/// Monte Carlo sum rate over an SNR grid; trials reuse their channel at every point.
pub fn sum_rate_sweep(
    scheme: Scheme,
    users: usize,
    antennas: usize,
    grid_db: &[f64],
    trials: u64,
    master_seed: u64,
    noise_variance: f64,
    threads: Option<usize>,
) -> Result<DofEstimate> {
    let points = grid_db.len();
    let per_trial: Vec<(Vec<f64>, u32)> = protocol::map_trials(trials, threads, |trial| -> Result<(Vec<f64>, u32)> {
        match scheme {
            Scheme::Aligned => {
                let setup = AlignedSetup::sample(users, master_seed, trial)?;
                let rates = grid_db
                    .iter()
                    .map(|&db| setup.prepare(db_to_linear(db))?.rate_report(noise_variance).map(|r| r.sum_rate))
                    .collect::<Result<Vec<_>>>()?;
                Ok((rates, setup.resamples))
            }
            Scheme::Tdma => {
                let setup = TdmaSetup::sample(users, antennas, master_seed, trial)?;
                let rates = grid_db
                    .iter()
                    .map(|&db| setup.sum_rate(db_to_linear(db), noise_variance))
                    .collect::<Result<Vec<_>>>()?;
                Ok((rates, setup.resamples))
            }
        }
    })?;
    let mut sums = vec![0.0; points];
    let mut resamples = 0u64;
    for (rates, r) in &per_trial {
        for (acc, v) in sums.iter_mut().zip(rates) {
            *acc += v;
        }
        resamples += u64::from(*r);
    }
    let sum_rates: Vec<f64> = sums.into_iter().map(|s| s / trials as f64).collect();
    let slope = dof_slope(grid_db, &sum_rates)?;
    Ok(DofEstimate { scheme, snr_grid_db: grid_db.to_vec(), sum_rates, slope, resamples })
}

/// Message error rates of the aligned exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct MerReport {
    pub snr_db: f64,
    /// `[destination][source]` error fraction; the diagonal is zero.
    pub per_pair: Vec<Vec<f64>>,
    pub errors: u64,
    pub triples: u64,
    pub resamples: u64,
}

impl MerReport {
    pub fn overall(&self) -> f64 {
        self.errors as f64 / self.triples as f64
    }

    /// Binomial standard error of [`overall`](Self::overall).
    pub fn std_error(&self) -> f64 {
        let p = self.overall();
        (p * (1.0 - p) / self.triples as f64).sqrt()
    }
}

/// Fraction of `(trial, destination, source)` triples decoded with any bit wrong.
pub fn message_error_rate(cfg: &SimConfig, threads: Option<usize>) -> Result<MerReport> {
    cfg.validate()?;
    let k = cfg.users;
    let outcomes = protocol::map_trials(cfg.trials, threads, |trial| protocol::run_aligned_trial(cfg, trial))?;
    let mut counts = vec![vec![0u64; k]; k];
    let mut errors = 0;
    let mut resamples = 0;
    for outcome in &outcomes {
        resamples += u64::from(outcome.resamples);
        for rec in &outcome.records {
            if rec.bits_wrong > 0 {
                counts[rec.destination][rec.source] += 1;
                errors += 1;
            }
        }
    }
    let per_pair = counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / cfg.trials as f64).collect())
        .collect();
    Ok(MerReport {
        snr_db: linear_to_db(cfg.snr),
        per_pair,
        errors,
        triples: cfg.trials * (k * (k - 1)) as u64,
        resamples,
    })
}
