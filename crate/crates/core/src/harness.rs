//! Seeded Monte Carlo sweeps over SNR and pool size.
//!
//! Trial `t` draws its deployment from stream `t` of the run seed, so every
//! strategy and every SNR point sees the same realizations. Trials run on a
//! rayon pool of the configured size and are aggregated in trial order.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{deploy_with_rng, trial_rng, ChannelRealization, NetworkConfig};
use crate::error::{Error, Result};
use crate::format::sig10;
use crate::metrics::MetricKind;
use crate::precoding::PrecoderKind;
use crate::scheduler::{evaluate_strategies, SelectionOutcome, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub bs_count: usize,
    pub antennas: usize,
    pub users_per_bs: usize,
    pub rho_db_grid: Vec<f64>,
    /// Overrides `users_per_bs` with a sweep when set.
    pub k_grid: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub precoder: PrecoderKind,
    pub strategies: Vec<Strategy>,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub workers: usize,
    pub cell_radius: f64,
    pub coop_radius: f64,
    pub pathloss_exponent: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let net = NetworkConfig::default();
        Self {
            bs_count: net.bs_count,
            antennas: net.antennas,
            users_per_bs: net.users_per_bs,
            rho_db_grid: vec![net.rho_db],
            k_grid: None,
            trials: 2000,
            seed: 1,
            precoder: PrecoderKind::Dvsinr,
            strategies: vec![
                Strategy::OGcsi,
                Strategy::OMus,
                Strategy::RMus,
                Strategy::ONspa,
                Strategy::RNspa,
                Strategy::MaxSnr,
            ],
            workers: 0,
            cell_radius: net.cell_radius,
            coop_radius: net.coop_radius,
            pathloss_exponent: net.pathloss_exponent,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("invalid value '{s}' for {key}")))
        })
        .collect()
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{}' for {key}", value.trim())))
}

/// Strategy list; `all` expands to every strategy that fits the antenna
/// regime of `(nt, b)`.
pub fn parse_strategies(value: &str, nt: usize, b: usize) -> Result<Vec<Strategy>> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(Strategy::ALL
            .into_iter()
            .filter(|s| strategy_fits(*s, nt, b))
            .collect());
    }
    parse_list("strategies", value)
}

fn strategy_fits(s: Strategy, nt: usize, b: usize) -> bool {
    match s.metric() {
        Some(MetricKind::Mus) => nt >= b,
        Some(MetricKind::Mus2) => nt < b,
        _ => true,
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment and lists are
    /// comma-separated. Unset keys keep their defaults, except that a
    /// missing strategy list means `all`. Later lines win.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut strategies = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            cfg.set(key.trim(), value.trim(), &mut strategies)?;
        }
        let strategies = strategies.unwrap_or_else(|| "all".into());
        cfg.strategies = parse_strategies(&strategies, cfg.antennas, cfg.bs_count)?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, strategies: &mut Option<String>) -> Result<()> {
        match key.to_ascii_lowercase().replace('-', "_").as_str() {
            "b" | "bs_count" => self.bs_count = parse_scalar(key, value)?,
            "nt" | "antennas" => self.antennas = parse_scalar(key, value)?,
            "k" | "users_per_bs" => self.users_per_bs = parse_scalar(key, value)?,
            "rho_db" | "rho_db_grid" => self.rho_db_grid = parse_list(key, value)?,
            "k_grid" => self.k_grid = Some(parse_list(key, value)?),
            "trials" => self.trials = parse_scalar(key, value)?,
            "seed" => self.seed = parse_scalar(key, value)?,
            "precoder" => self.precoder = value.parse()?,
            "strategies" => *strategies = Some(value.to_string()),
            "workers" => self.workers = parse_scalar(key, value)?,
            "cell_radius" => self.cell_radius = parse_scalar(key, value)?,
            "coop_radius" => self.coop_radius = parse_scalar(key, value)?,
            "pathloss_exponent" => self.pathloss_exponent = parse_scalar(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn k_values(&self) -> Vec<usize> {
        self.k_grid.clone().unwrap_or_else(|| vec![self.users_per_bs])
    }

    pub fn network(&self, users_per_bs: usize, rho_db: f64) -> NetworkConfig {
        NetworkConfig {
            bs_count: self.bs_count,
            antennas: self.antennas,
            users_per_bs,
            cell_radius: self.cell_radius,
            coop_radius: self.coop_radius,
            pathloss_exponent: self.pathloss_exponent,
            noise_power: 1.0,
            rho_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.rho_db_grid.is_empty() {
            return Err(Error::Config("rho_db grid is empty".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies selected".into()));
        }
        if matches!(&self.k_grid, Some(g) if g.is_empty()) {
            return Err(Error::Config("K grid is empty".into()));
        }
        for k in self.k_values() {
            for &rho_db in &self.rho_db_grid {
                self.network(k, rho_db).validate()?;
            }
        }
        let (nt, b) = (self.antennas, self.bs_count);
        if self.precoder == PrecoderKind::Dzf && nt < b {
            return Err(Error::DzfUndefined { antennas: nt, bs_count: b });
        }
        for s in &self.strategies {
            match s.metric() {
                Some(MetricKind::Mus) if nt < b => {
                    return Err(Error::Config(format!("{s} requires Nt >= B (Nt = {nt}, B = {b})")))
                }
                Some(MetricKind::Mus2) if nt >= b => {
                    return Err(Error::Config(format!("{s} requires Nt < B (Nt = {nt}, B = {b})")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub strategy: Strategy,
    pub precoder: PrecoderKind,
    pub bs_count: usize,
    pub antennas: usize,
    pub users_per_bs: usize,
    pub rho_db: f64,
    /// bits/s/Hz
    pub mean_sum_rate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub mean_metrics_per_bs: f64,
}

/// Realization of trial `t` at pool size `k`. Independent of the SNR.
pub fn trial_realization(cfg: &ExperimentConfig, k: usize, trial: u64) -> Result<ChannelRealization> {
    let net = cfg.network(k, cfg.rho_db_grid.first().copied().unwrap_or(0.0));
    deploy_with_rng(&net, &mut trial_rng(cfg.seed, trial))
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Per-trial outcomes at one grid point, in trial order; `out[t][i]` is the
/// outcome of `cfg.strategies[i]` on trial `t`.
pub fn run_trials(cfg: &ExperimentConfig, k: usize, rho_db: f64) -> Result<Vec<Vec<SelectionOutcome>>> {
    cfg.validate()?;
    let rho = cfg.network(k, rho_db).rho();
    let results: Vec<Result<Vec<SelectionOutcome>>> = with_workers(cfg.workers, || {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                let real = trial_realization(cfg, k, t)?;
                evaluate_strategies(&real, cfg.precoder, rho, &cfg.strategies)
            })
            .collect()
    })?;
    results.into_iter().collect()
}

/// Mean and standard error (sample std over `sqrt(n)`, 0 for one sample).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(cfg: &ExperimentConfig, k: usize, rho_db: f64, outcomes: &[Vec<SelectionOutcome>]) -> Vec<ResultRow> {
    cfg.strategies
        .iter()
        .enumerate()
        .map(|(i, &strategy)| {
            let rates: Vec<f64> = outcomes.iter().map(|o| o[i].sum_rate).collect();
            let (mean, se) = mean_and_std_error(&rates);
            let reported = outcomes
                .iter()
                .map(|o| o[i].metrics_reported_per_bs as f64)
                .sum::<f64>()
                / outcomes.len() as f64;
            ResultRow {
                strategy,
                precoder: cfg.precoder,
                bs_count: cfg.bs_count,
                antennas: cfg.antennas,
                users_per_bs: k,
                rho_db,
                mean_sum_rate: mean,
                std_error: se,
                trials: outcomes.len(),
                mean_metrics_per_bs: reported,
            }
        })
        .collect()
}

/// One row per (K, rho, strategy), in that nesting order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for k in cfg.k_values() {
        for &rho_db in &cfg.rho_db_grid {
            let outcomes = run_trials(cfg, k, rho_db)?;
            rows.extend(summarize(cfg, k, rho_db, &outcomes));
        }
    }
    Ok(rows)
}

pub const RESULT_HEADER: [&str; 10] = [
    "strategy",
    "precoder",
    "B",
    "Nt",
    "K",
    "rho_db",
    "mean_sum_rate",
    "std_error",
    "trials",
    "mean_metrics_per_bs",
];

pub fn write_results_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record([
            r.strategy.to_string(),
            r.precoder.to_string(),
            r.bs_count.to_string(),
            r.antennas.to_string(),
            r.users_per_bs.to_string(),
            sig10(r.rho_db),
            sig10(r.mean_sum_rate),
            sig10(r.std_error),
            r.trials.to_string(),
            sig10(r.mean_metrics_per_bs),
        ])?;
    }
    w.flush()?;
    Ok(())
}
