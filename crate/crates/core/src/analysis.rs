//! Monte Carlo checks of the analytical results on effective gains,
//! leakage and the null-space projection approximation.
//!
//! All draws are i.i.d. unit-variance Rayleigh vectors without path loss.
//! Samples are split into fixed batches, each with its own RNG stream, and
//! batch sums are reduced in batch order, so reports are bit-identical for
//! a given seed regardless of the thread count.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{epsilon, iid_channel, trial_rng};
use crate::error::{Error, Result};
use crate::format::sig10;
use crate::linalg::{from_columns, hermitian_eigvals, jain_index, projectors, CMatrix, CVector};
use crate::metrics::{alpha_weight, metric_mus, metric_nspa};
use crate::precoding::{dvsinr_precoder, dzf_precoder, effective_gain, PrecoderKind};

const BATCH: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Quantity label, e.g. `"1"`, `"4-bound"`, `"6-ratio"`.
    pub proposition: String,
    pub grid_point: f64,
    pub empirical: f64,
    pub predicted: f64,
    pub rel_error: f64,
}

impl ReportRow {
    fn new(proposition: &str, grid_point: f64, empirical: f64, predicted: f64) -> Self {
        Self {
            proposition: proposition.to_string(),
            grid_point,
            empirical,
            predicted,
            rel_error: rel_error(empirical, predicted),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub proposition: String,
    pub rows: Vec<ReportRow>,
    pub samples: usize,
    pub passed: bool,
}

impl PropositionReport {
    pub fn row(&self, label: &str, grid_point: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.proposition == label && r.grid_point == grid_point)
    }

    pub fn rows_labelled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.proposition == label)
    }
}

fn rel_error(empirical: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        empirical.abs()
    } else {
        (empirical / predicted - 1.0).abs()
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    Ok(())
}

/// Runs `f(rng, n)` on each batch and sums the returned accumulators in
/// batch order.
fn batched_sums<F>(samples: usize, seed: u64, width: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize, &mut [f64]) -> Result<()> + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|i| {
            let n = BATCH.min(samples - i * BATCH);
            let mut rng = trial_rng(seed, i as u64);
            let mut acc = vec![0.0; width];
            f(&mut rng, n, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; width];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(total)
}

fn draw<R: Rng + ?Sized>(nt: usize, b: usize, rng: &mut R) -> (CVector, Vec<CVector>) {
    let h = iid_channel(nt, rng);
    let others = (1..b).map(|_| iid_channel(nt, rng)).collect();
    (h, others)
}

fn stack(cols: &[CVector]) -> CMatrix {
    from_columns(&cols.iter().collect::<Vec<_>>())
}

/// Eigenvalues of `(rho^-1 I + H H^H)^-1`, descending in the Gram eigenvalues.
fn d_eigenvalues(htilde: &CMatrix, rho: f64) -> Result<Vec<f64>> {
    let gram = htilde * htilde.adjoint();
    Ok(hermitian_eigvals(&gram)?
        .into_iter()
        .map(|l| 1.0 / (1.0 / rho + l.max(0.0)))
        .collect())
}

/// DZF effective gain against its prediction `(eps / Nt) E||h||^2`.
pub fn check_prop1(nt: usize, b: usize, samples: usize, seed: u64) -> Result<PropositionReport> {
    if nt < b {
        return Err(Error::DzfUndefined { antennas: nt, bs_count: b });
    }
    check_samples(samples)?;
    let sums = batched_sums(samples, seed, 2, |rng, n, acc| {
        for _ in 0..n {
            let (h, others) = draw(nt, b, rng);
            let w = dzf_precoder(&h, &stack(&others))?.w;
            acc[0] += effective_gain(&h, &w);
            acc[1] += h.norm_squared();
        }
        Ok(())
    })?;
    let n = samples as f64;
    let frac = epsilon(nt, b) as f64 / nt as f64;
    let row = ReportRow::new("1", nt as f64, sums[0] / n, frac * sums[1] / n);
    let passed = row.rel_error <= 0.02;
    Ok(PropositionReport {
        proposition: "1".into(),
        rows: vec![row],
        samples,
        passed,
    })
}

/// Normalized DVSINR gain against the Jain index of the eigenvalues of the
/// regularized inverse (rows `"2"`), and the Jain index at the largest
/// `rho` against `eps / Nt` (row `"3"`).
///
/// Passes when the gap is within 2% at both ends of the grid and the high-SNR Jain index is within `1e-3`
/// of its limit.
pub fn check_prop2_prop3(
    nt: usize,
    b: usize,
    rho_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<PropositionReport> {
    if nt < b {
        return Err(Error::RequiresPowerLimited);
    }
    check_samples(samples)?;
    if rho_grid.is_empty() {
        return Err(Error::Config("empty rho grid".into()));
    }
    let g = rho_grid.len();
    let sums = batched_sums(samples, seed, 2 * g, |rng, n, acc| {
        for _ in 0..n {
            let (h, others) = draw(nt, b, rng);
            let ht = stack(&others);
            let hn = h.norm_squared();
            for (i, &rho) in rho_grid.iter().enumerate() {
                let w = dvsinr_precoder(&h, &ht, rho)?.w;
                acc[2 * i] += effective_gain(&h, &w) / hn;
                acc[2 * i + 1] += jain_index(&d_eigenvalues(&ht, rho)?)?;
            }
        }
        Ok(())
    })?;
    let n = samples as f64;
    let mut rows: Vec<ReportRow> = rho_grid
        .iter()
        .enumerate()
        .map(|(i, &rho)| ReportRow::new("2", rho, sums[2 * i] / n, sums[2 * i + 1] / n))
        .collect();

    let (lo, hi) = extreme_indices(rho_grid);
    let gaps: Vec<f64> = rows.iter().map(|r| r.rel_error).collect();
    let ends_tight = gaps[lo] <= 0.02 && gaps[hi] <= 0.02;

    let limit = epsilon(nt, b) as f64 / nt as f64;
    let jain_hi = sums[2 * hi + 1] / n;
    rows.push(ReportRow::new("3", rho_grid[hi], jain_hi, limit));
    let passed = ends_tight && (jain_hi - limit).abs() <= 1e-3;
    Ok(PropositionReport {
        proposition: "2-3".into(),
        rows,
        samples,
        passed,
    })
}

fn extreme_indices(grid: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &x) in grid.iter().enumerate() {
        if x < grid[lo] {
            lo = i;
        }
        if x > grid[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

/// Leakage bound `||h2||^2 |Tr(D_P)|^2 / Tr(D D^H)` where `D_P` keeps the
/// eigen-components of `D` on the column space of `htilde`.
pub fn leakage_bound(h2: &CVector, htilde: &CMatrix, rho: f64) -> Result<f64> {
    let nt = htilde.nrows();
    let rank = htilde.ncols().min(nt);
    let d = d_eigenvalues(htilde, rho)?;
    let tr_p: f64 = d[..rank].iter().sum();
    let tr_dd: f64 = d.iter().map(|x| x * x).sum();
    Ok(h2.norm_squared() * tr_p * tr_p / tr_dd)
}

/// High-SNR leakage approximation `||h2||^2 / (eps (rho lambda_min + 1)^2)`.
pub fn leakage_approximation(h2: &CVector, htilde: &CMatrix, rho: f64) -> Result<f64> {
    let nt = htilde.nrows();
    let eps = nt.saturating_sub(htilde.ncols());
    if eps == 0 {
        return Err(Error::RequiresPowerLimited);
    }
    let gram = htilde.adjoint() * htilde;
    let lmin = hermitian_eigvals(&gram)?.last().copied().unwrap_or(0.0).max(0.0);
    Ok(h2.norm_squared() / (eps as f64 * (rho * lmin + 1.0).powi(2)))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// DVSINR leakage onto the first co-scheduled user, with its bound
/// (rows `"4-bound"`), its high-SNR approximation (rows `"4-approx"`) and
/// the log-log slope over `rho` in `[1e3, 1e5]` (row `"4-slope"`).
///
/// Passes when the bound holds at every grid point and, if the grid has at
/// least two points in the slope window, the slope is `-2 +- 0.1`.
pub fn check_prop4_leakage(
    nt: usize,
    b: usize,
    rho_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<PropositionReport> {
    if nt < b || b < 2 {
        return Err(Error::RequiresPowerLimited);
    }
    check_samples(samples)?;
    if rho_grid.is_empty() {
        return Err(Error::Config("empty rho grid".into()));
    }
    let g = rho_grid.len();
    let sums = batched_sums(samples, seed, 3 * g, |rng, n, acc| {
        for _ in 0..n {
            let (h, others) = draw(nt, b, rng);
            let ht = stack(&others);
            let victim = &others[0];
            for (i, &rho) in rho_grid.iter().enumerate() {
                let w = dvsinr_precoder(&h, &ht, rho)?.w;
                acc[3 * i] += effective_gain(victim, &w);
                acc[3 * i + 1] += leakage_bound(victim, &ht, rho)?;
                acc[3 * i + 2] += leakage_approximation(victim, &ht, rho)?;
            }
        }
        Ok(())
    })?;
    let n = samples as f64;
    let mut rows = Vec::with_capacity(2 * g + 1);
    let mut bound_holds = true;
    let mut window = (Vec::new(), Vec::new());
    for (i, &rho) in rho_grid.iter().enumerate() {
        let leak = sums[3 * i] / n;
        let bound = sums[3 * i + 1] / n;
        bound_holds &= bound >= leak;
        rows.push(ReportRow::new("4-bound", rho, leak, bound));
        rows.push(ReportRow::new("4-approx", rho, leak, sums[3 * i + 2] / n));
        if (1e3..=1e5).contains(&rho) {
            window.0.push(rho);
            window.1.push(leak);
        }
    }
    let mut slope_ok = true;
    if window.0.len() >= 2 {
        let slope = log_log_slope(&window.0, &window.1);
        slope_ok = (slope + 2.0).abs() <= 0.1;
        let mut row = ReportRow::new("4-slope", 1e5, slope, -2.0);
        row.rel_error = (slope + 2.0).abs();
        rows.push(row);
    }
    Ok(PropositionReport {
        proposition: "4".into(),
        rows,
        samples,
        passed: bound_holds && slope_ok,
    })
}

/// Exact null-space projection power `||Q h||^2` through the chain of
/// partial correlations: interferers are orthogonalized in the given
/// order and `h` loses `1 - rho_i^2` of its remaining power at each step.
pub fn nsp_partial_correlation_chain(h: &CVector, interferers: &[&CVector]) -> Result<f64> {
    let mut basis: Vec<CVector> = Vec::new();
    let mut value = h.norm_squared();
    let mut residual = h.clone();
    for v in interferers {
        let mut u = (*v).clone();
        for q in &basis {
            u -= q * q.dotc(&u);
        }
        let un = u.norm();
        if un == 0.0 {
            return Err(Error::RankDeficient(f64::INFINITY));
        }
        let q = u / num_complex::Complex64::new(un, 0.0);
        let rn = residual.norm_squared();
        if rn > 0.0 {
            let c2 = q.dotc(&residual).norm_sqr() / rn;
            value *= 1.0 - c2;
        }
        residual -= &q * q.dotc(&residual);
        basis.push(q);
    }
    Ok(value)
}

/// Exact NSP and its approximation against their means `eps / Nt` and
/// `(1 - 1/Nt)^(B-1)` (in units of `E||h||^2`), and the ratio of the two.
/// The ratio must match within 3%, or 1% when `B = 2`.
pub fn check_prop6_nspa(nt: usize, b: usize, samples: usize, seed: u64) -> Result<PropositionReport> {
    if nt < b {
        return Err(Error::RequiresPowerLimited);
    }
    check_samples(samples)?;
    let sums = batched_sums(samples, seed, 3, |rng, n, acc| {
        for _ in 0..n {
            let (h, others) = draw(nt, b, rng);
            let refs: Vec<&CVector> = others.iter().collect();
            let (_, q) = projectors(&from_columns(&refs))?;
            acc[0] += (&q * &h).norm_squared();
            acc[1] += metric_nspa(&h, &refs)?;
            acc[2] += h.norm_squared();
        }
        Ok(())
    })?;
    let n = samples as f64;
    let (nsp, nspa, hn) = (sums[0] / n, sums[1] / n, sums[2] / n);
    let exact_frac = epsilon(nt, b) as f64 / nt as f64;
    let approx_frac = (1.0 - 1.0 / nt as f64).powi(b as i32 - 1);
    let ratio = ReportRow::new("6-ratio", nt as f64, nspa / nsp, approx_frac / exact_frac);
    let tol = if b == 2 { 0.01 } else { 0.03 };
    let passed = ratio.rel_error <= tol;
    Ok(PropositionReport {
        proposition: "6".into(),
        rows: vec![
            ReportRow::new("6-nsp", nt as f64, nsp, exact_frac * hn),
            ReportRow::new("6-nspa", nt as f64, nspa, approx_frac * hn),
            ratio,
        ],
        samples,
        passed,
    })
}

/// Mean absolute error of the MUS metric against the true DVSINR gain,
/// normalized by `E||h||^2` (rows `"5"`). Passes when the weight decreases
/// strictly along the sorted grid for every draw and the error is below 1%
/// at any grid point with `rho <= 1e-6` or `rho >= 1e6`.
pub fn check_alpha_heuristic(
    nt: usize,
    b: usize,
    rho_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<PropositionReport> {
    if nt < b {
        return Err(Error::MusUndefined);
    }
    check_samples(samples)?;
    let g = rho_grid.len();
    let mut sorted = rho_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sums = batched_sums(samples, seed, g + 2, |rng, n, acc| {
        for _ in 0..n {
            let (h, others) = draw(nt, b, rng);
            let ht = stack(&others);
            for (i, &rho) in rho_grid.iter().enumerate() {
                let truth = effective_gain(&h, &dvsinr_precoder(&h, &ht, rho)?.w);
                acc[i] += (metric_mus(&h, &ht, rho, PrecoderKind::Dvsinr)? - truth).abs();
            }
            acc[g] += h.norm_squared();
            let alphas: Vec<f64> = sorted.iter().map(|&r| alpha_weight(&ht, r).value()).collect();
            if alphas.windows(2).any(|w| w[1] >= w[0]) {
                acc[g + 1] += 1.0;
            }
        }
        Ok(())
    })?;
    let hn = sums[g];
    let rows: Vec<ReportRow> = rho_grid
        .iter()
        .enumerate()
        .map(|(i, &rho)| ReportRow::new("5", rho, sums[i] / hn, 0.0))
        .collect();
    let extremes_exact = rows
        .iter()
        .filter(|r| r.grid_point <= 1e-6 || r.grid_point >= 1e6)
        .all(|r| r.empirical < 0.01);
    Ok(PropositionReport {
        proposition: "5".into(),
        rows,
        samples,
        passed: sums[g + 1] == 0.0 && extremes_exact,
    })
}

/// Largest relative deviation between the eigenvalues of the explicitly
/// inverted `rho^-1 I + H H^H` and `(rho^-1 + lambda_i(H H^H))^-1`.
pub fn eigenvalue_identity_error(htilde: &CMatrix, rho: f64) -> Result<f64> {
    let nt = htilde.nrows();
    let c = CMatrix::identity(nt, nt) * num_complex::Complex64::new(1.0 / rho, 0.0)
        + htilde * htilde.adjoint();
    let d = c.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let d = (&d + d.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    let direct = hermitian_eigvals(&d)?;
    let mut formula = d_eigenvalues(htilde, rho)?;
    formula.sort_by(|a, b| b.total_cmp(a));
    Ok(direct
        .iter()
        .zip(&formula)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max))
}

pub const REPORT_HEADER: [&str; 6] = ["proposition", "grid_point", "empirical", "predicted", "rel_error", "samples"];

pub fn write_reports_csv<W: Write>(out: W, reports: &[PropositionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for report in reports {
        for r in &report.rows {
            w.write_record([
                r.proposition.clone(),
                sig10(r.grid_point),
                sig10(r.empirical),
                sig10(r.predicted),
                sig10(r.rel_error),
                report.samples.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
