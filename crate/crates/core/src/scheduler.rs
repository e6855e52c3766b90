//! CU-side user selection.
//!
//! The catalogue of candidate sets is the lexicographic product of the BS
//! pools (the last BS varies fastest), so every BS and the CU agree on the
//! meaning of a set index without exchanging anything but the pools.
//!
//! Strategies:
//! * `O-GCSI`: exhaustive argmax of the true sum rate (needs global CSI).
//! * `O-`/`R-` `MUS`, `MUS2`, `NSPA`: argmax of the product of the metrics
//!   reported by each BS, over the full (`O-`) or pruned (`R-`) catalogue.
//! * `MAX-SNR`: every BS picks its strongest user on its own.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{from_columns, CVector};
use crate::metrics::{metric_nspa, MetricKind, Mus2Evaluator, MusEvaluator, SelectionMetric};
use crate::precoding::{budgets_from_precoders, sum_rate, PrecoderKind, PreparedPrecoder};

/// One user per BS; `members[b]` is served by BS `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateSet {
    pub members: Vec<usize>,
    /// Position in the catalogue the set was drawn from.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    OGcsi,
    OMus,
    RMus,
    OMus2,
    RMus2,
    ONspa,
    RNspa,
    MaxSnr,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::OGcsi,
        Strategy::OMus,
        Strategy::RMus,
        Strategy::OMus2,
        Strategy::RMus2,
        Strategy::ONspa,
        Strategy::RNspa,
        Strategy::MaxSnr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::OGcsi => "O-GCSI",
            Strategy::OMus => "O-MUS",
            Strategy::RMus => "R-MUS",
            Strategy::OMus2 => "O-MUS2",
            Strategy::RMus2 => "R-MUS2",
            Strategy::ONspa => "O-NSPA",
            Strategy::RNspa => "R-NSPA",
            Strategy::MaxSnr => "MAX-SNR",
        }
    }

    pub fn metric(self) -> Option<MetricKind> {
        match self {
            Strategy::OMus | Strategy::RMus => Some(MetricKind::Mus),
            Strategy::OMus2 | Strategy::RMus2 => Some(MetricKind::Mus2),
            Strategy::ONspa | Strategy::RNspa => Some(MetricKind::Nspa),
            Strategy::OGcsi | Strategy::MaxSnr => None,
        }
    }

    pub fn is_pruned(self) -> bool {
        matches!(self, Strategy::RMus | Strategy::RMus2 | Strategy::RNspa)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key || (key == "MAXSNR" && *st == Strategy::MaxSnr))
            .ok_or_else(|| Error::Config(format!("unknown strategy '{}'", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub strategy: Strategy,
    /// Index of the chosen set in the full (unpruned) catalogue.
    pub chosen: usize,
    pub members: Vec<usize>,
    /// Scalars each BS sent to the CU. O-GCSI counts the sets it evaluated;
    /// MAX-SNR sends nothing.
    pub metrics_reported_per_bs: usize,
    pub sum_rate: f64,
}

/// Lexicographic product of per-BS user pools.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalogue {
    pools: Vec<Vec<usize>>,
    strides: Vec<usize>,
    len: usize,
}

impl Catalogue {
    pub fn new(pools: Vec<Vec<usize>>) -> Result<Self> {
        if pools.is_empty() {
            return Err(Error::EmptyPool(0));
        }
        if let Some(b) = pools.iter().position(Vec::is_empty) {
            return Err(Error::EmptyPool(b));
        }
        let mut strides = vec![1; pools.len()];
        for b in (0..pools.len() - 1).rev() {
            strides[b] = strides[b + 1] * pools[b + 1].len();
        }
        let len = strides[0] * pools[0].len();
        Ok(Self { pools, strides, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn pools(&self) -> &[Vec<usize>] {
        &self.pools
    }

    fn digit(&self, l: usize, b: usize) -> usize {
        (l / self.strides[b]) % self.pools[b].len()
    }

    pub fn members(&self, l: usize) -> Vec<usize> {
        (0..self.pools.len()).map(|b| self.pools[b][self.digit(l, b)]).collect()
    }

    pub fn set(&self, l: usize) -> CandidateSet {
        CandidateSet {
            members: self.members(l),
            index: l,
        }
    }

    pub fn sets(&self) -> Vec<CandidateSet> {
        (0..self.len).map(|l| self.set(l)).collect()
    }

    pub fn index_of(&self, members: &[usize]) -> Option<usize> {
        if members.len() != self.pools.len() {
            return None;
        }
        members.iter().enumerate().try_fold(0, |acc, (b, k)| {
            let pos = self.pools[b].iter().position(|u| u == k)?;
            Some(acc + pos * self.strides[b])
        })
    }

    /// Groups of sets that share everything but the member of BS `b`. Each
    /// item is `(base index, [(own user, set index)])`.
    fn local_groups(&self, b: usize) -> impl Iterator<Item = (usize, Vec<(usize, usize)>)> + '_ {
        (0..self.len).filter(move |&l| self.digit(l, b) == 0).map(move |base| {
            let own = self.pools[b]
                .iter()
                .enumerate()
                .map(|(i, &k)| (k, base + i * self.strides[b]))
                .collect();
            (base, own)
        })
    }
}

/// `L = prod |S_b|` sets in lexicographic order.
pub fn enumerate_sets(pools: &[Vec<usize>]) -> Result<Vec<CandidateSet>> {
    Ok(Catalogue::new(pools.to_vec())?.sets())
}

fn interferer_columns<'a>(real: &'a ChannelRealization, b: usize, members: &[usize]) -> Vec<&'a CVector> {
    members
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != b)
        .map(|(_, &k)| &real.h[b][k])
        .collect()
}

/// True sum rate of one set, precoders built from local CSI at each BS.
pub fn set_sum_rate(
    real: &ChannelRealization,
    members: &[usize],
    kind: PrecoderKind,
    rho: f64,
) -> Result<f64> {
    let mut ws = Vec::with_capacity(members.len());
    for (b, &k) in members.iter().enumerate() {
        let htilde = from_columns(&interferer_columns(real, b, members));
        ws.push(PreparedPrecoder::new(&htilde, kind, rho)?.precode(&real.h[b][k])?.w);
    }
    let refs: Vec<&CVector> = ws.iter().collect();
    Ok(sum_rate(&budgets_from_precoders(real, members, &refs, rho)))
}

/// Sum rate of every set of the catalogue. Produces the same values as
/// [`set_sum_rate`] but factorizes each interference geometry only once.
pub fn catalogue_sum_rates(
    real: &ChannelRealization,
    cat: &Catalogue,
    kind: PrecoderKind,
    rho: f64,
) -> Result<Vec<f64>> {
    let bs_count = real.bs_count;
    let mut ws: Vec<Vec<CVector>> = Vec::with_capacity(bs_count);
    for b in 0..bs_count {
        let mut col = vec![CVector::zeros(0); cat.len()];
        for (base, own) in cat.local_groups(b) {
            let members = cat.members(base);
            let htilde = from_columns(&interferer_columns(real, b, &members));
            let prep = PreparedPrecoder::new(&htilde, kind, rho)?;
            for (k, l) in own {
                col[l] = prep.precode(&real.h[b][k])?.w;
            }
        }
        ws.push(col);
    }
    Ok((0..cat.len())
        .map(|l| {
            let members = cat.members(l);
            let refs: Vec<&CVector> = (0..bs_count).map(|b| &ws[b][l]).collect();
            sum_rate(&budgets_from_precoders(real, &members, &refs, rho))
        })
        .collect())
}

/// Index of the largest value; ties go to the lowest index.
fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn select_ogcsi(
    real: &ChannelRealization,
    sets: &[CandidateSet],
    kind: PrecoderKind,
    rho: f64,
) -> Result<SelectionOutcome> {
    if sets.is_empty() {
        return Err(Error::EmptyPool(0));
    }
    let rates = sets
        .iter()
        .map(|s| set_sum_rate(real, &s.members, kind, rho))
        .collect::<Result<Vec<_>>>()?;
    let best = argmax_lowest(&rates);
    Ok(SelectionOutcome {
        strategy: Strategy::OGcsi,
        chosen: sets[best].index,
        members: sets[best].members.clone(),
        metrics_reported_per_bs: sets.len(),
        sum_rate: rates[best],
    })
}

/// Metric of BS `b` for every set of the catalogue, in catalogue order.
/// Uses only the channels from BS `b`.
pub fn bs_metric_values(
    real: &ChannelRealization,
    b: usize,
    cat: &Catalogue,
    metric: MetricKind,
    kind: PrecoderKind,
    rho: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; cat.len()];
    for (base, own) in cat.local_groups(b) {
        let members = cat.members(base);
        let cols = interferer_columns(real, b, &members);
        match metric {
            MetricKind::Mus => {
                let ev = MusEvaluator::new(&from_columns(&cols), rho, kind)?;
                for (k, l) in own {
                    out[l] = ev.value(&real.h[b][k]);
                }
            }
            MetricKind::Mus2 => {
                let ev = Mus2Evaluator::new(&from_columns(&cols), rho)?;
                for (k, l) in own {
                    if real.h[b][k].norm_squared() == 0.0 {
                        return Err(Error::ZeroVector);
                    }
                    out[l] = ev.value(&real.h[b][k]);
                }
            }
            MetricKind::Nspa => {
                for (k, l) in own {
                    out[l] = metric_nspa(&real.h[b][k], &cols)?;
                }
            }
        }
    }
    Ok(out)
}

/// The `(b, l, value)` triples BS `b` sends over the backhaul.
pub fn report_metrics(
    real: &ChannelRealization,
    b: usize,
    cat: &Catalogue,
    metric: MetricKind,
    kind: PrecoderKind,
    rho: f64,
) -> Result<Vec<SelectionMetric>> {
    Ok(bs_metric_values(real, b, cat, metric, kind, rho)?
        .into_iter()
        .enumerate()
        .map(|(l, value)| SelectionMetric {
            bs: b,
            set_index: l,
            value,
            kind: metric,
        })
        .collect())
}

/// `argmax_l prod_b g_{b,l}`, evaluated as a sum of logs. Zero metrics make a
/// set unselectable unless every product is zero; ties go to the lowest `l`.
pub fn select_by_metric_product(metrics: &[Vec<f64>]) -> Result<usize> {
    let first = metrics
        .first()
        .ok_or_else(|| Error::IncompleteBackhaul("no BS reported".into()))?;
    let len = first.len();
    if len == 0 {
        return Err(Error::IncompleteBackhaul("empty report".into()));
    }
    for (b, m) in metrics.iter().enumerate() {
        if m.len() != len {
            return Err(Error::IncompleteBackhaul(format!(
                "BS {b} reported {} of {len} sets",
                m.len()
            )));
        }
        if let Some(l) = m.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::IncompleteBackhaul(format!("BS {b} sent an invalid value for set {l}")));
        }
    }
    let scores: Vec<f64> = (0..len)
        .map(|l| metrics.iter().map(|m| m[l].ln()).sum())
        .collect();
    Ok(argmax_lowest(&scores))
}

/// Per-antenna dominant users plus the strongest user of BS `b`'s pool,
/// sorted by user index.
pub fn prune_pool(real: &ChannelRealization, b: usize) -> Vec<usize> {
    let pool: Vec<usize> = real.pool(b).collect();
    let strongest = |score: &dyn Fn(usize) -> f64| {
        let mut best = pool[0];
        for &k in &pool[1..] {
            if score(k) > score(best) {
                best = k;
            }
        }
        best
    };
    let mut chosen: Vec<usize> = (0..real.antennas)
        .map(|n| strongest(&|k| real.h[b][k][n].norm_sqr()))
        .collect();
    chosen.push(strongest(&|k| real.h[b][k].norm_squared()));
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}

pub fn pruned_pools(real: &ChannelRealization) -> Vec<Vec<usize>> {
    (0..real.bs_count).map(|b| prune_pool(real, b)).collect()
}

/// Each BS serves its largest-norm user; ties go to the lowest user index.
pub fn select_max_snr(real: &ChannelRealization) -> Vec<usize> {
    (0..real.bs_count)
        .map(|b| {
            let mut best = real.pool(b).start;
            for k in real.pool(b) {
                if real.h[b][k].norm_squared() > real.h[b][best].norm_squared() {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Runs every requested strategy on one realization. All strategies are
/// scored with the same true sum-rate evaluation, so O-GCSI dominates the
/// others on every realization.
pub fn evaluate_strategies(
    real: &ChannelRealization,
    kind: PrecoderKind,
    rho: f64,
    strategies: &[Strategy],
) -> Result<Vec<SelectionOutcome>> {
    let full = Catalogue::new(real.pools())?;
    let rates = if strategies.contains(&Strategy::OGcsi) {
        Some(catalogue_sum_rates(real, &full, kind, rho)?)
    } else {
        None
    };
    let pruned = if strategies.iter().any(|s| s.is_pruned()) {
        Some(Catalogue::new(pruned_pools(real))?)
    } else {
        None
    };
    let rate_of = |l: usize| -> Result<f64> {
        match &rates {
            Some(r) => Ok(r[l]),
            None => set_sum_rate(real, &full.members(l), kind, rho),
        }
    };

    let mut out = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let (chosen, reported) = match strategy {
            Strategy::OGcsi => {
                let r = rates.as_ref().expect("rates computed when O-GCSI is requested");
                (argmax_lowest(r), full.len())
            }
            Strategy::MaxSnr => {
                let members = select_max_snr(real);
                (full.index_of(&members).expect("max-SNR users come from the pools"), 0)
            }
            s => {
                let metric = s.metric().expect("metric strategy");
                let cat = if s.is_pruned() {
                    pruned.as_ref().expect("pruned catalogue built")
                } else {
                    &full
                };
                let reports = (0..real.bs_count)
                    .map(|b| bs_metric_values(real, b, cat, metric, kind, rho))
                    .collect::<Result<Vec<_>>>()?;
                let l = select_by_metric_product(&reports)?;
                let members = cat.members(l);
                (full.index_of(&members).expect("pruned sets are full-catalogue sets"), cat.len())
            }
        };
        out.push(SelectionOutcome {
            strategy,
            chosen,
            members: full.members(chosen),
            metrics_reported_per_bs: reported,
            sum_rate: rate_of(chosen)?,
        });
    }
    Ok(out)
}
