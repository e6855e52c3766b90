//! Cluster geometry, user deployment and per-trial Rayleigh channels.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::format::sig10;
use crate::linalg::{from_columns, CMatrix, CVector};
use crate::scheduler::CandidateSet;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub bs_count: usize,
    pub antennas: usize,
    pub users_per_bs: usize,
    /// Cell radius in meters.
    pub cell_radius: f64,
    /// Radius of the cell-edge cooperation disk in meters.
    pub coop_radius: f64,
    pub pathloss_exponent: f64,
    pub noise_power: f64,
    /// SNR at the cell border, `P / sigma_n^2`, in dB.
    pub rho_db: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            bs_count: 3,
            antennas: 3,
            users_per_bs: 10,
            cell_radius: 1000.0,
            coop_radius: 300.0,
            pathloss_exponent: 4.0,
            noise_power: 1.0,
            rho_db: 10.0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidNetwork(msg.to_string()));
        if self.bs_count < 2 {
            return bad("B must be at least 2");
        }
        if self.antennas < 2 {
            return bad("Nt must be at least 2");
        }
        if self.users_per_bs < 1 {
            return bad("K must be at least 1");
        }
        if !(self.cell_radius > 0.0 && self.cell_radius.is_finite()) {
            return bad("cell radius must be positive");
        }
        if !(self.coop_radius > 0.0 && self.coop_radius < self.cell_radius) {
            return bad("cooperation radius must be positive and smaller than the cell radius");
        }
        if !(self.noise_power > 0.0 && self.pathloss_exponent > 0.0) {
            return bad("noise power and path-loss exponent must be positive");
        }
        if !self.rho_db.is_finite() {
            return bad("rho_db must be finite");
        }
        Ok(())
    }

    /// Linear transmit SNR `rho = P / sigma_n^2`.
    pub fn rho(&self) -> f64 {
        db_to_linear(self.rho_db)
    }

    /// Null-space dimension `max(Nt - (B - 1), 0)`.
    pub fn epsilon(&self) -> usize {
        epsilon(self.antennas, self.bs_count)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn epsilon(antennas: usize, bs_count: usize) -> usize {
    (antennas + 1).saturating_sub(bs_count)
}

/// Every channel of one trial. Users are numbered globally; BS `b` owns users
/// `b*K .. (b+1)*K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub bs_count: usize,
    pub antennas: usize,
    pub users_per_bs: usize,
    pub bs_positions: Vec<(f64, f64)>,
    pub positions: Vec<(f64, f64)>,
    pub owner: Vec<usize>,
    /// Long-term power gain, indexed `[b][k]`.
    pub gain: Vec<Vec<f64>>,
    /// Channel from BS `b` to user `k`, indexed `[b][k]`.
    pub h: Vec<Vec<CVector>>,
}

impl ChannelRealization {
    pub fn user_count(&self) -> usize {
        self.owner.len()
    }

    pub fn pool(&self, b: usize) -> Range<usize> {
        b * self.users_per_bs..(b + 1) * self.users_per_bs
    }

    pub fn pools(&self) -> Vec<Vec<usize>> {
        (0..self.bs_count).map(|b| self.pool(b).collect()).collect()
    }

    pub fn channel(&self, b: usize, k: usize) -> &CVector {
        &self.h[b][k]
    }

    pub fn epsilon(&self) -> usize {
        epsilon(self.antennas, self.bs_count)
    }

    /// Builds a realization directly from channels, for tests and toy
    /// instances. `h[b][k]`; users are split evenly across BSs.
    pub fn from_channels(h: Vec<Vec<CVector>>) -> Result<Self> {
        let bs_count = h.len();
        let users = h.first().map_or(0, |row| row.len());
        if bs_count == 0 || users == 0 || !users.is_multiple_of(bs_count) {
            return Err(Error::InvalidNetwork(
                "channel table must have B rows of B*K users".into(),
            ));
        }
        let antennas = h[0][0].len();
        if h.iter().any(|row| row.len() != users || row.iter().any(|v| v.len() != antennas)) {
            return Err(Error::InvalidNetwork("ragged channel table".into()));
        }
        let users_per_bs = users / bs_count;
        Ok(Self {
            bs_count,
            antennas,
            users_per_bs,
            bs_positions: vec![(0.0, 0.0); bs_count],
            positions: vec![(0.0, 0.0); users],
            owner: (0..users).map(|k| k / users_per_bs).collect(),
            gain: vec![vec![1.0; users]; bs_count],
            h,
        })
    }

    /// `[h_{b,k_1}, ..., h_{b,k_B}]`, the local channels of a set at BS `b`.
    pub fn local_matrix(&self, b: usize, set: &CandidateSet) -> Result<CMatrix> {
        self.check_set(set)?;
        let cols: Vec<&CVector> = set.members.iter().map(|&k| &self.h[b][k]).collect();
        Ok(from_columns(&cols))
    }

    fn check_set(&self, set: &CandidateSet) -> Result<()> {
        if set.members.len() != self.bs_count {
            return Err(Error::MalformedSet(format!(
                "{} members for {} BSs",
                set.members.len(),
                self.bs_count
            )));
        }
        for (b, &k) in set.members.iter().enumerate() {
            if k >= self.user_count() || self.owner[k] != b {
                return Err(Error::MalformedSet(format!("user {k} is not served by BS {b}")));
            }
        }
        Ok(())
    }
}

/// Independent RNG stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One circularly-symmetric complex Gaussian sample, `CN(0, 1)`.
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Vector with i.i.d. `CN(0, 1)` entries.
pub fn iid_channel<R: Rng + ?Sized>(antennas: usize, rng: &mut R) -> CVector {
    CVector::from_fn(antennas, |_, _| cn01(rng))
}

pub fn deploy(cfg: &NetworkConfig, seed: u64) -> Result<ChannelRealization> {
    deploy_with_rng(cfg, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn deploy_with_rng<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    let (bs_count, k_per) = (cfg.bs_count, cfg.users_per_bs);
    let users = bs_count * k_per;

    let bs_positions: Vec<(f64, f64)> = (0..bs_count)
        .map(|b| {
            let phi = 2.0 * PI * b as f64 / bs_count as f64;
            (cfg.cell_radius * phi.cos(), cfg.cell_radius * phi.sin())
        })
        .collect();
    let positions: Vec<(f64, f64)> = (0..users)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let radius = cfg.coop_radius * u.sqrt();
            let phi = 2.0 * PI * v;
            (radius * phi.cos(), radius * phi.sin())
        })
        .collect();

    let mut gain = vec![vec![0.0; users]; bs_count];
    let mut h = vec![Vec::with_capacity(users); bs_count];
    for b in 0..bs_count {
        for k in 0..users {
            let (bx, by) = bs_positions[b];
            let (ux, uy) = positions[k];
            let d = (bx - ux).hypot(by - uy);
            let g = (d / cfg.cell_radius).powf(-cfg.pathloss_exponent);
            gain[b][k] = g;
            h[b].push(iid_channel(cfg.antennas, rng) * Complex64::new(g.sqrt(), 0.0));
        }
    }
    Ok(ChannelRealization {
        bs_count,
        antennas: cfg.antennas,
        users_per_bs: k_per,
        bs_positions,
        positions,
        owner: (0..users).map(|k| k / k_per).collect(),
        gain,
        h,
    })
}

/// `H~_{b k_b}`: the local channels of every non-intended member of the set,
/// in ascending BS order.
pub fn aggregate_interference_matrix(
    real: &ChannelRealization,
    b: usize,
    set: &CandidateSet,
) -> Result<CMatrix> {
    real.check_set(set)?;
    if b >= real.bs_count {
        return Err(Error::MalformedSet(format!("no BS {b}")));
    }
    let cols: Vec<&CVector> = set
        .members
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != b)
        .map(|(_, &k)| &real.h[b][k])
        .collect();
    Ok(from_columns(&cols))
}

/// CSV writer for channel dumps: `trial,b,k,antenna,re,im,gain`.
pub struct ChannelDumpWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ChannelDumpWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(["trial", "b", "k", "antenna", "re", "im", "gain"])?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, trial: u64, real: &ChannelRealization) -> Result<()> {
        for b in 0..real.bs_count {
            for k in 0..real.user_count() {
                for (n, z) in real.h[b][k].iter().enumerate() {
                    self.inner.write_record([
                        trial.to_string(),
                        b.to_string(),
                        k.to_string(),
                        n.to_string(),
                        sig10(z.re),
                        sig10(z.im),
                        sig10(real.gain[b][k]),
                    ])?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(members: &[usize]) -> CandidateSet {
        CandidateSet {
            members: members.to_vec(),
            index: 0,
        }
    }

    #[test]
    fn distances_and_gains_stay_in_the_annulus() {
        let cfg = NetworkConfig::default();
        let real = deploy(&cfg, 1).unwrap();
        let (lo, hi) = (1.3f64.powi(-4), 0.7f64.powi(-4));
        for b in 0..3 {
            for k in 0..real.user_count() {
                let g = real.gain[b][k];
                assert!(g >= lo - 1e-12 && g <= hi + 1e-12, "gain {g}");
            }
        }
        assert!((lo - 0.350).abs() < 1e-3 && (hi - 4.165).abs() < 1e-3);
    }

    #[test]
    fn border_user_has_unit_gain() {
        // A user sitting at the cluster center is exactly r from every BS.
        let cfg = NetworkConfig::default();
        let d = cfg.cell_radius;
        assert_eq!((d / cfg.cell_radius).powf(-cfg.pathloss_exponent), 1.0);
    }

    #[test]
    fn deployment_is_deterministic() {
        let cfg = NetworkConfig::default();
        assert_eq!(deploy(&cfg, 42).unwrap(), deploy(&cfg, 42).unwrap());
        assert_ne!(deploy(&cfg, 42).unwrap(), deploy(&cfg, 43).unwrap());
        let a = deploy_with_rng(&cfg, &mut trial_rng(7, 3)).unwrap();
        let b = deploy_with_rng(&cfg, &mut trial_rng(7, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ownership_partitions_users() {
        let cfg = NetworkConfig {
            users_per_bs: 4,
            ..NetworkConfig::default()
        };
        let real = deploy(&cfg, 0).unwrap();
        let pools = real.pools();
        assert_eq!(pools.iter().map(Vec::len).sum::<usize>(), 12);
        for (b, pool) in pools.iter().enumerate() {
            assert!(pool.iter().all(|&k| real.owner[k] == b));
        }
        assert_eq!(real.epsilon(), 1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = NetworkConfig::default();
        for cfg in [
            NetworkConfig { bs_count: 1, ..base.clone() },
            NetworkConfig { antennas: 1, ..base.clone() },
            NetworkConfig { users_per_bs: 0, ..base.clone() },
            NetworkConfig { coop_radius: 1000.0, ..base.clone() },
            NetworkConfig { cell_radius: -1.0, ..base.clone() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn interference_matrix_ordering() {
        let cfg = NetworkConfig {
            users_per_bs: 2,
            ..NetworkConfig::default()
        };
        let real = deploy(&cfg, 5).unwrap();
        let s = set(&[1, 2, 5]);
        let m = aggregate_interference_matrix(&real, 1, &s).unwrap();
        assert_eq!(m.ncols(), 2);
        assert_eq!(m.column(0).into_owned(), real.h[1][1]);
        assert_eq!(m.column(1).into_owned(), real.h[1][5]);
        for col in m.column_iter() {
            assert_ne!(col.into_owned(), real.h[1][2]);
        }

        let two = deploy(
            &NetworkConfig {
                bs_count: 2,
                users_per_bs: 1,
                ..NetworkConfig::default()
            },
            1,
        )
        .unwrap();
        let m = aggregate_interference_matrix(&two, 0, &set(&[0, 1])).unwrap();
        assert_eq!(m.ncols(), 1);
        assert_eq!(m.column(0).into_owned(), two.h[0][1]);
    }

    #[test]
    fn malformed_sets_are_rejected() {
        let real = deploy(&NetworkConfig { users_per_bs: 2, ..NetworkConfig::default() }, 5).unwrap();
        assert!(aggregate_interference_matrix(&real, 0, &set(&[0, 2])).is_err());
        assert!(aggregate_interference_matrix(&real, 0, &set(&[2, 0, 4])).is_err());
    }

    #[test]
    fn fast_fading_has_unit_variance_per_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let nt = 4;
        let mean: f64 = (0..n).map(|_| iid_channel(nt, &mut rng).norm_squared()).sum::<f64>() / n as f64;
        assert!((mean / nt as f64 - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn user_positions_are_area_uniform() {
        let cfg = NetworkConfig {
            users_per_bs: 20_000,
            antennas: 2,
            bs_count: 2,
            ..NetworkConfig::default()
        };
        let real = deploy(&cfg, 3).unwrap();
        let msr: f64 = real.positions.iter().map(|(x, y)| x * x + y * y).sum::<f64>()
            / real.positions.len() as f64;
        let expected = cfg.coop_radius.powi(2) / 2.0;
        assert!((msr / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn dump_has_one_row_per_coefficient() {
        let cfg = NetworkConfig {
            users_per_bs: 2,
            ..NetworkConfig::default()
        };
        let real = deploy(&cfg, 1).unwrap();
        let mut buf = Vec::new();
        let mut w = ChannelDumpWriter::new(&mut buf).unwrap();
        w.write(0, &real).unwrap();
        w.finish().unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("trial,b,k,antenna,re,im,gain"));
        assert_eq!(lines.count(), 3 * 6 * 3);
    }
}
