//! Distributed precoders and the physical-layer arithmetic around them.
//!
//! Each BS builds its precoder from local CSI only: the intended user's
//! channel `h` and the aggregate interference matrix `H~` of the other members
//! of the candidate set.
//!
//! * DZF steers `h` into the null space of `H~^H`, so the cross links of that
//!   BS are exactly nulled. Only defined when `Nt >= B`.
//! * DVSINR maximizes a virtual SINR with unit leakage weights, which gives
//!   `w ∝ (rho^{-1} I + H~ H~^H)^{-1} h`. Defined for any `Nt`.
//!
//! Both are unit norm and phase aligned (`h^H w` real and nonnegative).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, Dyn};
use num_complex::Complex64;

use crate::channel::{aggregate_interference_matrix, ChannelRealization};
use crate::error::{Error, Result};
use crate::linalg::{null_space_basis, CMatrix, CVector};
use crate::scheduler::CandidateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecoderKind {
    Dzf,
    Dvsinr,
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecoderKind::Dzf => "DZF",
            PrecoderKind::Dvsinr => "DVSINR",
        })
    }
}

impl FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DZF" => Ok(PrecoderKind::Dzf),
            "DVSINR" => Ok(PrecoderKind::Dvsinr),
            other => Err(Error::Config(format!("unknown precoder '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub w: CVector,
    pub kind: PrecoderKind,
    /// Linear SNR the precoder was designed for (DVSINR only).
    pub rho: Option<f64>,
}

/// `|h^H w|^2`.
pub fn effective_gain(h: &CVector, w: &CVector) -> f64 {
    h.dotc(w).norm_sqr()
}

/// The part of a precoder that depends only on `H~`, so one factorization
/// serves every intended user sharing the same co-scheduled users.
pub enum PreparedPrecoder {
    Dzf {
        basis: CMatrix,
    },
    Dvsinr {
        chol: Cholesky<Complex64, Dyn>,
        rho: f64,
    },
}

impl PreparedPrecoder {
    pub fn new(htilde: &CMatrix, kind: PrecoderKind, rho: f64) -> Result<Self> {
        let nt = htilde.nrows();
        match kind {
            PrecoderKind::Dzf => {
                if htilde.ncols() + 1 > nt {
                    return Err(Error::DzfUndefined {
                        antennas: nt,
                        bs_count: htilde.ncols() + 1,
                    });
                }
                Ok(PreparedPrecoder::Dzf {
                    basis: null_space_basis(htilde).basis,
                })
            }
            PrecoderKind::Dvsinr => {
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::Config(format!("rho must be positive, got {rho}")));
                }
                let mut c = htilde * htilde.adjoint();
                for i in 0..nt {
                    c[(i, i)] += Complex64::new(1.0 / rho, 0.0);
                }
                let chol = Cholesky::new(c).ok_or(Error::NotPositiveDefinite)?;
                Ok(PreparedPrecoder::Dvsinr { chol, rho })
            }
        }
    }

    pub fn kind(&self) -> PrecoderKind {
        match self {
            PreparedPrecoder::Dzf { .. } => PrecoderKind::Dzf,
            PreparedPrecoder::Dvsinr { .. } => PrecoderKind::Dvsinr,
        }
    }

    pub fn precode(&self, h: &CVector) -> Result<Precoder> {
        let hn = h.norm();
        if hn == 0.0 {
            return Err(Error::ZeroVector);
        }
        match self {
            PreparedPrecoder::Dzf { basis } => {
                // coefficients of h on the null-space basis: (h^H V)^H = V^H h
                let coeff = basis.adjoint() * h;
                let cn = coeff.norm();
                if cn <= 1e-14 * hn {
                    return Err(Error::ZeroEffectiveChannel);
                }
                let w = basis * coeff;
                let w = &w / Complex64::new(w.norm(), 0.0);
                Ok(Precoder {
                    w,
                    kind: PrecoderKind::Dzf,
                    rho: None,
                })
            }
            PreparedPrecoder::Dvsinr { chol, rho } => {
                let x = chol.solve(h);
                let w = &x / Complex64::new(x.norm(), 0.0);
                Ok(Precoder {
                    w,
                    kind: PrecoderKind::Dvsinr,
                    rho: Some(*rho),
                })
            }
        }
    }
}

pub fn dzf_precoder(h: &CVector, htilde: &CMatrix) -> Result<Precoder> {
    PreparedPrecoder::new(htilde, PrecoderKind::Dzf, 1.0)?.precode(h)
}

pub fn dvsinr_precoder(h: &CVector, htilde: &CMatrix, rho: f64) -> Result<Precoder> {
    PreparedPrecoder::new(htilde, PrecoderKind::Dvsinr, rho)?.precode(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// `|h_{b k_b}^H w_b|^2`.
    pub signal: f64,
    /// `|h_{j k_b}^H w_j|^2` for each BS `j`; the own entry is zero.
    pub interference: Vec<f64>,
    pub sinr: f64,
    pub rate: f64,
}

impl LinkBudget {
    pub fn new(signal: f64, interference: Vec<f64>, rho: f64) -> Self {
        let leak: f64 = interference.iter().sum();
        let sinr = rho * signal / (rho * leak + 1.0);
        Self {
            signal,
            interference,
            sinr,
            rate: (1.0 + sinr).log2(),
        }
    }
}

/// Precoders of every BS for one candidate set, each from local CSI only.
pub fn set_precoders(
    real: &ChannelRealization,
    set: &CandidateSet,
    kind: PrecoderKind,
    rho: f64,
) -> Result<Vec<Precoder>> {
    (0..real.bs_count)
        .map(|b| {
            let htilde = aggregate_interference_matrix(real, b, set)?;
            PreparedPrecoder::new(&htilde, kind, rho)?.precode(&real.h[b][set.members[b]])
        })
        .collect()
}

/// Budgets of every scheduled user given the precoders of every BS.
pub fn budgets_from_precoders(
    real: &ChannelRealization,
    members: &[usize],
    precoders: &[&CVector],
    rho: f64,
) -> Vec<LinkBudget> {
    members
        .iter()
        .enumerate()
        .map(|(b, &k)| {
            let signal = effective_gain(&real.h[b][k], precoders[b]);
            let interference = (0..members.len())
                .map(|j| {
                    if j == b {
                        0.0
                    } else {
                        effective_gain(&real.h[j][k], precoders[j])
                    }
                })
                .collect();
            LinkBudget::new(signal, interference, rho)
        })
        .collect()
}

pub fn link_budgets(
    real: &ChannelRealization,
    set: &CandidateSet,
    kind: PrecoderKind,
    rho: f64,
) -> Result<Vec<LinkBudget>> {
    let precoders = set_precoders(real, set, kind, rho)?;
    let ws: Vec<&CVector> = precoders.iter().map(|p| &p.w).collect();
    Ok(budgets_from_precoders(real, &set.members, &ws, rho))
}

/// `sum_b log2(1 + SINR_b)`.
pub fn sum_rate(budgets: &[LinkBudget]) -> f64 {
    budgets.iter().map(|l| (1.0 + l.sinr).log2()).sum()
}
