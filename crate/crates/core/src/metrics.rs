//! Local-CSI compatibility metrics `g_{b,l}`.
//!
//! A BS maps the local channels of a candidate set to one nonnegative number
//! estimating the effective gain `|h^H w|^2` its precoder would achieve. These
//! scalars are all the CU ever receives.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{abs_det, lambda_max_gram, projectors, CMatrix, CVector};
use crate::precoding::PrecoderKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Projector metric `‖Q h‖^2 + alpha ‖P h‖^2`, for `Nt >= B`.
    Mus,
    /// Interference-limited heuristic, for `Nt < B`.
    Mus2,
    /// Product-of-sines approximation of the null-space projection.
    Nspa,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Mus => "MUS",
            MetricKind::Mus2 => "MUS2",
            MetricKind::Nspa => "NSPA",
        })
    }
}

/// One `(b, l, value)` report on the backhaul.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionMetric {
    pub bs: usize,
    pub set_index: usize,
    pub value: f64,
    pub kind: MetricKind,
}

/// Weight on the `Sp(H~)` component, `1 / (rho lambda_max(H~^H H~) + 1)^2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaWeight(f64);

impl AlphaWeight {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn alpha_weight(htilde: &CMatrix, rho: f64) -> AlphaWeight {
    let lmax = lambda_max_gram(htilde);
    AlphaWeight(1.0 / (rho * lmax + 1.0).powi(2))
}

/// Projector metric with the `H~`-only work done once.
pub struct MusEvaluator {
    p: CMatrix,
    q: CMatrix,
    alpha: f64,
}

impl MusEvaluator {
    pub fn new(htilde: &CMatrix, rho: f64, kind: PrecoderKind) -> Result<Self> {
        let alpha = match kind {
            PrecoderKind::Dzf => 0.0,
            PrecoderKind::Dvsinr => alpha_weight(htilde, rho).value(),
        };
        Self::with_alpha(htilde, alpha)
    }

    /// Same metric with an externally fixed weight.
    pub fn with_alpha(htilde: &CMatrix, alpha: f64) -> Result<Self> {
        if htilde.ncols() + 1 > htilde.nrows() {
            return Err(Error::MusUndefined);
        }
        let (p, q) = projectors(htilde)?;
        Ok(Self { p, q, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self, h: &CVector) -> f64 {
        let nsp = (&self.q * h).norm_squared();
        if self.alpha == 0.0 {
            return nsp;
        }
        nsp + self.alpha * (&self.p * h).norm_squared()
    }
}

pub fn metric_mus(h: &CVector, htilde: &CMatrix, rho: f64, kind: PrecoderKind) -> Result<f64> {
    Ok(MusEvaluator::new(htilde, rho, kind)?.value(h))
}

/// The interference-limited metric `‖h‖^2 (alpha + (1 - alpha) M zeta)`.
///
/// `M` is `‖h‖^2` over the geometric mean of the interferers' squared norms.
/// `zeta` divides the volume spanned by all local channels of the set by the
/// regularized volume of the interferers, `|det(rho^{-1} I + H~ H~^H)|`. With
/// fewer antennas than set members the `B x B` Gram matrix `H^H H` is
/// singular, so the volume is taken from the `Nt x Nt` Gram matrix `H H^H`,
/// which holds the same nonzero eigenvalues.
pub struct Mus2Evaluator {
    interferers: CMatrix,
    outer: CMatrix,
    alpha: f64,
    geo_mean: f64,
    denom_det: f64,
}

impl Mus2Evaluator {
    pub fn new(htilde: &CMatrix, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive, got {rho}")));
        }
        let nt = htilde.nrows();
        let m = htilde.ncols();
        let mut log_sum = 0.0;
        for col in htilde.column_iter() {
            let n2 = col.norm_squared();
            if n2 == 0.0 {
                return Err(Error::ZeroVector);
            }
            log_sum += n2.ln();
        }
        let geo_mean = if m == 0 { 1.0 } else { (log_sum / m as f64).exp() };
        let outer = htilde * htilde.adjoint();
        let mut c = outer.clone();
        for i in 0..nt {
            c[(i, i)] += Complex64::new(1.0 / rho, 0.0);
        }
        Ok(Self {
            interferers: htilde.clone(),
            outer,
            alpha: alpha_weight(htilde, rho).value(),
            geo_mean,
            denom_det: abs_det(&c),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coefficient_m(&self, h: &CVector) -> f64 {
        h.norm_squared() / self.geo_mean
    }

    pub fn zeta(&self, h: &CVector) -> f64 {
        let volume = if h.len() <= self.interferers.ncols() {
            abs_det(&(&self.outer + h * h.adjoint()))
        } else {
            let mut full = self.interferers.clone().insert_column(0, Complex64::new(0.0, 0.0));
            full.set_column(0, h);
            abs_det(&(full.adjoint() * &full))
        };
        volume / self.denom_det
    }

    pub fn value(&self, h: &CVector) -> f64 {
        let n2 = h.norm_squared();
        n2 * (self.alpha + (1.0 - self.alpha) * self.coefficient_m(h) * self.zeta(h))
    }
}

/// `h_full` carries the local channels of the whole set (intended column
/// included); `htilde` the interferers only.
pub fn metric_mus2(h: &CVector, h_full: &CMatrix, htilde: &CMatrix, rho: f64) -> Result<f64> {
    if h_full.ncols() != htilde.ncols() + 1 {
        return Err(Error::MalformedSet(
            "local channel matrix must hold the intended user plus every interferer".into(),
        ));
    }
    if h.norm_squared() == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(Mus2Evaluator::new(htilde, rho)?.value(h))
}

/// `‖h‖^2 prod_i (1 - eta^2(h, h_i))` over the co-channel vectors.
pub fn metric_nspa(h: &CVector, cochannels: &[&CVector]) -> Result<f64> {
    let n2 = h.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut value = n2;
    for v in cochannels {
        let v2 = v.norm_squared();
        if v2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        let eta2 = (h.dotc(v).norm_sqr() / (n2 * v2)).min(1.0);
        value *= 1.0 - eta2;
    }
    Ok(value)
}
