#![allow(dead_code)]

use cbf_sched::channel::iid_channel;
use cbf_sched::linalg::{from_columns, projectors, CMatrix, CVector};
use cbf_sched::precoding::{dvsinr_precoder, dzf_precoder, PrecoderKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UNIT_NORM_TOL: f64 = 1e-12;
pub const PHASE_TOL: f64 = 1e-10;
pub const ZF_RESIDUAL_TOL: f64 = 1e-18;
pub const NSP_TOL: f64 = 1e-9;

/// Intended channel and interference matrix with i.i.d. CN(0, 1) entries.
pub fn random_instance<R: Rng>(rng: &mut R, nt: usize, b: usize) -> (CVector, CMatrix) {
    let h = iid_channel(nt, rng);
    let cols: Vec<CVector> = (1..b).map(|_| iid_channel(nt, rng)).collect();
    (h, from_columns(&cols.iter().collect::<Vec<_>>()))
}

/// Checks both precoders on `instances` random draws with `Nt >= B` and
/// random SNR. Returns descriptions of the violations found.
pub fn precoder_invariant_violations(instances: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..instances {
        let b = rng.random_range(2..=4);
        let nt = rng.random_range(b..=8);
        let rho = 10f64.powf(rng.random_range(-3.0..6.0));
        let (h, ht) = random_instance(&mut rng, nt, b);
        let (_, q) = projectors(&ht).expect("full-rank draw");
        let nsp = (&q * &h).norm_squared();
        let hn = h.norm_squared();
        let precoders = [
            dzf_precoder(&h, &ht).expect("DZF defined"),
            dvsinr_precoder(&h, &ht, rho).expect("DVSINR defined"),
        ];
        for p in precoders {
            let tag = format!("instance {i} ({}, Nt={nt}, B={b}, rho={rho:.3e})", p.kind);
            if (p.w.norm() - 1.0).abs() > UNIT_NORM_TOL {
                bad.push(format!("{tag}: norm {}", p.w.norm()));
            }
            let hw = h.dotc(&p.w);
            if hw.im.abs() > PHASE_TOL || hw.re < 0.0 {
                bad.push(format!("{tag}: h^H w = {hw}"));
            }
            let g = hw.norm_sqr();
            match p.kind {
                PrecoderKind::Dzf => {
                    for col in ht.column_iter() {
                        let r = col.into_owned().dotc(&p.w).norm_sqr();
                        if r >= ZF_RESIDUAL_TOL {
                            bad.push(format!("{tag}: ZF residual {r:e}"));
                        }
                    }
                    if (g - nsp).abs() > NSP_TOL {
                        bad.push(format!("{tag}: gain {g} vs NSP {nsp}"));
                    }
                }
                PrecoderKind::Dvsinr => {
                    if g < nsp - NSP_TOL || g > hn + NSP_TOL {
                        bad.push(format!("{tag}: gain {g} outside [{nsp}, {hn}]"));
                    }
                }
            }
        }
    }
    bad
}
