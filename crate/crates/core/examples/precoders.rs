//! DZF and DVSINR precoders on a two-cell toy instance, with the resulting
//! per-link SINR and rate.

use cbf_sched::channel::{aggregate_interference_matrix, ChannelRealization};
use cbf_sched::linalg::CVector;
use cbf_sched::precoding::{dvsinr_precoder, dzf_precoder, effective_gain, link_budgets, sum_rate, PrecoderKind};
use cbf_sched::scheduler::CandidateSet;
use num_complex::Complex64;

fn cv(xs: &[f64]) -> CVector {
    CVector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn main() -> cbf_sched::Result<()> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // h[b][k]: channel from BS b to user k. BS 0 serves user 0, BS 1 user 1.
    let real = ChannelRealization::from_channels(vec![
        vec![cv(&[1.0, 0.0]), cv(&[s, s])],
        vec![cv(&[s, s]), cv(&[1.0, 0.0])],
    ])?;
    let set = CandidateSet { members: vec![0, 1], index: 0 };
    let h = real.channel(0, 0);
    let interference = aggregate_interference_matrix(&real, 0, &set)?;

    let zf = dzf_precoder(h, &interference)?;
    let w: Vec<String> = zf.w.iter().map(|z| format!("{:.4}", z.re)).collect();
    println!("DZF    w = [{}]  gain = {:.4}", w.join(", "), effective_gain(h, &zf.w));
    for rho in [0.1, 1.0, 10.0, 1000.0] {
        let p = dvsinr_precoder(h, &interference, rho)?;
        println!("DVSINR rho = {rho:>6}: gain = {:.4}", effective_gain(h, &p.w));
    }

    for kind in [PrecoderKind::Dzf, PrecoderKind::Dvsinr] {
        let budgets = link_budgets(&real, &set, kind, 1.0)?;
        for (b, lb) in budgets.iter().enumerate() {
            println!("{kind} link {b}: signal {:.3}, SINR {:.3}, rate {:.3}", lb.signal, lb.sinr, lb.rate);
        }
        println!("{kind} sum rate at rho = 1: {:.4} bits/s/Hz", sum_rate(&budgets));
    }
    Ok(())
}
