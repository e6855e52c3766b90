//! The three BS-side selection metrics against the true DVSINR gain.

use cbf_sched::channel::iid_channel;
use cbf_sched::linalg::{from_columns, CVector};
use cbf_sched::metrics::{metric_mus, metric_mus2, metric_nspa};
use cbf_sched::precoding::{dvsinr_precoder, effective_gain, PrecoderKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cbf_sched::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = 10.0;

    println!("Nt = 4, B = 3 (power limited)");
    let h = iid_channel(4, &mut rng);
    let others: Vec<CVector> = (0..2).map(|_| iid_channel(4, &mut rng)).collect();
    let refs: Vec<&CVector> = others.iter().collect();
    let ht = from_columns(&refs);
    let truth = effective_gain(&h, &dvsinr_precoder(&h, &ht, rho)?.w);
    println!("  true DVSINR gain {truth:.4}");
    println!("  MUS  (DVSINR)    {:.4}", metric_mus(&h, &ht, rho, PrecoderKind::Dvsinr)?);
    println!("  MUS  (DZF)       {:.4}", metric_mus(&h, &ht, rho, PrecoderKind::Dzf)?);
    println!("  NSPA             {:.4}", metric_nspa(&h, &refs)?);

    println!("Nt = 2, B = 3 (interference limited)");
    let h = iid_channel(2, &mut rng);
    let others: Vec<CVector> = (0..2).map(|_| iid_channel(2, &mut rng)).collect();
    let refs: Vec<&CVector> = others.iter().collect();
    let ht = from_columns(&refs);
    let full = from_columns(&[&h, refs[0], refs[1]]);
    let truth = effective_gain(&h, &dvsinr_precoder(&h, &ht, rho)?.w);
    println!("  true DVSINR gain {truth:.4}");
    println!("  MUS2             {:.4}", metric_mus2(&h, &full, &ht, rho)?);
    println!("  NSPA             {:.4}", metric_nspa(&h, &refs)?);
    match metric_mus(&h, &ht, rho, PrecoderKind::Dvsinr) {
        Ok(_) => unreachable!(),
        Err(e) => println!("  MUS              {e}"),
    }
    Ok(())
}
