//! One deployment, every strategy: chosen users, backhaul load and the true
//! sum rate of the chosen set.

use cbf_sched::channel::{deploy, NetworkConfig};
use cbf_sched::precoding::PrecoderKind;
use cbf_sched::scheduler::{evaluate_strategies, pruned_pools, Strategy};

fn main() -> cbf_sched::Result<()> {
    let net = NetworkConfig {
        bs_count: 3,
        antennas: 3,
        users_per_bs: 8,
        rho_db: 10.0,
        ..NetworkConfig::default()
    };
    let real = deploy(&net, 2024)?;
    for (b, pool) in pruned_pools(&real).iter().enumerate() {
        println!("BS {b}: pruned pool {pool:?} of {:?}", real.pool(b));
    }
    let strategies = [
        Strategy::OGcsi,
        Strategy::OMus,
        Strategy::RMus,
        Strategy::ONspa,
        Strategy::RNspa,
        Strategy::MaxSnr,
    ];
    for kind in [PrecoderKind::Dzf, PrecoderKind::Dvsinr] {
        println!("{kind}:");
        for o in evaluate_strategies(&real, kind, net.rho(), &strategies)? {
            println!(
                "  {:<8} users {:?}  metrics/BS {:>4}  sum rate {:.3}",
                o.strategy.name(),
                o.members,
                o.metrics_reported_per_bs,
                o.sum_rate
            );
        }
    }
    Ok(())
}
