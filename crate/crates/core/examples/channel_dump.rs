//! Deploys a small network and writes its channels as CSV.

use cbf_sched::channel::{deploy, ChannelDumpWriter, NetworkConfig};

fn main() -> cbf_sched::Result<()> {
    let net = NetworkConfig {
        bs_count: 2,
        antennas: 2,
        users_per_bs: 2,
        ..NetworkConfig::default()
    };
    let real = deploy(&net, 1)?;
    for (k, (x, y)) in real.positions.iter().enumerate() {
        eprintln!("user {k} at ({x:.1}, {y:.1}) m, served by BS {}", real.owner[k]);
    }
    let mut w = ChannelDumpWriter::new(std::io::stdout().lock())?;
    w.write(0, &real)?;
    w.finish()
}
