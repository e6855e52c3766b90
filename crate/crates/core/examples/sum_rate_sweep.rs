//! Sum rate against SNR for the interference-limited case, as CSV on stdout.

use cbf_sched::harness::{run_sweep, write_results_csv, ExperimentConfig};

fn main() -> cbf_sched::Result<()> {
    let cfg = ExperimentConfig::parse(
        "B = 3\n\
         Nt = 2\n\
         K = 6\n\
         rho_db = -10, 0, 10, 20\n\
         trials = 200\n\
         seed = 5\n\
         precoder = DVSINR\n\
         strategies = all\n",
    )?;
    write_results_csv(std::io::stdout().lock(), &run_sweep(&cfg)?)
}
