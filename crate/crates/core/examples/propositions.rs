//! Statistical checks of the gain, leakage and NSP results, as CSV on
//! stdout with a PASS/FAIL summary on stderr.

use cbf_sched::analysis::{
    check_alpha_heuristic, check_prop1, check_prop2_prop3, check_prop4_leakage, check_prop6_nspa,
    write_reports_csv,
};

fn main() -> cbf_sched::Result<()> {
    let samples = 10_000;
    let reports = vec![
        check_prop1(4, 3, samples, 1)?,
        check_prop2_prop3(4, 3, &[1e-9, 1.0, 10.0, 100.0, 1e8], samples, 1)?,
        check_prop4_leakage(3, 3, &[1.0, 1e3, 1e4, 1e5], samples, 1)?,
        check_alpha_heuristic(3, 3, &[1e-9, 10.0, 1e8], samples, 1)?,
        check_prop6_nspa(5, 3, samples, 1)?,
    ];
    write_reports_csv(std::io::stdout().lock(), &reports)?;
    for r in &reports {
        eprintln!("{:<4} {}", r.proposition, if r.passed { "PASS" } else { "FAIL" });
    }
    Ok(())
}
