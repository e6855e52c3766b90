use cbf_sched::analysis::{check_alpha_heuristic, check_prop2_prop3, check_prop4_leakage, write_reports_csv};

#[test]
fn heuristic_error_at_ten_is_stable() {
    // Golden from the first validated run (seed 7, 2e4 draws, Nt = B = 3).
    let r = check_alpha_heuristic(3, 3, &[1e-9, 10.0, 1e8], 20_000, 7).unwrap();
    let mid = r.row("5", 10.0).unwrap();
    assert!((mid.empirical / 0.1161362162 - 1.0).abs() < 1e-8, "{}", mid.empirical);
    assert!(r.passed);
}

#[test]
fn jain_approximation_is_loosest_at_mid_snr() {
    let grid = [1e-9, 1e-1, 1.0, 10.0, 100.0, 1e8];
    let r = check_prop2_prop3(3, 3, &grid, 20_000, 3).unwrap();
    let gaps: Vec<f64> = r.rows_labelled("2").map(|row| row.rel_error).collect();
    let interior = gaps[1..5].iter().cloned().fold(0.0, f64::max);
    assert!(gaps[0] < interior && gaps[5] < interior, "{gaps:?}");
    assert!(r.passed);
}

#[test]
fn leakage_approximation_tracks_the_decay() {
    let grid = [1e3, 1e4, 1e5];
    let r = check_prop4_leakage(3, 3, &grid, 5000, 2).unwrap();
    let approx: Vec<f64> = r.rows_labelled("4-approx").map(|row| row.predicted).collect();
    // Draws with a small interference eigenvalue keep the `+1` term alive,
    // so the per-decade drop reaches 100x only in the upper decade.
    assert!(approx[0] / approx[1] < approx[1] / approx[2]);
    let tail = approx[1] / approx[2];
    assert!((tail / 100.0 - 1.0).abs() < 0.05, "{tail}");
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &[r]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * grid.len() + 1);
}
