use dicke_web::{darkness_scan, mexhat_curve, trajectory};

#[test]
fn trajectory_records_are_triples_in_time_order() {
    let data = trajectory(1.3, 1.0, 2.0, false).unwrap();
    assert_eq!(data.len() % 3, 0);
    let t: Vec<f64> = data.chunks(3).map(|r| r[0]).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!((t.last().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(data.chunks(3).all(|r| r[1] >= 0.0 && (0.0..=2.0).contains(&r[2])));
}

#[test]
fn trajectory_rejects_silly_lengths() {
    assert!(trajectory(1.3, 1.0, 0.0, false).is_err());
    assert!(trajectory(1.3, 1.0, 1e4, false).is_err());
    assert!(trajectory(-1.0, 1.0, 1.0, false).is_err());
}

#[test]
fn scan_finds_darkening_above_the_critical_point() {
    let data = darkness_scan(0.72, 0.95, 24, 1.0, 40.0, false).unwrap();
    assert_eq!(data.len(), 72);
    let (i, _) = data.chunks(3).enumerate().skip(1).min_by(|a, b| a.1[1].total_cmp(&b.1[1])).unwrap();
    let lambda = data[3 * i];
    assert!((lambda - 0.823).abs() < 0.03, "{lambda}");
    assert!(darkness_scan(0.5, 1.0, 1, 1.0, 10.0, false).is_err());
}

#[test]
fn mexhat_curve_ends_at_the_well_bottom() {
    let data = mexhat_curve(1.0, 3.0, 4.0, 10).unwrap();
    assert_eq!(data.len(), 30);
    let last = &data[27..];
    assert!((last[0] - 0.5625).abs() < 1e-15);
    assert!((last[1] - 0.75).abs() < 1e-6);
    let avg: Vec<f64> = data.chunks(3).map(|r| r[1]).collect();
    assert!(avg.windows(2).all(|w| w[1] > w[0]));
    assert!(mexhat_curve(1.0, -3.0, 4.0, 10).is_err());
}
