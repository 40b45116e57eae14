//! Fixed reference values computed with an independent statistics package.

use recaudit::diversity::welch_ttest;
use recaudit::stats::{mann_whitney, paired_ttest};

#[test]
fn welch_reference() {
    let a = [19.8, 20.4, 19.6, 17.8, 18.5, 18.9, 18.3, 18.9, 19.5, 22.0];
    let b = [
        28.2, 26.6, 20.1, 23.3, 25.2, 22.1, 17.7, 27.6, 20.6, 13.7, 23.2, 17.5, 20.6, 18.0, 23.9,
        21.6, 24.3, 20.4, 23.9, 13.3,
    ];
    let r = welch_ttest(&a, &b).unwrap();
    assert!((r.t_stat - -2.225512039969852).abs() < 1e-9);
    assert!((r.df - 24.524634944257343).abs() < 1e-9);
    assert!((r.p_value - 0.035484530830010325).abs() < 1e-9);
}

#[test]
fn paired_reference() {
    let r = paired_ttest(&[1.1, 2.3, 2.9, 4.2, 5.1], &[1.0, 2.0, 3.1, 3.9, 4.6]).unwrap();
    assert!((r.t - 1.6903085094570327).abs() < 1e-9);
    assert!((r.p_value - 0.16623275185812553).abs() < 1e-9);
    assert_eq!(r.df, 4.0);
}

#[test]
fn mann_whitney_reference_with_ties() {
    let r = mann_whitney(&[1.0, 3.0, 5.0, 7.0, 9.0, 11.0], &[2.0, 4.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0])
        .unwrap();
    assert_eq!(r.u, 19.0);
    assert!((r.p_value - 0.5608449284286947).abs() < 1e-9);
}
