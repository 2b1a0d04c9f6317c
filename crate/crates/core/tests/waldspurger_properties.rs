use proptest::prelude::*;
use quadtwist::forms::level32_form;
use quadtwist::lfunc::TruncationPolicy;
use quadtwist::waldspurger::*;

#[test]
fn tunnell_parity_to_1e5() {
    let g = tunnell_g(101_000).unwrap();
    let coeffs = g.coefficients().unwrap();
    assert!(coeffs.iter().step_by(2).all(|&c| c == 0));
    let gaps = gap_statistics(&coeffs, 100_000).unwrap();
    assert!((2..=100_000).step_by(2).all(|n| gaps.gap(n) >= 1));
    assert!(!gaps.truncated);
}

#[test]
fn ratio_report_csv_and_coherence() {
    let f = level32_form(200_000).unwrap();
    let g = tunnell_g(601).unwrap();
    let r = waldspurger_ratios(&g, &f, 600, &TruncationPolicy::default()).unwrap();
    assert!(r.vanishing_coherent());
    let csv = r.to_csv();
    assert!(csv.starts_with("class,d,ag,L,ratio\n"));
    assert_eq!(csv.lines().count(), r.entries.len() + 1);
    let kappa: Vec<f64> = r.classes.iter().filter(|c| c.verified).filter_map(|c| c.kappa_hat).collect();
    assert!(!kappa.is_empty());
    // All usable d share one constant.
    for e in &r.entries {
        assert!((e.ratio - kappa[0]).abs() <= 1e-6 * kappa[0]);
    }
}

proptest! {
    #[test]
    fn composite_character_is_completely_multiplicative(
        d_index in 0usize..12, m in 1u64..10_000, n in 1u64..10_000, k in 0u32..4
    ) {
        let ds = [1i64, -3, -4, 5, -7, 8, -8, 12, 13, -15, 17, -20];
        let chi = composite_character(k, ds[d_index]).unwrap();
        prop_assert_eq!(chi.eval(m * n), chi.eval(m) * chi.eval(n));
    }
}
