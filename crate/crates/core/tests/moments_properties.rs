use std::sync::OnceLock;

use proptest::prelude::*;
use quadtwist::forms::{delta_coefficients, level32_form, Eigenform};
use quadtwist::lfunc::TruncationPolicy;
use quadtwist::moments::*;

fn delta() -> &'static Eigenform {
    static FORM: OnceLock<Eigenform> = OnceLock::new();
    FORM.get_or_init(|| delta_coefficients(200_000, 1_000_000).unwrap())
}

fn fixed_lfk() -> LfkEstimate {
    l_f_value(delta(), &[1e4, 2e4, 4e4], IndexWeight::FamilyAverage, &TruncationPolicy::default())
        .unwrap()
}

#[test]
fn family_members_are_unit_squares_with_correct_sign() {
    for (level, k) in [(1u64, 6u32), (32, 1)] {
        let fam = DiscriminantFamily::new(level, k).unwrap();
        let m = 4 * level as i64;
        let units: Vec<i64> = (1..m).filter(|v| num_integer::gcd(*v, m) == 1).collect();
        for d in fam.enumerate(1.0, 5000.0, true).unwrap() {
            assert!(d.signum() == if k % 2 == 0 { 1 } else { -1 });
            assert!(units.iter().any(|v| (v * v - d).rem_euclid(m) == 0), "d={d}");
            assert!(quadtwist::arith::is_squarefree(d.unsigned_abs()));
        }
    }
}

#[test]
fn predicted_term_is_recomputable() {
    let opts = MomentOptions {
        lfk: Some(fixed_lfk()),
        ..MomentOptions::default()
    };
    let p = TruncationPolicy::default();
    let r = first_moment(delta(), 1000.0, 300.0, &p, &opts).unwrap();
    let (c, _) = constant_c_n(1).unwrap();
    assert_eq!(r.predicted, c * r.lfk.value * 300.0);
    assert_eq!(r.s_f, quadtwist::numeric::compensated_sum(r.records.iter().map(|x| x.value)));
    assert!(r.nonvanishing <= r.count);
    let again = first_moment(delta(), 1000.0, 300.0, &p, &opts).unwrap();
    assert_eq!(r.to_csv(), again.to_csv());
    assert_eq!(r.to_json().unwrap(), again.to_json().unwrap());
}

#[test]
fn window_ratio_is_near_one_at_small_scale() {
    let opts = MomentOptions {
        lfk: Some(fixed_lfk()),
        ..MomentOptions::default()
    };
    let r = first_moment(delta(), 2000.0, 2000.0, &TruncationPolicy::default(), &opts).unwrap();
    assert!((0.7..1.3).contains(&r.ratio), "ratio {}", r.ratio);
}

#[test]
fn level32_second_moment_and_opposite_family() {
    let f = level32_form(200_000).unwrap();
    let p = TruncationPolicy::default();
    let standard = second_moment(&f, 500.0, &p, None).unwrap();
    // Every standard-family twist has root number -1.
    assert_eq!(standard.second_moment, 0.0);
    let plus = DiscriminantFamily::new(32, 1).unwrap().with_sign(1).unwrap();
    let flipped = second_moment(&f, 500.0, &p, Some(&plus)).unwrap();
    assert!(flipped.second_moment > 0.0);
    let nv = nonvanishing_count(&f, 4000.0, 400.0, &p, None, Some(&plus)).unwrap();
    assert!(nv.nonvanishing as f64 >= nv.floor, "{nv:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_moment_is_additive(x in 200u64..800, h1 in 0u64..200, h2 in 1u64..200) {
        let opts = MomentOptions { lfk: Some(fixed_lfk()), ..MomentOptions::default() };
        let p = TruncationPolicy::default();
        let f = delta();
        let whole = first_moment(f, x as f64, (h1 + h2) as f64, &p, &opts).unwrap();
        let left = first_moment(f, x as f64, h1 as f64, &p, &opts).unwrap();
        let right = first_moment(f, (x + h1 + 1) as f64, (h2 - 1) as f64, &p, &opts).unwrap();
        let mut joined = left.records.clone();
        joined.extend(right.records.iter().cloned());
        prop_assert_eq!(&joined, &whole.records);
        prop_assert!((whole.s_f - (left.s_f + right.s_f)).abs() <= 1e-12 * whole.s_f.abs().max(1e-300));
    }

    #[test]
    fn enumeration_respects_window(x in 1u64..5000, h in 0u64..400) {
        let fam = DiscriminantFamily::new(32, 1).unwrap();
        let ds = fam.enumerate(x as f64, h as f64, true).unwrap();
        prop_assert!(ds.windows(2).all(|w| w[0].unsigned_abs() < w[1].unsigned_abs()));
        for d in ds {
            prop_assert!((x..=x + h).contains(&d.unsigned_abs()));
        }
    }
}
