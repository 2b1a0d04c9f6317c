use proptest::prelude::*;
use quadtwist::arith::*;

/// Legendre symbol by Euler's criterion.
fn euler_criterion(a: i64, p: u64) -> i8 {
    let a = a.rem_euclid(p as i64) as u128;
    if a == 0 {
        return 0;
    }
    let (mut base, mut e, mut acc) = (a, (p - 1) / 2, 1u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn factorization_multiplies_back(n in 1u64..(1u64 << 62)) {
        let f = factorize(n).unwrap();
        let product: u128 = f.factors().iter().map(|&(p, e)| (p as u128).pow(e)).product();
        prop_assert_eq!(product, n as u128);
        for &(p, e) in f.factors() {
            prop_assert!(is_prime_u64(p));
            prop_assert!(e >= 1);
        }
        prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn kronecker_matches_euler_on_odd_primes(d in -100_000i64..100_000, index in 1usize..2000) {
        let sieve = Sieve::new(20_000);
        let p = sieve.primes()[index] as u64;
        prop_assert_eq!(kronecker(d, p as i64), euler_criterion(d, p));
    }

    #[test]
    fn kronecker_multiplicative_in_n(d in -5000i64..5000, m in 1i64..5000, n in 1i64..5000) {
        prop_assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
    }

    #[test]
    fn kronecker_periodic_for_discriminants(index in 0usize..10_000, n in 1i64..3000) {
        let pool: Vec<i64> = (-3000i64..3000).filter(|&d| is_fundamental_discriminant(d)).collect();
        let d = pool[index % pool.len()];
        prop_assert_eq!(kronecker(d, n), kronecker(d, n + d.abs()));
    }

    #[test]
    fn moebius_and_squarefree_agree(n in 1u64..1_000_000) {
        prop_assert_eq!(moebius(n).unwrap() != 0, is_squarefree(n));
    }
}

#[test]
fn divisor_count_sums() {
    // sum_{n<=x} d(n) = sum_{k<=x} floor(x/k)
    let x = 10_000u64;
    let direct: u64 = (1..=x).map(|n| divisor_count(n).unwrap()).sum();
    let hyperbola: u64 = (1..=x).map(|k| x / k).sum();
    assert_eq!(direct, hyperbola);
}
