use std::sync::OnceLock;

/// Default bound of the shared sieve.
pub const DEFAULT_SIEVE_BOUND: u64 = 4_000_000;

/// Smallest-prime-factor sieve over `0..=bound`.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Sieve {
    /// Linear sieve; `spf[n]` is the smallest prime factor of `n` for `n >= 2`.
    pub fn new(bound: u64) -> Self {
        let bound = bound.max(2) as usize;
        let mut spf = vec![0u32; bound + 1];
        let mut primes = Vec::new();
        for i in 2..=bound {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > bound {
                    break;
                }
                spf[m] = p;
            }
        }
        Sieve { spf, primes }
    }

    pub fn bound(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `p <= limit`, as long as `limit` is within the sieve.
    pub fn primes_up_to(&self, limit: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= limit);
        &self.primes[..end]
    }

    /// Smallest prime factor of `n`, for `2 <= n <= bound`.
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.bound()
    }

    /// Factor `n <= bound` by repeated smallest-prime-factor lookups.
    pub fn factor_small(&self, mut n: u64) -> Vec<(u64, u32)> {
        debug_assert!(n >= 1 && self.contains(n));
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}

static SHARED: OnceLock<Sieve> = OnceLock::new();
static SHARED_BOUND: OnceLock<u64> = OnceLock::new();

/// Choose the bound of the shared sieve. Only effective before the first call
/// to [`shared_sieve`]; returns false if the bound was already fixed.
pub fn configure_shared_sieve(bound: u64) -> bool {
    SHARED_BOUND.set(bound).is_ok() && SHARED.get().is_none()
}

/// Process-wide sieve, built on first use and read-only afterwards.
pub fn shared_sieve() -> &'static Sieve {
    SHARED.get_or_init(|| Sieve::new(*SHARED_BOUND.get_or_init(|| DEFAULT_SIEVE_BOUND)))
}

/// A sieve covering at least `bound`: the shared one when large enough,
/// otherwise a freshly built one.
pub fn sieve_covering(bound: u64) -> std::borrow::Cow<'static, Sieve> {
    let shared = shared_sieve();
    if shared.contains(bound) {
        std::borrow::Cow::Borrowed(shared)
    } else {
        std::borrow::Cow::Owned(Sieve::new(bound))
    }
}
