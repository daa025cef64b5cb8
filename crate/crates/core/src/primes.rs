//! Prime sieving and small multiplicative helpers.

/// Primes below `limit`, by a plain sieve of Eratosthenes.
pub fn primes_below(limit: u64) -> Vec<u64> {
    if limit <= 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n];
    let mut primes = Vec::new();
    for p in 2..n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m < n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Iterator over the primes in increasing order, extending its sieve on demand.
pub struct PrimeIter {
    primes: Vec<u64>,
    next_idx: usize,
    sieved_to: u64,
}

impl PrimeIter {
    pub fn new() -> Self {
        PrimeIter {
            primes: primes_below(1 << 10),
            next_idx: 0,
            sieved_to: 1 << 10,
        }
    }
}

impl Default for PrimeIter {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for PrimeIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.next_idx == self.primes.len() {
            self.sieved_to *= 2;
            self.primes = primes_below(self.sieved_to);
        }
        let p = self.primes[self.next_idx];
        self.next_idx += 1;
        Some(p)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// gcd of a full integer vector; 0 for the zero vector.
pub fn vector_gcd(xs: &[i64]) -> u64 {
    xs.iter()
        .fold(0u64, |g, &x| num_integer::gcd(g, x.unsigned_abs()))
}

/// Whether no prime power p^k divides n (so 1 is k-free, 0 is not).
pub fn is_kfree(n: i64, k: u32) -> bool {
    debug_assert!(k >= 1);
    if n == 0 {
        return false;
    }
    let mut m = n.unsigned_abs();
    let mut d = 2u64;
    // Trial division: any prime factor left after removing all p <= m^(1/k)
    // has multiplicity < k automatically.
    while d.saturating_pow(k) <= m {
        if m.is_multiple_of(d) {
            let mut mult = 0;
            while m.is_multiple_of(d) {
                m /= d;
                mult += 1;
            }
            if mult >= k {
                return false;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    true
}
