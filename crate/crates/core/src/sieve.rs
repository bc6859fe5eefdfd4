//! Linear sieve for Euler's totient and Jordan's totient.
//!
//! Used as the independent oracle for Farey counts: `#F_n = Σ_{q ≤ n} J_{d−1}(q)`,
//! which for `d = 2` is `Σ φ(q)`.

/// Smallest prime factor of every `i ≤ n` (0 for `i < 2`) and the primes up to `n`.
pub fn linear_sieve(n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut lpf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = i * p as usize;
            if p > lpf[i] || m > n {
                break;
            }
            lpf[m] = p;
        }
    }
    (lpf, primes)
}

/// `φ(i)` for `i ≤ n` (`φ(0)` is reported as 0).
pub fn euler_phi_table(n: usize) -> Vec<u64> {
    let (lpf, _) = linear_sieve(n);
    let mut phi = vec![0u64; n + 1];
    if n >= 1 {
        phi[1] = 1;
    }
    for i in 2..=n {
        let p = lpf[i] as usize;
        let m = i / p;
        phi[i] = if m.is_multiple_of(p) {
            phi[m] * p as u64
        } else {
            phi[m] * (p as u64 - 1)
        };
    }
    phi
}

/// `Σ_{q=1}^{n} φ(q)`.
pub fn totient_sum(n: usize) -> u64 {
    euler_phi_table(n).iter().sum()
}

/// `J_k(i) = i^k Π_{p | i} (1 − p^{−k})` for `i ≤ n`.
pub fn jordan_totient_table(n: usize, k: u32) -> Vec<u128> {
    let (lpf, _) = linear_sieve(n);
    let mut j = vec![0u128; n + 1];
    if n >= 1 {
        j[1] = 1;
    }
    for i in 2..=n {
        let p = lpf[i] as usize;
        let m = i / p;
        let pk = (p as u128).pow(k);
        j[i] = if m.is_multiple_of(p) { j[m] * pk } else { j[m] * (pk - 1) };
    }
    j
}

/// `Σ_{q=1}^{n} J_{d−1}(q)`, the Farey count in dimension `d`.
pub fn farey_count_oracle(n: usize, d: usize) -> u128 {
    jordan_totient_table(n, (d - 1) as u32).iter().sum()
}
