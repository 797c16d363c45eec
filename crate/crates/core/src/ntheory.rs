//! Small arithmetic functions on machine integers.

use num_integer::Integer;

pub fn divisors(n: i64) -> Vec<i64> {
    assert!(n > 0);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Prime factorization as (prime, exponent) pairs in ascending order.
pub fn factorize(mut n: i64) -> Vec<(i64, u32)> {
    assert!(n > 0);
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: i64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: i64) -> i64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn sigma(n: i64, k: u32) -> i64 {
    divisors(n).iter().map(|d| d.pow(k)).sum()
}

/// Dedekind psi, the index of Gamma0(n) in SL2(Z): `n * prod_{p|n} (1 + 1/p)`.
pub fn dedekind_psi(n: i64) -> i64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

/// `c_g(n) = sum_{d | gcd(g,n)} d * mu(g/d)`.
pub fn ramanujan_sum(g: i64, n: i64) -> i64 {
    assert!(g >= 1);
    let h = g.gcd(&n);
    divisors(h).iter().map(|&d| d * mobius(g / d)).sum()
}

/// Splits `m = 2^a * b` with `b` odd.
pub fn two_adic(m: i64) -> (u32, i64) {
    let a = m.trailing_zeros();
    (a, m >> a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(sigma(6, 1), 12);
        assert_eq!(sigma(2, 3), 9);
        assert_eq!(two_adic(48), (4, 3));
    }

    #[test]
    fn psi_values() {
        assert_eq!(dedekind_psi(1), 1);
        assert_eq!(dedekind_psi(2), 3);
        assert_eq!(dedekind_psi(3), 4);
        assert_eq!(dedekind_psi(6), 12);
        for p in [2, 3, 5, 7, 11, 13] {
            assert_eq!(dedekind_psi(p), p + 1);
        }
    }

    #[test]
    fn ramanujan_sums() {
        assert_eq!(ramanujan_sum(2, 1), -1);
        assert_eq!(ramanujan_sum(4, 2), -2);
        assert_eq!(ramanujan_sum(1, 17), 1);
        for g in 1..=20 {
            assert_eq!(ramanujan_sum(g, 0), euler_phi(g));
        }
        for g in 1..=50 {
            for n in -50..=50 {
                let total: i64 = divisors(g).iter().map(|&d| ramanujan_sum(d, n)).sum();
                assert_eq!(total, if n % g == 0 { g } else { 0 }, "g={g} n={n}");
            }
        }
    }
}
