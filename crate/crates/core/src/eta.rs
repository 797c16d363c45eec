//! Eta quotients, Eisenstein series and the catalog of normalized Hauptmoduln.
//!
//! Long expansions multiply or divide by the sparse series `prod (1-q^n)` (Euler)
//! and `prod (1-q^n)^3` (Jacobi) in place, so an eta quotient costs about
//! `N * sqrt(N)` big-integer operations per factor.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ntheory::sigma;
use crate::series::{add_constant, rat, QSeries};

/// `prod_d prod_n (1 - q^{dn})^{r_d}`, shifted by `q^{sum d r_d / 24}`, plus a
/// constant and optionally `c / t` where `t` is the shifted quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotientSpec {
    pub terms: Vec<(i64, i64)>,
    pub additive_constant: i64,
    pub plus_inverse: Option<i64>,
}

#[derive(Clone, Debug)]
pub enum Generator {
    Eta(EtaQuotientSpec),
    /// `E4^3 / Delta - 744`
    JMinus744,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub label: &'static str,
    pub generator: Generator,
    pub notes: &'static str,
}

fn eta(terms: &[(i64, i64)], constant: i64, inverse: Option<i64>) -> Generator {
    Generator::Eta(EtaQuotientSpec {
        terms: terms.to_vec(),
        additive_constant: constant,
        plus_inverse: inverse,
    })
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            label: "1A",
            generator: Generator::JMinus744,
            notes: "j - 744 from E4^3/Delta",
        },
        CatalogEntry {
            label: "2A",
            generator: eta(&[(1, 24), (2, -24)], 24, Some(4096)),
            notes: "u + 24 + 4096/u with u = (eta(t)/eta(2t))^24; Hauptmodul of Gamma0(2)+",
        },
        CatalogEntry {
            label: "2B",
            generator: eta(&[(1, 24), (2, -24)], 24, None),
            notes: "u + 24 with u = (eta(t)/eta(2t))^24; Hauptmodul of Gamma0(2)",
        },
        CatalogEntry {
            label: "4A",
            generator: eta(&[(1, 8), (4, -8)], 8, Some(256)),
            notes: "t + 8 + 256/t with t = (eta(t)/eta(4t))^8; equals -2B(tau+1/2)",
        },
        CatalogEntry {
            label: "4C",
            generator: eta(&[(1, 8), (4, -8)], 8, None),
            notes: "(eta(t)/eta(4t))^8 + 8; Hauptmodul of Gamma0(4)",
        },
        CatalogEntry {
            label: "4D",
            generator: eta(&[(2, 12), (4, -12)], 0, None),
            notes: "(eta(2t)/eta(4t))^12",
        },
    ]
}

pub fn catalog_entry(label: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.label == label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

pub fn catalog_labels() -> Vec<&'static str> {
    catalog().iter().map(|e| e.label).collect()
}

/// Exponents 0, 1, 2, 5, 7, ... of Euler's pentagonal series with their signs, below `n`.
pub fn pentagonal_terms(n: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(0, 1)];
    let mut k: i64 = 1;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let a = (k * (3 * k - 1) / 2) as usize;
        let b = (k * (3 * k + 1) / 2) as usize;
        if a >= n {
            break;
        }
        out.push((a, sign));
        if b < n {
            out.push((b, sign));
        }
        k += 1;
    }
    out
}

/// Jacobi's `prod (1-q^n)^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}`, below `n`.
fn jacobi_terms(n: usize) -> Vec<(usize, i64)> {
    (0i64..)
        .map(|k| ((k * (k + 1) / 2) as usize, if k % 2 == 0 { 2 * k + 1 } else { -(2 * k + 1) }))
        .take_while(|&(e, _)| e < n)
        .collect()
}

fn mul_sparse(a: &mut [BigInt], s: &[(usize, i64)], d: usize) {
    for i in (0..a.len()).rev() {
        let mut acc = BigInt::zero();
        for &(e, c) in &s[1..] {
            let j = e * d;
            if j > i {
                break;
            }
            acc += &a[i - j] * c;
        }
        a[i] += acc;
    }
}

fn div_sparse(a: &mut [BigInt], s: &[(usize, i64)], d: usize) {
    for i in 0..a.len() {
        let mut acc = BigInt::zero();
        for &(e, c) in &s[1..] {
            let j = e * d;
            if j > i {
                break;
            }
            acc += &a[i - j] * c;
        }
        a[i] -= acc;
    }
}

/// Coefficients of `q^0 .. q^{n-1}` in `prod_d prod_k (1 - q^{dk})^{r_d}`.
pub fn eta_product_coeffs(terms: &[(i64, i64)], n: usize) -> Vec<BigInt> {
    let mut a = vec![BigInt::zero(); n];
    if n == 0 {
        return a;
    }
    a[0] = BigInt::one();
    let pent = pentagonal_terms(n);
    let jac = jacobi_terms(n);
    for &(d, r) in terms {
        assert!(d > 0);
        let d = d as usize;
        let (cubes, rest) = (r.unsigned_abs() / 3, r.unsigned_abs() % 3);
        for _ in 0..cubes {
            if r > 0 {
                mul_sparse(&mut a, &jac, d);
            } else {
                div_sparse(&mut a, &jac, d);
            }
        }
        for _ in 0..rest {
            if r > 0 {
                mul_sparse(&mut a, &pent, d);
            } else {
                div_sparse(&mut a, &pent, d);
            }
        }
    }
    a
}

/// `prod_{n>=1} (1 - q^n)` by direct expansion of the product.
pub fn eta_expansion(prec: i64) -> QSeries {
    assert!(prec >= 1);
    let n = prec as usize;
    let mut a = vec![0i64; n];
    a[0] = 1;
    for k in 1..n {
        for i in (k..n).rev() {
            a[i] -= a[i - k];
        }
    }
    QSeries::from_ints(0, prec, &a)
}

/// `E4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn eisenstein_e4(prec: i64) -> QSeries {
    let coeffs: Vec<i64> = (0..prec)
        .map(|n| if n == 0 { 1 } else { 240 * sigma(n, 3) })
        .collect();
    QSeries::from_ints(0, prec, &coeffs)
}

/// `Delta = q prod (1 - q^n)^24`.
pub fn delta(prec: i64) -> QSeries {
    let n = (prec - 1).max(0) as usize;
    QSeries::from_bigints(1, prec, eta_product_coeffs(&[(1, 24)], n))
}

fn convolve(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// The modular invariant `j = E4^3 / Delta`, constant term 744 included.
pub fn j_invariant(prec: i64) -> QSeries {
    let n = (prec + 1).max(1) as usize;
    let e4: Vec<BigInt> = (0..n as i64)
        .map(|k| BigInt::from(if k == 0 { 1 } else { 240 * sigma(k, 3) }))
        .collect();
    let sq = convolve(&e4, &e4, n);
    let mut cube = convolve(&sq, &e4, n);
    let jac = jacobi_terms(n);
    for _ in 0..8 {
        div_sparse(&mut cube, &jac, 1);
    }
    QSeries::from_bigints(-1, prec, cube)
}

impl EtaQuotientSpec {
    /// Leading exponent `sum d r_d / 24`.
    pub fn order(&self) -> Result<i64> {
        let w: i64 = self.terms.iter().map(|(d, r)| d * r).sum();
        if w % 24 != 0 {
            return Err(Error::Precondition(format!(
                "eta quotient has fractional leading exponent {w}/24"
            )));
        }
        Ok(w / 24)
    }

    pub fn series(&self, prec: i64) -> Result<QSeries> {
        let v = self.order()?;
        let n = (prec - v).max(0) as usize;
        let t = QSeries::from_bigints(v, prec, eta_product_coeffs(&self.terms, n));
        let mut out = add_constant(&t, &rat(self.additive_constant));
        if let Some(c) = self.plus_inverse {
            let neg: Vec<(i64, i64)> = self.terms.iter().map(|&(d, r)| (d, -r)).collect();
            let m = (prec + v).max(0) as usize;
            let inv = QSeries::from_bigints(-v, prec, eta_product_coeffs(&neg, m));
            out = &out + &inv.scale_int(c);
        }
        Ok(out)
    }
}

fn generate(entry: &CatalogEntry, prec: i64) -> Result<QSeries> {
    match &entry.generator {
        Generator::Eta(spec) => spec.series(prec),
        Generator::JMinus744 => Ok(add_constant(&j_invariant(prec), &rat(-744))),
    }
}

static CACHE: OnceLock<Mutex<HashMap<&'static str, QSeries>>> = OnceLock::new();

/// Normalized q-expansion of a catalog label, known below exponent `prec`.
pub fn catalog_series(label: &str, prec: i64) -> Result<QSeries> {
    let entry = catalog_entry(label)?;
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(entry.label) {
        if s.prec() >= prec {
            return Ok(s.truncate(prec));
        }
    }
    let s = generate(&entry, prec)?;
    let mut guard = cache.lock().unwrap();
    let keep = guard.get(entry.label).is_some_and(|old| old.prec() >= prec);
    if !keep {
        guard.insert(entry.label, s.clone());
    }
    Ok(s)
}

/// Coefficient list `a_1, a_2, ...` of a catalog label up to `a_{n}`.
pub fn catalog_coeffs(label: &str, n: i64) -> Result<Vec<BigRational>> {
    let s = catalog_series(label, n + 1)?;
    (1..=n).map(|k| s.coeff(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(label: &str, prec: i64) -> QSeries {
        catalog_series(label, prec).unwrap()
    }

    #[test]
    fn euler_pentagonal() {
        let e = eta_expansion(200);
        let mut expect = vec![0i64; 200];
        for (k, s) in pentagonal_terms(200) {
            expect[k] = s;
        }
        assert_eq!(e, QSeries::from_ints(0, 200, &expect));
        assert_eq!(
            e.truncate(15),
            QSeries::from_ints(0, 15, &[1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0, 0])
        );
    }

    #[test]
    fn eta_times_partitions_is_one() {
        let mut p = vec![0i64; 30];
        p[0] = 1;
        for part in 1..30 {
            for i in part..30 {
                p[i] += p[i - part];
            }
        }
        let prod = &eta_expansion(30) * &QSeries::from_ints(0, 30, &p);
        assert_eq!(prod, QSeries::from_ints(0, 30, &[1]));
    }

    #[test]
    fn sparse_matches_direct_product() {
        let direct = eta_expansion(80);
        let cube = &(&direct * &direct) * &direct;
        let sparse = QSeries::from_bigints(0, 80, eta_product_coeffs(&[(1, 3)], 80));
        assert_eq!(cube, sparse);
        let two = QSeries::from_bigints(0, 80, eta_product_coeffs(&[(2, 1)], 80));
        assert_eq!(two, direct.v_operator(2).truncate(80));
    }

    #[test]
    fn modular_invariants() {
        let e4 = eisenstein_e4(40);
        assert_eq!(e4.coeff(1).unwrap(), rat(240));
        let j = j_invariant(40);
        let cube = &(&e4 * &e4) * &e4;
        let diff = &(&j * &delta(41)) - &cube;
        assert!(diff.is_zero());
        assert!(diff.prec() >= 39);
        let f = c("1A", 10);
        assert_eq!(f.coeff(1).unwrap(), rat(196884));
        assert_eq!(f.coeff(4).unwrap(), rat(20245856256));
    }

    #[test]
    fn labels_and_known_terms() {
        assert_eq!(
            c("2A", 7),
            QSeries::from_ints(-1, 7, &[1, 0, 4372, 96256, 1240002, 10698752, 74428120, 431529984])
        );
        assert_eq!(c("2B", 3), QSeries::from_ints(-1, 3, &[1, 0, 276, -2048]));
        assert_eq!(c("4C", 6), QSeries::from_ints(-1, 6, &[1, 0, 20, 0, -62, 0, 216]));
        assert_eq!(c("4D", 6), QSeries::from_ints(-1, 6, &[1, 0, -12, 0, 66, 0, -232]));
        for label in catalog_labels() {
            assert!(c(label, 30).is_normalized(), "{label}");
        }
        assert!(matches!(catalog_series("2a", 5), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn u_times_inverse() {
        let spec = EtaQuotientSpec {
            terms: vec![(1, 24), (2, -24)],
            additive_constant: 0,
            plus_inverse: None,
        };
        let inv = EtaQuotientSpec {
            terms: vec![(1, -24), (2, 24)],
            additive_constant: 0,
            plus_inverse: None,
        };
        let u = spec.series(60).unwrap();
        let w = inv.series(60).unwrap().scale_int(4096);
        let prod = &u * &w;
        assert_eq!(prod.truncate(58), QSeries::from_ints(0, 58, &[4096]));
    }

    #[test]
    fn four_a_is_half_conjugate_of_two_b() {
        assert_eq!(c("4A", 200), c("2B", 200).half_conjugate().unwrap());
    }

    #[test]
    fn j_from_level_two_hauptmodul() {
        // j = (u + 256)^3 / u^2 for u = (eta(t)/eta(2t))^24
        let u = EtaQuotientSpec {
            terms: vec![(1, 24), (2, -24)],
            additive_constant: 0,
            plus_inverse: None,
        }
        .series(80)
        .unwrap();
        let inv = EtaQuotientSpec {
            terms: vec![(1, -24), (2, 24)],
            additive_constant: 0,
            plus_inverse: None,
        }
        .series(80)
        .unwrap();
        let shifted = add_constant(&u, &rat(256));
        let j = &(&(&shifted * &shifted) * &shifted) * &(&inv * &inv);
        assert_eq!(j.truncate(70), j_invariant(70));
    }

    #[test]
    fn caching_keeps_longest() {
        let long = c("2B", 300);
        let short = c("2B", 50);
        assert_eq!(short, long.truncate(50));
    }
}
