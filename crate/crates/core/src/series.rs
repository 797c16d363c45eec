//! Exact truncated Laurent series in `q^(1/M)` with rational coefficients.
//!
//! A series stores coefficients for indices `floor..prec` (index `k` is the
//! exponent `k/M`). Everything at or above `prec` is unknown; products and sums
//! track precision so that it never widens.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Precision used for exact (polynomial) data such as constants.
pub const EXACT: i64 = i64::MAX / 8;

fn clamp(p: i64) -> i64 {
    p.min(EXACT)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn big(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    grid: i64,
    floor: i64,
    prec: i64,
    // coefficient of index floor + i; indices past the end (but below prec) are zero
    coeffs: Vec<BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Twist {
    /// f(tau + 1/2)
    ShiftHalf,
    /// f(-q), identical to `ShiftHalf` on the integral grid
    NegateQ,
    /// -f(tau + 1/2), which keeps a normalized series normalized
    HalfConjugate,
}

impl QSeries {
    pub fn new(grid: i64, floor: i64, prec: i64, coeffs: Vec<BigRational>) -> QSeries {
        assert!(grid > 0, "grid denominator must be positive");
        let prec = clamp(prec);
        let mut s = QSeries {
            grid,
            floor: floor.min(prec),
            prec,
            coeffs,
        };
        s.tidy();
        s
    }

    /// Builds a series from (index, coefficient) pairs; repeated indices add up.
    pub fn from_terms<I>(grid: i64, prec: i64, terms: I) -> QSeries
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let terms: Vec<(i64, BigRational)> =
            terms.into_iter().filter(|(k, _)| *k < prec).collect();
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return QSeries::zero(grid, prec);
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![BigRational::zero(); (hi - lo + 1) as usize];
        for (k, c) in terms {
            coeffs[(k - lo) as usize] += c;
        }
        QSeries::new(grid, lo, prec, coeffs)
    }

    pub fn from_ints(floor: i64, prec: i64, coeffs: &[i64]) -> QSeries {
        QSeries::new(1, floor, prec, coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn from_bigints(floor: i64, prec: i64, coeffs: Vec<BigInt>) -> QSeries {
        QSeries::new(1, floor, prec, coeffs.into_iter().map(BigRational::from_integer).collect())
    }

    /// `q^-1 + a_1 q + a_2 q^2 + ...` known below exponent `prec`.
    pub fn normalized(tail: &[BigRational], prec: i64) -> QSeries {
        let mut coeffs = vec![BigRational::one(), BigRational::zero()];
        coeffs.extend(tail.iter().cloned());
        QSeries::new(1, -1, prec, coeffs)
    }

    pub fn zero(grid: i64, prec: i64) -> QSeries {
        QSeries::new(grid, prec, prec, Vec::new())
    }

    pub fn constant(c: BigRational, prec: i64) -> QSeries {
        QSeries::new(1, 0, prec, vec![c])
    }

    pub fn monomial(grid: i64, k: i64, c: BigRational, prec: i64) -> QSeries {
        QSeries::new(grid, k, prec, vec![c])
    }

    fn tidy(&mut self) {
        let keep = (self.prec - self.floor).max(0) as usize;
        self.coeffs.truncate(keep);
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.floor = self.prec;
        } else {
            self.coeffs.drain(..lead);
            self.floor += lead as i64;
            while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                self.coeffs.pop();
            }
        }
    }

    pub fn grid(&self) -> i64 {
        self.grid
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    pub fn coeff(&self, k: i64) -> Result<BigRational> {
        if k >= self.prec {
            return Err(Error::PrecisionExceeded {
                index: k,
                prec: self.prec,
            });
        }
        Ok(self.get(k).cloned().unwrap_or_else(BigRational::zero))
    }

    fn get(&self, k: i64) -> Option<&BigRational> {
        if k < self.floor {
            return None;
        }
        self.coeffs.get((k - self.floor) as usize)
    }

    /// Nonzero terms in ascending index order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.floor + i as i64, c))
    }

    /// Index of the last stored coefficient plus one.
    pub fn end(&self) -> i64 {
        self.floor + self.coeffs.len() as i64
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True for the shape `q^-1 + 0 + c_1 q + ...` on the integral grid.
    pub fn is_normalized(&self) -> bool {
        self.grid == 1
            && self.floor == -1
            && self.prec > 0
            && self.coeffs[0].is_one()
            && self.get(0).map_or(true, |c| c.is_zero())
    }

    pub fn truncate(&self, prec: i64) -> QSeries {
        if prec >= self.prec {
            return self.clone();
        }
        QSeries::new(self.grid, self.floor, prec, self.coeffs.clone())
    }

    /// Re-expresses the series on a grid that is a multiple of the current one.
    pub fn with_grid(&self, grid: i64) -> QSeries {
        assert!(grid % self.grid == 0, "grid {grid} is not a multiple of {}", self.grid);
        let r = grid / self.grid;
        if r == 1 {
            return self.clone();
        }
        let terms: Vec<_> = self.terms().map(|(k, c)| (k * r, c.clone())).collect();
        let prec = if self.is_exact() { EXACT } else { self.prec * r };
        QSeries::from_terms(grid, prec, terms)
    }

    /// Moves to the coarsest grid that still holds every nonzero term.
    pub fn simplify_grid(&self) -> QSeries {
        let mut g = self.grid;
        for (k, _) in self.terms() {
            g = g.gcd(&k);
        }
        if g <= 1 {
            return self.clone();
        }
        let terms: Vec<_> = self.terms().map(|(k, c)| (k / g, c.clone())).collect();
        let prec = if self.is_exact() { EXACT } else { Integer::div_ceil(&self.prec, &g) };
        QSeries::from_terms(self.grid / g, prec, terms)
    }

    /// True when every known term sits on an integral exponent.
    pub fn is_integral(&self) -> bool {
        self.terms().all(|(k, _)| k % self.grid == 0)
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        if c.is_zero() {
            return QSeries::zero(self.grid, self.prec);
        }
        QSeries::new(
            self.grid,
            self.floor,
            self.prec,
            self.coeffs.iter().map(|x| x * c).collect(),
        )
    }

    pub fn scale_int(&self, c: i64) -> QSeries {
        self.scale(&rat(c))
    }

    pub fn pow(&self, k: u32) -> QSeries {
        let mut acc = QSeries::constant(BigRational::one(), EXACT).with_grid(self.grid);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Keeps indices divisible by `d` and divides them by `d`: `c_{dk}` becomes the
    /// coefficient of index `k`.
    pub fn u_operator(&self, d: i64) -> QSeries {
        assert!(d > 0);
        let terms: Vec<_> = self
            .terms()
            .filter(|(k, _)| k % d == 0)
            .map(|(k, c)| (k / d, c.clone()))
            .collect();
        let prec = if self.is_exact() { EXACT } else { Integer::div_floor(&self.prec, &d) };
        QSeries::from_terms(self.grid, prec, terms)
    }

    /// Substitutes `q -> q^a`.
    pub fn v_operator(&self, a: i64) -> QSeries {
        assert!(a > 0);
        let terms: Vec<_> = self.terms().map(|(k, c)| (k * a, c.clone())).collect();
        let prec = if self.is_exact() { EXACT } else { self.prec.saturating_mul(a) };
        QSeries::from_terms(self.grid, prec, terms)
    }

    /// `sum_{b<d} f((a tau + b)/d) = d * V_a(U_d f)`.
    pub fn residue_avg(&self, a: i64, d: i64) -> QSeries {
        self.u_operator(d).v_operator(a).scale_int(d)
    }

    /// Multiplies the coefficient of index `k` by `(-1)^k`, on any grid.
    pub fn alternate(&self) -> QSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if (self.floor + i as i64).is_odd() { -c } else { c.clone() })
            .collect();
        QSeries::new(self.grid, self.floor, self.prec, coeffs)
    }

    pub fn q_twist(&self, kind: Twist) -> Result<QSeries> {
        if self.grid != 1 {
            return Err(Error::GridError(self.grid));
        }
        Ok(match kind {
            Twist::ShiftHalf | Twist::NegateQ => self.alternate(),
            Twist::HalfConjugate => -self.alternate(),
        })
    }

    pub fn shift_half(&self) -> Result<QSeries> {
        self.q_twist(Twist::ShiftHalf)
    }

    pub fn negate_q(&self) -> Result<QSeries> {
        self.q_twist(Twist::NegateQ)
    }

    pub fn half_conjugate(&self) -> Result<QSeries> {
        self.q_twist(Twist::HalfConjugate)
    }

    /// First index where the two series differ within their common precision,
    /// with both values.
    pub fn first_difference(&self, other: &QSeries) -> Option<(i64, BigRational, BigRational)> {
        self.differences(other).into_iter().next()
    }

    /// Every differing index within the common precision, on the common grid.
    pub fn differences(&self, other: &QSeries) -> Vec<(i64, BigRational, BigRational)> {
        let (a, b) = unify(self, other);
        let prec = a.prec.min(b.prec);
        let lo = a.floor.min(b.floor);
        let hi = a.end().max(b.end()).min(prec);
        let zero = BigRational::zero();
        (lo..hi)
            .filter_map(|k| {
                let x = a.get(k).unwrap_or(&zero);
                let y = b.get(k).unwrap_or(&zero);
                (x != y).then(|| (k, x.clone(), y.clone()))
            })
            .collect()
    }

    fn scaled_ints(&self) -> (Vec<BigInt>, BigInt) {
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        (nums, den)
    }
}

fn unify(a: &QSeries, b: &QSeries) -> (QSeries, QSeries) {
    if a.grid == b.grid {
        return (a.clone(), b.clone());
    }
    let g = a.grid.lcm(&b.grid);
    (a.with_grid(g), b.with_grid(g))
}

fn add_series(a: &QSeries, b: &QSeries, negate_b: bool) -> QSeries {
    let (a, b) = unify(a, b);
    let prec = a.prec.min(b.prec);
    if a.is_zero() && b.is_zero() {
        return QSeries::zero(a.grid, prec);
    }
    let lo = a.floor.min(b.floor);
    let hi = a.end().max(b.end()).min(prec).max(lo);
    let zero = BigRational::zero();
    let coeffs = (lo..hi)
        .map(|k| {
            let x = a.get(k).unwrap_or(&zero);
            let y = b.get(k).unwrap_or(&zero);
            if negate_b {
                x - y
            } else {
                x + y
            }
        })
        .collect();
    QSeries::new(a.grid, lo, prec, coeffs)
}

fn mul_series(a: &QSeries, b: &QSeries) -> QSeries {
    let (a, b) = unify(a, b);
    let prec = clamp(
        a.prec
            .saturating_add(b.floor)
            .min(b.prec.saturating_add(a.floor)),
    );
    if a.is_zero() || b.is_zero() {
        return QSeries::zero(a.grid, prec);
    }
    let floor = a.floor + b.floor;
    let len = ((a.coeffs.len() + b.coeffs.len() - 1) as i64).min(prec - floor).max(0) as usize;
    let (na, da) = a.scaled_ints();
    let (nb, db) = b.scaled_ints();
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in na.iter().enumerate() {
        if x.is_zero() || i >= len {
            continue;
        }
        for (j, y) in nb.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    let den = da * db;
    let coeffs = out
        .into_iter()
        .map(|n| BigRational::new(n, den.clone()))
        .collect();
    QSeries::new(a.grid, floor, prec, coeffs)
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        add_series(self, rhs, false)
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        add_series(self, rhs, true)
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        mul_series(self, rhs)
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries::new(
            self.grid,
            self.floor,
            self.prec,
            self.coeffs.iter().map(|c| -c).collect(),
        )
    }
}

impl Neg for QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QSeries {
            type Output = QSeries;
            fn $m(self, rhs: QSeries) -> QSeries {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QSeries> for QSeries {
            type Output = QSeries;
            fn $m(self, rhs: &QSeries) -> QSeries {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Adds a constant to a series without touching its precision.
pub fn add_constant(f: &QSeries, c: &BigRational) -> QSeries {
    f + &QSeries::constant(c.clone(), EXACT).with_grid(f.grid())
}

fn fmt_exponent(k: i64, grid: i64) -> String {
    let r = BigRational::new(BigInt::from(k), BigInt::from(grid));
    if r.is_integer() {
        r.to_string()
    } else {
        format!("({r})")
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mono = match (k, self.grid) {
                (0, _) => String::new(),
                (k, g) if k == g => "q".to_string(),
                (k, g) => format!("q^{}", fmt_exponent(k, g)),
            };
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if !self.is_exact() {
            write!(f, " + O(q^{})", fmt_exponent(self.prec, self.grid))?;
        }
        Ok(())
    }
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            #[serde(rename = "M")]
            grid: i64,
            floor: i64,
            prec: i64,
            coeffs: Coeffs<'a>,
        }
        struct Coeffs<'a>(&'a QSeries);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(None)?;
                for (k, c) in self.0.terms() {
                    m.serialize_entry(&k.to_string(), &c.to_string())?;
                }
                m.end()
            }
        }
        Wire {
            grid: self.grid,
            floor: self.floor,
            prec: self.prec,
            coeffs: Coeffs(self),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            #[serde(rename = "M")]
            grid: i64,
            floor: i64,
            prec: i64,
            coeffs: std::collections::BTreeMap<String, String>,
        }
        let w = Wire::deserialize(d)?;
        if w.grid <= 0 {
            return Err(D::Error::custom("M must be positive"));
        }
        let mut terms = Vec::new();
        for (k, v) in w.coeffs {
            let k: i64 = k.parse().map_err(D::Error::custom)?;
            let c: BigRational = v.parse().map_err(|_| D::Error::custom(format!("bad rational {v:?}")))?;
            if k < w.floor || k >= w.prec {
                return Err(D::Error::custom(format!("index {k} outside [floor, prec)")));
            }
            terms.push((k, c));
        }
        let mut s = QSeries::from_terms(w.grid, w.prec, terms);
        if s.is_zero() {
            s.floor = w.prec;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(floor: i64, prec: i64, c: &[i64]) -> QSeries {
        QSeries::from_ints(floor, prec, c)
    }

    #[test]
    fn coeff_and_precision() {
        let f = s(-1, 5, &[1, 0, 3, 4]);
        assert_eq!(f.coeff(1).unwrap(), rat(3));
        assert_eq!(f.coeff(4).unwrap(), rat(0));
        assert_eq!(f.coeff(-3).unwrap(), rat(0));
        assert!(matches!(f.coeff(5), Err(Error::PrecisionExceeded { index: 5, prec: 5 })));
        assert!(f.is_normalized());
    }

    #[test]
    fn product_precision_rule() {
        let f = s(-1, 40, &[1, 0, 2]);
        let g = s(-1, 40, &[1, 0, 5]);
        let p = &f * &g;
        assert_eq!(p.prec(), 39);
        assert!(p.coeff(39).is_err());
        assert_eq!(p.coeff(-2).unwrap(), rat(1));
        let q = s(-1, 50, &[1]) * s(-1, 50, &[1]);
        assert_eq!(q.floor(), -2);
        assert_eq!(q.coeff(-2).unwrap(), rat(1));
    }

    #[test]
    fn sum_precision_is_minimum() {
        let f = s(-1, 10, &[1]);
        let g = s(0, 7, &[2]);
        assert_eq!((&f + &g).prec(), 7);
        assert_eq!((&f - &f).is_zero(), true);
    }

    #[test]
    fn u_and_v() {
        let f = s(-1, 10, &[1, 0, 0, 1, 1]);
        let u = f.u_operator(2);
        assert_eq!(u.terms().map(|(k, _)| k).collect::<Vec<_>>(), vec![1]);
        assert_eq!(u.prec(), 5);
        assert_eq!(s(-1, 10, &[1]).v_operator(2).floor(), -2);
        assert_eq!(f.v_operator(1), f);
        for d in 1..=8 {
            assert_eq!(f.v_operator(d).u_operator(d), f);
        }
    }

    #[test]
    fn residue_avg_cancels_pole() {
        let f = s(-1, 20, &[1]);
        assert!(f.residue_avg(1, 2).is_zero());
        assert_eq!(f.residue_avg(1, 1), f);
    }

    #[test]
    fn twists() {
        let f = s(-1, 10, &[1, 0, 7, 3]);
        assert_eq!(f.shift_half().unwrap(), s(-1, 10, &[-1, 0, -7, 3]));
        assert_eq!(f.half_conjugate().unwrap().half_conjugate().unwrap(), f);
        assert!(f.half_conjugate().unwrap().is_normalized());
        let h = QSeries::monomial(2, 1, rat(1), 10);
        assert!(matches!(h.shift_half(), Err(Error::GridError(2))));
    }

    #[test]
    fn grid_mixing() {
        let half = QSeries::monomial(2, 1, rat(1), 20);
        let sq = &half * &half;
        assert_eq!(sq.simplify_grid(), QSeries::monomial(1, 1, rat(1), 11));
        let mixed = &half + &s(0, 5, &[1]);
        assert_eq!(mixed.grid(), 2);
        assert_eq!(mixed.prec(), 10);
    }

    #[test]
    fn json_round_trip() {
        let f = QSeries::new(2, -3, 9, vec![rat(1), BigRational::new(2.into(), 3.into()), rat(0), rat(-5)]);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"-2\":\"2/3\""));
        let back: QSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn display() {
        let f = s(-1, 3, &[1, 0, -2]);
        assert_eq!(f.to_string(), "q^-1 - 2*q + O(q^3)");
    }
}
