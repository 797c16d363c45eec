//! Faber polynomials: the monic `P_n` with `P_n(f) = q^-n + O(q)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::series::{add_constant, QSeries, EXACT};

/// `t^n + b_1 t^{n-1} + ... + b_n`; `coeffs[i]` is `b_i` and `coeffs[0] = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaberPoly {
    coeffs: Vec<BigRational>,
}

impl FaberPoly {
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> FaberPoly {
        assert!(coeffs.first().is_some_and(|c| c.is_one()), "Faber polynomials are monic");
        FaberPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `b_{n,i}`, the coefficient of `t^{n-i}`.
    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }
}

impl fmt::Display for FaberPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = n - i;
            let mono = match p {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{p}"),
            };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn check_input(f: &QSeries, n: usize) -> Result<()> {
    if !f.is_normalized() {
        return Err(Error::Precondition("Faber polynomials need a normalized series".into()));
    }
    if f.prec() <= n as i64 {
        return Err(Error::PrecisionExceeded {
            index: n as i64,
            prec: f.prec(),
        });
    }
    Ok(())
}

/// Greedy elimination: start from `f^n` and cancel the exponents `-n+1 .. 0`
/// with lower powers of `f`.
pub fn faber_poly(f: &QSeries, n: usize) -> Result<FaberPoly> {
    assert!(n >= 1);
    check_input(f, n)?;
    let mut powers = vec![QSeries::constant(BigRational::one(), EXACT)];
    for k in 1..=n {
        powers.push(&powers[k - 1] * f);
    }
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[0] = BigRational::one();
    let mut cur = powers[n].clone();
    for e in (1 - n as i64)..=0 {
        let c = cur.coeff(e)?;
        if c.is_zero() {
            continue;
        }
        let k = (-e) as usize;
        cur = &cur - &powers[k].scale(&c);
        coeffs[n - k] = -c;
    }
    Ok(FaberPoly { coeffs })
}

/// The inductive construction `P_1 = t`,
/// `P_k = t P_{k-1} - sum_{s=1}^{k-2} x_s P_{k-s-1} - k x_{k-1}`.
pub fn faber_poly_recurrence(f: &QSeries, n: usize) -> Result<FaberPoly> {
    assert!(n >= 1);
    check_input(f, n)?;
    let x = |s: usize| f.coeff(s as i64);
    // polynomials stored highest degree first, like FaberPoly
    let mut polys: Vec<Vec<BigRational>> = vec![vec![BigRational::one()], vec![BigRational::one(), BigRational::zero()]];
    for k in 2..=n {
        let mut p = polys[k - 1].clone();
        p.push(BigRational::zero());
        for s in 1..=k.saturating_sub(2) {
            let xs = x(s)?;
            let lower = &polys[k - s - 1];
            let off = p.len() - lower.len();
            for (i, c) in lower.iter().enumerate() {
                p[off + i] -= &xs * c;
            }
        }
        let last = p.len() - 1;
        p[last] -= x(k - 1)? * BigRational::from_integer((k as i64).into());
        polys.push(p);
    }
    Ok(FaberPoly {
        coeffs: polys.swap_remove(n),
    })
}

/// Evaluates `P(f)` by Horner's rule.
pub fn faber_apply(p: &FaberPoly, f: &QSeries) -> QSeries {
    let mut acc = QSeries::constant(BigRational::one(), EXACT).with_grid(f.grid());
    for c in &p.coeffs[1..] {
        acc = add_constant(&(&acc * f), c);
    }
    acc
}
