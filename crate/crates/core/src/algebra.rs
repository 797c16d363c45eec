//! The operator algebra on replicate families: slash actions of triangular
//! matrices, generalized Hecke operators as matrix multisets, power sums and
//! the symmetric-function identities built on them.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::faber::{faber_apply, faber_poly};
use crate::ntheory::{divisors, ramanujan_sum};
use crate::replication::{rep_lhs, ReplicateFamily, ReplicateIndex};
use crate::report::{Check, Report};
use crate::series::{add_constant, rat, QSeries, EXACT};

/// Modulus factor for the canonical upper-right entry: `V mod Y * M_GRID`.
/// Operators act on series in integral powers of `q`, where only `V mod Y`
/// matters; a factor of 2 would separate classes the identities merge.
pub const M_GRID: i64 = 1;

/// `2^(-s/2) [[u, v], [0, y]]`, acting on `tau` as `(u tau + v) / y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SlashMatrix {
    pub s: u8,
    pub u: i64,
    pub v: i64,
    pub y: i64,
}

impl SlashMatrix {
    pub fn new(s: u8, u: i64, v: i64, y: i64) -> SlashMatrix {
        assert!(s <= 1 && u > 0 && y > 0);
        assert!(s == 0 || (u % 2 == 0 && y % 2 == 0), "scaled matrices need even diagonal");
        SlashMatrix { s, u, v, y }
    }

    pub fn identity() -> SlashMatrix {
        SlashMatrix::new(0, 1, 0, 1)
    }

    /// `Psi_r`, the scalar matrix `r * I`.
    pub fn psi(r: ReplicateIndex) -> SlashMatrix {
        if r.half {
            SlashMatrix::new(1, 2 * r.n, 0, 2 * r.n)
        } else {
            SlashMatrix::new(0, r.n, 0, r.n)
        }
    }

    /// The replicate multiplier: the upper-left entry.
    pub fn multiplier(&self) -> ReplicateIndex {
        if self.s == 0 {
            ReplicateIndex::int(self.u)
        } else {
            ReplicateIndex::sqrt2(self.u / 2)
        }
    }

    pub fn det_index(&self) -> ReplicateIndex {
        let d = self.u * self.y;
        if self.s == 0 {
            ReplicateIndex::int(d)
        } else {
            ReplicateIndex::int(d / 2)
        }
    }

    /// Matrix product `self * o`.
    pub fn mul(&self, o: &SlashMatrix) -> SlashMatrix {
        let (mut u, mut v, mut y) = (self.u * o.u, self.u * o.v + self.v * o.y, self.y * o.y);
        let mut s = self.s + o.s;
        if s == 2 {
            debug_assert!(u % 2 == 0 && v % 2 == 0 && y % 2 == 0);
            u /= 2;
            v /= 2;
            y /= 2;
            s = 0;
        }
        SlashMatrix::new(s, u, v, y)
    }

    /// Representative with `0 <= v < y * modulus`.
    pub fn canonical(&self, modulus: i64) -> SlashMatrix {
        SlashMatrix {
            v: self.v.rem_euclid(self.y * modulus),
            ..*self
        }
    }

    /// Image of the monomial `e(angle) q^exp` (`e(x) = exp(2 pi i x)`), with the
    /// angle reduced mod 1.
    pub fn act_on_monomial(&self, angle: &BigRational, exp: &BigRational) -> (BigRational, BigRational) {
        let a = angle + exp * BigRational::new(self.v.into(), self.y.into());
        let e = exp * BigRational::new(self.u.into(), self.y.into());
        (&a - a.floor(), e)
    }
}

impl fmt::Display for SlashMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s == 1 {
            write!(f, "2^(-1/2)")?;
        }
        write!(f, "[[{},{}],[0,{}]]", self.u, self.v, self.y)
    }
}

/// Signed multiset of slash matrices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatMultiset {
    pub items: BTreeMap<SlashMatrix, i64>,
}

impl MatMultiset {
    pub fn single(m: SlashMatrix, c: i64) -> MatMultiset {
        let mut out = MatMultiset::default();
        out.insert(m, c);
        out
    }

    pub fn scalar(c: i64) -> MatMultiset {
        MatMultiset::single(SlashMatrix::identity(), c)
    }

    pub fn insert(&mut self, m: SlashMatrix, c: i64) {
        let e = self.items.entry(m).or_insert(0);
        *e += c;
        if *e == 0 {
            self.items.remove(&m);
        }
    }

    pub fn add(&self, o: &MatMultiset, sign: i64) -> MatMultiset {
        let mut out = self.clone();
        for (m, c) in &o.items {
            out.insert(*m, sign * c);
        }
        out
    }

    /// Operator composition: `self` applied after `o`, i.e. `{b * a : a in self, b in o}`.
    pub fn compose(&self, o: &MatMultiset) -> MatMultiset {
        let mut out = MatMultiset::default();
        for (a, ca) in &self.items {
            for (b, cb) in &o.items {
                out.insert(b.mul(a), ca * cb);
            }
        }
        out
    }

    pub fn canonical(&self, modulus: i64) -> MatMultiset {
        let mut out = MatMultiset::default();
        for (m, c) in &self.items {
            out.insert(m.canonical(modulus), *c);
        }
        out
    }

    pub fn size(&self) -> i64 {
        self.items.values().sum()
    }

    /// Largest `y / u` over the support, which bounds the coefficients needed
    /// to materialize.
    pub fn max_stretch(&self) -> i64 {
        self.items.keys().map(|m| Integer::div_ceil(&m.y, &m.u)).max().unwrap_or(1)
    }
}

/// The generalized Hecke operator `T_n` as a matrix multiset.
pub fn tn_multiset(n: i64) -> MatMultiset {
    assert!(n >= 1);
    let mut out = MatMultiset::default();
    for u in divisors(n) {
        let y = n / u;
        for v in 0..y {
            out.insert(SlashMatrix::new(0, u, v, y), 1);
        }
    }
    if n % 2 == 0 {
        for u in divisors(n / 2) {
            let y = n / 2 / u;
            for v in 0..2 * y {
                out.insert(SlashMatrix::new(1, 2 * u, v, 2 * y), 1);
            }
        }
    }
    out
}

pub fn psi(r: ReplicateIndex) -> MatMultiset {
    MatMultiset::single(SlashMatrix::psi(r), 1)
}

/// Operator expressions: integers, `T(n)`, `T(2^3)`, `Psi(n)`, `Psi(sqrt2)`,
/// `Psi(3sqrt2)`, `+`, `-`, `*` and parentheses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpExpr {
    Int(i64),
    T(i64),
    Psi(ReplicateIndex),
    Sum(Box<OpExpr>, Box<OpExpr>, i64),
    Prod(Box<OpExpr>, Box<OpExpr>),
}

impl OpExpr {
    pub fn multiset(&self) -> MatMultiset {
        match self {
            OpExpr::Int(c) => MatMultiset::scalar(*c),
            OpExpr::T(n) => tn_multiset(*n),
            OpExpr::Psi(r) => psi(*r),
            OpExpr::Sum(a, b, sign) => a.multiset().add(&b.multiset(), *sign),
            OpExpr::Prod(a, b) => a.multiset().compose(&b.multiset()),
        }
    }
}

impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpExpr::Int(c) => write!(f, "{c}"),
            OpExpr::T(n) => write!(f, "T({n})"),
            OpExpr::Psi(r) => write!(f, "Psi({r})"),
            OpExpr::Sum(a, b, s) => write!(f, "{a} {} {b}", if *s > 0 { "+" } else { "-" }),
            OpExpr::Prod(a, b) => {
                let wrap = |e: &OpExpr| matches!(e, OpExpr::Sum(..));
                let show = |e: &OpExpr| if wrap(e) { format!("({e})") } else { e.to_string() };
                write!(f, "{}*{}", show(a), show(b))
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<String>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Parser<'a>> {
        let mut toks = Vec::new();
        let mut cur = String::new();
        for ch in src.chars() {
            if ch.is_ascii_alphanumeric() {
                cur.push(ch);
                continue;
            }
            if !cur.is_empty() {
                toks.push(std::mem::take(&mut cur));
            }
            match ch {
                '+' | '-' | '*' | '(' | ')' | '^' | '|' => toks.push(ch.to_string()),
                c if c.is_whitespace() => {}
                c => return Err(Error::Parse(format!("unexpected {c:?} in {src:?}"))),
            }
        }
        if !cur.is_empty() {
            toks.push(cur);
        }
        Ok(Parser { src, toks, pos: 0 })
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Result<String> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse(format!("unexpected end of {:?}", self.src)))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: &str) -> Result<()> {
        let got = self.next()?;
        if got != t {
            return Err(Error::Parse(format!("expected {t:?}, found {got:?} in {:?}", self.src)));
        }
        Ok(())
    }

    fn int(&mut self) -> Result<i64> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::Parse(format!("expected an integer, found {t:?}")))
    }

    fn power(&mut self) -> Result<i64> {
        let b = self.int()?;
        if self.peek() == Some("^") {
            self.next()?;
            let e = self.int()?;
            let e = u32::try_from(e).map_err(|_| Error::Parse("bad exponent".into()))?;
            return b.checked_pow(e).ok_or_else(|| Error::Parse("power overflows".into()));
        }
        Ok(b)
    }

    fn expr(&mut self) -> Result<OpExpr> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek() {
            let sign = match op {
                "+" => 1,
                "-" => -1,
                _ => break,
            };
            self.next()?;
            acc = OpExpr::Sum(Box::new(acc), Box::new(self.term()?), sign);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<OpExpr> {
        let mut acc = self.factor()?;
        while self.peek() == Some("*") {
            self.next()?;
            acc = OpExpr::Prod(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<OpExpr> {
        let t = self.next()?;
        match t.as_str() {
            "(" => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            "T" => {
                self.expect("(")?;
                let n = self.power()?;
                self.expect(")")?;
                if n < 1 {
                    return Err(Error::Parse("T(n) needs n >= 1".into()));
                }
                Ok(OpExpr::T(n))
            }
            "Psi" => {
                self.expect("(")?;
                let r: ReplicateIndex = self.next()?.parse()?;
                self.expect(")")?;
                Ok(OpExpr::Psi(r))
            }
            _ => {
                let c: i64 = t
                    .parse()
                    .map_err(|_| Error::Parse(format!("unexpected {t:?} in {:?}", self.src)))?;
                if self.peek() == Some("^") {
                    self.pos -= 1;
                    return Ok(OpExpr::Int(self.power()?));
                }
                Ok(OpExpr::Int(c))
            }
        }
    }
}

pub fn parse_op_expr(src: &str) -> Result<OpExpr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in {src:?}")));
    }
    Ok(e)
}

/// Materializes `sum_{a} mult * (h^[r u_a] || a)^power` against `fam`,
/// for exponents below `upto`. Residue classes are summed with Ramanujan sums,
/// which needs the weight of `v mod y` to depend only on `gcd(v, y)`.
pub fn materialize(fam: &ReplicateFamily, ms: &MatMultiset, power: u32, upto: i64) -> Result<QSeries> {
    let mut groups: BTreeMap<(u8, i64, i64), BTreeMap<i64, i64>> = BTreeMap::new();
    for (m, c) in &ms.canonical(1).items {
        *groups.entry((m.s, m.u, m.y)).or_default().entry(m.v).or_insert(0) += c;
    }
    let mut acc = QSeries::zero(1, EXACT);
    let mut powers: BTreeMap<ReplicateIndex, QSeries> = BTreeMap::new();
    for ((s, u, y), weights) in groups {
        let mut by_gcd: BTreeMap<i64, i64> = BTreeMap::new();
        for e in divisors(y) {
            let ws: Vec<i64> = (0..y)
                .filter(|v| v.gcd(&y) == e)
                .map(|v| weights.get(&v).copied().unwrap_or(0))
                .collect();
            if ws.iter().any(|w| *w != ws[0]) {
                return Err(Error::NonRational(format!(
                    "weights of {}[[{u},*],[0,{y}]] differ within gcd class {e}",
                    if s == 1 { "2^(-1/2)" } else { "" }
                )));
            }
            by_gcd.insert(e, ws[0]);
        }
        let idx = SlashMatrix::new(s, u, 0, y).multiplier();
        if !powers.contains_key(&idx) {
            let h = fam.resolve(idx)?;
            let need = upto * y / u + 2 + power as i64;
            powers.insert(idx, h.truncate(h.prec().min(need)).pow(power));
        }
        let h = &powers[&idx];
        let limit = Integer::div_ceil(&(upto * y), &u);
        let terms: Vec<(i64, BigRational)> = h
            .terms()
            .filter(|(k, _)| *k < limit)
            .filter_map(|(k, c)| {
                let sk: i64 = by_gcd.iter().map(|(e, w)| w * ramanujan_sum(y / e, k)).sum();
                (sk != 0).then(|| (k * u, c * rat(sk)))
            })
            .collect();
        let prec = if h.is_exact() { EXACT } else { h.prec().saturating_mul(u) };
        acc = &acc + &QSeries::from_terms(y, prec, terms);
    }
    Ok(acc.truncate(upto * acc.grid()).simplify_grid())
}

/// Coefficients `h^[r]` must know to materialize `ms` below `q^upto`.
pub fn required_prec(ms: &MatMultiset, upto: i64) -> i64 {
    upto * ms.max_stretch() + 4
}

/// `T_n` applied to the family root.
pub fn generalized_tn(fam: &ReplicateFamily, n: i64, upto: i64) -> Result<QSeries> {
    materialize(fam, &tn_multiset(n), 1, upto)
}

/// Multiset equality after canonicalization, with a listing of the symmetric
/// difference, optionally followed by a series-level witness on `witness`.
pub fn verify_op_identity(lhs: &str, rhs: &str, witness: Option<(&ReplicateFamily, i64)>) -> Result<Report> {
    let start = std::time::Instant::now();
    let (le, re) = (parse_op_expr(lhs)?, parse_op_expr(rhs)?);
    let (lm, rm) = (le.multiset(), re.multiset());
    let (lc, rc) = (lm.canonical(M_GRID), rm.canonical(M_GRID));
    let mut report = Report::new(format!("{le} = {re}"));
    let diff = lc.add(&rc, -1);
    if diff.items.is_empty() {
        report.push(Check::pass("multiset", format!("{} matrices on each side", lc.size())));
    } else {
        let listing: Vec<String> = diff
            .items
            .iter()
            .take(20)
            .map(|(m, c)| format!("{}{m}", if *c > 0 { format!("lhs+{c} ") } else { format!("rhs+{} ", -c) }))
            .collect();
        report.push(Check::fail(
            "multiset",
            format!("{} classes differ: {}", diff.items.len(), listing.join("; ")),
        ));
    }
    if let Some((fam, upto)) = witness {
        let check = match (materialize(fam, &lm, 1, upto), materialize(fam, &rm, 1, upto)) {
            (Ok(a), Ok(b)) => Check::compare(format!("materialized to q^{upto}"), &a, &b, None, upto),
            (Err(e), _) | (_, Err(e)) => Check::fail("materialized", e.to_string()),
        };
        report.push(check);
    }
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// `h^[2](q^2), h^[sqrt2](q), h^[sqrt2](-q), h(q^{1/2}), h(-q^{1/2})` on grid 2.
pub fn five_series(fam: &ReplicateFamily) -> Result<[QSeries; 5]> {
    let h = fam.root_series()?;
    let h2 = fam.resolve(ReplicateIndex::int(2))?;
    let hr = fam.resolve(ReplicateIndex::SQRT2)?;
    let half = QSeries::from_terms(2, h.prec(), h.terms().map(|(k, c)| (k, c.clone())));
    Ok([
        h2.v_operator(2).with_grid(2),
        hr.with_grid(2),
        hr.alternate().with_grid(2),
        half.clone(),
        half.alternate(),
    ])
}

/// `Q_k = T_2(h^k)`; `Q_0 = 5`.
pub fn q_powersum(fam: &ReplicateFamily, k: u32, upto: i64) -> Result<QSeries> {
    if k == 0 {
        return Ok(QSeries::constant(rat(5), EXACT));
    }
    materialize(fam, &tn_multiset(2), k, upto)
}

/// Exact rings that Newton's identities run over.
pub trait NewtonRing: Clone {
    fn one() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: &BigRational) -> Self;
}

impl NewtonRing for BigRational {
    fn one() -> Self {
        One::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: &BigRational) -> Self {
        self * c
    }
}

impl NewtonRing for QSeries {
    fn one() -> Self {
        QSeries::constant(rat(1), EXACT)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: &BigRational) -> Self {
        self.scale(c)
    }
}

/// Elementary symmetric `e_1..e_n` from power sums `p_1..p_n`:
/// `k e_k = sum_{i=1}^k (-1)^(i-1) e_{k-i} p_i`.
pub fn newton_elementary<R: NewtonRing>(p: &[R]) -> Vec<R> {
    let mut e = vec![R::one()];
    for k in 1..=p.len() {
        let mut acc: Option<R> = None;
        for i in 1..=k {
            let t = e[k - i].times(&p[i - 1]);
            acc = Some(match acc {
                None => t,
                Some(a) if i % 2 == 1 => a.plus(&t),
                Some(a) => a.minus(&t),
            });
        }
        e.push(acc.unwrap().scaled(&BigRational::new(1.into(), (k as i64).into())));
    }
    e.remove(0);
    e
}

fn pairwise_sum(xs: &[QSeries]) -> QSeries {
    let mut acc = QSeries::zero(1, EXACT);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            acc = &acc + &(&xs[i] * &xs[j]);
        }
    }
    acc
}

/// `sigma_2` of the five series against
/// `2 a_2 f - f^[2] + 2(a_4 - a_1) + 2 a_2^[sqrt2] - (f^[sqrt2])^2`.
pub fn verify_sigma2(fam: &ReplicateFamily, upto: i64) -> Result<Report> {
    let start = std::time::Instant::now();
    let five = five_series(fam)?;
    let f = fam.root_series()?;
    let f2 = fam.resolve(ReplicateIndex::int(2))?;
    let fr = fam.resolve(ReplicateIndex::SQRT2)?;
    let mut report = Report::new(format!("sigma_2 identity (root {})", fam.root));
    let direct = pairwise_sum(&five);
    // Q_1 has a q^-2 pole, so Q_1^2 loses two exponents
    let q1 = q_powersum(fam, 1, upto + 2)?;
    let q2 = q_powersum(fam, 2, upto + 2)?;
    let newton = newton_elementary(&[q1, q2]).remove(1);
    report.push(Check::compare("Newton sigma_2 = pairwise products", &newton, &direct, None, upto));
    let c = |s: &QSeries, k| s.coeff(k);
    let constant = rat(2) * (c(&f, 4)? - c(&f, 1)?) + rat(2) * c(&fr, 2)?;
    let rhs = &(&f.scale(&(rat(2) * c(&f, 2)?)) - &f2) - &(&fr * &fr);
    let rhs = add_constant(&rhs, &constant);
    report.push(Check::compare("sigma_2 = closed form", &direct, &rhs, None, upto));
    let lead = (direct.coeff(-4)?, rhs.with_grid(2).coeff(-4)?);
    report.push(Check::from_bool(
        "q^-2 coefficient",
        lead.0 == rat(-1) && lead.1 == rat(-1),
        format!("lhs {} rhs {}", lead.0, lead.1),
    ));
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// The `l = 2` power-sum recurrence at `k`:
/// `Q_k + sum b_{k,i} Q_{k-i} + sum (b^[sqrt2]_{k,i} - b_{k,i})(s_2^{k-i} + s_3^{k-i})
///  + sum (b^[2]_{k,i} - b_{k,i}) s_1^{k-i}`
/// against `P_{2k}(h)`, plus `2 T_k Psi_sqrt2 h + 2 T_{k/2} Psi_2 h` for even `k`.
pub fn verify_power_sum_recurrence(fam: &ReplicateFamily, k: u32, upto: i64) -> Result<Report> {
    let start = std::time::Instant::now();
    let h = fam.root_series()?;
    let hr = fam.resolve(ReplicateIndex::SQRT2)?;
    let h2 = fam.resolve(ReplicateIndex::int(2))?;
    let five = five_series(fam)?;
    let ku = k as usize;
    let b = faber_poly(&h, ku)?;
    let br = faber_poly(&hr, ku)?;
    let b2 = faber_poly(&h2, ku)?;
    let mut lhs = q_powersum(fam, k, upto)?;
    for i in 1..=ku {
        let e = (k as usize - i) as u32;
        let q = q_powersum(fam, e, upto)?;
        lhs = &lhs + &q.scale(b.coeff(i));
        let pair = &five[1].pow(e) + &five[2].pow(e);
        lhs = &lhs + &pair.scale(&(br.coeff(i) - b.coeff(i)));
        lhs = &lhs + &five[0].pow(e).scale(&(b2.coeff(i) - b.coeff(i)));
    }
    let g = h.truncate(h.prec().min(upto + 2 * k as i64 + 1));
    let mut rhs = faber_apply(&faber_poly(&g, 2 * ku)?, &g);
    if k % 2 == 0 {
        let tr = rep_lhs(&fam.rerooted(ReplicateIndex::SQRT2)?, k as i64)?;
        let t2 = rep_lhs(&fam.rerooted(ReplicateIndex::int(2))?, k as i64 / 2)?;
        rhs = &rhs + &(&tr + &t2).scale_int(2);
    }
    let case = if k % 2 == 0 { "even" } else { "odd" };
    let mut report = Report::new(format!("power-sum recurrence k={k} ({case} case)"));
    let upto = upto.min(lhs.prec() / lhs.grid()).min(rhs.prec());
    report.push(Check::compare(format!("k={k}"), &lhs, &rhs, Some(k as i64), upto));
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::catalog_series;
    use num_traits::Zero;

    fn two_a(prec: i64) -> ReplicateFamily {
        ReplicateFamily::self_family("2A", prec).unwrap()
    }

    fn identity_holds(lhs: &str, rhs: &str) -> bool {
        verify_op_identity(lhs, rhs, None).unwrap().passed()
    }

    #[test]
    fn parser() {
        let e = parse_op_expr("T(2^3)*T(2) + 2*Psi(sqrt2) - Psi(3)").unwrap();
        assert_eq!(e.to_string(), "T(8)*T(2) + 2*Psi(sqrt2) - Psi(3)");
        assert_eq!(parse_op_expr("(T(2)+1)*T(3)").unwrap().to_string(), "(T(2) + 1)*T(3)");
        assert!(parse_op_expr("T(2").is_err());
        assert!(parse_op_expr("T(2) T(3)").is_err());
        assert!(parse_op_expr("Q(2)").is_err());
        assert_eq!(parse_op_expr("2^3").unwrap(), OpExpr::Int(8));
    }

    #[test]
    fn multiset_sizes() {
        assert_eq!(tn_multiset(1).size(), 1);
        assert_eq!(tn_multiset(2).size(), 5);
        assert_eq!(tn_multiset(4).size(), 13);
        assert_eq!(tn_multiset(3).size(), 4);
    }

    #[test]
    fn slash_composition_law() {
        let mats: Vec<SlashMatrix> = (1..=8)
            .flat_map(|u| (1..=8).flat_map(move |y| (0..y).map(move |v| (u, v, y))))
            .flat_map(|(u, v, y)| {
                let mut m = vec![SlashMatrix::new(0, u, v, y)];
                if u % 2 == 0 && y % 2 == 0 {
                    m.push(SlashMatrix::new(1, u, v, y));
                }
                m
            })
            .step_by(7)
            .collect();
        let exp = BigRational::new(3.into(), 2.into());
        for a in &mats {
            for b in mats.iter().step_by(5) {
                let (x, e) = a.act_on_monomial(&BigRational::zero(), &exp);
                let lhs = b.act_on_monomial(&x, &e);
                let rhs = a.mul(b).act_on_monomial(&BigRational::zero(), &exp);
                assert_eq!(lhs, rhs, "{a} {b}");
                let m = a.multiplier() * b.multiplier();
                assert_eq!(m, a.mul(b).multiplier());
            }
        }
    }

    #[test]
    fn identities_at_matrix_level() {
        assert!(identity_holds("T(3)*T(5)", "T(15)"));
        assert!(identity_holds("T(2)*T(2)", "T(4) + 2*T(2)*Psi(sqrt2) + 2*T(1)*Psi(2)"));
        assert!(identity_holds("T(2^3)*T(2)", "T(2^4)+2*T(2^3)*Psi(sqrt2)+2*T(2^2)*Psi(2)"));
        assert!(identity_holds("T(3)*T(3)", "T(9) + 3*T(1)*Psi(3)"));
        assert!(identity_holds("T(1)*Psi(sqrt2)", "Psi(sqrt2)"));
        assert!(!identity_holds("T(2)*T(2)", "T(4)"));
        assert!(!identity_holds("T(3)*T(3)", "T(9)"));
    }

    #[test]
    fn finer_modulus_separates_classes() {
        let l = parse_op_expr("T(3)*T(5)").unwrap().multiset();
        let r = parse_op_expr("T(15)").unwrap().multiset();
        assert_eq!(l.canonical(1), r.canonical(1));
        assert_ne!(l.canonical(2), r.canonical(2));
    }

    #[test]
    fn generalized_tn_is_faber() {
        let fam = two_a(200);
        let f = fam.root_series().unwrap();
        assert_eq!(generalized_tn(&fam, 1, 30).unwrap(), f.truncate(30));
        for n in 1..=6 {
            let t = generalized_tn(&fam, n, 30).unwrap();
            let p = faber_apply(&faber_poly(&f, n as usize).unwrap(), &f);
            assert!(Check::compare("tn", &t, &p, Some(n), 30).passed(), "n={n}");
            let r = rep_lhs(&fam, n).unwrap();
            assert!(Check::compare("lhs", &t, &r, Some(n), 30).passed(), "n={n}");
        }
        let m = ReplicateFamily::monster_family(60).unwrap();
        assert_eq!(generalized_tn(&m, 2, 3).unwrap().coeff(2).unwrap(), rat(40491909396));
    }

    #[test]
    fn materialized_identity() {
        let fam = two_a(400);
        let r = verify_op_identity("T(2)*T(2)", "T(4) + 2*T(2)*Psi(sqrt2) + 2*T(1)*Psi(2)", Some((&fam, 30))).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 2);
    }

    #[test]
    fn power_sums() {
        let fam = two_a(120);
        assert_eq!(q_powersum(&fam, 0, 30).unwrap(), QSeries::constant(rat(5), EXACT));
        let five = five_series(&fam).unwrap();
        for k in 1..=4u32 {
            let q = q_powersum(&fam, k, 30).unwrap();
            let brute = five.iter().fold(QSeries::zero(1, EXACT), |a, s| &a + &s.pow(k));
            assert!(Check::compare("Q", &q, &brute, None, 30).passed(), "k={k}");
        }
        let f = fam.root_series().unwrap();
        let q1 = q_powersum(&fam, 1, 30).unwrap();
        let p2 = add_constant(&(&f * &f), &rat(-2 * 4372));
        assert!(Check::compare("Q1", &q1, &p2, None, 30).passed());
    }

    #[test]
    fn newton_on_rationals() {
        let xs = [rat(2), rat(-3), BigRational::new(1.into(), 2.into())];
        let p: Vec<BigRational> = (1..=3).map(|k| xs.iter().map(|x| x.pow(k)).sum()).collect();
        let e = newton_elementary(&p);
        assert_eq!(e[0], p[0]);
        assert_eq!(e[1], &xs[0] * &xs[1] + &xs[0] * &xs[2] + &xs[1] * &xs[2]);
        assert_eq!(e[2], &xs[0] * &xs[1] * &xs[2]);
    }

    #[test]
    fn sigma2_and_recurrence() {
        let fam = two_a(200);
        let r = verify_sigma2(&fam, 40).unwrap();
        assert!(r.passed(), "{r}");
        let m = ReplicateFamily::monster_family(200).unwrap();
        let r = verify_sigma2(&m, 40).unwrap();
        assert!(r.passed(), "{r}");
        for k in 1..=4 {
            let r = verify_power_sum_recurrence(&fam, k, 40).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn non_rational_weights_rejected() {
        let fam = two_a(40);
        let ms = MatMultiset::single(SlashMatrix::new(0, 1, 1, 4), 1);
        assert!(matches!(materialize(&fam, &ms, 1, 5), Err(Error::NonRational(_))));
        // h((tau+1)/2) = h(-q^(1/2)) is a single rational term
        let half = MatMultiset::single(SlashMatrix::new(0, 1, 1, 2), 1);
        let m = materialize(&fam, &half, 1, 5).unwrap();
        assert_eq!(m.grid(), 2);
        assert_eq!(m.coeff(-1).unwrap(), rat(-1));
        assert_eq!(m.coeff(1).unwrap(), -catalog_series("2A", 5).unwrap().coeff(1).unwrap());
        assert_eq!(m.coeff(2).unwrap(), catalog_series("2A", 5).unwrap().coeff(2).unwrap());
    }
}
