//! Coset combinatorics for the Hecke operators of Gamma0(2)+, and their exact
//! action on q-series.
//!
//! Upper-triangular representatives `[[x,y],[0,z]]`, possibly carrying the factor
//! `2^(-1/2)`, act on `tau` as `(x tau + y)/z`. Summing `f((x tau + y)/z)` over a
//! gcd-filtered residue set of `y` is a Ramanujan sum, so every action is rational.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ntheory::{divisors, mobius, ramanujan_sum, sigma, two_adic};
use crate::report::{Check, Report};
use crate::series::{rat, QSeries, EXACT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CosetRep {
    pub scaled: bool,
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CosetKind {
    M1,
    S1,
    S2,
    M2,
    M,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetSet {
    pub m: i64,
    pub kind: CosetKind,
    pub reps: Vec<CosetRep>,
}

impl fmt::Display for CosetRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scaled {
            write!(f, "2^(-1/2)")?;
        }
        write!(f, "[[{},{}],[0,{}]]", self.x, self.y, self.z)
    }
}

impl fmt::Display for CosetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for CosetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M1" => Ok(CosetKind::M1),
            "S1" => Ok(CosetKind::S1),
            "S2" => Ok(CosetKind::S2),
            "M2" => Ok(CosetKind::M2),
            "M" => Ok(CosetKind::M),
            _ => Err(Error::Parse(format!("unknown coset kind {s:?}"))),
        }
    }
}

fn primitive_triangles(det: i64, scaled: bool, keep: impl Fn(i64, i64) -> bool) -> Vec<CosetRep> {
    let mut out = Vec::new();
    for x in divisors(det) {
        let z = det / x;
        if !keep(x, z) {
            continue;
        }
        let g = x.gcd(&z);
        for y in 0..z {
            if y.gcd(&g) == 1 {
                out.push(CosetRep { scaled, x, y, z });
            }
        }
    }
    out
}

pub fn enum_cosets(m: i64, kind: CosetKind) -> Result<CosetSet> {
    assert!(m >= 1);
    let even = |v: i64| v % 2 == 0;
    let mut reps = if m % 2 == 1 {
        if kind != CosetKind::M {
            return Err(Error::KindUnavailable {
                m,
                kind: kind.to_string(),
            });
        }
        primitive_triangles(m, false, |_, _| true)
    } else {
        let m1 = || primitive_triangles(m, false, |x, _| !even(x));
        let s1 = || primitive_triangles(m, false, |_, z| !even(z));
        let s2 = || primitive_triangles(2 * m, true, |x, z| even(x) && even(z));
        match kind {
            CosetKind::M1 => m1(),
            CosetKind::S1 => s1(),
            CosetKind::S2 => s2(),
            CosetKind::M2 => [s1(), s2()].concat(),
            CosetKind::M => [m1(), s1(), s2()].concat(),
        }
    };
    reps.sort();
    reps.dedup();
    Ok(CosetSet { m, kind, reps })
}

/// An element `2^(-s/2) * num / den` of GL2 with real entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupElem {
    pub num: [[i128; 2]; 2],
    pub den: i128,
    pub scaled: bool,
}

/// The Fricke involution `w_2 = 2^(-1/2) [[0,-1],[2,0]]`.
pub const FRICKE: GroupElem = GroupElem {
    num: [[0, -1], [2, 0]],
    den: 1,
    scaled: true,
};

impl GroupElem {
    pub fn new(num: [[i128; 2]; 2], den: i128, scaled: bool) -> GroupElem {
        assert!(den != 0);
        let mut g = den.abs();
        for row in &num {
            for v in row {
                g = g.gcd(v);
            }
        }
        let s = if den < 0 { -g } else { g };
        GroupElem {
            num: num.map(|r| r.map(|v| v / s)),
            den: den / s,
            scaled,
        }
    }

    pub fn identity() -> GroupElem {
        GroupElem::new([[1, 0], [0, 1]], 1, false)
    }

    pub fn from_rep(r: &CosetRep) -> GroupElem {
        GroupElem::new([[r.x as i128, r.y as i128], [0, r.z as i128]], 1, r.scaled)
    }

    pub fn from_rationals(entries: &[[BigRational; 2]; 2], scaled: bool) -> Option<GroupElem> {
        let mut den = num_bigint::BigInt::from(1);
        for row in entries {
            for v in row {
                den = den.lcm(v.denom());
            }
        }
        let conv = |v: &BigRational| -> Option<i128> {
            i128::try_from(v.numer() * (&den / v.denom())).ok()
        };
        let num = [
            [conv(&entries[0][0])?, conv(&entries[0][1])?],
            [conv(&entries[1][0])?, conv(&entries[1][1])?],
        ];
        Some(GroupElem::new(num, i128::try_from(den).ok()?, scaled))
    }

    fn det_num(&self) -> i128 {
        self.num[0][0] * self.num[1][1] - self.num[0][1] * self.num[1][0]
    }

    pub fn mul(&self, o: &GroupElem) -> GroupElem {
        let a = &self.num;
        let b = &o.num;
        let num = [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ];
        let mut den = self.den * o.den;
        let scaled = self.scaled ^ o.scaled;
        if self.scaled && o.scaled {
            den *= 2;
        }
        GroupElem::new(num, den, scaled)
    }

    pub fn inverse(&self) -> GroupElem {
        let d = self.det_num();
        assert!(d != 0, "singular matrix");
        let n = &self.num;
        let f = self.den * if self.scaled { 2 } else { 1 };
        let adj = [[n[1][1] * f, -n[0][1] * f], [-n[1][0] * f, n[0][0] * f]];
        GroupElem::new(adj, d, self.scaled)
    }

    /// Membership in Gamma0(2)+ (as a subgroup of PSL2(R)).
    pub fn in_gamma02plus(&self) -> bool {
        if self.den != 1 {
            return false;
        }
        let [[a, _], [c, d]] = self.num;
        let det = self.det_num();
        if self.scaled {
            det == 2 && a % 2 == 0 && c % 2 == 0 && d % 2 == 0
        } else {
            det == 1 && c % 2 == 0
        }
    }
}

pub fn in_gamma02plus(entries: &[[BigRational; 2]; 2], scaled: bool) -> bool {
    GroupElem::from_rationals(entries, scaled).is_some_and(|g| g.in_gamma02plus())
}

/// True when `g2 g1^-1` lies in Gamma0(2)+.
pub fn same_left_coset(g1: &GroupElem, g2: &GroupElem) -> bool {
    g2.mul(&g1.inverse()).in_gamma02plus()
}

/// Indices of M1 reps matching `gamma w_2` for each M2 rep, in M2 order.
pub fn fricke_pairing(m: i64) -> Result<Vec<Vec<usize>>> {
    let m1 = enum_cosets(m, CosetKind::M1)?;
    let m2 = enum_cosets(m, CosetKind::M2)?;
    let lefts: Vec<GroupElem> = m1.reps.iter().map(GroupElem::from_rep).collect();
    Ok(m2
        .reps
        .iter()
        .map(|r| {
            let g = GroupElem::from_rep(r).mul(&FRICKE);
            lefts
                .iter()
                .enumerate()
                .filter(|(_, l)| same_left_coset(l, &g))
                .map(|(i, _)| i)
                .collect()
        })
        .collect())
}

fn require_integral(f: &QSeries) -> Result<()> {
    if f.grid() != 1 {
        return Err(Error::GridError(f.grid()));
    }
    Ok(())
}

/// `sum_{y: gcd(y,g)=1, 0<=y<z} f((x tau + y)/z)` with `g = gcd(x,z)`.
fn filtered_residue_sum(f: &QSeries, x: i64, z: i64) -> QSeries {
    let g = x.gcd(&z);
    let h = z / g;
    let terms: Vec<_> = f
        .terms()
        .filter(|(k, _)| k % h == 0)
        .filter_map(|(k, c)| {
            let kk = k / h;
            let r = ramanujan_sum(g, kk);
            (r != 0).then(|| (kk, c * rat(r * h)))
        })
        .collect();
    QSeries::from_terms(1, Integer::div_floor(&f.prec(), &h), terms).v_operator(x / g)
}

/// `sum_{gamma in s} f(gamma tau)`, evaluated through Ramanujan sums.
pub fn apply_coset_action(f: &QSeries, s: &CosetSet) -> Result<QSeries> {
    require_integral(f)?;
    let mut groups: BTreeMap<(i64, i64), Vec<i64>> = BTreeMap::new();
    for r in &s.reps {
        groups.entry((r.x, r.z)).or_default().push(r.y);
    }
    let mut acc = QSeries::zero(1, EXACT);
    for ((x, z), mut ys) in groups {
        ys.sort_unstable();
        let g = x.gcd(&z);
        let expect: Vec<i64> = (0..z).filter(|y| y.gcd(&g) == 1).collect();
        if ys != expect {
            return Err(Error::IncompleteResidues { x, z });
        }
        acc = &acc + &filtered_residue_sum(f, x, z);
    }
    Ok(acc)
}

/// `T_m f`, the sum over the coset representatives `M^m`.
pub fn hecke_t(f: &QSeries, m: i64) -> Result<QSeries> {
    apply_coset_action(f, &enum_cosets(m, CosetKind::M)?)
}

fn full_pairs(m: i64, keep: impl Fn(i64, i64) -> bool) -> Vec<(i64, i64)> {
    divisors(m)
        .into_iter()
        .map(|x| (x, m / x))
        .filter(|&(x, z)| keep(x, z))
        .collect()
}

fn sum_pairs(f: &QSeries, pairs: &[(i64, i64)]) -> QSeries {
    pairs.iter().fold(QSeries::zero(1, EXACT), |acc, &(x, z)| {
        &acc + &f.residue_avg(x, z)
    })
}

/// The complete-residue operator: all `(x,y,z)` with `xz = m`, `0 <= y < z`, plus
/// for even `m` the triples with `xz = 2m` and `x, z` even.
pub fn apply_ttilde(f: &QSeries, m: i64) -> QSeries {
    let mut pairs = full_pairs(m, |_, _| true);
    if m % 2 == 0 {
        pairs.extend(full_pairs(2 * m, |x, z| x % 2 == 0 && z % 2 == 0));
    }
    sum_pairs(f, &pairs)
}

/// Number of substitutions summed by `apply_ttilde`.
pub fn ttilde_term_count(m: i64) -> i64 {
    let base = sigma(m, 1);
    if m % 2 == 0 {
        base + 2 * sigma(m / 2, 1)
    } else {
        base
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rduo {
    /// every `xz = m`, `0 <= y < z`
    R,
    /// `x` odd
    D,
    /// `z` odd
    U,
    /// `x`, `z` even and `y` odd
    O,
}

pub fn apply_rduo(f: &QSeries, m: i64, kind: Rduo) -> QSeries {
    match kind {
        Rduo::R => sum_pairs(f, &full_pairs(m, |_, _| true)),
        Rduo::D => sum_pairs(f, &full_pairs(m, |x, _| x % 2 == 1)),
        Rduo::U => sum_pairs(f, &full_pairs(m, |_, z| z % 2 == 1)),
        Rduo::O => {
            let pairs = full_pairs(m, |x, z| x % 2 == 0 && z % 2 == 0);
            let halves: Vec<_> = pairs.iter().map(|&(x, z)| (x / 2, z / 2)).collect();
            &sum_pairs(f, &pairs) - &sum_pairs(f, &halves)
        }
    }
}

/// The operators `T_{m/(r^2 2^i)}` with `r` odd, `r^2 | m`, `0 <= i <= v_2(m)`.
pub fn hecke_decomposition(m: i64) -> Vec<i64> {
    let (alpha, _) = two_adic(m);
    let mut out = Vec::new();
    for r in (1..).step_by(2).take_while(|r| r * r <= m) {
        if m % (r * r) != 0 {
            continue;
        }
        for i in 0..=alpha {
            out.push(m / (r * r) >> i);
        }
    }
    out
}

/// `T_m` recovered from the complete-residue operators by Moebius inversion over
/// odd square divisors.
pub fn hecke_t_inversion(f: &QSeries, m: i64) -> QSeries {
    let mut acc = QSeries::zero(1, EXACT);
    for r in (1..).step_by(2).take_while(|r| r * r <= m) {
        if m % (r * r) != 0 || mobius(r) == 0 {
            continue;
        }
        let n = m / (r * r);
        let mut s = apply_ttilde(f, n);
        if n % 2 == 0 {
            s = &s - &apply_ttilde(f, n / 2);
        }
        acc = &acc + &s.scale_int(mobius(r));
    }
    acc
}

/// Checks that the complete-residue operator splits into the listed `T_n`, and
/// that both ways of computing each `T_n` agree, on every exponent below `upto`.
pub fn verify_hecke_formula(f: &QSeries, m: i64, upto: i64) -> Result<Report> {
    let start = std::time::Instant::now();
    let parts = hecke_decomposition(m);
    let mut report = Report::new(format!("hecke formula m={m}"));
    // determinant n needs exponents of f up to upto*n; more only inflates V_x
    let cut = |n: i64| f.truncate(f.prec().min(upto.saturating_mul(n).saturating_add(1)));
    let lhs = apply_ttilde(&cut(m), m);
    let mut rhs = QSeries::zero(1, EXACT);
    for &n in &parts {
        let direct = hecke_t(&cut(n), n)?;
        let inverted = hecke_t_inversion(&cut(n), n);
        report.push(Check::compare(format!("T_{n} direct vs inversion"), &direct, &inverted, Some(n), upto));
        rhs = &rhs + &direct;
    }
    let names: Vec<String> = parts.iter().map(|n| format!("T_{n}")).collect();
    let mut c = Check::compare(format!("Ttilde_{m} = {}", names.join(" + ")), &lhs, &rhs, Some(m), upto);
    if c.passed() {
        c.detail = format!("{} ({})", c.detail, names.join(", "));
    }
    report.push(c);
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}
