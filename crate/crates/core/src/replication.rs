//! Replicate families and the ordinary / (2+) replication identities.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{catalog_entry, catalog_series};
use crate::faber::{faber_apply, faber_poly};
use crate::ntheory::divisors;
use crate::report::{Check, Report};
use crate::series::{QSeries, EXACT};

/// The index `n` (`half = false`) or `n*sqrt2` (`half = true`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReplicateIndex {
    pub n: i64,
    pub half: bool,
}

impl ReplicateIndex {
    pub const ONE: ReplicateIndex = ReplicateIndex { n: 1, half: false };
    pub const SQRT2: ReplicateIndex = ReplicateIndex { n: 1, half: true };

    pub fn int(n: i64) -> ReplicateIndex {
        assert!(n >= 1);
        ReplicateIndex { n, half: false }
    }

    pub fn sqrt2(n: i64) -> ReplicateIndex {
        assert!(n >= 1);
        ReplicateIndex { n, half: true }
    }

    /// `sqrt2^k`.
    pub fn sqrt2_pow(k: u32) -> ReplicateIndex {
        ReplicateIndex {
            n: 1 << (k / 2),
            half: k % 2 == 1,
        }
    }

    /// Drops the odd part of `n`.
    pub fn two_part(self) -> ReplicateIndex {
        let (a, _) = crate::ntheory::two_adic(self.n);
        ReplicateIndex { n: 1 << a, half: self.half }
    }
}

impl Mul for ReplicateIndex {
    type Output = ReplicateIndex;
    fn mul(self, o: ReplicateIndex) -> ReplicateIndex {
        let n = self.n * o.n;
        match (self.half, o.half) {
            (true, true) => ReplicateIndex { n: 2 * n, half: false },
            (a, b) => ReplicateIndex { n, half: a || b },
        }
    }
}

impl fmt::Display for ReplicateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.half, self.n) {
            (false, n) => write!(f, "{n}"),
            (true, 1) => write!(f, "sqrt2"),
            (true, n) => write!(f, "{n}sqrt2"),
        }
    }
}

impl FromStr for ReplicateIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, half) = match s.strip_suffix("sqrt2") {
            Some(rest) => (rest.trim_end_matches('*'), true),
            None => (s, false),
        };
        let n = if num.is_empty() && half {
            1
        } else {
            num.parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad replicate index {s:?}")))?
        };
        if n < 1 {
            return Err(Error::Parse(format!("replicate index must be positive: {s:?}")));
        }
        Ok(ReplicateIndex { n, half })
    }
}

impl Serialize for ReplicateIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReplicateIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ordinary,
    TwoPlus,
}

/// A finite set of replicates plus rules for every other index.
///
/// An index `i` (taken relative to `root`) resolves to: the member at `i`; else
/// the member named by `closure[i]`; else the same lookups at the 2-power part of
/// `i`; else the member named by `default`. With `half_zero` every `n*sqrt2`
/// index resolves to the zero series.
#[derive(Clone, Debug)]
pub struct ReplicateFamily {
    pub mode: Mode,
    pub members: BTreeMap<ReplicateIndex, QSeries>,
    pub closure: BTreeMap<ReplicateIndex, ReplicateIndex>,
    pub default: Option<ReplicateIndex>,
    pub half_zero: bool,
    pub root: ReplicateIndex,
}

impl ReplicateFamily {
    pub fn new(mode: Mode) -> ReplicateFamily {
        ReplicateFamily {
            mode,
            members: BTreeMap::new(),
            closure: BTreeMap::new(),
            default: None,
            half_zero: false,
            root: ReplicateIndex::ONE,
        }
    }

    /// A two_plus family over catalog labels, e.g. `[("1","1A"),("sqrt2","2A")]`.
    pub fn from_labels(members: &[(&str, &str)], default: Option<&str>, prec: i64) -> Result<ReplicateFamily> {
        let mut fam = ReplicateFamily::new(Mode::TwoPlus);
        for (idx, label) in members {
            fam.members.insert(idx.parse()?, catalog_series(label, prec)?);
        }
        fam.default = default.map(str::parse).transpose()?;
        Ok(fam)
    }

    /// Every replicate equal to the catalog series `label`.
    pub fn self_family(label: &str, prec: i64) -> Result<ReplicateFamily> {
        ReplicateFamily::from_labels(&[("1", label)], Some("1"), prec)
    }

    /// The 1A family: `f = j - 744` with 2A at `sqrt2` and beyond.
    pub fn monster_family(prec: i64) -> Result<ReplicateFamily> {
        ReplicateFamily::from_labels(&[("1", "1A"), ("sqrt2", "2A"), ("2", "2A")], Some("2"), prec)
    }

    fn lookup_key(&self, j: ReplicateIndex) -> Option<ReplicateIndex> {
        let find = |k: ReplicateIndex| {
            if self.members.contains_key(&k) {
                Some(k)
            } else {
                self.closure.get(&k).copied().filter(|t| self.members.contains_key(t))
            }
        };
        find(j)
            .or_else(|| find(j.two_part()))
            .or_else(|| self.default.filter(|d| self.members.contains_key(d)))
    }

    /// The stored member that the absolute index `j` resolves to; `None` means
    /// the zero series.
    pub fn resolve_key(&self, j: ReplicateIndex) -> Result<Option<ReplicateIndex>> {
        if self.mode == Mode::Ordinary && j.half {
            return Err(Error::UnresolvedIndex(format!("{j} in an ordinary family")));
        }
        if self.half_zero && j.half {
            return Ok(None);
        }
        let k = self.lookup_key(j).ok_or_else(|| Error::UnresolvedIndex(j.to_string()))?;
        // an explicit zero member behaves like an absent replicate
        Ok(Some(k).filter(|k| !self.members[k].is_zero()))
    }

    /// The replicate `f^[i]` relative to the root.
    pub fn resolve(&self, i: ReplicateIndex) -> Result<QSeries> {
        Ok(match self.resolve_key(self.root * i)? {
            Some(k) => self.members[&k].clone(),
            None => QSeries::zero(1, EXACT),
        })
    }

    pub fn root_series(&self) -> Result<QSeries> {
        self.resolve(ReplicateIndex::ONE)
    }

    /// The family seen from `f^[r]`; the new root must be a normalized series.
    pub fn rerooted(&self, r: ReplicateIndex) -> Result<ReplicateFamily> {
        let mut fam = self.clone();
        fam.root = self.root * r;
        let f = fam.root_series()?;
        if f.is_zero() || !f.is_normalized() {
            return Err(Error::Precondition(format!(
                "replicate {} is not a normalized series and cannot be a root",
                fam.root
            )));
        }
        Ok(fam)
    }

    /// Lowest precision among stored members.
    pub fn min_prec(&self) -> i64 {
        self.members.values().map(QSeries::prec).min().unwrap_or(EXACT)
    }
}

/// Left-hand side of the replication identity at `n`:
/// `sum_{ad=n} d V_a U_d f^[a]`, plus in two_plus mode
/// `sum_{ad=n, d even} d V_{2a} U_d f^[a sqrt2]`.
pub fn rep_lhs(fam: &ReplicateFamily, n: i64) -> Result<QSeries> {
    assert!(n >= 1);
    let mut acc = QSeries::zero(1, EXACT);
    for a in divisors(n) {
        let d = n / a;
        acc = &acc + &fam.resolve(ReplicateIndex::int(a))?.residue_avg(a, d);
        if fam.mode == Mode::TwoPlus && d % 2 == 0 {
            acc = &acc + &fam.resolve(ReplicateIndex::sqrt2(a))?.residue_avg(2 * a, d);
        }
    }
    Ok(acc)
}

/// `P_n(f)` computed from a root truncated to what `upto` needs.
fn faber_side(f: &QSeries, n: i64, upto: i64) -> Result<QSeries> {
    let g = f.truncate(f.prec().min(upto + n + 1));
    Ok(faber_apply(&faber_poly(&g, n as usize)?, &g))
}

fn replication_check(fam: &ReplicateFamily, n: i64, prec: i64) -> Check {
    let name = format!("n={n}");
    let run = || -> Result<Check> {
        let f = fam.root_series()?;
        let lhs = rep_lhs(fam, n)?;
        let upto = prec.min(lhs.prec());
        let rhs = faber_side(&f, n, upto)?;
        let upto = upto.min(rhs.prec());
        if upto < 1 {
            return Ok(Check::fail(name.clone(), format!("no coefficients past the pole are known (prec {upto})")));
        }
        let mut c = Check::compare(name.clone(), &lhs.truncate(upto), &rhs.truncate(upto), Some(n), upto);
        if upto < prec && c.passed() {
            c.detail = format!("{}; members only support q^{upto}", c.detail);
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| Check::fail(name, e.to_string()))
}

/// Exact check of the replication identity for `1 <= n <= n_max`, comparing
/// exponents below `prec` (or less when the members are too short).
pub fn check_replication(fam: &ReplicateFamily, n_max: i64, prec: i64) -> Report {
    Report::timed(format!("replication ({:?}, root {})", fam.mode, fam.root), |r| {
        for n in 1..=n_max {
            r.push(replication_check(fam, n, prec));
        }
    })
}

/// Re-roots the family at `sqrt2^k` for `k <= depth` and checks each.
pub fn check_complete(fam: &ReplicateFamily, depth: u32, n_max: i64, prec: i64) -> Result<Report> {
    let mut report = Report::new(format!("complete replication depth {depth}"));
    let start = std::time::Instant::now();
    for k in 0..=depth {
        let step = ReplicateIndex::sqrt2_pow(k);
        if fam.mode == Mode::Ordinary && step.half {
            continue;
        }
        let sub = fam.rerooted(step)?;
        report.absorb(&format!("root {}: ", sub.root), check_replication(&sub, n_max, prec));
    }
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// The ordinary family `f^(n) = f^[n]` (n odd), `f^[n] + 2 U_2 f^[n/sqrt2]` (n even)
/// for `n <= max_n`.
pub fn ordinary_from_two_plus(fam: &ReplicateFamily, max_n: i64) -> Result<ReplicateFamily> {
    if fam.mode != Mode::TwoPlus {
        return Err(Error::Precondition("expected a two_plus family".into()));
    }
    let mut out = ReplicateFamily::new(Mode::Ordinary);
    for n in 1..=max_n {
        let mut s = fam.resolve(ReplicateIndex::int(n))?;
        if n % 2 == 0 {
            let h = fam.resolve(ReplicateIndex::sqrt2(n / 2))?;
            s = &s + &h.u_operator(2).scale_int(2);
        }
        out.members.insert(ReplicateIndex::int(n), s);
    }
    Ok(out)
}

/// An ordinary family read as a two_plus family with `f^[n sqrt2] = 0`.
pub fn zero_choice(fam: &ReplicateFamily) -> ReplicateFamily {
    let mut out = fam.clone();
    out.mode = Mode::TwoPlus;
    out.half_zero = true;
    out
}

/// `c_k(a) = c_k(b) + 2 c_{2k}(c)` for `1 <= k < prec`, i.e.
/// `T_a(z) = T_b(z) + T_c(z/2) + T_c((z+1)/2)` away from the pole.
pub fn verify_decomp_triple(a: &str, b: &str, c: &str, prec: i64) -> Result<Check> {
    let (sa, sb, sc) = (
        catalog_series(a, prec)?,
        catalog_series(b, prec)?,
        catalog_series(c, 2 * prec)?,
    );
    let rhs = &sb + &sc.u_operator(2).scale_int(2);
    let strip = |s: &QSeries| QSeries::from_terms(1, prec, s.terms().filter(|(k, _)| *k >= 1).map(|(k, v)| (k, v.clone())));
    let mut check = Check::compare(format!("{a} = {b} + 2 U2({c})"), &strip(&sa), &strip(&rhs), None, prec);
    if check.passed() {
        check.detail = format!("c_k identity holds for 1 <= k < {prec}");
    }
    Ok(check)
}

/// `c_k(a) = c_k(b) + 2 c_{2k}(b)`.
pub fn verify_decomp_instance(a: &str, b: &str, prec: i64) -> Result<Report> {
    Ok(Report::timed(format!("decomposition {a} / {b}"), |r| {
        r.push(verify_decomp_triple(a, b, b, prec).unwrap_or_else(|e| Check::fail("decomposition", e.to_string())));
    }))
}

/// One row of the baby monster class table.
#[derive(Clone, Debug, Serialize)]
pub struct ClassRow {
    pub class: &'static str,
    pub square_class: &'static str,
    pub series: &'static str,
    pub sqrt2_replicate: &'static str,
    /// Replicates `[sqrt2^k]` for `k = 0, 1, 2, ...`; the last one repeats.
    pub chain: &'static [&'static str],
}

/// Rows of the class table that are checked, plus a sample of those that are not.
pub const CLASS_ROWS: &[ClassRow] = &[
    ClassRow { class: "1a", square_class: "1a", series: "2A", sqrt2_replicate: "2A", chain: &["2A"] },
    ClassRow { class: "2a", square_class: "1a", series: "4~b", sqrt2_replicate: "1A", chain: &[] },
    ClassRow { class: "2b", square_class: "1a", series: "2a", sqrt2_replicate: "2A", chain: &[] },
    ClassRow { class: "2c", square_class: "1a", series: "4A", sqrt2_replicate: "2B", chain: &["4A", "2B", "2A"] },
    ClassRow { class: "2d", square_class: "1a", series: "2B", sqrt2_replicate: "2A", chain: &["2B", "2A"] },
    ClassRow { class: "2e", square_class: "1a", series: "4C", sqrt2_replicate: "2B", chain: &["4C", "2B", "2A"] },
    ClassRow { class: "3a", square_class: "3a", series: "6A", sqrt2_replicate: "6A", chain: &[] },
    ClassRow { class: "4a", square_class: "2a", series: "8~b", sqrt2_replicate: "4B", chain: &[] },
    ClassRow { class: "4b", square_class: "2d", series: "4a", sqrt2_replicate: "4A", chain: &[] },
    ClassRow { class: "4c", square_class: "2d", series: "4B", sqrt2_replicate: "4A", chain: &[] },
    ClassRow { class: "4d", square_class: "2d", series: "4C", sqrt2_replicate: "4C", chain: &["4C", "4C", "2B", "2A"] },
    ClassRow { class: "4h", square_class: "2d", series: "4D", sqrt2_replicate: "4C", chain: &["4D", "4C", "2B", "2A"] },
];

impl ClassRow {
    /// `T_{t,g^n}` as a family. Both the `[sqrt2^k]` chain and the full
    /// replicates at odd multiples follow the 2-power rule.
    pub fn family(&self, prec: i64) -> Result<ReplicateFamily> {
        if self.chain.is_empty() {
            return Err(Error::Precondition(format!("class {} has no catalog family", self.class)));
        }
        let mut fam = ReplicateFamily::new(Mode::TwoPlus);
        for (k, label) in self.chain.iter().enumerate() {
            fam.members.insert(ReplicateIndex::sqrt2_pow(k as u32), catalog_series(label, prec)?);
        }
        fam.default = Some(ReplicateIndex::sqrt2_pow(self.chain.len() as u32 - 1));
        Ok(fam)
    }

    pub fn skip_reason(&self) -> Option<String> {
        if !self.chain.is_empty() {
            return None;
        }
        let lower = |l: &str| l.chars().any(|c| c.is_ascii_lowercase() || c == '~');
        Some(if lower(self.series) {
            format!("T_{{t,g}} = {} is a non-monstrous Hauptmodul label with no oracle here", self.series)
        } else if catalog_entry(self.series).is_err() {
            format!("{} is not in the eta-quotient catalog", self.series)
        } else {
            format!("replicate chain for {} is not modelled", self.series)
        })
    }
}

/// Checks every modelled class row for `n <= n_max` at `prec` coefficients and
/// reports the rest as skipped.
pub fn check_class_rows(n_max: i64, prec: i64) -> Report {
    Report::timed("class table rows", |r| {
        for row in CLASS_ROWS {
            let name = format!("row {} ({})", row.class, row.series);
            match row.skip_reason() {
                Some(reason) => r.push(Check::skip(name, reason)),
                None => match row.family(member_prec(n_max, prec)) {
                    Ok(fam) => {
                        let sub = check_replication(&fam, n_max, prec);
                        let fails: Vec<String> = sub.failures().map(|c| c.name.clone()).collect();
                        let mut c = Check::from_bool(
                            name,
                            fails.is_empty(),
                            if fails.is_empty() {
                                format!("n <= {n_max} exact to q^{prec}")
                            } else {
                                format!("failed at {}", fails.join(", "))
                            },
                        );
                        c.mismatches = sub.failures().flat_map(|c| c.mismatches.clone()).take(20).collect();
                        r.push(c);
                    }
                    Err(e) => r.push(Check::fail(name, e.to_string())),
                },
            }
        }
    })
}

/// Spot value: the `q^2` coefficient of `P_2(1A)` on both sides of the `n = 2`
/// identity for the 1A family.
pub fn monster_spot_value(prec: i64) -> Result<(num_rational::BigRational, num_rational::BigRational)> {
    let fam = ReplicateFamily::monster_family(prec.max(10))?;
    let lhs = rep_lhs(&fam, 2)?.coeff(2)?;
    let f = fam.root_series()?;
    let rhs = faber_side(&f, 2, 3)?.coeff(2)?;
    Ok((lhs, rhs))
}

/// Member precision needed to compare `n <= n_max` up to `q^prec`.
pub fn member_prec(n_max: i64, prec: i64) -> i64 {
    prec * n_max + n_max + 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn index_arithmetic() {
        let s: ReplicateIndex = "sqrt2".parse().unwrap();
        let t: ReplicateIndex = "2sqrt2".parse().unwrap();
        assert_eq!(s * s, ReplicateIndex::int(2));
        assert_eq!(s * t, ReplicateIndex::int(4));
        assert_eq!(ReplicateIndex::int(3) * s, "3sqrt2".parse().unwrap());
        assert_eq!(t.to_string(), "2sqrt2");
        assert_eq!(ReplicateIndex::sqrt2_pow(3), t);
        assert_eq!(ReplicateIndex::int(12).two_part(), ReplicateIndex::int(4));
        assert!("0".parse::<ReplicateIndex>().is_err());
        assert!("x".parse::<ReplicateIndex>().is_err());
    }

    #[test]
    fn resolution_rules() {
        let fam = ReplicateFamily::monster_family(20).unwrap();
        let one = fam.resolve(ReplicateIndex::int(3)).unwrap();
        assert_eq!(one, fam.root_series().unwrap());
        let two = fam.resolve(ReplicateIndex::int(2)).unwrap();
        assert_eq!(fam.resolve(ReplicateIndex::int(8)).unwrap(), two);
        assert_eq!(fam.resolve(ReplicateIndex::sqrt2(3)).unwrap(), two);
        let sub = fam.rerooted(ReplicateIndex::SQRT2).unwrap();
        assert_eq!(sub.root_series().unwrap(), two);
        let z = zero_choice(&ReplicateFamily { mode: Mode::Ordinary, ..fam.clone() });
        assert!(z.resolve(ReplicateIndex::SQRT2).unwrap().is_zero());
        assert!(matches!(z.rerooted(ReplicateIndex::SQRT2), Err(Error::Precondition(_))));
    }

    #[test]
    fn two_a_self_replicates() {
        let fam = ReplicateFamily::self_family("2A", member_prec(10, 60)).unwrap();
        let r = check_replication(&fam, 10, 60);
        assert!(r.passed(), "{r}");
        assert!(r.checks.iter().all(|c| c.detail.contains("q^60")), "{r}");
    }

    #[test]
    fn monster_family_replicates() {
        let fam = ReplicateFamily::monster_family(member_prec(6, 30)).unwrap();
        let r = check_replication(&fam, 6, 30);
        assert!(r.passed(), "{r}");
        let (l, r) = monster_spot_value(10).unwrap();
        assert_eq!(l, rat(40491909396));
        assert_eq!(r, rat(40491909396));
    }

    #[test]
    fn corruption_is_reported() {
        let mut fam = ReplicateFamily::self_family("2A", 80).unwrap();
        let f = fam.members[&ReplicateIndex::ONE].clone();
        let bump = QSeries::monomial(1, 3, rat(1), EXACT);
        fam.members.insert(ReplicateIndex::ONE, &f + &bump);
        let r = check_replication(&fam, 4, 12);
        let first = r.failures().next().expect("corruption must be detected");
        assert_eq!(first.name, "n=2");
        assert_eq!(first.mismatches[0].n, Some(2));
        assert!(r.checks[0].passed());
    }

    #[test]
    fn ordinary_conversion() {
        let fam = ReplicateFamily::self_family("2A", 200).unwrap();
        let ord = ordinary_from_two_plus(&fam, 6).unwrap();
        let f2 = &ord.members[&ReplicateIndex::int(2)];
        assert_eq!(f2.coeff(1).unwrap(), rat(196884));
        assert_eq!(ord.members[&ReplicateIndex::int(3)], fam.root_series().unwrap());
        for n in 1..=6 {
            let a = rep_lhs(&fam, n).unwrap();
            let b = rep_lhs(&ord, n).unwrap();
            let p = a.prec().min(b.prec());
            assert_eq!(a.truncate(p), b.truncate(p), "n={n}");
        }
        let r = check_replication(&ord, 6, 20);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn zero_choice_for_j() {
        let mut ord = ReplicateFamily::new(Mode::Ordinary);
        ord.members.insert(ReplicateIndex::ONE, catalog_series("1A", 200).unwrap());
        ord.default = Some(ReplicateIndex::ONE);
        assert!(check_replication(&ord, 5, 20).passed());
        let r = check_replication(&zero_choice(&ord), 5, 20);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn complete_depth_two() {
        let fam = ReplicateFamily::monster_family(member_prec(5, 20)).unwrap();
        let r = check_complete(&fam, 2, 5, 20).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 15);
    }

    #[test]
    fn decomposition_instances() {
        assert!(verify_decomp_instance("1A", "2A", 60).unwrap().passed());
        assert!(verify_decomp_triple("2B", "2A", "2B", 60).unwrap().passed());
        assert!(!verify_decomp_triple("2B", "2A", "2A", 10).unwrap().passed());
    }

    #[test]
    fn class_rows() {
        let r = check_class_rows(8, 40);
        assert!(r.passed(), "{r}");
        let skipped = r.checks.iter().filter(|c| c.status == crate::report::Status::Skip).count();
        assert_eq!(skipped, 6);
    }
}
