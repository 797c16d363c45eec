//! Mahler-type recurrences for completely (2+)-replicable families: every
//! coefficient from `a_6` on is a polynomial in lower coefficients of the
//! function and its `[2]` and `[sqrt2]` replicates.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::replication::{check_replication, Mode, ReplicateFamily, ReplicateIndex};
use crate::report::{Check, Mismatch, Report};
use crate::series::{rat, QSeries};

/// Indices that must be seeded for every member.
pub const SEED_INDICES: [i64; 4] = [1, 2, 3, 5];

/// Which form of the `a_{4k+3}` recurrence to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Item4 {
    /// The form that holds on every family we can check.
    Corrected,
    /// The form with `2 sum_{j<=2k} a_{2j} a^[sqrt2]_{2k+1-j}`, kept for comparison.
    Printed,
}

#[derive(Clone, Debug)]
pub struct FamilyState {
    /// Resolution structure; member series are only used as seeds or oracles.
    pub shape: ReplicateFamily,
    /// `coeffs[m][i] = a_i` of member `m`, with `coeffs[m][0] = 0`.
    pub coeffs: BTreeMap<ReplicateIndex, Vec<BigRational>>,
    pub seeds: BTreeMap<ReplicateIndex, BTreeMap<i64, BigRational>>,
    pub item4: Item4,
    consumed: BTreeSet<(ReplicateIndex, i64)>,
}

struct View<'a> {
    name: ReplicateIndex,
    a: &'a [BigRational],
    a2: (ReplicateIndex, &'a [BigRational]),
    ar: Option<(ReplicateIndex, &'a [BigRational])>,
}

fn fetch(member: ReplicateIndex, v: &[BigRational], i: i64) -> Result<BigRational> {
    if i <= 0 {
        return Ok(BigRational::zero());
    }
    v.get(i as usize).cloned().ok_or(Error::MissingDependency {
        member: member.to_string(),
        index: i,
    })
}

fn sum(lo: i64, hi: i64, f: impl Fn(i64) -> Result<BigRational>) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for j in lo..=hi {
        acc += f(j)?;
    }
    Ok(acc)
}

fn sign(j: i64) -> BigRational {
    if j % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

impl View<'_> {
    fn a(&self, i: i64) -> Result<BigRational> {
        fetch(self.name, self.a, i)
    }
    fn a2(&self, i: i64) -> Result<BigRational> {
        fetch(self.a2.0, self.a2.1, i)
    }
    fn ar(&self, i: i64) -> Result<BigRational> {
        match self.ar {
            Some((m, v)) => fetch(m, v, i),
            None => Ok(BigRational::zero()),
        }
    }

    fn item1(&self, k: i64) -> Result<BigRational> {
        let half = rat(1) / rat(2);
        Ok(self.a(2 * k + 1)?
            + sum(1, k - 1, |j| Ok(self.a(j)? * self.a(2 * k - j)?))?
            + half * (self.a(k)?.pow(2) - self.a2(k)?)
            - self.ar(2 * k)?)
    }

    fn item2(&self, k: i64) -> Result<BigRational> {
        let half = rat(1) / rat(2);
        Ok(self.a(2 * k + 3)? - self.a(2)? * self.a(2 * k)?
            + sum(1, k, |j| Ok(self.a(j)? * self.a(2 * k + 2 - j)?))?
            + sum(1, k - 1, |j| Ok(self.a2(j)? * self.ar(2 * k - 2 * j)?))?
            + rat(2) * sum(1, k - 1, |j| Ok(self.a(4 * j)? * self.ar(2 * k - 2 * j)?))?
            + sum(1, k - 1, |j| Ok(self.a(4 * j)? * self.a2(k - j)?))?
            + sum(1, 2 * k - 1, |j| Ok(sign(j) * self.a(j)? * self.a(4 * k - j)?))?
            + sum(1, k - 1, |j| Ok(self.ar(2 * j)? * self.ar(2 * k - 2 * j)?))?
            + half * (self.a(k + 1)?.pow(2) - self.a2(k + 1)? + self.a(2 * k)?.pow(2) + self.a2(2 * k)?))
    }

    fn item3(&self, k: i64) -> Result<BigRational> {
        Ok(sum(1, k, |j| Ok(self.a(j)? * self.a(2 * k + 1 - j)?))? + self.a(2 * k + 2)?)
    }

    fn item4(&self, k: i64, form: Item4) -> Result<BigRational> {
        let half = rat(1) / rat(2);
        let cross = match form {
            Item4::Corrected => sum(1, k, |j| Ok(self.a(4 * j - 2)? * self.ar(2 * k + 2 - 2 * j)?))?,
            Item4::Printed => sum(1, 2 * k, |j| Ok(self.a(2 * j)? * self.ar(2 * k + 1 - j)?))?,
        };
        Ok(self.a(2 * k + 4)? - self.a(2)? * self.a(2 * k + 1)?
            - half * (self.a(2 * k + 1)?.pow(2) - self.a2(2 * k + 1)?)
            + sum(1, 2 * k, |j| Ok(sign(j) * self.a(j)? * self.a(4 * k + 2 - j)?))?
            + self.ar(2 * k + 2)?
            + sum(1, k, |j| Ok(self.a(4 * j - 2)? * self.a2(k + 1 - j)?))?
            + sum(1, k + 1, |j| Ok(self.a(j)? * self.a(2 * k + 3 - j)?))?
            + rat(2) * cross
            + sum(1, k, |j| Ok(self.ar(j)? * self.ar(2 * k + 1 - j)?))?)
    }

    /// The recurrence value for `a_n`, `n >= 4`, `n != 5`.
    fn eval(&self, n: i64, form: Item4) -> Result<BigRational> {
        let k = n / 4;
        match n % 4 {
            0 => self.item1(k),
            1 => self.item2(k),
            2 => self.item3(k),
            _ => self.item4(k, form),
        }
    }
}

impl FamilyState {
    /// Seeds every member reachable from the root with the coefficients
    /// `a_1..a_5` (whatever of them the member series knows).
    pub fn from_family(fam: &ReplicateFamily) -> Result<FamilyState> {
        let mut shape = fam.clone();
        shape.mode = Mode::TwoPlus;
        let mut state = FamilyState {
            shape,
            coeffs: BTreeMap::new(),
            seeds: BTreeMap::new(),
            item4: Item4::Corrected,
            consumed: BTreeSet::new(),
        };
        for m in state.reachable()? {
            let f = &state.shape.members[&m];
            let seeds = (1..=5)
                .filter_map(|i| f.coeff(i).ok().map(|c| (i, c)))
                .collect();
            state.seeds.insert(m, seeds);
            state.coeffs.insert(m, vec![BigRational::zero()]);
        }
        Ok(state)
    }

    /// Members reached from the root under `*2` and `*sqrt2`.
    pub fn reachable(&self) -> Result<Vec<ReplicateIndex>> {
        let fam = &self.shape;
        let mut seen = BTreeSet::new();
        let mut stack: Vec<ReplicateIndex> = fam.resolve_key(fam.root)?.into_iter().collect();
        while let Some(m) = stack.pop() {
            if !seen.insert(m) {
                continue;
            }
            for step in [ReplicateIndex::int(2), ReplicateIndex::SQRT2] {
                if let Some(next) = fam.resolve_key(m * step)? {
                    stack.push(next);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    pub fn root_key(&self) -> Result<ReplicateIndex> {
        self.shape
            .resolve_key(self.shape.root)?
            .ok_or_else(|| Error::Precondition("the root resolves to the zero series".into()))
    }

    /// Highest index known for every member.
    pub fn known(&self) -> i64 {
        self.coeffs.values().map(|v| v.len() as i64 - 1).min().unwrap_or(0)
    }

    pub fn coefficients(&self, member: ReplicateIndex) -> Option<&[BigRational]> {
        self.coeffs.get(&member).map(|v| &v[1..])
    }

    fn view(&self, m: ReplicateIndex) -> Result<View<'_>> {
        let key2 = self
            .shape
            .resolve_key(m * ReplicateIndex::int(2))?
            .ok_or_else(|| Error::UnresolvedIndex(format!("{} (the [2] replicate is zero)", m)))?;
        let keyr = self.shape.resolve_key(m * ReplicateIndex::SQRT2)?;
        let get = |k: ReplicateIndex| -> Result<&[BigRational]> {
            self.coeffs
                .get(&k)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::UnresolvedIndex(k.to_string()))
        };
        Ok(View {
            name: m,
            a: get(m)?,
            a2: (key2, get(key2)?),
            ar: match keyr {
                Some(k) => Some((k, get(k)?)),
                None => None,
            },
        })
    }

    /// The recurrence value of `a_n` for `member`, from coefficients below `n`.
    pub fn next_coeff(&self, member: ReplicateIndex, n: i64) -> Result<BigRational> {
        if n < 4 || n == 5 {
            return Err(Error::Precondition(format!("a_{n} is a seed, not a recurrence output")));
        }
        self.view(member)?.eval(n, self.item4)
    }

    /// The `k = 1` case of the `a_{4k+1}` identity evaluated on seeded values; it
    /// returns `a_5` whatever the seeds are.
    pub fn degenerate_item2(&self, member: ReplicateIndex) -> Result<(BigRational, BigRational)> {
        let v = self.view(member)?;
        Ok((v.item2(1)?, v.a(5)?))
    }

    fn seed(&mut self, m: ReplicateIndex, n: i64) -> Result<BigRational> {
        let s = self.seeds.get(&m).and_then(|s| s.get(&n)).cloned();
        match s {
            Some(v) => {
                self.consumed.insert((m, n));
                Ok(v)
            }
            None => Err(Error::MissingDependency {
                member: format!("{m} (seed)"),
                index: n,
            }),
        }
    }

    /// Extends every reachable member to `a_target`, one index at a time.
    pub fn extend(&mut self, target: i64) -> Result<()> {
        let members: Vec<ReplicateIndex> = self.coeffs.keys().copied().collect();
        for n in self.known() + 1..=target {
            let mut next = Vec::with_capacity(members.len());
            for &m in &members {
                let v = if SEED_INDICES.contains(&n) {
                    self.seed(m, n)?
                } else {
                    let derived = self.next_coeff(m, n)?;
                    if let Some(s) = self.seeds.get(&m).and_then(|s| s.get(&n)).cloned() {
                        self.consumed.insert((m, n));
                        if s != derived {
                            return Err(Error::SeedConflict {
                                member: m.to_string(),
                                index: n,
                                seed: s.to_string(),
                                derived: derived.to_string(),
                            });
                        }
                    }
                    derived
                };
                next.push(v);
            }
            for (m, v) in members.iter().zip(next) {
                self.coeffs.get_mut(m).unwrap().push(v);
            }
        }
        Ok(())
    }

    /// Forgets coefficients past `a_n`.
    pub fn truncate(&mut self, n: i64) {
        for v in self.coeffs.values_mut() {
            v.truncate(n.max(0) as usize + 1);
        }
    }

    /// `(member, index)` pairs of seeds read so far.
    pub fn consumed_seeds(&self) -> Vec<(ReplicateIndex, i64)> {
        self.consumed.iter().copied().collect()
    }

    /// The extended family as series known below `q^(known+1)`.
    pub fn to_family(&self) -> ReplicateFamily {
        let mut fam = self.shape.clone();
        let prec = self.known() + 1;
        fam.members = self
            .coeffs
            .iter()
            .map(|(m, v)| (*m, QSeries::normalized(&v[1..prec as usize], prec)))
            .collect();
        fam
    }
}

/// Seeds a fresh state from `fam` and extends it to `target`.
pub fn extend_family(fam: &ReplicateFamily, target: i64) -> Result<FamilyState> {
    let mut state = FamilyState::from_family(fam)?;
    state.extend(target)?;
    Ok(state)
}

/// Rows `(index, derived, oracle)` where the extension disagrees with the member
/// series of `oracle`.
pub fn oracle_diff(state: &FamilyState, oracle: &ReplicateFamily, member: ReplicateIndex) -> Result<Vec<(i64, BigRational, BigRational)>> {
    let o = &oracle.members[&member];
    let mut out = Vec::new();
    for (i, c) in state.coeffs[&member].iter().enumerate().skip(1) {
        let want = o.coeff(i as i64)?;
        if *c != want {
            out.push((i as i64, c.clone(), want));
        }
    }
    Ok(out)
}

/// Seeds from the members of `oracle`, extends to `target`, compares with the
/// oracle coefficient by coefficient, and re-checks replication for `n <= 10`.
pub fn reconstruct_and_match(oracle: &ReplicateFamily, target: i64) -> Report {
    let start = Instant::now();
    let mut report = Report::new(format!("reconstruction to a_{target}"));
    let state = match extend_family(oracle, target) {
        Ok(s) => s,
        Err(e) => {
            report.push(Check::fail("extend", e.to_string()));
            return report;
        }
    };
    for m in state.coeffs.keys() {
        let name = format!("member {m} vs oracle");
        match oracle_diff(&state, oracle, *m) {
            Ok(d) if d.is_empty() => report.push(Check::pass(name, format!("a_1..a_{target} exact"))),
            Ok(d) => {
                let mut c = Check::fail(name, format!("{} coefficient(s) differ", d.len()));
                c.mismatches = d
                    .into_iter()
                    .take(20)
                    .map(|(i, l, r)| Mismatch {
                        n: None,
                        index: i,
                        grid: 1,
                        lhs: l.to_string(),
                        rhs: r.to_string(),
                    })
                    .collect();
                report.push(c);
            }
            Err(e) => report.push(Check::fail(name, e.to_string())),
        }
    }
    let consumed: Vec<String> = state
        .consumed_seeds()
        .iter()
        .filter(|(_, i)| SEED_INDICES.contains(i))
        .map(|(m, i)| format!("{m}:a{i}"))
        .collect();
    report.push(Check::pass("seeds consumed", consumed.join(" ")));
    let n_max = 10.min(target / 2);
    let rep = check_replication(&state.to_family(), n_max, target / n_max.max(1));
    report.absorb("extended family ", rep);
    report.wall_ms = start.elapsed().as_millis() as u64;
    report
}
