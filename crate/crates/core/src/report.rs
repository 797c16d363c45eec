//! Check results shared by every verifier and the command line.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::series::QSeries;

const MAX_LISTED: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One differing coefficient: index `index` on grid `grid` (exponent `index/grid`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub n: Option<i64>,
    pub index: i64,
    pub grid: i64,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub wall_ms: u64,
}

impl Check {
    pub fn pass(name: impl Into<String>, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: Status::Pass,
            detail: detail.into(),
            mismatches: Vec::new(),
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: Status::Fail,
            detail: detail.into(),
            mismatches: Vec::new(),
        }
    }

    pub fn skip(name: impl Into<String>, reason: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: Status::Skip,
            detail: reason.into(),
            mismatches: Vec::new(),
        }
    }

    pub fn from_bool(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
        if ok {
            Check::pass(name, detail)
        } else {
            Check::fail(name, detail)
        }
    }

    /// Exact comparison of two series; fails unless every exponent below `upto`
    /// is known on both sides.
    pub fn compare(name: impl Into<String>, lhs: &QSeries, rhs: &QSeries, n: Option<i64>, upto: i64) -> Check {
        let name = name.into();
        let grid = lhs.grid().max(rhs.grid());
        let grid = if grid % lhs.grid() == 0 && grid % rhs.grid() == 0 {
            grid
        } else {
            lhs.grid() * rhs.grid()
        };
        let common = (lhs.prec() * (grid / lhs.grid())).min(rhs.prec() * (grid / rhs.grid()));
        let diffs = lhs.differences(rhs);
        let covered = common.div_euclid(grid);
        if diffs.is_empty() && covered >= upto {
            return Check::pass(name, format!("exact below q^{covered}"));
        }
        let mut check = Check::fail(
            name,
            if diffs.is_empty() {
                format!("only exponents below q^{covered} are known, q^{upto} required")
            } else {
                format!("{} coefficient(s) differ below q^{covered}", diffs.len())
            },
        );
        check.mismatches = diffs
            .into_iter()
            .take(MAX_LISTED)
            .map(|(k, a, b)| Mismatch {
                n,
                index: k,
                grid,
                lhs: a.to_string(),
                rhs: b.to_string(),
            })
            .collect();
        check
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Report {
        Report {
            suite: suite.into(),
            checks: Vec::new(),
            wall_ms: 0,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Appends the checks of another report, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn timed<F: FnOnce(&mut Report)>(suite: impl Into<String>, body: F) -> Report {
        let start = Instant::now();
        let mut r = Report::new(suite);
        body(&mut r);
        r.wall_ms = start.elapsed().as_millis() as u64;
        r
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} ms)", self.suite, self.wall_ms)?;
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            writeln!(f, "  [{tag}] {}: {}", c.name, c.detail)?;
            for m in &c.mismatches {
                let n = m.n.map(|n| format!("n={n} ")).unwrap_or_default();
                writeln!(f, "      {n}index {}/{}: lhs {} rhs {}", m.index, m.grid, m.lhs, m.rhs)?;
            }
        }
        let verdict = if self.passed() { "all checks passed" } else { "FAILED" };
        writeln!(f, "{verdict}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_reports_first_difference() {
        let a = QSeries::from_ints(-1, 10, &[1, 0, 5, 6]);
        let b = QSeries::from_ints(-1, 10, &[1, 0, 5, 7]);
        let c = Check::compare("x", &a, &b, Some(3), 5);
        assert_eq!(c.status, Status::Fail);
        assert_eq!(c.mismatches[0].index, 2);
        assert_eq!(c.mismatches[0].n, Some(3));
        assert!(Check::compare("y", &a, &a, None, 10).passed());
        assert!(!Check::compare("z", &a, &a, None, 11).passed());
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("demo");
        r.push(Check::pass("ok", "fine"));
        r.push(Check::compare(
            "bad",
            &QSeries::from_ints(0, 3, &[1]),
            &QSeries::from_ints(0, 3, &[2]),
            None,
            3,
        ));
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(!back.passed());
    }
}
