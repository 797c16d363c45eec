//! JSON description of a replicate family.
//!
//! ```json
//! {
//!   "mode": "two_plus",
//!   "members": { "1": "catalog:1A", "sqrt2": "catalog:2A", "2": "catalog:2A" },
//!   "closure": { "default": "2" }
//! }
//! ```
//!
//! A member is `"catalog:LABEL"`, `"zero"`, or an inline list `[a1, a2, ...]`
//! of the coefficients after the leading `1/q` (integers or `"p/q"` strings).

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::catalog_series;
use crate::replication::{Mode, ReplicateFamily, ReplicateIndex};
use crate::series::{QSeries, EXACT};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub mode: Mode,
    pub members: BTreeMap<String, MemberSpec>,
    #[serde(default)]
    pub closure: BTreeMap<String, String>,
    #[serde(default)]
    pub half_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemberSpec {
    Named(String),
    Inline(Vec<Coeff>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Text(String),
}

impl Coeff {
    fn value(&self) -> Result<BigRational> {
        match self {
            Coeff::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
            Coeff::Text(s) => s
                .trim()
                .parse::<BigRational>()
                .map_err(|_| Error::Parse(format!("bad coefficient {s:?}"))),
        }
    }
}

impl MemberSpec {
    fn series(&self, prec: i64) -> Result<QSeries> {
        match self {
            MemberSpec::Named(s) if s == "zero" => Ok(QSeries::zero(1, EXACT)),
            MemberSpec::Named(s) => match s.strip_prefix("catalog:") {
                Some(label) => catalog_series(label, prec),
                None => Err(Error::Parse(format!("member {s:?}: expected catalog:LABEL, zero or a list"))),
            },
            MemberSpec::Inline(cs) => {
                let tail = cs.iter().map(Coeff::value).collect::<Result<Vec<_>>>()?;
                // a_1..a_k fix every exponent below k+1
                let known = tail.len() as i64 + 1;
                Ok(QSeries::normalized(&tail, known.min(prec)))
            }
        }
    }

    /// The catalog label, if any.
    pub fn label(&self) -> Option<&str> {
        match self {
            MemberSpec::Named(s) => s.strip_prefix("catalog:"),
            MemberSpec::Inline(_) => None,
        }
    }
}

impl FamilySpec {
    pub fn from_json(text: &str) -> Result<FamilySpec> {
        let spec: FamilySpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<FamilySpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        FamilySpec::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Parse("family has no members".into()));
        }
        for k in self.members.keys() {
            let i: ReplicateIndex = k.parse()?;
            if self.mode == Mode::Ordinary && i.half {
                return Err(Error::Parse(format!("member {k} is a sqrt2 index in an ordinary family")));
            }
        }
        for (k, v) in &self.closure {
            if k != "default" {
                k.parse::<ReplicateIndex>()?;
            }
            let target: ReplicateIndex = v.parse()?;
            if !self.members.contains_key(&target.to_string()) {
                return Err(Error::UnresolvedIndex(format!("closure {k} -> {v}: no such member")));
            }
        }
        Ok(())
    }

    /// Builds the family, computing catalog members to `prec` coefficients.
    pub fn to_family(&self, prec: i64) -> Result<ReplicateFamily> {
        let mut fam = ReplicateFamily::new(self.mode);
        fam.half_zero = self.half_zero;
        for (k, m) in &self.members {
            fam.members.insert(k.parse()?, m.series(prec)?);
        }
        for (k, v) in &self.closure {
            let target = v.parse()?;
            if k == "default" {
                fam.default = Some(target);
            } else {
                fam.closure.insert(k.parse()?, target);
            }
        }
        Ok(fam)
    }

    /// The same family with inline members truncated to their first `seeds`
    /// coefficients; catalog members become inline too.
    pub fn seeds_only(&self, seeds: usize) -> Result<FamilySpec> {
        let mut out = self.clone();
        for m in out.members.values_mut() {
            if matches!(m, MemberSpec::Named(s) if s == "zero") {
                continue;
            }
            let f = m.series(seeds as i64 + 1)?;
            let cs = (1..=seeds as i64)
                .map(|k| f.coeff(k).map(|c| Coeff::Text(c.to_string())))
                .collect::<Result<Vec<_>>>()?;
            *m = MemberSpec::Inline(cs);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replication::check_replication;
    use crate::series::rat;

    const MONSTER: &str = r#"{
        "mode": "two_plus",
        "members": { "1": "catalog:1A", "sqrt2": "catalog:2A", "2": "catalog:2A" },
        "closure": { "default": "2" }
    }"#;

    #[test]
    fn monster_json_replicates() {
        let fam = FamilySpec::from_json(MONSTER).unwrap().to_family(80).unwrap();
        let r = check_replication(&fam, 6, 12);
        assert!(r.passed(), "{r}");
        assert_eq!(fam.resolve(ReplicateIndex::int(3)).unwrap(), catalog_series("1A", 80).unwrap());
    }

    #[test]
    fn unknown_field_rejected() {
        let bad = r#"{"mode":"two_plus","members":{"1":"catalog:2A"},"extra":1}"#;
        assert!(matches!(FamilySpec::from_json(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn dangling_closure_rejected() {
        let bad = r#"{"mode":"two_plus","members":{"1":"catalog:2A"},"closure":{"default":"4"}}"#;
        assert!(matches!(FamilySpec::from_json(bad), Err(Error::UnresolvedIndex(_))));
    }

    #[test]
    fn unresolvable_index_surfaces() {
        let spec = r#"{"mode":"two_plus","members":{"1":"catalog:2A"}}"#;
        let fam = FamilySpec::from_json(spec).unwrap().to_family(20).unwrap();
        assert!(matches!(fam.resolve(ReplicateIndex::SQRT2), Err(Error::UnresolvedIndex(_))));
    }

    #[test]
    fn inline_and_zero_members() {
        let spec = r#"{"mode":"two_plus","members":{"1":[0,"4372/1",0,96256],"sqrt2":"zero"},
                       "closure":{"default":"1"}}"#;
        let fam = FamilySpec::from_json(spec).unwrap().to_family(100).unwrap();
        let f = fam.root_series().unwrap();
        assert_eq!(f.prec(), 5);
        assert_eq!(f.coeff(2).unwrap(), rat(4372));
        assert!(fam.resolve(ReplicateIndex::SQRT2).unwrap().is_zero());
        assert_eq!(fam.resolve_key(ReplicateIndex::SQRT2).unwrap(), None);
    }

    #[test]
    fn bad_coefficient_and_label() {
        assert!(FamilySpec::from_json(r#"{"mode":"two_plus","members":{"1":["x"]}}"#)
            .unwrap()
            .to_family(10)
            .is_err());
        let spec = FamilySpec::from_json(r#"{"mode":"two_plus","members":{"1":"catalog:9Z"}}"#).unwrap();
        assert!(matches!(spec.to_family(10), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn ordinary_rejects_half_members() {
        let bad = r#"{"mode":"ordinary","members":{"1":"catalog:1A","sqrt2":"catalog:2A"}}"#;
        assert!(FamilySpec::from_json(bad).is_err());
    }

    #[test]
    fn seeds_only_roundtrip() {
        let spec = FamilySpec::from_json(MONSTER).unwrap().seeds_only(5).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back = FamilySpec::from_json(&text).unwrap();
        let f = back.to_family(100).unwrap().root_series().unwrap();
        assert_eq!(f.prec(), 6);
        assert_eq!(f.coeff(1).unwrap(), rat(196884));
    }
}
