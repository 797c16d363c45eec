//! The acceptance battery: one report per numbered criterion.

use std::time::Instant;

use num_integer::Integer;

use crate::algebra::{parse_op_expr, required_prec, verify_op_identity, verify_power_sum_recurrence, verify_sigma2};
use crate::cosets::{
    apply_rduo, apply_ttilde, enum_cosets, fricke_pairing, same_left_coset, verify_hecke_formula, CosetKind,
    GroupElem, Rduo,
};
use crate::error::Result;
use crate::eta::catalog_series;
use crate::faber::{faber_apply, faber_poly};
use crate::ntheory::{dedekind_psi, two_adic};
use crate::recurrence::{oracle_diff, reconstruct_and_match, FamilyState, Item4};
use crate::replication::{
    check_class_rows, check_replication, member_prec, monster_spot_value, verify_decomp_triple, ReplicateFamily,
    ReplicateIndex,
};
use crate::report::{Check, Report};
use crate::series::{rat, QSeries, EXACT};

pub const CRITERIA: [(usize, &str); 11] = [
    (1, "coset combinatorics"),
    (2, "self-replication of 2A"),
    (3, "Hecke formula"),
    (4, "R/D/U/O identities"),
    (5, "1A family replication"),
    (6, "class table rows"),
    (7, "operator algebra"),
    (8, "power-sum identities"),
    (9, "coefficient reconstruction"),
    (10, "1A / 2A decomposition"),
    (11, "out-of-scope verifications"),
];

/// Runs criterion `id` (1..=11).
pub fn run_criterion(id: usize) -> Report {
    let title = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let start = Instant::now();
    let mut report = Report::new(format!("{id}. {title}"));
    let body = match id {
        1 => cosets(&mut report),
        2 => self_replication(&mut report),
        3 => hecke(&mut report),
        4 => rduo(&mut report),
        5 => monster(&mut report),
        6 => {
            report.absorb("", check_class_rows(8, 40));
            Ok(())
        }
        7 => operators(&mut report),
        8 => power_sums(&mut report),
        9 => reconstruction(&mut report),
        10 => decomposition(&mut report),
        11 => {
            out_of_scope(&mut report);
            Ok(())
        }
        _ => Err(crate::Error::Precondition(format!("no criterion {id}"))),
    };
    if let Err(e) = body {
        report.push(Check::fail("error", e.to_string()));
    }
    report.wall_ms = start.elapsed().as_millis() as u64;
    if let Some(limit) = budget_ms(id) {
        report.push(Check::from_bool(
            format!("runtime under {} s", limit / 1000),
            report.wall_ms < limit,
            format!("{} ms", report.wall_ms),
        ));
    }
    report
}

pub fn run_suite() -> Vec<Report> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id)).collect()
}

fn budget_ms(id: usize) -> Option<u64> {
    match id {
        1..=3 => Some(10_000),
        9 => Some(30_000),
        _ => None,
    }
}

fn cosets(r: &mut Report) -> Result<()> {
    let mut bad = Vec::new();
    for m in (2..=500).step_by(2) {
        let (a, b) = two_adic(m);
        let want = (1i64 << a) * dedekind_psi(b);
        let n1 = enum_cosets(m, CosetKind::M1)?.reps.len() as i64;
        let n2 = enum_cosets(m, CosetKind::M2)?.reps.len() as i64;
        if n1 != want || n2 != want {
            bad.push(format!("m={m}: |M1|={n1} |M2|={n2} expected {want}"));
        }
    }
    r.push(Check::from_bool(
        "|M1| = |M2| = 2^a psi(b), even m <= 500",
        bad.is_empty(),
        if bad.is_empty() { "250 values of m".to_string() } else { bad.join("; ") },
    ));

    let mut clashes = Vec::new();
    let mut pairs = 0u64;
    for m in 1..=200 {
        let kinds: &[CosetKind] = if m % 2 == 0 { &[CosetKind::M1, CosetKind::M2, CosetKind::M] } else { &[CosetKind::M] };
        for &kind in kinds {
            let set = enum_cosets(m, kind)?;
            let g: Vec<GroupElem> = set.reps.iter().map(GroupElem::from_rep).collect();
            for i in 0..g.len() {
                for j in 0..i {
                    pairs += 1;
                    if same_left_coset(&g[j], &g[i]) {
                        clashes.push(format!("m={m} {kind}: {} ~ {}", set.reps[j], set.reps[i]));
                    }
                }
            }
        }
    }
    r.push(Check::from_bool(
        "representatives pairwise inequivalent, m <= 200",
        clashes.is_empty(),
        if clashes.is_empty() { format!("{pairs} pairs") } else { clashes.into_iter().take(10).collect::<Vec<_>>().join("; ") },
    ));

    let mut broken = Vec::new();
    for m in (2..=60).step_by(2) {
        let pairing = fricke_pairing(m)?;
        let mut hit: Vec<usize> = pairing.iter().filter(|v| v.len() == 1).map(|v| v[0]).collect();
        let singles = hit.len();
        hit.sort_unstable();
        hit.dedup();
        if singles != pairing.len() || hit.len() != pairing.len() {
            broken.push(m.to_string());
        }
    }
    r.push(Check::from_bool(
        "Fricke pairing is a bijection M2 -> M1, even m <= 60",
        broken.is_empty(),
        if broken.is_empty() { "30 values of m".to_string() } else { format!("fails for m = {}", broken.join(", ")) },
    ));
    Ok(())
}

fn self_replication(r: &mut Report) -> Result<()> {
    let upto = 60;
    let f = catalog_series("2A", upto * 10 + 2)?;
    for m in 1..=10 {
        let lhs = apply_ttilde(&f, m);
        let g = f.truncate(upto + m + 1);
        let rhs = faber_apply(&faber_poly(&g, m as usize)?, &g);
        r.push(Check::compare(format!("Ttilde_{m} = P_{m}"), &lhs, &rhs, Some(m), upto));
    }
    Ok(())
}

fn hecke(r: &mut Report) -> Result<()> {
    let upto = 40;
    for label in ["2A", "1A"] {
        let f = catalog_series(label, upto * 36 + 1)?;
        for m in [2, 3, 4, 6, 8, 12, 36] {
            let sub = verify_hecke_formula(&f, m, upto)?;
            r.absorb(&format!("{label} m={m}: "), sub);
        }
    }
    Ok(())
}

fn rduo(r: &mut Report) -> Result<()> {
    use Rduo::*;
    let upto = 40;
    let f = catalog_series("2A", upto * 48 + 1)?;
    let cut = |m: i64| f.truncate(upto * m + 1);
    let op = |m: i64, k: Rduo| apply_rduo(&cut(m), m, k);
    let sum = |terms: &[(i64, i64, Rduo)]| {
        terms.iter().fold(QSeries::zero(1, EXACT), |acc, &(s, m, k)| &acc + &op(m, k).scale_int(s))
    };
    for m in 1..=12 {
        let rhs = if m % 2 == 0 {
            sum(&[(1, m, R), (1, 2 * m, R), (-1, 2 * m, U), (-1, 2 * m, D)])
        } else {
            op(m, R)
        };
        r.push(Check::compare(format!("Ttilde_{m} via R/U/D"), &apply_ttilde(&cut(m), m), &rhs, Some(m), upto));

        let o4 = sum(&[(1, 4 * m, R), (-1, m, R), (-1, 4 * m, U), (-1, 4 * m, D)]);
        r.push(Check::compare(format!("O_{}", 4 * m), &op(4 * m, O), &o4, Some(4 * m), upto));

        if m % 2 == 1 {
            let zero = QSeries::zero(1, EXACT);
            r.push(Check::compare(format!("O_{} = 0", 2 * m), &op(2 * m, O), &zero, Some(2 * m), upto));
            let alt = sum(&[(1, 2 * m, R), (-1, 2 * m, U), (-1, 2 * m, D)]);
            r.push(Check::compare(format!("R_{0} - U_{0} - D_{0} = 0", 2 * m), &alt, &zero, Some(2 * m), upto));
        }

        let mut lhs = QSeries::zero(1, EXACT);
        for s in (1..).step_by(2).take_while(|s| s * s <= m) {
            if m % (s * s) == 0 {
                lhs = &lhs + &crate::cosets::hecke_t(&cut(m / (s * s)), m / (s * s))?;
            }
        }
        let rhs = if m % 2 == 0 { sum(&[(1, 2 * m, O), (1, m, U), (1, m, D)]) } else { op(m, R) };
        r.push(Check::compare(format!("odd-square sum of T at {m}"), &lhs, &rhs, Some(m), upto));
    }
    Ok(())
}

fn monster(r: &mut Report) -> Result<()> {
    let fam = ReplicateFamily::monster_family(member_prec(10, 60))?;
    r.absorb("", check_replication(&fam, 10, 60));
    let (lhs, rhs) = monster_spot_value(12)?;
    let want = rat(40491909396);
    r.push(Check::from_bool(
        "n=2 coefficient of q^2",
        lhs == want && rhs == want,
        format!("lhs {lhs} rhs {rhs}"),
    ));
    Ok(())
}

fn identities() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for a in 2..=36i64 {
        for b in a + 1..=36 {
            if a * b <= 36 && a.gcd(&b) == 1 {
                out.push((format!("T({a})*T({b})"), format!("T({})", a * b)));
                out.push((format!("T({b})*T({a})"), format!("T({})", a * b)));
            }
        }
    }
    for n in 1..=4u32 {
        let p = 1i64 << n;
        out.push((
            format!("T({p})*T(2)"),
            format!("T({}) + 2*T({p})*Psi(sqrt2) + 2*T({})*Psi(2)", 2 * p, p / 2),
        ));
    }
    for p in [3i64, 5] {
        for n in 1..=3u32 {
            let q = p.pow(n);
            out.push((format!("T({q})*T({p})"), format!("T({}) + {p}*T({})*Psi({p})", q * p, q / p)));
        }
    }
    out
}

fn operators(r: &mut Report) -> Result<()> {
    let upto = 30;
    for (lhs, rhs) in identities() {
        let ms = parse_op_expr(&lhs)?.multiset();
        let prec = required_prec(&ms, upto).max(required_prec(&parse_op_expr(&rhs)?.multiset(), upto));
        let fam = ReplicateFamily::self_family("2A", prec)?;
        let sub = verify_op_identity(&lhs, &rhs, Some((&fam, upto)))?;
        let name = sub.suite.clone();
        let fails: Vec<String> = sub.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        let mut c = Check::from_bool(
            name,
            fails.is_empty(),
            if fails.is_empty() { format!("multiset and series to q^{upto}") } else { fails.join("; ") },
        );
        c.mismatches = sub.failures().flat_map(|c| c.mismatches.clone()).take(20).collect();
        r.push(c);
    }
    Ok(())
}

fn power_sums(r: &mut Report) -> Result<()> {
    let upto = 40;
    let fams = [
        ("2A", ReplicateFamily::self_family("2A", 200)?),
        ("1A", ReplicateFamily::monster_family(200)?),
    ];
    for (label, fam) in &fams {
        r.absorb(&format!("{label} "), verify_sigma2(fam, upto)?);
        for k in 1..=4 {
            r.absorb(&format!("{label} "), verify_power_sum_recurrence(fam, k, upto)?);
        }
    }
    Ok(())
}

fn reconstruction(r: &mut Report) -> Result<()> {
    let target = 100;
    let prec = target + 2;
    let two_a = ReplicateFamily::self_family("2A", prec)?;
    let one_a = ReplicateFamily::monster_family(prec)?;
    r.absorb("2A ", reconstruct_and_match(&two_a, target));
    r.absorb("1A ", reconstruct_and_match(&one_a, target));

    let one = ReplicateIndex::ONE;
    let spot = |fam: &ReplicateFamily, n: i64| -> Result<num_rational::BigRational> {
        let mut st = FamilyState::from_family(&seed_family(fam)?)?;
        st.extend(n - 1)?;
        st.next_coeff(one, n)
    };
    for (label, fam, n, want) in [
        ("2A", &two_a, 4, 10698752i64),
        ("2A", &two_a, 6, 431529984),
        ("1A", &one_a, 4, 20245856256),
    ] {
        let got = spot(fam, n)?;
        r.push(Check::from_bool(format!("a_{n}({label}) from seeds"), got == rat(want), format!("{got}")));
    }

    // the printed a_{4k+3} form is kept for comparison; it should first deviate at n = 7
    let mut st = FamilyState::from_family(&two_a)?;
    st.item4 = Item4::Printed;
    let first = match st.extend(12) {
        Ok(()) => oracle_diff(&st, &two_a, one)?.first().map(|d| d.0),
        Err(_) => None,
    };
    r.push(Check::from_bool(
        "printed a_{4k+3} form deviates at n=7 (informational)",
        first == Some(7),
        match first {
            Some(n) => format!("first difference at n={n}"),
            None => "no difference found".into(),
        },
    ));
    Ok(())
}

/// `fam` with every member cut down to its seed coefficients `a_1..a_5`.
fn seed_family(fam: &ReplicateFamily) -> Result<ReplicateFamily> {
    let mut out = fam.clone();
    for s in out.members.values_mut() {
        *s = s.truncate(6);
    }
    Ok(out)
}

fn decomposition(r: &mut Report) -> Result<()> {
    r.push(verify_decomp_triple("1A", "2A", "2A", 61)?);
    let (a, b, c) = (catalog_series("1A", 3)?, catalog_series("2A", 3)?, catalog_series("2A", 3)?);
    let k1 = (a.coeff(1)?, b.coeff(1)?, c.coeff(2)?);
    r.push(Check::from_bool(
        "k=1",
        k1.0 == &k1.1 + rat(2) * &k1.2,
        format!("{} = {} + 2*{}", k1.0, k1.1, k1.2),
    ));
    Ok(())
}

fn out_of_scope(r: &mut Report) {
    r.push(Check::skip(
        "full 247-class verification",
        "needs power maps and Norton labels for every baby monster class; only the rows expressible over the built-in catalog are checked",
    ));
    r.push(Check::skip(
        "13 exceptional classes",
        "no independent q-expansions are available to compare against",
    ));
    r.push(Check::skip(
        "2.B character data",
        "the character table of the double cover is not bundled",
    ));
    r.push(Check::skip(
        "616-function Hauptmodul database",
        "searching the full list of replicable functions is not supported",
    ));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_list_shape() {
        let ids = identities();
        assert!(ids.contains(&("T(4)*T(9)".to_string(), "T(36)".to_string())));
        assert!(ids.iter().any(|(l, _)| l == "T(125)*T(5)"));
        assert!(ids.iter().all(|(l, r)| parse_op_expr(l).is_ok() && parse_op_expr(r).is_ok()));
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [10, 11] {
            let r = run_criterion(id);
            assert!(r.passed(), "{r}");
        }
        assert_eq!(run_criterion(11).checks.len(), 4);
        assert!(!run_criterion(99).passed());
    }
}
