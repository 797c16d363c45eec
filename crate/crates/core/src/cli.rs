//! Command-line front end. `cli_run` returns the process exit code:
//! 0 when every check passes, 1 on a mismatch, 2 on usage, parse or
//! resolution errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::algebra::verify_op_identity;
use crate::cosets::{enum_cosets, verify_hecke_formula, CosetKind};
use crate::error::{Error, Result};
use crate::eta::catalog_series;
use crate::faber::faber_poly;
use crate::familyspec::FamilySpec;
use crate::recurrence::extend_family;
use crate::replication::{check_complete, check_replication, member_prec, Mode, ReplicateFamily, ReplicateIndex};
use crate::report::Report;
use crate::suite::{run_criterion, CRITERIA};

pub const PREC_ENV: &str = "REPLIKIT_PREC";
const DEFAULT_PREC: i64 = 60;

#[derive(Parser, Debug)]
#[command(name = "replikit", version, about = "Exact checks for replicable q-series")]
struct Cli {
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the q-expansion of a catalog series
    Expand {
        label: String,
        #[arg(long)]
        prec: Option<i64>,
    },
    /// Print the Faber polynomial P_n of a catalog series
    Faber {
        label: String,
        #[arg(long, short)]
        n: usize,
    },
    /// List coset representatives of determinant m
    Cosets {
        m: i64,
        #[arg(long, default_value = "M")]
        kind: CosetKind,
    },
    /// Check replication of a family
    Check(CheckArgs),
    /// Verify an identity
    #[command(subcommand)]
    Verify(Verify),
    /// Extend a family from its seed coefficients
    Extend {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        to: i64,
        /// Compare with the family members as given
        #[arg(long)]
        oracle: bool,
    },
    /// Run the acceptance battery
    Suite {
        /// Comma-separated criterion numbers
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value_t = 10)]
    nmax: i64,
    #[arg(long)]
    prec: Option<i64>,
    /// Also check every re-rooting at sqrt2^k
    #[arg(long)]
    complete: bool,
    #[arg(long, default_value_t = 2)]
    depth: u32,
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Complete-residue operator against its Hecke decomposition
    Hecke {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<i64>,
        #[arg(long, default_value = "2A")]
        label: String,
        #[arg(long)]
        prec: Option<i64>,
    },
    /// Equality of two operator expressions, e.g. "T(3)*T(5)" and "T(15)"
    OpIdentity {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// Also compare both sides applied to this catalog self-family
        #[arg(long)]
        witness: Option<String>,
        #[arg(long, default_value_t = 30)]
        upto: i64,
    },
}

fn default_prec() -> Result<i64> {
    match std::env::var(PREC_ENV) {
        Ok(v) => v
            .trim()
            .parse::<i64>()
            .ok()
            .filter(|p| *p > 0)
            .ok_or_else(|| Error::Parse(format!("{PREC_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_PREC),
    }
}

fn prec_or_default(p: Option<i64>) -> Result<i64> {
    match p {
        Some(p) if p > 0 => Ok(p),
        Some(p) => Err(Error::Parse(format!("precision must be positive, got {p}"))),
        None => default_prec(),
    }
}

/// Output of one command: text or JSON, and whether everything passed.
struct Outcome {
    text: String,
    json: serde_json::Value,
    ok: bool,
}

impl Outcome {
    fn info(text: String, json: serde_json::Value) -> Outcome {
        Outcome { text, json, ok: true }
    }

    fn reports(reports: Vec<Report>) -> Outcome {
        let ok = reports.iter().all(Report::passed);
        let text = reports.iter().map(ToString::to_string).collect::<String>();
        let json = if reports.len() == 1 {
            serde_json::to_value(&reports[0])
        } else {
            serde_json::to_value(&reports)
        }
        .unwrap_or_default();
        Outcome { text, json, ok }
    }
}

pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.cmd) {
        Ok(out) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&out.json).unwrap_or_default() + "\n"
            } else {
                out.text
            };
            // a closed pipe (e.g. `| head`) is not an error worth panicking over
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.to_string() }));
            }
            eprintln!("replikit: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Expand { label, prec } => {
            let f = catalog_series(&label, prec_or_default(prec)?)?;
            Ok(Outcome::info(format!("{f}\n"), serde_json::to_value(&f).unwrap_or_default()))
        }
        Command::Faber { label, n } => {
            let f = catalog_series(&label, n as i64 + 2)?;
            let p = faber_poly(&f, n)?;
            let coeffs: Vec<String> = p.coeffs().iter().map(ToString::to_string).collect();
            Ok(Outcome::info(format!("{p}\n"), json!({ "label": label, "n": n, "coeffs": coeffs })))
        }
        Command::Cosets { m, kind } => {
            if m < 1 {
                return Err(Error::Parse(format!("m must be positive, got {m}")));
            }
            let set = enum_cosets(m, kind)?;
            let text: String = set.reps.iter().map(|r| format!("{r}\n")).collect();
            let rows: Vec<_> = set
                .reps
                .iter()
                .map(|r| json!({ "scaled": r.scaled, "x": r.x, "y": r.y, "z": r.z }))
                .collect();
            Ok(Outcome::info(text, json!({ "m": m, "kind": kind.to_string(), "reps": rows })))
        }
        Command::Check(a) => {
            let prec = prec_or_default(a.prec)?;
            let spec = FamilySpec::load(&a.family)?;
            let depth_factor = if a.complete { 1i64 << a.depth.min(8) } else { 1 };
            let fam = spec.to_family(member_prec(a.nmax, prec) * depth_factor)?;
            // resolution problems are usage errors, not mismatches
            for a in 1..=a.nmax {
                let i = ReplicateIndex::int(a);
                fam.resolve(i)?;
                if fam.mode == Mode::TwoPlus {
                    fam.resolve(i * ReplicateIndex::SQRT2)?;
                }
            }
            let report = if a.complete {
                check_complete(&fam, a.depth, a.nmax, prec)?
            } else {
                check_replication(&fam, a.nmax, prec)
            };
            Ok(Outcome::reports(vec![report]))
        }
        Command::Verify(Verify::Hecke { m, label, prec }) => {
            let upto = prec_or_default(prec)?;
            let top = m.iter().copied().max().unwrap_or(1);
            if m.iter().any(|&x| x < 1) {
                return Err(Error::Parse("m must be positive".into()));
            }
            let f = catalog_series(&label, upto * top + 1)?;
            let reports = m
                .iter()
                .map(|&x| verify_hecke_formula(&f.truncate(upto * x + 1), x, upto))
                .collect::<Result<Vec<_>>>()?;
            Ok(Outcome::reports(reports))
        }
        Command::Verify(Verify::OpIdentity { lhs, rhs, witness, upto }) => {
            let report = match witness {
                None => verify_op_identity(&lhs, &rhs, None)?,
                Some(label) => {
                    use crate::algebra::{parse_op_expr, required_prec};
                    let prec = required_prec(&parse_op_expr(&lhs)?.multiset(), upto)
                        .max(required_prec(&parse_op_expr(&rhs)?.multiset(), upto));
                    let fam = ReplicateFamily::self_family(&label, prec)?;
                    verify_op_identity(&lhs, &rhs, Some((&fam, upto)))?
                }
            };
            Ok(Outcome::reports(vec![report]))
        }
        Command::Extend { family, to, oracle } => extend(&FamilySpec::load(&family)?, to, oracle),
        Command::Suite { only } => {
            let ids: Vec<usize> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only };
            if let Some(bad) = ids.iter().find(|i| !CRITERIA.iter().any(|c| c.0 == **i)) {
                return Err(Error::Parse(format!("no criterion {bad}")));
            }
            Ok(Outcome::reports(ids.into_iter().map(run_criterion).collect()))
        }
    }
}

fn extend(spec: &FamilySpec, to: i64, oracle: bool) -> Result<Outcome> {
    if to < 5 {
        return Err(Error::Parse(format!("--to must be at least 5, got {to}")));
    }
    let fam = spec.to_family(to + 2)?;
    let state = extend_family(&fam, to)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for (m, coeffs) in &state.coeffs {
        if oracle {
            text.push_str(&format!("member {m}\n{:>5}  {:>40}  {:>40}  status\n", "n", "derived", "oracle"));
        } else {
            text.push_str(&format!("member {m}\n"));
        }
        for (i, c) in coeffs.iter().enumerate().skip(1) {
            let i = i as i64;
            if oracle {
                // members known only to a few terms cannot confirm later ones
                let known = fam.members[m].coeff(i).ok();
                let differs = known.as_ref().is_some_and(|w| w != c);
                ok &= !differs;
                let status = match (&known, differs) {
                    (None, _) => "n/a",
                    (_, true) => "DIFF",
                    _ => "ok",
                };
                let want = known.map_or_else(|| "-".to_string(), |w| w.to_string());
                text.push_str(&format!("{i:>5}  {c:>40}  {want:>40}  {status}\n"));
                rows.push(json!({ "member": m.to_string(), "n": i, "derived": c.to_string(), "oracle": want, "ok": !differs }));
            } else {
                text.push_str(&format!("{i:>5}  {c}\n"));
                rows.push(json!({ "member": m.to_string(), "n": i, "derived": c.to_string() }));
            }
        }
    }
    let consumed: Vec<String> = state.consumed_seeds().iter().map(|(m, i)| format!("{m}:a{i}")).collect();
    text.push_str(&format!("seeds consumed: {}\n", consumed.join(" ")));
    Ok(Outcome {
        text,
        json: json!({ "to": to, "rows": rows, "seeds_consumed": consumed }),
        ok,
    })
}
