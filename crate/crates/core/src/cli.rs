//! The `ptlab` command line. Results go to the given writer as JSON lines (or
//! CSV); nothing time-dependent is written there, so identical arguments
//! reproduce identical output.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::claims::{verify, ClaimId, ClaimReport};
use crate::combinators::parse_tester;
use crate::error::{Error, Result};
use crate::hardness::hardness_report;
use crate::patterns::count_triangles;
use crate::properties::{distance_to, enumerate, PropertyId};
use crate::rational::{check_epsilon, parse_rational, ExactValue, Rational};
use crate::testers::{run_once, Verdict};
use crate::tt;

const CSV_COLUMNS: &str = "\
CSV columns (a header row is always printed first):
  test       trial,seed,accept,rounds,queries
  verify     claim,n,seed,status,checked,witness
  distance   property,n,distance_exact,distance_decimal,witness
  enumerate  property,n,index,table
  census     n,unordered_count,point,triangles_at_point
  hardness   k,seed,min_poly_distance,min_poly_distance_exhaustive,concat_distance,halving_holds,interpolation_subsets,interpolation_checks_passed

Exact values print as num/den, decimals to 6 places. Set PTLAB_THREADS to cap worker threads.";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ptlab", version, about = "Property testing lab for Boolean functions over F2^n", after_help = CSV_COLUMNS)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a tester expression against a truth table.
    Test {
        /// Tester expression, e.g. "intersect(free111:rounds=200000, free100, eps0=0.25)".
        #[arg(long)]
        tester: String,
        /// A .tt file: the dimension on line 1, the table on line 2.
        #[arg(long)]
        input: PathBuf,
        /// Distance parameter as a fraction or decimal.
        #[arg(long, value_parser = parse_epsilon)]
        epsilon: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent runs; trial i uses seed + i.
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Exhaustively check a structural claim; exits 1 when it fails.
    Verify {
        /// One of the claim ids, or "all" to run every claim at its default size.
        claim: String,
        /// Dimension (the extension degree k for hardness-k3).
        #[arg(long)]
        n: Option<u32>,
        /// Seed for the sampled variants at the largest dimensions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact distance from a truth table to a property, with a nearest member.
    Distance {
        #[arg(long)]
        property: PropertyId,
        #[arg(long)]
        input: PathBuf,
    },
    /// List the members of a property at dimension n.
    Enumerate {
        #[arg(long)]
        property: PropertyId,
        #[arg(long)]
        n: u32,
    },
    /// Count the triangles {x, y, x+y} inside the support of a truth table.
    Census {
        #[arg(long)]
        input: PathBuf,
    },
    /// Distance facts for low-degree polynomials over GF(2^k).
    Hardness {
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_epsilon(text: &str) -> std::result::Result<Rational, String> {
    let eps = parse_rational(text).map_err(|e| e.to_string())?;
    check_epsilon(&eps).map_err(|e| e.to_string())?;
    Ok(eps)
}

#[derive(Serialize)]
struct TrialLine<'a> {
    command: &'static str,
    tester: &'a str,
    input: String,
    n: u32,
    epsilon: ExactValue,
    trial: u64,
    budget: u64,
    #[serde(flatten)]
    verdict: Verdict,
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer<'a>(out: &'a mut dyn Write, header: &[&str]) -> Result<csv::Writer<&'a mut dyn Write>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(|e| Error::Io(e.into()))?;
    Ok(w)
}

fn csv_row(w: &mut csv::Writer<&mut dyn Write>, row: &[String]) -> Result<()> {
    w.write_record(row).map_err(|e| Error::Io(e.into()))
}

fn csv_finish(mut w: csv::Writer<&mut dyn Write>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Runs one parsed invocation. Returns `Ok(false)` when a `verify` claim
/// fails, so the caller can set a nonzero exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Test { tester, input, epsilon, seed, trials } => {
            if *trials == 0 {
                return Err(Error::InvalidParameters("--trials must be at least 1".into()));
            }
            let t = parse_tester(tester)?;
            let f = tt::read(input)?;
            let budget = t.budget(epsilon)?;
            let verdicts: Vec<Verdict> =
                (0..*trials).into_par_iter().map(|i| run_once(t.as_ref(), &f, epsilon, seed.wrapping_add(i))).collect::<Result<_>>()?;
            let description = t.describe();
            match cli.format {
                Format::Json => {
                    for (i, v) in verdicts.iter().enumerate() {
                        json_line(
                            out,
                            &TrialLine {
                                command: "test",
                                tester: &description,
                                input: input.display().to_string(),
                                n: f.dim(),
                                epsilon: epsilon.into(),
                                trial: i as u64,
                                budget,
                                verdict: *v,
                            },
                        )?;
                    }
                    if *trials > 1 {
                        let accepted = verdicts.iter().filter(|v| v.accept).count() as i64;
                        json_line(
                            out,
                            &json!({
                                "command": "test",
                                "summary": true,
                                "tester": description,
                                "trials": trials,
                                "accepted": accepted,
                                "acceptance_rate": ExactValue::from(Rational::new(accepted, *trials as i64)),
                                "total_queries": verdicts.iter().map(|v| v.queries_used).sum::<u64>(),
                            }),
                        )?;
                    }
                }
                Format::Csv => {
                    let mut w = csv_writer(out, &["trial", "seed", "accept", "rounds", "queries"])?;
                    for (i, v) in verdicts.iter().enumerate() {
                        csv_row(
                            &mut w,
                            &[
                                i.to_string(),
                                v.seed.to_string(),
                                v.accept.to_string(),
                                v.rounds_run.to_string(),
                                v.queries_used.to_string(),
                            ],
                        )?;
                    }
                    csv_finish(w)?;
                }
            }
            Ok(true)
        }
        Command::Verify { claim, n, seed } => {
            let reports: Vec<ClaimReport> = if claim == "all" {
                if n.is_some() {
                    return Err(Error::InvalidParameters("--n cannot be combined with verify all".into()));
                }
                ClaimId::ALL.iter().map(|&c| verify(c, None, *seed)).collect::<Result<_>>()?
            } else {
                vec![verify(claim.parse()?, *n, *seed)?]
            };
            match cli.format {
                Format::Json => {
                    for r in &reports {
                        let mut value = serde_json::to_value(r).expect("plain data");
                        value["command"] = json!("verify");
                        value["status"] = json!(r.status());
                        json_line(out, &value)?;
                    }
                }
                Format::Csv => {
                    let mut w = csv_writer(out, &["claim", "n", "seed", "status", "checked", "witness"])?;
                    for r in &reports {
                        csv_row(
                            &mut w,
                            &[
                                r.claim.clone(),
                                r.n.to_string(),
                                r.seed.to_string(),
                                r.status().into(),
                                r.checked.to_string(),
                                r.witness.clone().unwrap_or_default(),
                            ],
                        )?;
                    }
                    csv_finish(w)?;
                }
            }
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Distance { property, input } => {
            let f = tt::read(input)?;
            let d = distance_to(property, &f)?;
            let witness = d.witness.map(|w| w.to_bit_string());
            match cli.format {
                Format::Json => json_line(
                    out,
                    &json!({
                        "command": "distance",
                        "property": property.name(),
                        "input": input.display().to_string(),
                        "n": f.dim(),
                        "distance": ExactValue::from(&d.value),
                        "witness": witness,
                    }),
                )?,
                Format::Csv => {
                    let mut w = csv_writer(out, &["property", "n", "distance_exact", "distance_decimal", "witness"])?;
                    let v = ExactValue::from(&d.value);
                    csv_row(&mut w, &[property.name(), f.dim().to_string(), v.exact, v.decimal, witness.unwrap_or_default()])?;
                    csv_finish(w)?;
                }
            }
            Ok(true)
        }
        Command::Enumerate { property, n } => {
            let members = enumerate(property, *n)?;
            match cli.format {
                Format::Json => {
                    for (i, f) in members.iter().enumerate() {
                        json_line(
                            out,
                            &json!({"command": "enumerate", "property": property.name(), "n": n, "index": i, "table": f.to_bit_string()}),
                        )?;
                    }
                }
                Format::Csv => {
                    let mut w = csv_writer(out, &["property", "n", "index", "table"])?;
                    for (i, f) in members.iter().enumerate() {
                        csv_row(&mut w, &[property.name(), n.to_string(), i.to_string(), f.to_bit_string()])?;
                    }
                    csv_finish(w)?;
                }
            }
            Ok(true)
        }
        Command::Census { input } => {
            let f = tt::read(input)?;
            let census = count_triangles(&f);
            match cli.format {
                Format::Json => json_line(
                    out,
                    &json!({
                        "command": "census",
                        "input": input.display().to_string(),
                        "n": f.dim(),
                        "unordered_count": census.unordered_count,
                        "per_point": census.per_point,
                    }),
                )?,
                Format::Csv => {
                    let mut w = csv_writer(out, &["n", "unordered_count", "point", "triangles_at_point"])?;
                    for (p, c) in &census.per_point {
                        csv_row(&mut w, &[f.dim().to_string(), census.unordered_count.to_string(), p.to_string(), c.to_string()])?;
                    }
                    csv_finish(w)?;
                }
            }
            Ok(true)
        }
        Command::Hardness { k, seed } => {
            let r = hardness_report(*k, *seed)?;
            match cli.format {
                Format::Json => {
                    let mut value = serde_json::to_value(&r).expect("plain data");
                    value["command"] = json!("hardness");
                    json_line(out, &value)?;
                }
                Format::Csv => {
                    let mut w = csv_writer(
                        out,
                        &[
                            "k",
                            "seed",
                            "min_poly_distance",
                            "min_poly_distance_exhaustive",
                            "concat_distance",
                            "halving_holds",
                            "interpolation_subsets",
                            "interpolation_checks_passed",
                        ],
                    )?;
                    csv_row(
                        &mut w,
                        &[
                            r.k.to_string(),
                            r.seed.to_string(),
                            r.min_poly_distance.exact.clone(),
                            r.min_poly_distance_exhaustive.to_string(),
                            r.concat_distance.exact.clone(),
                            r.halving_holds.to_string(),
                            r.interpolation_subsets.to_string(),
                            r.interpolation_checks_passed.to_string(),
                        ],
                    )?;
                    csv_finish(w)?;
                }
            }
            Ok(r.halving_holds && r.interpolation_checks_passed)
        }
    }
}

/// Caps the global worker pool from `PTLAB_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("PTLAB_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::InvalidParameters(format!("PTLAB_THREADS must be a positive integer, got {value:?}")))?;
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}
