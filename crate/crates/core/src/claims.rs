//! Exhaustive (or seeded-sample) checks of the structural facts the testers
//! rely on. Each claim runs at a single dimension under a documented cap and
//! reports PASS/FAIL with the extremal instance it found.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf2::{make_disjunction, BoolFn, LinearForm};
use crate::hardness::hardness_report;
use crate::patterns::{count_triangles, rejection_probability, PatternClass};
use crate::properties::{distance_to, is_linear, is_pattern_free, membership, set_distance, PropertyId};
use crate::rational::{ratio, ExactValue, Rational};
use crate::testers::{self_correct, RandomSource};

/// Pairs drawn for the sampled monotonicity check at `n = 4`.
pub const SAMPLED_PAIRS: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClaimId {
    TriangleCensus,
    LemmaDistance,
    ThinStrip,
    Free100Soundness,
    SelfCorrectChain,
    Monotone,
    LinDecomposition,
    HardnessK3,
}

impl ClaimId {
    pub const ALL: [ClaimId; 8] = [
        ClaimId::TriangleCensus,
        ClaimId::LemmaDistance,
        ClaimId::ThinStrip,
        ClaimId::Free100Soundness,
        ClaimId::SelfCorrectChain,
        ClaimId::Monotone,
        ClaimId::LinDecomposition,
        ClaimId::HardnessK3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClaimId::TriangleCensus => "triangle-census",
            ClaimId::LemmaDistance => "lemma-distance",
            ClaimId::ThinStrip => "thin-strip",
            ClaimId::Free100Soundness => "free100-soundness",
            ClaimId::SelfCorrectChain => "self-correct-chain",
            ClaimId::Monotone => "monotone",
            ClaimId::LinDecomposition => "lin-decomposition",
            ClaimId::HardnessK3 => "hardness-k3",
        }
    }

    pub fn default_n(self) -> u32 {
        match self {
            ClaimId::TriangleCensus => 4,
            _ => 3,
        }
    }

    /// Inclusive range of dimensions the claim accepts. For `hardness-k3`
    /// the dimension is the extension degree `k`.
    pub fn n_range(self) -> (u32, u32) {
        match self {
            ClaimId::TriangleCensus => (2, 6),
            ClaimId::LemmaDistance | ClaimId::ThinStrip => (2, 4),
            _ => (1, 4),
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ClaimId::TriangleCensus => "OR of two distinct nontrivial forms has N^2/16 triangles, N/4 through each support point",
            ClaimId::LemmaDistance => "FREE100 minus LIN is 1/4-far from NLTF and from FREE111 minus LIN",
            ClaimId::ThinStrip => "dist(f, FREE111) >= dist(f, NLTF) - 2^-n for every f",
            ClaimId::Free100Soundness => "dist(f, FREE100) >= eps implies single-round (1,0,0) rejection >= eps^2/128",
            ClaimId::SelfCorrectChain => {
                "R < eps^2/128 and mu0 >= 63eps/64 give a clash-free correction g in FREE100 with dist(f,g) < eps/32"
            }
            ClaimId::Monotone => "supp(f) within supp(g) implies dist(f, FREE111) <= dist(g, FREE111)",
            ClaimId::LinDecomposition => "LIN = FREE111 intersected with FREE100, as membership",
            ClaimId::HardnessK3 => "degree 2^(k-1)-1 vs 2^(k-1) polynomials are 1/2 apart, concatenation halves, interpolation fits",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimId::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = ClaimId::ALL.iter().map(|c| c.name()).collect();
            Error::InvalidParameters(format!("unknown claim {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub n: u32,
    pub seed: u64,
    pub passed: bool,
    /// Instances examined (functions, pairs or (function, ε) combinations).
    pub checked: u64,
    pub observed: BTreeMap<String, Value>,
    /// The first failing instance, or `None` on PASS.
    pub witness: Option<String>,
}

impl ClaimReport {
    fn new(claim: ClaimId, n: u32, seed: u64) -> Self {
        ClaimReport { claim: claim.name().into(), n, seed, passed: true, checked: 0, observed: BTreeMap::new(), witness: None }
    }

    fn observe(&mut self, key: &str, value: Value) {
        self.observed.insert(key.into(), value);
    }

    fn fail(&mut self, witness: String) {
        self.passed = false;
        self.witness.get_or_insert(witness);
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

fn exact(r: &Rational) -> Value {
    json!(ExactValue::from(r))
}

fn table(f: &BoolFn) -> String {
    format!("n={} table={}", f.dim(), f.to_bit_string())
}

fn all_functions(n: u32) -> Vec<BoolFn> {
    (0..1u64 << (1u32 << n)).map(|t| BoolFn::from_u64(n, t).expect("n <= 4")).collect()
}

/// ε grid `{1/16, 2/16, …, 8/16}`.
pub fn epsilon_grid() -> Vec<Rational> {
    (1..=8).map(|j| ratio(j, 16)).collect()
}

pub fn verify(claim: ClaimId, n: Option<u32>, seed: u64) -> Result<ClaimReport> {
    let n = n.unwrap_or(claim.default_n());
    let (lo, hi) = claim.n_range();
    if n < lo {
        return Err(Error::InvalidParameters(format!("{claim} needs n >= {lo}, got {n}")));
    }
    if n > hi {
        return Err(Error::CapExceeded { what: "dimension for this claim", value: n.into(), cap: hi.into() });
    }
    let mut report = ClaimReport::new(claim, n, seed);
    match claim {
        ClaimId::TriangleCensus => triangle_census(n, &mut report)?,
        ClaimId::LemmaDistance => lemma_distance(n, &mut report)?,
        ClaimId::ThinStrip => thin_strip(n, &mut report)?,
        ClaimId::Free100Soundness => free100_soundness(n, &mut report)?,
        ClaimId::SelfCorrectChain => self_correct_chain(n, &mut report)?,
        ClaimId::Monotone => monotone(n, seed, &mut report)?,
        ClaimId::LinDecomposition => lin_decomposition(n, &mut report)?,
        ClaimId::HardnessK3 => hardness(n, seed, &mut report)?,
    }
    Ok(report)
}

fn triangle_census(n: u32, report: &mut ClaimReport) -> Result<()> {
    let size = 1u64 << n;
    let (want_count, want_per_point) = (size * size / 16, size / 4);
    let mut min_far: Option<(Rational, BoolFn)> = None;
    let mut max_far: Option<Rational> = None;
    for a in 1..size as u32 {
        for b in (1..size as u32).filter(|&b| b != a) {
            let f = make_disjunction(n, &[LinearForm::from_bits(n, a)?, LinearForm::from_bits(n, b)?])?;
            let census = count_triangles(&f);
            report.checked += 1;
            let per_point_ok =
                f.support_indices().all(|x| census.per_point_at(x) == want_per_point) && census.per_point.len() as u64 == f.weight();
            if census.unordered_count != want_count || !per_point_ok {
                report.fail(format!("forms a={a} b={b}: {} triangles, {}", census.unordered_count, table(&f)));
            }
            if n <= 4 && a < b {
                let d = distance_to(&PropertyId::Free111, &f)?.value;
                if d < ratio(1, 4) {
                    report.fail(format!("forms a={a} b={b}: dist to FREE111 {d} below 1/4"));
                }
                if min_far.as_ref().is_none_or(|(m, _)| d < *m) {
                    min_far = Some((d, f.clone()));
                }
                max_far = Some(max_far.map_or(d, |m: Rational| m.max(d)));
            }
        }
    }
    report.observe("triangles_expected", json!(want_count));
    report.observe("per_point_expected", json!(want_per_point));
    if let (Some((min, _)), Some(max)) = (&min_far, max_far) {
        report.observe("min_dist_free111", exact(min));
        report.observe("max_dist_free111", exact(&max));
        report.observe("dist_free111_always_quarter", json!(*min == ratio(1, 4) && max == ratio(1, 4)));
    }
    Ok(())
}

fn lemma_distance(n: u32, report: &mut ClaimReport) -> Result<()> {
    let free100_not_lin = PropertyId::difference(&PropertyId::Free100, &PropertyId::Lin, n)?;
    let free111_not_lin = PropertyId::difference(&PropertyId::Free111, &PropertyId::Lin, n)?;
    for (key, other) in [("to_nltf", PropertyId::Nltf), ("to_free111_minus_lin", free111_not_lin)] {
        let d = set_distance(&free100_not_lin, &other, n)?;
        report.checked += 1;
        report.observe(key, exact(&d.value));
        if d.value < ratio(1, 4) {
            let (f, g) = d.pair.expect("non-empty sides");
            report.fail(format!("{key}: {} vs {} at distance {}", table(&f), table(&g), d.value));
        }
    }
    Ok(())
}

fn thin_strip(n: u32, report: &mut ClaimReport) -> Result<()> {
    let strip = ratio(1, 1 << n);
    let rows: Vec<(BoolFn, Rational, Rational)> = all_functions(n)
        .into_par_iter()
        .map(|f| {
            let d111 = distance_to(&PropertyId::Free111, &f)?.value;
            let dnltf = distance_to(&PropertyId::Nltf, &f)?.value;
            Ok((f, d111, dnltf))
        })
        .collect::<Result<_>>()?;
    let mut on_edge = 0u64;
    for (f, d111, dnltf) in &rows {
        report.checked += 1;
        if *d111 < *dnltf - strip {
            report.fail(format!("{}: dist FREE111 {d111}, dist NLTF {dnltf}", table(f)));
        }
        if *d111 == *dnltf - strip {
            on_edge += 1;
        }
    }
    report.observe("strip", exact(&strip));
    report.observe("functions_on_strip_edge", json!(on_edge));
    Ok(())
}

fn free100_soundness(n: u32, report: &mut ClaimReport) -> Result<()> {
    let functions = all_functions(n);
    let grid = epsilon_grid();
    let rows: Vec<(BoolFn, Rational, Rational)> = functions
        .into_par_iter()
        .map(|f| {
            let d = distance_to(&PropertyId::Free100, &f)?.value;
            let r = rejection_probability(&f, PatternClass::P100)?;
            Ok((f, d, r))
        })
        .collect::<Result<_>>()?;
    let mut tightest: Option<(Rational, String)> = None;
    for (f, d, r) in &rows {
        for eps in grid.iter().filter(|eps| *d >= **eps) {
            report.checked += 1;
            let bound = eps * eps / 128;
            if *r < bound {
                report.fail(format!("{} eps={eps}: rejection {r} below {bound}", table(f)));
            }
            let slack = r / bound;
            if tightest.as_ref().is_none_or(|(s, _)| slack < *s) {
                tightest = Some((slack, format!("{} eps={eps}", table(f))));
            }
        }
    }
    if let Some((slack, at)) = tightest {
        report.observe("min_rejection_over_bound", exact(&slack));
        report.observe("tightest_instance", json!(at));
    }
    Ok(())
}

fn self_correct_chain(n: u32, report: &mut ClaimReport) -> Result<()> {
    let functions = all_functions(n);
    let grid = epsilon_grid();
    let size = ratio(1 << n, 1);
    struct Tally {
        hypotheses: u64,
        mostly_ones: u64,
        failures: Vec<String>,
    }
    let tallies: Vec<Tally> = functions
        .par_iter()
        .map(|f| {
            let mut t = Tally { hypotheses: 0, mostly_ones: 0, failures: Vec::new() };
            let r = rejection_probability(f, PatternClass::P100)?;
            let mu0 = Rational::from_integer(f.len() as i64 - f.weight() as i64) / size;
            for eps in &grid {
                if r >= eps * eps / 128 {
                    continue;
                }
                if distance_to(&PropertyId::Free100, f)?.value >= *eps {
                    t.failures.push(format!("{} eps={eps}: R below eps^2/128 yet eps-far from FREE100", table(f)));
                }
                if mu0 < eps * 63 / 64 {
                    t.mostly_ones += 1;
                    continue;
                }
                t.hypotheses += 1;
                let sc = self_correct(f, eps)?;
                if !sc.is_well_defined() {
                    t.failures.push(format!("{} eps={eps}: threshold clash at {:?}", table(f), sc.clashes));
                }
                if sc.distance >= eps / 32 {
                    t.failures.push(format!("{} eps={eps}: dist(f,g) = {}", table(f), sc.distance));
                }
                if !is_pattern_free(&sc.corrected, PatternClass::P100)? {
                    t.failures.push(format!("{} eps={eps}: g = {} not (1,0,0)-free", table(f), sc.corrected.to_bit_string()));
                }
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut hypotheses = 0;
    let mut mostly_ones = 0;
    for t in tallies {
        hypotheses += t.hypotheses;
        mostly_ones += t.mostly_ones;
        if let Some(w) = t.failures.into_iter().next() {
            report.fail(w);
        }
    }
    report.checked = functions.len() as u64 * grid.len() as u64;
    report.observe("instances_meeting_hypotheses", json!(hypotheses));
    report.observe("instances_close_to_all_ones", json!(mostly_ones));
    Ok(())
}

fn monotone(n: u32, seed: u64, report: &mut ClaimReport) -> Result<()> {
    let dist = |f: &BoolFn| distance_to(&PropertyId::Free111, f).map(|d| d.value);
    let pairs: Vec<(BoolFn, BoolFn)> = if n <= 3 {
        let all = all_functions(n);
        let mut pairs = Vec::new();
        for g in &all {
            let gt = g.as_u64().expect("n <= 3");
            let mut sub = gt;
            loop {
                pairs.push((BoolFn::from_u64(n, sub)?, g.clone()));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & gt;
            }
        }
        pairs
    } else {
        let mut rng = RandomSource::new(seed);
        let mask = (1u64 << (1u32 << n)) - 1;
        (0..SAMPLED_PAIRS)
            .map(|_| {
                let g = rng.next_u64() & mask;
                let f = g & rng.next_u64();
                Ok((BoolFn::from_u64(n, f)?, BoolFn::from_u64(n, g)?))
            })
            .collect::<Result<_>>()?
    };
    let failures: Vec<String> = pairs
        .par_iter()
        .map(|(f, g)| {
            let (df, dg) = (dist(f)?, dist(g)?);
            Ok((df > dg).then(|| format!("{} (dist {df}) inside {} (dist {dg})", table(f), table(g))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    report.checked = pairs.len() as u64;
    report.observe("exhaustive", json!(n <= 3));
    if let Some(w) = failures.into_iter().next() {
        report.fail(w);
    }
    Ok(())
}

fn lin_decomposition(n: u32, report: &mut ClaimReport) -> Result<()> {
    let mut members = 0u64;
    for f in all_functions(n) {
        report.checked += 1;
        let lin = is_linear(&f);
        let both = membership(&PropertyId::Free111, &f)? && membership(&PropertyId::Free100, &f)?;
        members += u64::from(lin);
        if lin != both {
            report.fail(format!("{}: linear = {lin}, in FREE111 and FREE100 = {both}", table(&f)));
        }
    }
    report.observe("linear_functions", json!(members));
    Ok(())
}

fn hardness(k: u32, seed: u64, report: &mut ClaimReport) -> Result<()> {
    let r = hardness_report(k, seed)?;
    report.checked = r.halving_pairs_checked + r.interpolation_subsets + 1;
    let min = crate::rational::parse_rational(&r.min_poly_distance.exact)?;
    let concat = crate::rational::parse_rational(&r.concat_distance.exact)?;
    if min < ratio(1, 2) {
        report.fail(format!("min polynomial distance {min} below 1/2"));
    }
    if concat * 2 != min {
        report.fail(format!("concatenated distance {concat} is not half of {min}"));
    }
    if !r.halving_holds {
        report.fail("concatenation did not halve the distance on a random pair".into());
    }
    if !r.interpolation_checks_passed {
        report.fail("an interpolation through a point subset failed".into());
    }
    report.observe("report", serde_json::to_value(&r).expect("plain data"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in ClaimId::ALL {
            assert_eq!(c.name().parse::<ClaimId>().unwrap(), c);
        }
        assert!("nope".parse::<ClaimId>().is_err());
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(verify(ClaimId::ThinStrip, Some(5), 0), Err(Error::CapExceeded { .. })));
        assert!(verify(ClaimId::TriangleCensus, Some(1), 0).is_err());
    }

    #[test]
    fn small_claims_pass() {
        for (claim, n) in [
            (ClaimId::TriangleCensus, 2),
            (ClaimId::TriangleCensus, 3),
            (ClaimId::LemmaDistance, 3),
            (ClaimId::ThinStrip, 3),
            (ClaimId::Free100Soundness, 3),
            (ClaimId::SelfCorrectChain, 3),
            (ClaimId::Monotone, 3),
            (ClaimId::LinDecomposition, 3),
            (ClaimId::HardnessK3, 3),
        ] {
            let r = verify(claim, Some(n), 0).unwrap();
            assert!(r.passed, "{claim} at n={n}: {:?}", r.witness);
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn census_at_four_reports_quarter_distance() {
        let r = verify(ClaimId::TriangleCensus, None, 0).unwrap();
        assert!(r.passed);
        assert_eq!(r.checked, 15 * 14);
        assert_eq!(r.observed["triangles_expected"], json!(16));
        assert_eq!(r.observed["per_point_expected"], json!(4));
        assert_eq!(r.observed["dist_free111_always_quarter"], json!(true));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&verify(ClaimId::Monotone, Some(4), 9).unwrap()).unwrap();
        let b = serde_json::to_string(&verify(ClaimId::Monotone, Some(4), 9).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
