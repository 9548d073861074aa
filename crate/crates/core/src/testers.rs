//! Randomized, query-counted testers: BLR linearity, pattern-freeness, the
//! `O(1/ε²)` (1,0,0)-freeness tester and its self-corrected function, and a
//! sampling distance estimator for tolerant linearity testing.

use std::fmt;

use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{BoolFn, Point};
use crate::patterns::{pair_profile, PatternClass};
use crate::properties::PropertyId;
use crate::rational::{ceil_u64, check_epsilon, format_exact, Rational};

/// Default BLR round constant: `ceil(4/ε)` rounds.
pub const C_BLR: u64 = 4;
/// Default (1,0,0)-freeness round constant: `ceil(256/ε²)` rounds.
pub const C_FREE100: u64 = 256;
/// Default triangle-freeness round constant: `ceil(64/ε³)` rounds. Heuristic;
/// the proven bound is a tower of exponentials.
pub const C_TRIANGLE: u64 = 64;
/// Default outer sample count of the LIN distance estimator.
pub const ESTIMATOR_SAMPLES: u64 = 512;
/// Default inner sample count of the self-corrected LIN distance estimator.
pub const ESTIMATOR_INNER_SAMPLES: u64 = 64;
/// Largest dimension for exact self-correction.
pub const MAX_SELF_CORRECT_DIM: u32 = 12;
/// Largest dimension for the nearest-form estimator, which scores all `2ⁿ` forms.
pub const MAX_ESTIMATOR_DIM: u32 = 16;

/// Query access to a function, counting every evaluation.
pub struct Oracle<'a> {
    target: &'a BoolFn,
    queries: u64,
    log: Option<Vec<u32>>,
}

impl<'a> Oracle<'a> {
    pub fn new(target: &'a BoolFn) -> Self {
        Oracle { target, queries: 0, log: None }
    }

    /// An oracle that also records every queried point.
    pub fn logged(target: &'a BoolFn) -> Self {
        Oracle { target, queries: 0, log: Some(Vec::new()) }
    }

    pub fn dim(&self) -> u32 {
        self.target.dim()
    }

    #[inline]
    pub fn query(&mut self, x: u32) -> bool {
        self.queries += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(x);
        }
        self.target.get(x)
    }

    pub fn eval(&mut self, x: Point) -> Result<bool> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: x.dim() });
        }
        Ok(self.query(x.bits()))
    }

    pub fn queries_used(&self) -> u64 {
        self.queries
    }

    pub fn query_log(&self) -> Option<&[u32]> {
        self.log.as_deref()
    }

    pub fn reset(&mut self) {
        self.queries = 0;
        if let Some(log) = self.log.as_mut() {
            log.clear();
        }
    }
}

/// Seeded stream of uniform points. The same seed and call sequence always
/// yield the same draws.
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// A uniform point of F₂ⁿ as an index.
    pub fn point(&mut self, n: u32) -> u32 {
        (self.rng.next_u64() & ((1u64 << n) - 1)) as u32
    }

    /// Two independent uniform points from one draw (`n ≤ 32`).
    #[inline]
    pub fn point_pair(&mut self, n: u32) -> (u32, u32) {
        let v = self.rng.next_u64();
        let mask = (1u64 << n) - 1;
        ((v & mask) as u32, ((v >> 32) & mask) as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub accept: bool,
    #[serde(rename = "rounds")]
    pub rounds_run: u64,
    #[serde(rename = "queries")]
    pub queries_used: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToleranceParams {
    eps1: Rational,
    eps2: Rational,
}

impl ToleranceParams {
    pub fn new(eps1: Rational, eps2: Rational) -> Result<Self> {
        if eps1 <= Rational::zero() || eps2 >= Rational::one() || eps1 >= eps2 {
            return Err(Error::InvalidParameters(format!(
                "tolerance parameters need 0 < eps1 < eps2 < 1, got {} and {}",
                format_exact(&eps1),
                format_exact(&eps2)
            )));
        }
        Ok(ToleranceParams { eps1, eps2 })
    }

    pub fn eps1(&self) -> Rational {
        self.eps1
    }

    pub fn eps2(&self) -> Rational {
        self.eps2
    }

    pub fn threshold(&self) -> Rational {
        (self.eps1 + self.eps2) / Rational::from_integer(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

/// A randomized decision procedure run against an [`Oracle`] at distance
/// parameter `eps`.
pub trait Tester: Send + Sync + fmt::Debug {
    fn describe(&self) -> String;

    fn sidedness(&self) -> Sidedness;

    /// Most queries a single run can make at `eps`.
    fn budget(&self, eps: &Rational) -> Result<u64>;

    fn run(&self, oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<Verdict>;
}

/// Runs `tester` on `f` with a fresh oracle and a source seeded by `seed`.
pub fn run_once(tester: &dyn Tester, f: &BoolFn, eps: &Rational, seed: u64) -> Result<Verdict> {
    let mut oracle = Oracle::new(f);
    let mut rng = RandomSource::new(seed);
    tester.run(&mut oracle, eps, &mut rng)
}

/// `ceil(c / eps^power)`.
pub fn scaled_rounds(c: u64, power: u32, eps: &Rational) -> Result<u64> {
    check_epsilon(eps)?;
    let denom = (0..power).fold(Rational::one(), |acc, _| acc * eps);
    Ok(ceil_u64(&(Rational::from_integer(c as i64) / denom)))
}

/// The 3-query check repeated `rounds` times: draw `x, y` uniformly and
/// reject if `(f(x), f(y), f(x+y))` exhibits `p`.
pub fn pattern_free_test(oracle: &mut Oracle<'_>, p: PatternClass, rounds: u64, rng: &mut RandomSource) -> Result<Verdict> {
    if rounds == 0 {
        return Err(Error::InvalidParameters("a pattern test needs at least one round".into()));
    }
    repeat_triple_check(oracle, rounds, rng, |a, b, c| p.matches(a, b, c))
}

fn repeat_triple_check(
    oracle: &mut Oracle<'_>,
    rounds: u64,
    rng: &mut RandomSource,
    rejects: impl Fn(bool, bool, bool) -> bool,
) -> Result<Verdict> {
    let n = oracle.dim();
    let start = oracle.queries_used();
    for round in 1..=rounds {
        let (x, y) = rng.point_pair(n);
        let fx = oracle.query(x);
        let fy = oracle.query(y);
        let fxy = oracle.query(x ^ y);
        if rejects(fx, fy, fxy) {
            return Ok(Verdict { accept: false, rounds_run: round, queries_used: oracle.queries_used() - start, seed: rng.seed() });
        }
    }
    Ok(Verdict { accept: true, rounds_run: rounds, queries_used: oracle.queries_used() - start, seed: rng.seed() })
}

/// BLR with `ceil(4/ε)` rounds, rejecting on `f(x) + f(y) ≠ f(x+y)`.
pub fn blr_test(oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<Verdict> {
    let rounds = scaled_rounds(C_BLR, 1, eps)?;
    repeat_triple_check(oracle, rounds, rng, |a, b, c| a ^ b ^ c)
}

/// The (1,0,0) pattern test with `ceil(256/ε²)` rounds.
pub fn free100_test(oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<Verdict> {
    let rounds = scaled_rounds(C_FREE100, 2, eps)?;
    pattern_free_test(oracle, PatternClass::P100, rounds, rng)
}

/// Exact single-round rejection probability of BLR: the pairs with an odd
/// number of ones among `f(x), f(y), f(x+y)`.
pub fn blr_rejection_probability(f: &BoolFn) -> Result<Rational> {
    Ok(crate::patterns::rejection_probability(f, PatternClass::P100)? + crate::patterns::rejection_probability(f, PatternClass::P111)?)
}

/// The self-corrected function built from the (1,0,0) statistics of `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfCorrection {
    pub corrected: BoolFn,
    /// Points where both thresholds were met; the 0-rule is applied there.
    pub clashes: Vec<u32>,
    pub distance: Rational,
    /// Per point, the number of `y` with `(f(y), f(x+y)) = (0,0)`.
    pub count00: Vec<u64>,
    /// Per point, the number of `y` with `(f(y), f(x+y)) = (1,0)`.
    pub count10: Vec<u64>,
}

impl SelfCorrection {
    pub fn is_well_defined(&self) -> bool {
        self.clashes.is_empty()
    }
}

/// `g(x) = 0` if `p₀₀ˣ ≥ ε/4`, `1` if `p₁₀ˣ ≥ ε/4`, `f(x)` otherwise, with
/// `p₀₀ˣ = Pr_y[(f(y), f(x+y)) = (0,0)]` and `p₁₀ˣ = Pr_y[(f(y), f(x+y)) = (1,0)]`,
/// computed exactly.
pub fn self_correct(f: &BoolFn, eps: &Rational) -> Result<SelfCorrection> {
    check_epsilon(eps)?;
    if f.dim() > MAX_SELF_CORRECT_DIM {
        return Err(Error::CapExceeded {
            what: "dimension for exact self-correction",
            value: f.dim().into(),
            cap: MAX_SELF_CORRECT_DIM.into(),
        });
    }
    let profile = pair_profile(f)?;
    let size = i64::from(f.len());
    let threshold = eps / Rational::from_integer(4);
    let meets = |count: u64| Rational::new(count as i64, size) >= threshold;

    let mut corrected = f.clone();
    let mut clashes = Vec::new();
    for (x, counts) in profile.iter().enumerate() {
        let zero_rule = meets(counts[0b00]);
        let one_rule = meets(counts[0b10]);
        if zero_rule && one_rule {
            clashes.push(x as u32);
        }
        if zero_rule {
            corrected.set(x as u32, false);
        } else if one_rule {
            corrected.set(x as u32, true);
        }
    }
    let distance = f.dist(&corrected)?;
    Ok(SelfCorrection {
        corrected,
        clashes,
        distance,
        count00: profile.iter().map(|c| c[0b00]).collect(),
        count10: profile.iter().map(|c| c[0b10]).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinEstimator {
    /// Query `f` on the sampled points and report the smallest empirical
    /// disagreement with any of the `2ⁿ` linear forms.
    NearestForm,
    /// Compare `f(x)` on each sampled point with the majority of
    /// `f(x+y) + f(y)` over `inner` sampled `y`. Accurate only for inputs
    /// well within distance 1/4 of LIN.
    SelfCorrected { inner: u64 },
}

/// Estimates `dist(f, LIN)` from `samples` sampled points.
pub fn estimate_distance(
    oracle: &mut Oracle<'_>,
    id: &PropertyId,
    samples: u64,
    estimator: LinEstimator,
    rng: &mut RandomSource,
) -> Result<Rational> {
    if *id != PropertyId::Lin {
        return Err(Error::UnsupportedProperty(id.name()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameters("the estimator needs at least one sample".into()));
    }
    let n = oracle.dim();
    let disagreements = match estimator {
        LinEstimator::NearestForm => {
            if n > MAX_ESTIMATOR_DIM {
                return Err(Error::CapExceeded {
                    what: "dimension for the nearest-form estimator",
                    value: n.into(),
                    cap: MAX_ESTIMATOR_DIM.into(),
                });
            }
            let draws: Vec<(u32, bool)> = (0..samples)
                .map(|_| {
                    let x = rng.point(n);
                    (x, oracle.query(x))
                })
                .collect();
            (0..1u32 << n)
                .map(|a| draws.iter().filter(|(x, fx)| ((a & x).count_ones() & 1 == 1) != *fx).count() as u64)
                .min()
                .expect("at least one form")
        }
        LinEstimator::SelfCorrected { inner } => {
            if inner == 0 {
                return Err(Error::InvalidParameters("the self-corrected estimator needs inner samples".into()));
            }
            let mut count = 0;
            for _ in 0..samples {
                let x = rng.point(n);
                let fx = oracle.query(x);
                let mut votes_one = 0u64;
                for _ in 0..inner {
                    let y = rng.point(n);
                    if oracle.query(x ^ y) ^ oracle.query(y) {
                        votes_one += 1;
                    }
                }
                let majority = match (2 * votes_one).cmp(&inner) {
                    std::cmp::Ordering::Greater => Some(true),
                    std::cmp::Ordering::Less => Some(false),
                    std::cmp::Ordering::Equal => None,
                };
                if majority.is_some_and(|m| m != fx) {
                    count += 1;
                }
            }
            count
        }
    };
    Ok(Rational::new(disagreements as i64, samples as i64))
}

/// Accepts iff the estimated distance to LIN is below `(eps1 + eps2)/2`.
pub fn tolerant_lin_test(
    oracle: &mut Oracle<'_>,
    t: &ToleranceParams,
    samples: u64,
    estimator: LinEstimator,
    rng: &mut RandomSource,
) -> Result<Verdict> {
    if t.eps2 - t.eps1 < Rational::new(1, 8) {
        return Err(Error::InvalidParameters(format!(
            "tolerant LIN testing needs eps2 - eps1 >= 1/8, got {}",
            format_exact(&(t.eps2 - t.eps1))
        )));
    }
    let start = oracle.queries_used();
    let estimate = estimate_distance(oracle, &PropertyId::Lin, samples, estimator, rng)?;
    Ok(Verdict { accept: estimate < t.threshold(), rounds_run: samples, queries_used: oracle.queries_used() - start, seed: rng.seed() })
}

/// Round schedule of a 3-query pattern tester.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundSchedule {
    Fixed(u64),
    /// `ceil(c / ε^power)`.
    Scaled {
        c: u64,
        power: u32,
    },
}

impl RoundSchedule {
    pub fn rounds(&self, eps: &Rational) -> Result<u64> {
        match *self {
            RoundSchedule::Fixed(r) => {
                check_epsilon(eps)?;
                Ok(r)
            }
            RoundSchedule::Scaled { c, power } => scaled_rounds(c, power, eps),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlrTester {
    pub c: u64,
}

impl Default for BlrTester {
    fn default() -> Self {
        BlrTester { c: C_BLR }
    }
}

impl Tester for BlrTester {
    fn describe(&self) -> String {
        format!("blr(c={})", self.c)
    }

    fn sidedness(&self) -> Sidedness {
        Sidedness::OneSided
    }

    fn budget(&self, eps: &Rational) -> Result<u64> {
        Ok(3 * scaled_rounds(self.c, 1, eps)?)
    }

    fn run(&self, oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<Verdict> {
        let rounds = scaled_rounds(self.c, 1, eps)?;
        repeat_triple_check(oracle, rounds, rng, |a, b, c| a ^ b ^ c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternTester {
    pub label: String,
    pub pattern: PatternClass,
    pub schedule: RoundSchedule,
}

impl PatternTester {
    pub fn free100() -> Self {
        PatternTester { label: "free100".into(), pattern: PatternClass::P100, schedule: RoundSchedule::Scaled { c: C_FREE100, power: 2 } }
    }

    /// Same analysis as (1,0,0) by the symmetry of complementing `f`.
    pub fn free110() -> Self {
        PatternTester { label: "free110".into(), pattern: PatternClass::P110, schedule: RoundSchedule::Scaled { c: C_FREE100, power: 2 } }
    }

    pub fn triangle_free() -> Self {
        PatternTester { label: "free111".into(), pattern: PatternClass::P111, schedule: RoundSchedule::Scaled { c: C_TRIANGLE, power: 3 } }
    }

    pub fn with_rounds(mut self, rounds: u64) -> Self {
        self.schedule = RoundSchedule::Fixed(rounds);
        self
    }
}

impl Tester for PatternTester {
    fn describe(&self) -> String {
        match self.schedule {
            RoundSchedule::Fixed(r) => format!("{}(rounds={r})", self.label),
            RoundSchedule::Scaled { c, power } => format!("{}(c={c}/eps^{power})", self.label),
        }
    }

    fn sidedness(&self) -> Sidedness {
        Sidedness::OneSided
    }

    fn budget(&self, eps: &Rational) -> Result<u64> {
        Ok(3 * self.schedule.rounds(eps)?)
    }

    fn run(&self, oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<Verdict> {
        let rounds = self.schedule.rounds(eps)?;
        pattern_free_test(oracle, self.pattern, rounds, rng)
    }
}

/// Tolerant LIN tester; ignores the distance parameter it is run at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TolerantLinTester {
    pub params: ToleranceParams,
    pub samples: u64,
    pub estimator: LinEstimator,
}

impl TolerantLinTester {
    pub fn new(params: ToleranceParams) -> Self {
        TolerantLinTester { params, samples: ESTIMATOR_SAMPLES, estimator: LinEstimator::NearestForm }
    }
}

impl Tester for TolerantLinTester {
    fn describe(&self) -> String {
        format!(
            "tolerant-lin(eps1={}, eps2={}, samples={})",
            format_exact(&self.params.eps1),
            format_exact(&self.params.eps2),
            self.samples
        )
    }

    fn sidedness(&self) -> Sidedness {
        Sidedness::TwoSided
    }

    fn budget(&self, _eps: &Rational) -> Result<u64> {
        Ok(match self.estimator {
            LinEstimator::NearestForm => self.samples,
            LinEstimator::SelfCorrected { inner } => self.samples * (1 + 2 * inner),
        })
    }

    fn run(&self, oracle: &mut Oracle<'_>, _eps: &Rational, rng: &mut RandomSource) -> Result<Verdict> {
        tolerant_lin_test(oracle, &self.params, self.samples, self.estimator, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::LinearForm;
    use crate::patterns::rejection_probability;
    use crate::properties::{distance_to, enumerate, PropertyId};
    use crate::rational::ratio;

    fn and2() -> BoolFn {
        BoolFn::from_bit_str(2, "0001").unwrap()
    }

    #[test]
    fn oracle_counts_and_logs() {
        let f = and2();
        let mut o = Oracle::logged(&f);
        assert!(o.query(3));
        assert!(!o.eval(Point::new(2, 1).unwrap()).unwrap());
        assert!(o.eval(Point::new(3, 1).unwrap()).is_err());
        assert_eq!(o.queries_used(), 2);
        assert_eq!(o.query_log().unwrap(), &[3, 1]);
        o.reset();
        assert_eq!(o.queries_used(), 0);
        assert!(o.query_log().unwrap().is_empty());
    }

    #[test]
    fn random_source_is_reproducible() {
        let mut a = RandomSource::new(42);
        let mut b = RandomSource::new(42);
        let xs: Vec<u32> = (0..100).map(|_| a.point(7)).collect();
        let ys: Vec<u32> = (0..100).map(|_| b.point(7)).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().all(|&x| x < 128));
        assert_ne!(xs, (0..100).map(|_| RandomSource::new(43).point(7)).collect::<Vec<_>>());
    }

    #[test]
    fn round_schedules() {
        assert_eq!(scaled_rounds(C_BLR, 1, &ratio(1, 4)).unwrap(), 16);
        assert_eq!(scaled_rounds(C_FREE100, 2, &ratio(1, 4)).unwrap(), 4096);
        assert_eq!(scaled_rounds(C_TRIANGLE, 3, &ratio(1, 4)).unwrap(), 4096);
        assert_eq!(scaled_rounds(C_BLR, 1, &ratio(1, 3)).unwrap(), 12);
        assert!(scaled_rounds(C_BLR, 1, &ratio(0, 1)).is_err());
        assert!(scaled_rounds(C_BLR, 1, &ratio(3, 2)).is_err());
    }

    #[test]
    fn blr_accepts_linear_functions_with_full_budget() {
        for a in 0..8 {
            let f = LinearForm::from_bits(3, a).unwrap().materialize();
            for seed in 0..50 {
                let v = run_once(&BlrTester::default(), &f, &ratio(1, 4), seed).unwrap();
                assert!(v.accept);
                assert_eq!(v.rounds_run, 16);
                assert_eq!(v.queries_used, 48);
                assert_eq!(v.seed, seed);
            }
        }
    }

    #[test]
    fn blr_round_rejection_on_and2() {
        assert_eq!(blr_rejection_probability(&and2()).unwrap(), ratio(3, 8));
        let f = and2();
        let trials = 40_000;
        let rejected = (0..trials)
            .filter(|&seed| {
                let mut o = Oracle::new(&f);
                let mut r = RandomSource::new(seed);
                !repeat_triple_check(&mut o, 1, &mut r, |a, b, c| a ^ b ^ c).unwrap().accept
            })
            .count();
        let rate = rejected as f64 / trials as f64;
        assert!((rate - 0.375).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn blr_soundness_on_far_functions() {
        let eps = ratio(1, 4);
        let far: Vec<BoolFn> = (0..256u64)
            .map(|t| BoolFn::from_u64(3, t).unwrap())
            .filter(|f| distance_to(&PropertyId::Lin, f).unwrap().value >= eps)
            .collect();
        assert!(!far.is_empty());
        let seeds = 10_000u64;
        let accepted: u64 = far
            .iter()
            .step_by(9)
            .map(|f| (0..seeds).filter(|&s| run_once(&BlrTester::default(), f, &eps, s).unwrap().accept).count() as u64)
            .max()
            .unwrap();
        assert!((accepted as f64) / (seeds as f64) <= 1.0 / 3.0, "worst acceptance {accepted}/{seeds}");
    }

    #[test]
    fn pattern_test_examples() {
        let ones = BoolFn::ones(2).unwrap();
        for seed in 0..100 {
            let mut o = Oracle::new(&ones);
            let v = pattern_free_test(&mut o, PatternClass::P111, 1, &mut RandomSource::new(seed)).unwrap();
            assert!(!v.accept);
            assert_eq!(v.queries_used, 3);
        }
        let tf = LinearForm::from_bits(3, 5).unwrap().materialize();
        let mut o = Oracle::new(&tf);
        assert!(pattern_free_test(&mut o, PatternClass::P111, 500, &mut RandomSource::new(1)).unwrap().accept);
        assert!(pattern_free_test(&mut o, PatternClass::P111, 0, &mut RandomSource::new(1)).is_err());

        assert_eq!(rejection_probability(&and2(), PatternClass::P100).unwrap(), ratio(3, 8));
        let f = and2();
        let trials = 40_000;
        let rejected = (0..trials)
            .filter(|&s| !pattern_free_test(&mut Oracle::new(&f), PatternClass::P100, 1, &mut RandomSource::new(s)).unwrap().accept)
            .count();
        assert!((rejected as f64 / trials as f64 - 0.375).abs() < 0.01);
    }

    #[test]
    fn one_sided_testers_never_reject_members() {
        let eps = ratio(1, 2);
        let cases: Vec<(PropertyId, Box<dyn Tester>)> = vec![
            (PropertyId::Lin, Box::new(BlrTester::default())),
            (PropertyId::Free100, Box::new(PatternTester::free100())),
            (PropertyId::Free110, Box::new(PatternTester::free110())),
            (PropertyId::Free111, Box::new(PatternTester::triangle_free())),
        ];
        for n in 1..=4 {
            for (id, tester) in &cases {
                let members = enumerate(id, n).unwrap();
                let seeds = if n == 4 { 20 } else { 1000 };
                for f in members.iter() {
                    for seed in 0..seeds {
                        let v = run_once(tester.as_ref(), f, &eps, seed).unwrap();
                        assert!(v.accept, "{} rejected member {f:?} at seed {seed}", tester.describe());
                        assert_eq!(v.queries_used, 3 * v.rounds_run);
                        assert_eq!(v.queries_used, tester.budget(&eps).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn verdicts_are_deterministic() {
        let f = BoolFn::from_fn(5, |x| x % 7 == 3).unwrap();
        for tester in [PatternTester::free100(), PatternTester::triangle_free()] {
            for seed in 0..20 {
                let a = run_once(&tester, &f, &ratio(1, 8), seed).unwrap();
                let b = run_once(&tester, &f, &ratio(1, 8), seed).unwrap();
                assert_eq!(a, b);
                assert_eq!(a.queries_used, 3 * a.rounds_run);
            }
        }
    }

    #[test]
    fn free100_round_bound_on_and2() {
        let eps = ratio(1, 4);
        assert!(rejection_probability(&and2(), PatternClass::P100).unwrap() >= eps * eps / ratio(128, 1));
        let v = run_once(&PatternTester::free100(), &and2(), &eps, 7).unwrap();
        assert!(!v.accept);
        let f = and2();
        let mut o = Oracle::new(&f);
        assert_eq!(free100_test(&mut o, &eps, &mut RandomSource::new(7)).unwrap(), v);
    }

    #[test]
    fn free100_soundness_bound_on_sampled_functions() {
        let mut rng = RandomSource::new(2024);
        for _ in 0..400 {
            let f = BoolFn::from_u64(4, rng.next_u64() & 0xffff).unwrap();
            let dist = distance_to(&PropertyId::Free100, &f).unwrap().value;
            let rejection = rejection_probability(&f, PatternClass::P100).unwrap();
            for k in 1..=8 {
                let eps = ratio(k, 16);
                if dist >= eps {
                    assert!(rejection >= eps * eps / ratio(128, 1), "{f:?}");
                }
            }
        }
    }

    #[test]
    fn self_correction_examples() {
        let ones = BoolFn::ones(3).unwrap();
        let sc = self_correct(&ones, &ratio(1, 4)).unwrap();
        assert_eq!(sc.corrected, ones);
        assert!(sc.count00.iter().all(|&c| c == 0));
        assert!(sc.is_well_defined());
        assert_eq!(sc.distance, ratio(0, 1));

        for n in 1..=3 {
            for f in enumerate(&PropertyId::Free100, n).unwrap().iter() {
                for k in 1..8 {
                    let sc = self_correct(f, &ratio(k, 8)).unwrap();
                    assert!(sc.is_well_defined());
                    assert_eq!(&sc.corrected, f);
                }
            }
        }
        assert!(self_correct(&BoolFn::zeros(13).unwrap(), &ratio(1, 4)).is_err());
        assert!(self_correct(&ones, &ratio(0, 1)).is_err());
    }

    #[test]
    fn self_correction_reports_clashes() {
        // f(1)=1 only at n = 2: at x = 1 half the y give (0,0) and half give (1,0)
        let f = BoolFn::from_bit_str(2, "0100").unwrap();
        let sc = self_correct(&f, &ratio(1, 2)).unwrap();
        assert!(sc.clashes.contains(&1));
        assert!(!sc.corrected.get(1));
    }

    fn acceptance_rate(t: &TolerantLinTester, f: &BoolFn, seeds: u64) -> f64 {
        (0..seeds).filter(|&s| run_once(t, f, &ratio(1, 4), s).unwrap().accept).count() as f64 / seeds as f64
    }

    fn within(estimate: Rational, truth: Rational) -> bool {
        estimate >= truth - ratio(1, 16) && estimate <= truth + ratio(1, 16)
    }

    #[test]
    fn estimator_examples() {
        let lin = LinearForm::from_bits(4, 0b1011).unwrap().materialize();
        for estimator in [LinEstimator::NearestForm, LinEstimator::SelfCorrected { inner: ESTIMATOR_INNER_SAMPLES }] {
            for seed in 0..50 {
                let mut o = Oracle::new(&lin);
                let e = estimate_distance(&mut o, &PropertyId::Lin, 64, estimator, &mut RandomSource::new(seed)).unwrap();
                assert_eq!(e, ratio(0, 1));
            }
        }
        for (f, truth) in [(and2(), ratio(1, 4)), (BoolFn::ones(3).unwrap(), ratio(1, 2))] {
            assert_eq!(distance_to(&PropertyId::Lin, &f).unwrap().value, truth);
            let seeds = 600;
            let good = (0..seeds)
                .filter(|&s| {
                    let mut o = Oracle::new(&f);
                    let e = estimate_distance(
                        &mut o,
                        &PropertyId::Lin,
                        ESTIMATOR_SAMPLES,
                        LinEstimator::NearestForm,
                        &mut RandomSource::new(s),
                    )
                    .unwrap();
                    assert_eq!(o.queries_used(), ESTIMATOR_SAMPLES);
                    within(e, truth)
                })
                .count();
            assert!(good as f64 / seeds as f64 >= 5.0 / 6.0, "{f:?}: {good}/{seeds}");
        }
        let mut o = Oracle::new(&lin);
        let e = estimate_distance(&mut o, &PropertyId::Free100, 8, LinEstimator::NearestForm, &mut RandomSource::new(0));
        assert!(matches!(e, Err(Error::UnsupportedProperty(_))));
    }

    #[test]
    fn self_corrected_estimator_is_biased_far_from_lin() {
        // all-ones: every f(x+y) + f(y) is 0, so every sampled point disagrees
        let ones = BoolFn::ones(3).unwrap();
        let mut o = Oracle::new(&ones);
        let e =
            estimate_distance(&mut o, &PropertyId::Lin, 32, LinEstimator::SelfCorrected { inner: 8 }, &mut RandomSource::new(3)).unwrap();
        assert_eq!(e, ratio(1, 1));
        assert_eq!(o.queries_used(), 32 * 17);
    }

    #[test]
    fn tolerant_lin_examples() {
        let t = ToleranceParams::new(ratio(1, 16), ratio(1, 4)).unwrap();
        assert!(ToleranceParams::new(ratio(1, 4), ratio(1, 16)).is_err());
        assert!(ToleranceParams::new(ratio(0, 1), ratio(1, 4)).is_err());
        let narrow = ToleranceParams::new(ratio(1, 8), ratio(3, 16)).unwrap();
        let lin = LinearForm::from_bits(4, 6).unwrap().materialize();
        let mut o = Oracle::new(&lin);
        assert!(tolerant_lin_test(&mut o, &narrow, 64, LinEstimator::NearestForm, &mut RandomSource::new(0)).is_err());

        let tester = TolerantLinTester::new(t);
        assert_eq!(tester.sidedness(), Sidedness::TwoSided);
        assert!(acceptance_rate(&tester, &lin, 300) >= 2.0 / 3.0);

        let mut rng = RandomSource::new(99);
        let mut close = Vec::new();
        let mut far = Vec::new();
        while close.len() < 5 || far.len() < 5 {
            let base = LinearForm::from_bits(4, rng.point(4)).unwrap().materialize();
            let f = if rng.next_u64().is_multiple_of(2) {
                base.with(rng.point(4), !base.get(0))
            } else {
                BoolFn::from_u64(4, rng.next_u64() & 0xffff).unwrap()
            };
            let d = distance_to(&PropertyId::Lin, &f).unwrap().value;
            if d <= ratio(1, 16) && close.len() < 5 {
                close.push(f);
            } else if d >= ratio(1, 4) && far.len() < 5 {
                far.push(f);
            }
        }
        for f in &close {
            assert!(acceptance_rate(&tester, f, 300) >= 2.0 / 3.0, "close {f:?}");
        }
        for f in &far {
            assert!(acceptance_rate(&tester, f, 300) <= 1.0 / 3.0, "far {f:?}");
        }
    }
}
