//! Tester combinators for unions, intersections and set differences of
//! properties, plus the expression grammar used by the CLI's `--tester` flag.
//!
//! The query schedules are realized by clamping the distance parameter handed
//! to each part: `min(ε, ε₀/2)` for intersections and `min(ε, ε₁)` for the
//! one-sided part of a difference. Side conditions such as
//! `dist(P₁∖P₂, P₂∖P₁) ≥ ε₀` are the caller's obligation and are never checked
//! here; `ptlab verify` discharges them by enumeration where that is feasible.

use crate::error::{Error, Result};
use crate::rational::{check_epsilon, format_exact, parse_rational, Rational};
use crate::testers::{
    BlrTester, LinEstimator, Oracle, PatternTester, RandomSource, RoundSchedule, Sidedness, Tester, ToleranceParams, TolerantLinTester,
    Verdict, ESTIMATOR_INNER_SAMPLES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompositionKind {
    Union,
    Intersection {
        eps0: Rational,
    },
    Difference {
        eps0: Rational,
        tolerance: ToleranceParams,
    },
    /// A single part run unchanged under a new name.
    Passthrough,
}

#[derive(Debug)]
pub struct ComposedTester {
    label: String,
    kind: CompositionKind,
    parts: Vec<Box<dyn Tester>>,
}

/// Verdict of a composed run together with the verdict of every part run, in
/// execution order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComposedVerdict {
    pub verdict: Verdict,
    pub parts: Vec<Verdict>,
}

fn require_one_sided(t: &dyn Tester, role: &str) -> Result<()> {
    if t.sidedness() != Sidedness::OneSided {
        return Err(Error::InvalidParameters(format!("{role} must be one-sided, got {}", t.describe())));
    }
    Ok(())
}

fn positive_below_one(name: &str, value: &Rational) -> Result<()> {
    check_epsilon(value)
        .map_err(|_| Error::InvalidParameters(format!("{name} must lie strictly between 0 and 1, got {}", format_exact(value))))
}

/// Accepts iff at least one part accepts, each part amplified to soundness
/// 1/9 by two independent runs that must both accept. One-sided.
pub fn union_tester(first: Box<dyn Tester>, second: Box<dyn Tester>) -> Result<ComposedTester> {
    require_one_sided(first.as_ref(), "each part of a union")?;
    require_one_sided(second.as_ref(), "each part of a union")?;
    Ok(ComposedTester { label: "union".into(), kind: CompositionKind::Union, parts: vec![first, second] })
}

/// Runs both parts at `min(ε, ε₀/2)` and accepts iff both accept. The caller
/// asserts `dist(P₁∖P₂, P₂∖P₁) ≥ ε₀`.
pub fn intersection_tester(first: Box<dyn Tester>, second: Box<dyn Tester>, eps0: Rational) -> Result<ComposedTester> {
    positive_below_one("eps0", &eps0)?;
    Ok(ComposedTester { label: "intersect".into(), kind: CompositionKind::Intersection { eps0 }, parts: vec![first, second] })
}

/// Runs `base` at `min(ε, ε₁)` and the tolerant tester for `P₂`, accepting iff
/// `base` accepts and the tolerant tester rejects. Two-sided with completeness
/// 2/3. Requires `ε₁ < ε₂ ≤ ε₀`; the caller asserts `dist(P₁∖P₂, P₂) ≥ ε₀`.
/// Equality `ε₂ = ε₀` is allowed because the NLTF instantiation uses it.
pub fn difference_tester(
    base: Box<dyn Tester>,
    tolerant: Box<dyn Tester>,
    eps0: Rational,
    tolerance: ToleranceParams,
) -> Result<ComposedTester> {
    positive_below_one("eps0", &eps0)?;
    if tolerance.eps2() > eps0 {
        return Err(Error::InvalidParameters(format!(
            "a difference tester needs eps1 < eps2 <= eps0, got eps2 = {} and eps0 = {}",
            format_exact(&tolerance.eps2()),
            format_exact(&eps0)
        )));
    }
    Ok(ComposedTester { label: "difference".into(), kind: CompositionKind::Difference { eps0, tolerance }, parts: vec![base, tolerant] })
}

/// The NLTF tester: the triangle-freeness tester under another name. Every
/// NLTF member is triangle-free, so it stays one-sided; linear inputs are
/// accepted too, which is harmless because they sit within `2⁻ⁿ` of NLTF.
pub fn nltf_tester(rounds: Option<u64>) -> ComposedTester {
    let part = match rounds {
        Some(r) => PatternTester::triangle_free().with_rounds(r),
        None => PatternTester::triangle_free(),
    };
    ComposedTester { label: "nltf".into(), kind: CompositionKind::Passthrough, parts: vec![Box::new(part)] }
}

impl ComposedTester {
    pub fn kind(&self) -> CompositionKind {
        self.kind
    }

    pub fn parts(&self) -> &[Box<dyn Tester>] {
        &self.parts
    }

    /// Distance parameter handed to each part when the whole runs at `eps`.
    pub fn schedule(&self, eps: &Rational) -> Vec<Rational> {
        match self.kind {
            CompositionKind::Union | CompositionKind::Passthrough => vec![*eps; self.parts.len()],
            CompositionKind::Intersection { eps0 } => {
                let clamped = (*eps).min(eps0 / Rational::from_integer(2));
                vec![clamped; 2]
            }
            CompositionKind::Difference { tolerance, .. } => vec![(*eps).min(tolerance.eps1()), *eps],
        }
    }

    pub fn run_parts(&self, oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<ComposedVerdict> {
        check_epsilon(eps)?;
        let schedule = self.schedule(eps);
        let start = oracle.queries_used();
        let mut parts = Vec::new();
        let accept = match self.kind {
            CompositionKind::Union => {
                let mut any = false;
                for (part, part_eps) in self.parts.iter().zip(&schedule) {
                    let first = part.run(oracle, part_eps, rng)?;
                    let second = part.run(oracle, part_eps, rng)?;
                    any |= first.accept && second.accept;
                    parts.extend([first, second]);
                }
                any
            }
            CompositionKind::Intersection { .. } | CompositionKind::Passthrough => {
                let mut all = true;
                for (part, part_eps) in self.parts.iter().zip(&schedule) {
                    let v = part.run(oracle, part_eps, rng)?;
                    all &= v.accept;
                    parts.push(v);
                }
                all
            }
            CompositionKind::Difference { .. } => {
                let base = self.parts[0].run(oracle, &schedule[0], rng)?;
                let tolerant = self.parts[1].run(oracle, &schedule[1], rng)?;
                parts.extend([base, tolerant]);
                base.accept && !tolerant.accept
            }
        };
        let verdict = Verdict {
            accept,
            rounds_run: parts.iter().map(|v| v.rounds_run).sum(),
            queries_used: oracle.queries_used() - start,
            seed: rng.seed(),
        };
        debug_assert_eq!(verdict.queries_used, parts.iter().map(|v| v.queries_used).sum::<u64>());
        Ok(ComposedVerdict { verdict, parts })
    }
}

impl Tester for ComposedTester {
    fn describe(&self) -> String {
        let inner: Vec<String> = self.parts.iter().map(|p| p.describe()).collect();
        let extra = match self.kind {
            CompositionKind::Intersection { eps0 } => format!(", eps0={}", format_exact(&eps0)),
            CompositionKind::Difference { eps0, tolerance } => format!(
                ", eps0={}, eps1={}, eps2={}",
                format_exact(&eps0),
                format_exact(&tolerance.eps1()),
                format_exact(&tolerance.eps2())
            ),
            _ => String::new(),
        };
        format!("{}({}{extra})", self.label, inner.join(", "))
    }

    fn sidedness(&self) -> Sidedness {
        match self.kind {
            CompositionKind::Difference { .. } => Sidedness::TwoSided,
            _ if self.parts.iter().all(|p| p.sidedness() == Sidedness::OneSided) => Sidedness::OneSided,
            _ => Sidedness::TwoSided,
        }
    }

    fn budget(&self, eps: &Rational) -> Result<u64> {
        check_epsilon(eps)?;
        let repeats = if self.kind == CompositionKind::Union { 2 } else { 1 };
        let mut total = 0;
        for (part, part_eps) in self.parts.iter().zip(self.schedule(eps)) {
            total += repeats * part.budget(&part_eps)?;
        }
        Ok(total)
    }

    fn run(&self, oracle: &mut Oracle<'_>, eps: &Rational, rng: &mut RandomSource) -> Result<Verdict> {
        Ok(self.run_parts(oracle, eps, rng)?.verdict)
    }
}

/// One node of a parsed tester expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprNode {
    pub name: String,
    pub pos: usize,
    pub options: Vec<ExprOption>,
    pub children: Vec<ExprNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprOption {
    pub key: String,
    pub value: String,
    pub pos: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn parse_error(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(parse_error(self.pos, format!("expected '{}', found '{}'", c as char, got as char))),
            None => Err(parse_error(self.pos, format!("expected '{}', found end of input", c as char))),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || matches!(c, b'_' | b'-' | b'.' | b'/') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(match self.src.get(self.pos) {
                Some(&c) => parse_error(start, format!("expected {what}, found '{}'", c as char)),
                None => parse_error(start, format!("expected {what}, found end of input")),
            });
        }
        Ok((String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(), start))
    }

    fn option_after_key(&mut self, key: String, pos: usize) -> Result<ExprOption> {
        self.expect(b'=')?;
        let (value, _) = self.word("a value")?;
        Ok(ExprOption { key: key.to_ascii_lowercase(), value, pos })
    }

    fn expr(&mut self) -> Result<ExprNode> {
        let (name, pos) = self.word("a tester name")?;
        let mut node = ExprNode { name: name.to_ascii_lowercase(), pos, options: Vec::new(), children: Vec::new() };
        while self.peek() == Some(b':') {
            self.pos += 1;
            let (key, kpos) = self.word("an option name")?;
            let opt = self.option_after_key(key, kpos)?;
            node.options.push(opt);
        }
        if self.peek() == Some(b'(') {
            self.pos += 1;
            if self.peek() != Some(b')') {
                loop {
                    let (word, wpos) = self.word("an argument")?;
                    if self.peek() == Some(b'=') {
                        let opt = self.option_after_key(word, wpos)?;
                        node.options.push(opt);
                    } else {
                        self.pos = wpos;
                        node.children.push(self.expr()?);
                    }
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        _ => break,
                    }
                }
            }
            self.expect(b')')?;
        }
        Ok(node)
    }
}

/// Parses a tester expression such as
/// `intersect(free111:rounds=200000, free100, eps0=0.25)` into its syntax tree.
pub fn parse_expr(src: &str) -> Result<ExprNode> {
    let mut parser = Parser { src: src.as_bytes(), pos: 0 };
    let node = parser.expr()?;
    if let Some(c) = parser.peek() {
        return Err(parse_error(parser.pos, format!("unexpected '{}' after expression", c as char)));
    }
    Ok(node)
}

struct Options<'a> {
    node: &'a ExprNode,
}

impl<'a> Options<'a> {
    fn check_allowed(&self, allowed: &[&str]) -> Result<()> {
        for opt in &self.node.options {
            if !allowed.contains(&opt.key.as_str()) {
                return Err(parse_error(
                    opt.pos,
                    format!("unknown option '{}' for {}; allowed: {}", opt.key, self.node.name, allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&'a ExprOption> {
        self.node.options.iter().rev().find(|o| o.key == key)
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>> {
        self.raw(key).map(|o| parse_rational(&o.value).map_err(|e| parse_error(o.pos, e.to_string()))).transpose()
    }

    fn integer(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key)
            .map(|o| {
                o.value
                    .parse::<u64>()
                    .ok()
                    .filter(|v| *v > 0)
                    .ok_or_else(|| parse_error(o.pos, format!("option '{key}' needs a positive integer, got {:?}", o.value)))
            })
            .transpose()
    }

    fn required_rational(&self, key: &str) -> Result<Rational> {
        self.rational(key)?.ok_or_else(|| parse_error(self.node.pos, format!("{} requires the option '{key}'", self.node.name)))
    }
}

fn expect_children(node: &ExprNode, count: usize) -> Result<()> {
    if node.children.len() != count {
        return Err(parse_error(node.pos, format!("{} takes {count} tester argument(s), found {}", node.name, node.children.len())));
    }
    Ok(())
}

fn pattern_tester(node: &ExprNode, base: PatternTester) -> Result<Box<dyn Tester>> {
    let opts = Options { node };
    opts.check_allowed(&["rounds", "c"])?;
    expect_children(node, 0)?;
    let mut tester = base;
    if let Some(c) = opts.integer("c")? {
        if let RoundSchedule::Scaled { power, .. } = tester.schedule {
            tester.schedule = RoundSchedule::Scaled { c, power };
        }
    }
    if let Some(rounds) = opts.integer("rounds")? {
        tester = tester.with_rounds(rounds);
    }
    Ok(Box::new(tester))
}

fn tolerant_params(opts: &Options<'_>, fallback: Option<ToleranceParams>) -> Result<ToleranceParams> {
    let default = fallback.unwrap_or(ToleranceParams::new(Rational::new(1, 16), Rational::new(1, 4))?);
    let eps1 = opts.rational("eps1")?.unwrap_or(default.eps1());
    let eps2 = opts.rational("eps2")?.unwrap_or(default.eps2());
    ToleranceParams::new(eps1, eps2).map_err(|e| parse_error(opts.node.pos, e.to_string()))
}

fn tolerant_tester(node: &ExprNode, fallback: Option<ToleranceParams>) -> Result<TolerantLinTester> {
    let opts = Options { node };
    opts.check_allowed(&["eps1", "eps2", "samples", "estimator", "inner"])?;
    expect_children(node, 0)?;
    let mut tester = TolerantLinTester::new(tolerant_params(&opts, fallback)?);
    if let Some(samples) = opts.integer("samples")? {
        tester.samples = samples;
    }
    let inner = opts.integer("inner")?.unwrap_or(ESTIMATOR_INNER_SAMPLES);
    tester.estimator = match opts.raw("estimator").map(|o| (o.value.as_str(), o.pos)) {
        None | Some(("nearest", _)) => LinEstimator::NearestForm,
        Some(("self-corrected", _)) => LinEstimator::SelfCorrected { inner },
        Some((other, pos)) => return Err(parse_error(pos, format!("unknown estimator {other:?}; expected nearest or self-corrected"))),
    };
    Ok(tester)
}

/// Builds a tester from a parsed expression.
pub fn build_tester(node: &ExprNode) -> Result<Box<dyn Tester>> {
    let opts = Options { node };
    match node.name.as_str() {
        "blr" => {
            opts.check_allowed(&["c"])?;
            expect_children(node, 0)?;
            Ok(Box::new(BlrTester { c: opts.integer("c")?.unwrap_or(crate::testers::C_BLR) }))
        }
        "free100" => pattern_tester(node, PatternTester::free100()),
        "free110" => pattern_tester(node, PatternTester::free110()),
        "free111" | "triangle" => pattern_tester(node, PatternTester::triangle_free()),
        "nltf" => {
            opts.check_allowed(&["rounds"])?;
            expect_children(node, 0)?;
            Ok(Box::new(nltf_tester(opts.integer("rounds")?)))
        }
        "tolerant-lin" | "tollin" => Ok(Box::new(tolerant_tester(node, None)?)),
        "union" => {
            opts.check_allowed(&[])?;
            expect_children(node, 2)?;
            let tester = union_tester(build_tester(&node.children[0])?, build_tester(&node.children[1])?)
                .map_err(|e| parse_error(node.pos, e.to_string()))?;
            Ok(Box::new(tester))
        }
        "intersect" | "intersection" => {
            opts.check_allowed(&["eps0"])?;
            expect_children(node, 2)?;
            let eps0 = opts.required_rational("eps0")?;
            let tester = intersection_tester(build_tester(&node.children[0])?, build_tester(&node.children[1])?, eps0)
                .map_err(|e| parse_error(node.pos, e.to_string()))?;
            Ok(Box::new(tester))
        }
        "difference" | "diff" => {
            opts.check_allowed(&["eps0", "eps1", "eps2"])?;
            expect_children(node, 2)?;
            let eps0 = opts.required_rational("eps0")?;
            let second = &node.children[1];
            if !matches!(second.name.as_str(), "tolerant-lin" | "tollin") {
                return Err(parse_error(second.pos, "the second part of a difference must be a tolerant tester (tolerant-lin)"));
            }
            let inherited = tolerant_params(&opts, None)?;
            let tolerant = tolerant_tester(second, Some(inherited))?;
            let tolerance = tolerant.params;
            let tester = difference_tester(build_tester(&node.children[0])?, Box::new(tolerant), eps0, tolerance)
                .map_err(|e| parse_error(node.pos, e.to_string()))?;
            Ok(Box::new(tester))
        }
        other => Err(parse_error(
            node.pos,
            format!(
                "unknown tester {other:?}; expected blr, free100, free110, free111, nltf, tolerant-lin, union, intersect or difference"
            ),
        )),
    }
}

pub fn parse_tester(src: &str) -> Result<Box<dyn Tester>> {
    build_tester(&parse_expr(src)?)
}

/// Whether a rate over `trials` runs is consistent with a true rate of at
/// least `target`: the observed rate must clear `target` minus the one-sided
/// 99% normal margin. Used by seed sweeps that report pass/fail.
pub fn rate_at_least(successes: u64, trials: u64, target: f64) -> bool {
    if trials == 0 {
        return false;
    }
    let margin = 2.326 * (target * (1.0 - target) / trials as f64).sqrt();
    successes as f64 / trials as f64 >= target - margin
}
