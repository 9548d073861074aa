//! Named properties with exact membership, member enumeration at small n and
//! exact brute-force distances. Everything here is ground truth: nothing is
//! sampled.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::BoolFn;
use crate::patterns::{for_each_triangle, PatternClass, MAX_PAIR_SCAN_DIM};
use crate::rational::Rational;

/// Cap for full `2^(2ⁿ)` function-space scans.
pub const MAX_SCAN_DIM: u32 = 4;
/// Cap for structured enumeration of LIN and FREE100.
pub const MAX_STRUCTURED_DIM: u32 = 8;
/// Largest support the hitting-set distance search accepts.
pub const MAX_HITTING_WEIGHT: u64 = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropertyId {
    Lin,
    Free100,
    Free110,
    Free111,
    Nltf,
    All1,
    /// A finite set of functions, kept sorted and deduplicated.
    Explicit(Arc<Vec<BoolFn>>),
}

impl PropertyId {
    pub fn explicit(members: impl IntoIterator<Item = BoolFn>) -> Self {
        let set: BTreeSet<BoolFn> = members.into_iter().collect();
        PropertyId::Explicit(Arc::new(set.into_iter().collect()))
    }

    /// The members of `a` at dimension `n` that are not in `b`, as an explicit set.
    pub fn difference(a: &PropertyId, b: &PropertyId, n: u32) -> Result<Self> {
        let members = enumerate(a, n)?;
        let mut kept = Vec::with_capacity(members.len());
        for f in members.iter() {
            if !membership(b, f)? {
                kept.push(f.clone());
            }
        }
        Ok(PropertyId::explicit(kept))
    }

    pub fn name(&self) -> String {
        match self {
            PropertyId::Lin => "lin".into(),
            PropertyId::Free100 => "free100".into(),
            PropertyId::Free110 => "free110".into(),
            PropertyId::Free111 => "free111".into(),
            PropertyId::Nltf => "nltf".into(),
            PropertyId::All1 => "all1".into(),
            PropertyId::Explicit(set) => format!("explicit[{}]", set.len()),
        }
    }

    fn cache_slot(&self) -> Option<usize> {
        match self {
            PropertyId::Lin => Some(0),
            PropertyId::Free100 => Some(1),
            PropertyId::Free110 => Some(2),
            PropertyId::Free111 => Some(3),
            PropertyId::Nltf => Some(4),
            PropertyId::All1 | PropertyId::Explicit(_) => None,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lin" => Ok(PropertyId::Lin),
            "free100" | "100" => Ok(PropertyId::Free100),
            "free110" | "110" => Ok(PropertyId::Free110),
            "free111" | "111" | "triangle-free" => Ok(PropertyId::Free111),
            "nltf" => Ok(PropertyId::Nltf),
            "all1" | "ones" => Ok(PropertyId::All1),
            other => {
                Err(Error::InvalidParameters(format!("unknown property {other:?}; expected lin, free100, free110, free111, nltf or all1")))
            }
        }
    }
}

/// Whether `f` is linear: recover the only candidate form from the values at
/// the unit vectors and compare it with `f` everywhere.
pub fn is_linear(f: &BoolFn) -> bool {
    if f.get(0) {
        return false;
    }
    let a: u32 = (0..f.dim()).filter(|&j| f.get(1 << j)).map(|j| 1 << j).sum();
    (0..f.len()).all(|x| f.get(x) == ((a & x).count_ones() & 1 == 1))
}

/// Pattern-freeness by a full pair scan with early exit.
pub fn is_pattern_free(f: &BoolFn, p: PatternClass) -> Result<bool> {
    if f.dim() > MAX_PAIR_SCAN_DIM {
        return Err(Error::CapExceeded {
            what: "dimension for an exhaustive pair scan",
            value: f.dim().into(),
            cap: MAX_PAIR_SCAN_DIM.into(),
        });
    }
    for x in 0..f.len() {
        let fx = f.get(x);
        // (x, y) and (y, x) give the same multiset
        for y in x..f.len() {
            if p.matches(fx, f.get(y), f.get(x ^ y)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn membership(id: &PropertyId, f: &BoolFn) -> Result<bool> {
    match id {
        PropertyId::Lin => Ok(is_linear(f)),
        PropertyId::Free100 => is_pattern_free(f, PatternClass::P100),
        PropertyId::Free110 => is_pattern_free(f, PatternClass::P110),
        PropertyId::Free111 => is_pattern_free(f, PatternClass::P111),
        PropertyId::Nltf => Ok(is_pattern_free(f, PatternClass::P111)? && !is_linear(f)),
        PropertyId::All1 => Ok(f.weight() == u64::from(f.len())),
        PropertyId::Explicit(set) => Ok(set.binary_search(f).is_ok()),
    }
}

fn cap(what: &'static str, n: u32, max: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::DimensionOutOfRange { n, min: 1, max });
    }
    if n > max {
        return Err(Error::CapExceeded { what, value: n.into(), cap: max.into() });
    }
    Ok(())
}

/// All subspaces of F₂ⁿ as indicator functions, found by checking every subset
/// that contains 0 for closure under addition. `n ≤ 4`.
pub fn subspaces_by_closure(n: u32) -> Result<Vec<BoolFn>> {
    cap("dimension for closure-based subspace enumeration", n, MAX_SCAN_DIM)?;
    let size = 1u32 << n;
    let mut out = Vec::new();
    // bit 0 of the mask (the zero point) is always set
    for rest in 0u64..1 << (size - 1) {
        let mask = (rest << 1) | 1;
        let members: Vec<u32> = (0..size).filter(|i| mask >> i & 1 == 1).collect();
        let closed = members.iter().all(|&x| members.iter().all(|&y| mask >> (x ^ y) & 1 == 1));
        if closed {
            out.push(BoolFn::from_u64(n, mask)?);
        }
    }
    out.sort();
    Ok(out)
}

/// All subspaces of F₂ⁿ as indicator functions, one per reduced row-echelon
/// basis: each basis vector has a distinct leading (highest) bit, is zero at
/// every other leading position, and is free below its own lead.
pub fn subspaces_by_basis(n: u32) -> Result<Vec<BoolFn>> {
    cap("dimension for basis-based subspace enumeration", n, MAX_STRUCTURED_DIM)?;
    let mut out = Vec::new();
    for pivots in 0u32..1 << n {
        let leads: Vec<u32> = (0..n).filter(|j| pivots >> j & 1 == 1).collect();
        // free positions of each row: below the lead and not a lead
        let free: Vec<Vec<u32>> = leads.iter().map(|&lead| (0..lead).filter(|j| pivots >> j & 1 == 0).collect()).collect();
        let total_free: u32 = free.iter().map(|v| v.len() as u32).sum();
        for assignment in 0u64..1 << total_free {
            let mut shift = 0;
            let basis: Vec<u32> = leads
                .iter()
                .zip(&free)
                .map(|(&lead, positions)| {
                    let mut row = 1u32 << lead;
                    for &p in positions {
                        if assignment >> shift & 1 == 1 {
                            row |= 1 << p;
                        }
                        shift += 1;
                    }
                    row
                })
                .collect();
            let mut span = vec![0u32];
            for &v in &basis {
                let doubled: Vec<u32> = span.iter().map(|s| s ^ v).collect();
                span.extend(doubled);
            }
            let mut indicator = BoolFn::zeros(n)?;
            for s in span {
                indicator.set(s, true);
            }
            out.push(indicator);
        }
    }
    out.sort();
    Ok(out)
}

fn scan_members(n: u32, keep: impl Fn(&BoolFn) -> bool + Sync) -> Result<Vec<BoolFn>> {
    cap("dimension for a full function-space scan", n, MAX_SCAN_DIM)?;
    let tables = 1u64 << (1u32 << n);
    let members: Vec<BoolFn> = (0..tables)
        .into_par_iter()
        .filter_map(|t| {
            let f = BoolFn::from_u64(n, t).expect("table within range");
            keep(&f).then_some(f)
        })
        .collect();
    Ok(members)
}

fn build_members(id: &PropertyId, n: u32) -> Result<Vec<BoolFn>> {
    let mut members = match id {
        PropertyId::Lin => {
            cap("dimension for LIN enumeration", n, MAX_STRUCTURED_DIM)?;
            crate::gf2::LinearForm::all(n)?.map(|form| form.materialize()).collect()
        }
        PropertyId::Free100 => {
            let subspaces = if n <= MAX_SCAN_DIM { subspaces_by_closure(n)? } else { subspaces_by_basis(n)? };
            let mut v: Vec<BoolFn> = subspaces.iter().map(BoolFn::complement).collect();
            v.push(BoolFn::ones(n)?);
            v
        }
        PropertyId::Free110 => scan_members(n, |f| is_pattern_free(f, PatternClass::P110).unwrap_or(false))?,
        PropertyId::Free111 => scan_members(n, |f| is_pattern_free(f, PatternClass::P111).unwrap_or(false))?,
        PropertyId::Nltf => scan_members(n, |f| !is_linear(f) && is_pattern_free(f, PatternClass::P111).unwrap_or(false))?,
        PropertyId::All1 => vec![BoolFn::ones(n)?],
        PropertyId::Explicit(set) => set.iter().filter(|f| f.dim() == n).cloned().collect(),
    };
    members.sort();
    members.dedup();
    Ok(members)
}

// Array-repeat initializers for the static cache below; each use is a fresh cell.
#[allow(clippy::declare_interior_mutable_const)]
const SLOT: OnceLock<Arc<Vec<BoolFn>>> = OnceLock::new();
#[allow(clippy::declare_interior_mutable_const)]
const ROW: [OnceLock<Arc<Vec<BoolFn>>>; (MAX_STRUCTURED_DIM + 1) as usize] = [SLOT; (MAX_STRUCTURED_DIM + 1) as usize];
static MEMBER_CACHE: [[OnceLock<Arc<Vec<BoolFn>>>; (MAX_STRUCTURED_DIM + 1) as usize]; 5] = [ROW; 5];

/// Every member at dimension `n`, sorted by table integer value.
pub fn enumerate(id: &PropertyId, n: u32) -> Result<Arc<Vec<BoolFn>>> {
    match id.cache_slot() {
        Some(slot) if (1..=MAX_STRUCTURED_DIM).contains(&n) => {
            let cell = &MEMBER_CACHE[slot][n as usize];
            if let Some(members) = cell.get() {
                return Ok(Arc::clone(members));
            }
            let members = Arc::new(build_members(id, n)?);
            Ok(Arc::clone(cell.get_or_init(|| members)))
        }
        _ => Ok(Arc::new(build_members(id, n)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceResult {
    pub value: Rational,
    /// Nearest member; ties go to the lowest table integer value.
    pub witness: Option<BoolFn>,
}

/// Nearest member of a sorted list, keeping the first (lowest) on ties.
fn nearest(f: &BoolFn, members: &[BoolFn]) -> Result<Option<(u64, BoolFn)>> {
    let mut best: Option<(u64, &BoolFn)> = None;
    for g in members {
        let d = f.disagreements(g)?;
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, g));
            if d == 0 {
                break;
            }
        }
    }
    Ok(best.map(|(d, g)| (d, g.clone())))
}

fn by_enumeration(id: &PropertyId, f: &BoolFn) -> Result<DistanceResult> {
    let members = enumerate(id, f.dim())?;
    let (d, witness) =
        nearest(f, &members)?.ok_or_else(|| Error::InvalidParameters(format!("property {id} has no members at n = {}", f.dim())))?;
    Ok(DistanceResult { value: Rational::new(d as i64, i64::from(f.len())), witness: Some(witness) })
}

/// Exact `dist(f, P)` with a nearest witness. FREE111 and NLTF use full
/// enumeration for `n ≤ 4` and the support-deletion search above that.
pub fn distance_to(id: &PropertyId, f: &BoolFn) -> Result<DistanceResult> {
    match id {
        PropertyId::All1 => {
            let ones = BoolFn::ones(f.dim())?;
            Ok(DistanceResult { value: f.dist(&ones)?, witness: Some(ones) })
        }
        PropertyId::Free111 if f.dim() > MAX_SCAN_DIM => distance_to_free111_hitting(f),
        PropertyId::Nltf if f.dim() > MAX_SCAN_DIM => distance_to_nltf_hitting(f),
        _ => by_enumeration(id, f),
    }
}

/// Support-deletion view of a function: its support points and its triangles
/// as bitmasks over support positions.
struct DeletionProblem<'a> {
    f: &'a BoolFn,
    support: Vec<u32>,
    triangles: Vec<u32>,
}

impl<'a> DeletionProblem<'a> {
    fn new(f: &'a BoolFn) -> Result<Self> {
        let weight = f.weight();
        if weight > MAX_HITTING_WEIGHT {
            return Err(Error::CapExceeded {
                what: "support size for the hitting-set distance search",
                value: weight,
                cap: MAX_HITTING_WEIGHT,
            });
        }
        let support: Vec<u32> = f.support_indices().collect();
        let position = |p: u32| support.binary_search(&p).expect("triangle point lies in the support") as u32;
        let mut triangles = Vec::new();
        for_each_triangle(f, |points| {
            triangles.push(points.iter().fold(0u32, |m, &p| m | 1 << position(p)));
        });
        Ok(DeletionProblem { f, support, triangles })
    }

    fn first_unhit(&self, deleted: u32) -> Option<u32> {
        self.triangles.iter().copied().find(|t| t & deleted == 0)
    }

    fn has_hitting_set(&self, deleted: u32, budget: u32) -> bool {
        match self.first_unhit(deleted) {
            None => true,
            Some(_) if budget == 0 => false,
            Some(t) => bits_of(t).any(|v| self.has_hitting_set(deleted | 1 << v, budget - 1)),
        }
    }

    fn min_size(&self) -> u32 {
        (0..).find(|&k| self.has_hitting_set(0, k)).expect("deleting the whole support always works")
    }

    /// Every hitting set reached by branching within `budget` deletions. All
    /// minimal hitting sets of size ≤ `budget` are among them.
    fn collect(&self, deleted: u32, budget: u32, out: &mut BTreeSet<u32>) {
        match self.first_unhit(deleted) {
            None => {
                out.insert(deleted);
            }
            Some(_) if budget == 0 => {}
            Some(t) => {
                for v in bits_of(t) {
                    self.collect(deleted | 1 << v, budget - 1, out);
                }
            }
        }
    }

    fn apply(&self, deleted: u32) -> BoolFn {
        let mut g = self.f.clone();
        for v in bits_of(deleted) {
            g.set(self.support[v as usize], false);
        }
        g
    }

    fn result(&self, deletions: u32, witness: BoolFn) -> DistanceResult {
        DistanceResult { value: Rational::new(i64::from(deletions), i64::from(self.f.len())), witness: Some(witness) }
    }
}

fn bits_of(mask: u32) -> impl Iterator<Item = u32> {
    (0..32).filter(move |v| mask >> v & 1 == 1)
}

/// Exact `dist(f, FREE111)` by searching subsets of `supp(f)` for a smallest
/// set whose deletion leaves no triangle. Restricting to subsets is exact:
/// for any triangle-free `g`, `g ∧ f` is triangle-free and no farther from `f`.
pub fn distance_to_free111_hitting(f: &BoolFn) -> Result<DistanceResult> {
    let problem = DeletionProblem::new(f)?;
    let k = problem.min_size();
    let mut sets = BTreeSet::new();
    problem.collect(0, k, &mut sets);
    let witness = sets.iter().filter(|d| d.count_ones() == k).map(|&d| problem.apply(d)).min().expect("a minimum hitting set exists");
    Ok(problem.result(k, witness))
}

/// Exact `dist(f, NLTF)` from the same search. Every NLTF member at distance
/// `d = dist(f, FREE111)` is a nearest triangle-free function, hence a subset of
/// `f`; otherwise the answer is `d + 2⁻ⁿ`, reached either by one more deletion
/// or by a minimum deletion plus one added point.
pub fn distance_to_nltf_hitting(f: &BoolFn) -> Result<DistanceResult> {
    let problem = DeletionProblem::new(f)?;
    let k = problem.min_size();
    let mut sets = BTreeSet::new();
    problem.collect(0, k + 1, &mut sets);

    let minimum: Vec<BoolFn> = sets.iter().filter(|d| d.count_ones() == k).map(|&d| problem.apply(d)).collect();
    if let Some(w) = minimum.iter().filter(|g| !is_linear(g)).min() {
        return Ok(problem.result(k, w.clone()));
    }

    let all_support = (1u32 << problem.support.len()) - 1;
    let mut candidates: Vec<BoolFn> = Vec::new();
    for &d in &sets {
        match d.count_ones() {
            c if c == k + 1 => candidates.push(problem.apply(d)),
            c if c == k => {
                for v in bits_of(all_support & !d) {
                    candidates.push(problem.apply(d | 1 << v));
                }
            }
            _ => {}
        }
    }
    for g in &minimum {
        // lowest addable point keeps the result lowest for this g
        let added = (1..f.len()).filter(|&a| !f.get(a)).find(|&a| {
            let h = g.with(a, true);
            !is_linear(&h) && !g.support_indices().any(|x| x != a && h.get(x ^ a))
        });
        if let Some(a) = added {
            candidates.push(g.with(a, true));
        }
    }
    let witness = candidates
        .into_iter()
        .filter(|h| !is_linear(h))
        .min()
        .ok_or_else(|| Error::InvalidParameters(format!("NLTF has no members at n = {}", f.dim())))?;
    Ok(problem.result(k + 1, witness))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDistance {
    pub value: Rational,
    pub pair: Option<(BoolFn, BoolFn)>,
}

/// `min dist(f, g)` over `f ∈ A`, `g ∈ B` at dimension `n`.
pub fn set_distance(a: &PropertyId, b: &PropertyId, n: u32) -> Result<SetDistance> {
    let left = enumerate(a, n)?;
    let right = enumerate(b, n)?;
    if left.is_empty() || right.is_empty() {
        return Err(Error::InvalidParameters(format!("set distance between {a} and {b} at n = {n} has an empty side")));
    }
    let best = left
        .par_iter()
        .map(|f| nearest(f, &right).map(|found| found.map(|(d, g)| (d, f.clone(), g))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)))
        .expect("both sides non-empty");
    Ok(SetDistance { value: Rational::new(best.0 as i64, 1i64 << n), pair: Some((best.1, best.2)) })
}
