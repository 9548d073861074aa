//! Multiset patterns over triples `(f(x), f(y), f(x+y))`: exact ordered-pair
//! counts, single-round rejection probabilities, and the unordered triangle
//! census.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{BoolFn, Point};
use crate::rational::Rational;

/// Largest dimension for the exhaustive `4ⁿ` pair scans.
pub const MAX_PAIR_SCAN_DIM: u32 = 14;

/// Below this dimension the pair scan stays on the calling thread.
const PARALLEL_SCAN_DIM: u32 = 9;

/// A pattern is identified by the number of ones in the multiset
/// `{f(x), f(y), f(x+y)}`: 1 is `(1,0,0)`, 2 is `(1,1,0)`, 3 is `(1,1,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternClass {
    ones: u8,
}

impl PatternClass {
    pub const P100: PatternClass = PatternClass { ones: 1 };
    pub const P110: PatternClass = PatternClass { ones: 2 };
    pub const P111: PatternClass = PatternClass { ones: 3 };

    pub fn new(ones: u8) -> Result<Self> {
        if !(1..=3).contains(&ones) {
            return Err(Error::InvalidParameters(format!("a pattern has 1, 2 or 3 ones, not {ones}")));
        }
        Ok(PatternClass { ones })
    }

    pub fn ones(self) -> u8 {
        self.ones
    }

    /// Whether the three bits form this pattern, in any order.
    #[inline]
    pub fn matches(self, a: bool, b: bool, c: bool) -> bool {
        u8::from(a) + u8::from(b) + u8::from(c) == self.ones
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ones {
            1 => write!(f, "(1,0,0)"),
            2 => write!(f, "(1,1,0)"),
            _ => write!(f, "(1,1,1)"),
        }
    }
}

impl FromStr for PatternClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits: String = s.chars().filter(|c| *c == '0' || *c == '1').collect();
        if digits.len() != 3 || s.chars().any(|c| !"01(), ".contains(c)) {
            return Err(Error::InvalidParameters(format!("unrecognized pattern {s:?}")));
        }
        let ones = digits.bytes().filter(|b| *b == b'1').count() as u8;
        PatternClass::new(ones)
    }
}

pub fn has_pattern(f: &BoolFn, x: Point, y: Point, p: PatternClass) -> Result<bool> {
    let fx = f.eval(x)?;
    let fy = f.eval(y)?;
    let fxy = f.eval(x.try_add(y)?)?;
    Ok(p.matches(fx, fy, fxy))
}

/// For one fixed `x`, how many `y` give each value pair `(f(y), f(x+y))`,
/// indexed by `2·f(y) + f(x+y)`.
pub type PairCounts = [u64; 4];

fn check_scan_dim(f: &BoolFn) -> Result<()> {
    if f.dim() > MAX_PAIR_SCAN_DIM {
        return Err(Error::CapExceeded {
            what: "dimension for an exhaustive pair scan",
            value: f.dim().into(),
            cap: MAX_PAIR_SCAN_DIM.into(),
        });
    }
    Ok(())
}

fn pair_counts_at(f: &BoolFn, x: u32) -> PairCounts {
    let mut counts = [0u64; 4];
    for y in 0..f.len() {
        counts[((f.bit(y) << 1) | f.bit(x ^ y)) as usize] += 1;
    }
    counts
}

/// `PairCounts` for every `x`, by a full scan over all `4ⁿ` ordered pairs.
pub fn pair_profile(f: &BoolFn) -> Result<Vec<PairCounts>> {
    check_scan_dim(f)?;
    if f.dim() < PARALLEL_SCAN_DIM {
        Ok((0..f.len()).map(|x| pair_counts_at(f, x)).collect())
    } else {
        Ok((0..f.len()).into_par_iter().map(|x| pair_counts_at(f, x)).collect())
    }
}

/// Number of ordered pairs `(x, y)`, including `x = y` and zero points, whose
/// triple exhibits `p`.
pub fn count_ordered_violations(f: &BoolFn, p: PatternClass) -> Result<u64> {
    let profile = pair_profile(f)?;
    Ok(profile
        .iter()
        .enumerate()
        .map(|(x, counts)| {
            let fx = f.get(x as u32);
            counts.iter().enumerate().filter(|(ab, _)| p.matches(fx, ab & 2 != 0, ab & 1 != 0)).map(|(_, c)| *c).sum::<u64>()
        })
        .sum())
}

/// Exact probability that one round of the pattern test on uniform `(x, y)`
/// sees `p`.
pub fn rejection_probability(f: &BoolFn, p: PatternClass) -> Result<Rational> {
    let count = count_ordered_violations(f, p)?;
    let pairs = 1i64 << (2 * f.dim());
    Ok(Rational::new(count as i64, pairs))
}

/// Unordered triangles `{x, y, x+y}` on which `f` is identically 1. A
/// degenerate triple (only possible when `f(0) = 1`) is counted once, as the
/// set of its distinct points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleCensus {
    pub unordered_count: u64,
    /// Triangles containing each point; points in no triangle are omitted.
    pub per_point: BTreeMap<u32, u64>,
}

impl TriangleCensus {
    pub fn per_point_at(&self, x: u32) -> u64 {
        self.per_point.get(&x).copied().unwrap_or(0)
    }
}

/// Calls `visit` with the distinct points of every triangle, smallest first.
pub fn for_each_triangle(f: &BoolFn, mut visit: impl FnMut(&[u32])) {
    let support: Vec<u32> = f.support_indices().collect();
    if f.get(0) {
        visit(&[0]);
        for &x in support.iter().filter(|&&x| x != 0) {
            visit(&[0, x]);
        }
    }
    let nonzero: Vec<u32> = support.into_iter().filter(|&x| x != 0).collect();
    for (i, &x) in nonzero.iter().enumerate() {
        for &y in &nonzero[i + 1..] {
            let z = x ^ y;
            if z > y && f.get(z) {
                visit(&[x, y, z]);
            }
        }
    }
}

pub fn count_triangles(f: &BoolFn) -> TriangleCensus {
    let mut unordered_count = 0;
    let mut per_point = BTreeMap::new();
    for_each_triangle(f, |points| {
        unordered_count += 1;
        for &p in points {
            *per_point.entry(p).or_insert(0) += 1;
        }
    });
    TriangleCensus { unordered_count, per_point }
}
