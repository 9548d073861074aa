//! GF(2ᵏ) arithmetic, polynomials over GF(2ᵏ), Hadamard concatenation and the
//! distance facts behind the non-testability construction: low-degree
//! polynomials are far from polynomials of one degree higher, concatenating
//! with the Hadamard code halves distances exactly, and any few points of a
//! high-degree polynomial are matched by a low-degree one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::BoolFn;
use crate::rational::{ratio, ExactValue, Rational};
use crate::testers::RandomSource;

pub const MAX_K: u32 = 8;
/// Largest `k` for which [`had_distance_check`] builds the two tables.
pub const MAX_HAD_CHECK_K: u32 = 6;
/// Largest number of monic difference polynomials enumerated exhaustively.
pub const MAX_EXHAUSTIVE_POLYS: u64 = 1 << 24;
/// Monic difference polynomials drawn when enumeration is out of reach.
pub const DISTANCE_SAMPLES: u64 = 1 << 20;
/// Largest `k` accepted by [`min_poly_distance`] and [`hardness_report`].
pub const MAX_REPORT_K: u32 = 4;

/// Lexicographically least irreducible polynomial of degree `k`, bit `i`
/// holding the coefficient of `xⁱ`.
const MODULI: [u32; 9] = [0, 0b10, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_0011, 0x11B];

pub fn modulus(k: u32) -> Result<u32> {
    check_k(k)?;
    Ok(MODULI[k as usize])
}

fn check_k(k: u32) -> Result<()> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::InvalidParameters(format!("extension degree k must be in 1..={MAX_K}, got {k}")));
    }
    Ok(())
}

/// An element of GF(2ᵏ) as a residue modulo the fixed irreducible for `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem2k {
    k: u32,
    bits: u32,
}

#[allow(clippy::should_implement_trait)]
impl FieldElem2k {
    pub fn new(k: u32, bits: u32) -> Result<Self> {
        check_k(k)?;
        if bits >> k != 0 {
            return Err(Error::InvalidParameters(format!("{bits} is not an element of GF(2^{k})")));
        }
        Ok(FieldElem2k { k, bits })
    }

    pub fn zero(k: u32) -> Result<Self> {
        Self::new(k, 0)
    }

    pub fn one(k: u32) -> Result<Self> {
        Self::new(k, 1)
    }

    /// Every element of GF(2ᵏ) in increasing bit order.
    pub fn all(k: u32) -> Result<impl Iterator<Item = FieldElem2k>> {
        check_k(k)?;
        Ok((0..1u32 << k).map(move |bits| FieldElem2k { k, bits }))
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    fn same_field(self, other: Self) {
        assert_eq!(self.k, other.k, "field elements from GF(2^{}) and GF(2^{})", self.k, other.k);
    }

    pub fn add(self, other: Self) -> Self {
        self.same_field(other);
        FieldElem2k { k: self.k, bits: self.bits ^ other.bits }
    }

    pub fn mul(self, other: Self) -> Self {
        self.same_field(other);
        FieldElem2k { k: self.k, bits: mul_bits(self.k, self.bits, other.bits) }
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self.bits;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_bits(self.k, acc, base);
            }
            base = mul_bits(self.k, base, base);
            e >>= 1;
        }
        FieldElem2k { k: self.k, bits: acc }
    }

    /// Multiplicative inverse via `a^(2ᵏ−2)`.
    pub fn inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroInverse { k: self.k });
        }
        Ok(self.pow((1u64 << self.k) - 2))
    }

    /// Inner product with `y` over F₂ᵏ.
    pub fn dot(self, y: u32) -> bool {
        (self.bits & y).count_ones() & 1 == 1
    }
}

fn mul_bits(k: u32, a: u32, b: u32) -> u32 {
    let mut product = 0u32;
    for i in 0..k {
        if (b >> i) & 1 == 1 {
            product ^= a << i;
        }
    }
    let m = MODULI[k as usize];
    for i in (k..2 * k).rev() {
        if (product >> i) & 1 == 1 {
            product ^= m << (i - k);
        }
    }
    product
}

/// A polynomial over GF(2ᵏ), coefficients in increasing degree with no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyOverF2k {
    k: u32,
    coeffs: Vec<u32>,
}

impl PolyOverF2k {
    pub fn zero(k: u32) -> Result<Self> {
        check_k(k)?;
        Ok(PolyOverF2k { k, coeffs: Vec::new() })
    }

    pub fn constant(c: FieldElem2k) -> Self {
        Self::normalized(c.k, vec![c.bits])
    }

    /// Builds from raw coefficient bits, lowest degree first.
    pub fn from_coeffs(k: u32, coeffs: &[u32]) -> Result<Self> {
        check_k(k)?;
        for &c in coeffs {
            FieldElem2k::new(k, c)?;
        }
        let p = Self::normalized(k, coeffs.to_vec());
        if let Some(d) = p.degree() {
            if d >= 1 << k {
                return Err(Error::InvalidParameters(format!("degree {d} exceeds 2^{k} - 1")));
            }
        }
        Ok(p)
    }

    fn normalized(k: u32, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyOverF2k { k, coeffs }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: FieldElem2k) -> FieldElem2k {
        assert_eq!(self.k, x.k);
        let bits = self.coeffs.iter().rev().fold(0, |acc, &c| mul_bits(self.k, acc, x.bits) ^ c);
        FieldElem2k { k: self.k, bits }
    }

    /// Evaluation as `Σ cᵢ xⁱ` with explicit powers, independent of Horner.
    pub fn eval_by_powers(&self, x: FieldElem2k) -> FieldElem2k {
        let mut acc = FieldElem2k { k: self.k, bits: 0 };
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc = acc.add(FieldElem2k { k: self.k, bits: c }.mul(x.pow(i as u64)));
        }
        acc
    }

    /// Values at every field element, indexed by the element's bits.
    pub fn values(&self) -> Vec<u32> {
        (0..1u32 << self.k).map(|x| self.eval(FieldElem2k { k: self.k, bits: x }).bits).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k);
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeffs.get(i).copied().unwrap_or(0) ^ other.coeffs.get(i).copied().unwrap_or(0)).collect();
        Self::normalized(self.k, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::normalized(self.k, Vec::new());
        }
        let mut coeffs = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] ^= mul_bits(self.k, a, b);
            }
        }
        Self::normalized(self.k, coeffs)
    }

    pub fn scale(&self, c: FieldElem2k) -> Self {
        Self::normalized(self.k, self.coeffs.iter().map(|&a| mul_bits(self.k, a, c.bits)).collect())
    }

    /// A uniformly random polynomial of degree exactly `deg`.
    pub fn random_of_degree(k: u32, deg: usize, rng: &mut RandomSource) -> Result<Self> {
        check_k(k)?;
        if deg >= 1 << k {
            return Err(Error::InvalidParameters(format!("degree {deg} exceeds 2^{k} - 1")));
        }
        let mask = (1u64 << k) - 1;
        let mut coeffs: Vec<u32> = (0..deg).map(|_| (rng.next_u64() & mask) as u32).collect();
        let lead = loop {
            let c = (rng.next_u64() & mask) as u32;
            if c != 0 {
                break c;
            }
        };
        coeffs.push(lead);
        Ok(PolyOverF2k { k, coeffs })
    }
}

/// Relative distance between two functions given by their value tables.
fn table_distance(a: &[u32], b: &[u32]) -> Rational {
    let differ = a.iter().zip(b).filter(|(x, y)| x != y).count();
    ratio(differ as i64, a.len() as i64)
}

/// Distance between `p` and `g` as functions GF(2ᵏ) → GF(2ᵏ).
pub fn poly_distance(p: &PolyOverF2k, g: &PolyOverF2k) -> Rational {
    assert_eq!(p.k, g.k);
    table_distance(&p.values(), &g.values())
}

/// `(Had∘g)(x, y) = g(x)·y` on F₂²ᵏ, with `x` in the low `k` bits of the
/// point index and `y` in the high `k` bits.
pub fn had_concat(g: &PolyOverF2k) -> BoolFn {
    let k = g.k;
    let values = g.values();
    let mask = (1u32 << k) - 1;
    BoolFn::from_fn(2 * k, |idx| (values[(idx & mask) as usize] & (idx >> k)).count_ones() & 1 == 1)
        .expect("2k is a valid dimension for k <= 8")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadDistance {
    /// Distance between the two concatenated tables on F₂²ᵏ.
    pub concat: Rational,
    /// Distance between the polynomials as functions on GF(2ᵏ).
    pub poly: Rational,
}

impl HadDistance {
    pub fn halves(&self) -> bool {
        self.concat * 2 == self.poly
    }
}

/// Compares `Had∘p` with `Had∘g` table by table. Each disagreeing `x`
/// contributes exactly `2^{k−1}` disagreeing `y`, so `concat = poly / 2`.
pub fn had_distance_check(p: &PolyOverF2k, g: &PolyOverF2k) -> Result<HadDistance> {
    if p.k != g.k {
        return Err(Error::InvalidParameters(format!("polynomials over GF(2^{}) and GF(2^{})", p.k, g.k)));
    }
    if p.k > MAX_HAD_CHECK_K {
        return Err(Error::CapExceeded { what: "k for the concatenation check", value: p.k.into(), cap: MAX_HAD_CHECK_K.into() });
    }
    let concat = had_concat(p).dist(&had_concat(g))?;
    Ok(HadDistance { concat, poly: poly_distance(p, g) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDistance {
    pub value: Rational,
    /// Whether every candidate was enumerated; otherwise `value` is the
    /// minimum over a sample and hence an upper bound on the true minimum.
    pub exhaustive: bool,
    /// A pair `(p, g)` attaining `value`.
    pub witness: (PolyOverF2k, PolyOverF2k),
}

/// Minimum of `dist(p, g)` over `p` of degree at most `deg_a` and `g` of
/// degree exactly `deg_b`.
///
/// Reduces to the difference `h = g − p`: when `deg_b > deg_a` the
/// differences are exactly the polynomials of degree `deg_b`, and scaling by a
/// nonzero constant preserves the zero set, so only monic `h` are scanned.
/// Exhaustive when there are at most [`MAX_EXHAUSTIVE_POLYS`] monic
/// candidates, sampled from `seed` otherwise.
pub fn min_poly_distance(deg_a: usize, deg_b: usize, k: u32, seed: u64) -> Result<PolyDistance> {
    check_k(k)?;
    if k > MAX_REPORT_K {
        return Err(Error::CapExceeded { what: "k for the polynomial distance search", value: k.into(), cap: MAX_REPORT_K.into() });
    }
    let q = 1usize << k;
    if deg_a >= q || deg_b >= q {
        return Err(Error::InvalidParameters(format!("degrees must be below 2^{k} = {q}")));
    }
    let monic = |lower: &[u32]| {
        let mut coeffs = lower.to_vec();
        coeffs.push(1);
        PolyOverF2k { k, coeffs }
    };
    if deg_a >= deg_b {
        let g = monic(&vec![0; deg_b]);
        return Ok(PolyDistance { value: Rational::from_integer(0), exhaustive: true, witness: (g.clone(), g) });
    }
    let zeros_of = |lower: &[u32]| {
        let h = monic(lower);
        (0..q as u32).filter(|&x| h.eval(FieldElem2k { k, bits: x }).is_zero()).count()
    };
    let candidates = (q as u64).checked_pow(deg_b as u32).unwrap_or(u64::MAX);
    let decode = |mut index: u64| -> Vec<u32> {
        (0..deg_b)
            .map(|_| {
                let c = (index % q as u64) as u32;
                index /= q as u64;
                c
            })
            .collect()
    };
    let (best_lower, exhaustive) = if candidates <= MAX_EXHAUSTIVE_POLYS {
        let best =
            (0..candidates).into_par_iter().map(|i| (zeros_of(&decode(i)), std::cmp::Reverse(i))).max().expect("at least one candidate");
        (decode(best.1 .0), true)
    } else {
        let mut rng = RandomSource::new(seed);
        let mask = q as u64 - 1;
        let draws: Vec<Vec<u32>> = (0..DISTANCE_SAMPLES).map(|_| (0..deg_b).map(|_| (rng.next_u64() & mask) as u32).collect()).collect();
        let best =
            draws.par_iter().enumerate().map(|(i, lower)| (zeros_of(lower), std::cmp::Reverse(i))).max().expect("at least one sample");
        (draws[best.1 .0].clone(), false)
    };
    let g = monic(&best_lower);
    let zeros = zeros_of(&best_lower);
    let p = PolyOverF2k { k, coeffs: Vec::new() };
    Ok(PolyDistance { value: ratio((q - zeros) as i64, q as i64), exhaustive, witness: (p, g) })
}

/// Lagrange interpolation: the unique polynomial of degree below
/// `points.len()` through the given points, checked against `max_deg`.
pub fn interpolation_agreement(points: &[(FieldElem2k, FieldElem2k)], max_deg: usize) -> Result<PolyOverF2k> {
    let Some(&(first, _)) = points.first() else {
        return Ok(PolyOverF2k { k: 1, coeffs: Vec::new() });
    };
    let k = first.k;
    if points.len() > max_deg + 1 {
        return Err(Error::InvalidParameters(format!(
            "{} points cannot be matched by a polynomial of degree <= {max_deg} in general",
            points.len()
        )));
    }
    for (i, &(a, b)) in points.iter().enumerate() {
        if a.k != k || b.k != k {
            return Err(Error::InvalidParameters("points from different fields".into()));
        }
        if points[..i].iter().any(|&(c, _)| c == a) {
            return Err(Error::RepeatedAbscissa(a.bits));
        }
    }
    let mut result = PolyOverF2k { k, coeffs: Vec::new() };
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut basis = PolyOverF2k::constant(FieldElem2k { k, bits: 1 });
        let mut denom = FieldElem2k { k, bits: 1 };
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                basis = basis.mul(&PolyOverF2k::normalized(k, vec![xj.bits, 1]));
                denom = denom.mul(xi.add(xj));
            }
        }
        result = result.add(&basis.scale(yi.mul(denom.inv()?)));
    }
    Ok(result)
}

/// Calls `visit` on every `m`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, m: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else { return };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HardnessReport {
    pub k: u32,
    pub seed: u64,
    pub low_degree: usize,
    pub high_degree: usize,
    pub min_poly_distance: ExactValue,
    pub min_poly_distance_exhaustive: bool,
    pub concat_distance: ExactValue,
    pub halving_pairs_checked: u64,
    pub halving_holds: bool,
    pub interpolation_polys: u64,
    pub interpolation_subsets: u64,
    pub interpolation_checks_passed: bool,
}

/// Number of random high-degree polynomials used for the interpolation and
/// halving checks in [`hardness_report`].
pub const REPORT_POLYS: u64 = 20;

/// Runs the distance facts at `k` with the degree pair `2^{k−1}−1` and
/// `2^{k−1}`: the minimum polynomial distance, the concatenated distance of
/// the minimizing pair, halving on random pairs, and interpolation through
/// every `(2^{k−1}−1)`-subset of the graphs of random degree-`2^{k−1}`
/// polynomials.
pub fn hardness_report(k: u32, seed: u64) -> Result<HardnessReport> {
    check_k(k)?;
    if k > MAX_REPORT_K {
        return Err(Error::CapExceeded { what: "k for the hardness report", value: k.into(), cap: MAX_REPORT_K.into() });
    }
    let high = 1usize << (k - 1);
    let low = high - 1;
    let min = min_poly_distance(low, high, k, seed)?;
    let (p, g) = &min.witness;
    let witness = had_distance_check(p, g)?;
    let mut halving_holds = witness.halves();

    let mut rng = RandomSource::new(seed);
    let mask = (1u64 << k) - 1;
    let mut subsets = 0;
    let mut interpolation_ok = true;
    for _ in 0..REPORT_POLYS {
        let g = PolyOverF2k::random_of_degree(k, high, &mut rng)?;
        let p_coeffs: Vec<u32> = (0..=low).map(|_| (rng.next_u64() & mask) as u32).collect();
        let p = PolyOverF2k::normalized(k, p_coeffs);
        halving_holds &= had_distance_check(&p, &g)?.halves();

        let graph: Vec<(FieldElem2k, FieldElem2k)> = FieldElem2k::all(k)?.map(|x| (x, g.eval(x))).collect();
        let mut failure = None;
        for_each_subset(graph.len(), low, |idx| {
            subsets += 1;
            let pts: Vec<_> = idx.iter().map(|&i| graph[i]).collect();
            match interpolation_agreement(&pts, low) {
                Ok(q) if q.degree().is_none_or(|d| d <= low) && pts.iter().all(|&(x, y)| q.eval(x) == y) => true,
                Ok(_) => {
                    interpolation_ok = false;
                    false
                }
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(HardnessReport {
        k,
        seed,
        low_degree: low,
        high_degree: high,
        min_poly_distance: (&min.value).into(),
        min_poly_distance_exhaustive: min.exhaustive,
        concat_distance: (&witness.concat).into(),
        halving_pairs_checked: REPORT_POLYS + 1,
        halving_holds,
        interpolation_polys: REPORT_POLYS,
        interpolation_subsets: subsets,
        interpolation_checks_passed: interpolation_ok,
    })
}
