//! Points of F₂ⁿ and truth tables of Boolean functions on them.
//!
//! A point is stored as an integer index where bit `j` holds coordinate
//! `x_{j+1}`, so addition of points is integer xor. A [`BoolFn`] is a packed
//! bit vector of length `2ⁿ` whose entry `i` is the value at point `i`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::BitXor;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest dimension supported by streaming operations.
pub const MAX_DIM: u32 = 24;

fn check_dim(n: u32) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionOutOfRange { n, min: 1, max: MAX_DIM });
    }
    Ok(())
}

fn same_dim(left: u32, right: u32) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    n: u32,
    bits: u32,
}

impl Point {
    pub fn new(n: u32, bits: u32) -> Result<Self> {
        check_dim(n)?;
        if u64::from(bits) >= 1u64 << n {
            return Err(Error::PointOutOfRange { n, bits: bits.into() });
        }
        Ok(Point { n, bits })
    }

    pub fn zero(n: u32) -> Self {
        Point { n, bits: 0 }
    }

    pub fn dim(self) -> u32 {
        self.n
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Coordinate `x_i` for 1-based `i`.
    pub fn coord(self, i: u32) -> bool {
        debug_assert!(i >= 1 && i <= self.n);
        (self.bits >> (i - 1)) & 1 == 1
    }

    /// Inner product `x·y` over F₂.
    pub fn dot(self, other: Point) -> bool {
        debug_assert_eq!(self.n, other.n);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    /// Hamming weight `|x|`.
    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn try_add(self, other: Point) -> Result<Point> {
        same_dim(self.n, other.n)?;
        Ok(Point { n: self.n, bits: self.bits ^ other.bits })
    }
}

/// Addition in F₂ⁿ. Panics on mismatched dimensions; use [`Point::try_add`]
/// for a checked version.
impl BitXor for Point {
    type Output = Point;

    fn bitxor(self, rhs: Point) -> Point {
        assert_eq!(self.n, rhs.n, "adding points of different dimension");
        Point { n: self.n, bits: self.bits ^ rhs.bits }
    }
}

impl fmt::Display for Point {
    /// Coordinates `x_1 … x_n` printed most-significant first, so `11` at n = 2
    /// is index 3 and `01` is index 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in (0..self.n).rev() {
            write!(f, "{}", (self.bits >> j) & 1)?;
        }
        Ok(())
    }
}

/// Truth table of a function F₂ⁿ → {0,1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolFn {
    n: u32,
    words: Vec<u64>,
}

fn word_count(n: u32) -> usize {
    (1usize << n).div_ceil(64)
}

impl BoolFn {
    pub fn zeros(n: u32) -> Result<Self> {
        check_dim(n)?;
        Ok(BoolFn { n, words: vec![0; word_count(n)] })
    }

    pub fn ones(n: u32) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        f.words.iter_mut().for_each(|w| *w = u64::MAX);
        f.mask_tail();
        Ok(f)
    }

    pub fn from_fn(n: u32, mut value: impl FnMut(u32) -> bool) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        for i in 0..f.len() {
            if value(i) {
                f.words[(i >> 6) as usize] |= 1 << (i & 63);
            }
        }
        Ok(f)
    }

    /// Builds a table for `n ≤ 6` from its integer encoding, bit `i` = f(i).
    pub fn from_u64(n: u32, table: u64) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(Error::DimensionOutOfRange { n, min: 1, max: 6 });
        }
        let mut f = BoolFn { n, words: vec![table] };
        f.mask_tail();
        if f.words[0] != table {
            return Err(Error::TruthTable(format!("table {table:#x} has bits beyond 2^{n}")));
        }
        Ok(f)
    }

    /// Parses a string of `2ⁿ` characters from `{0,1}` in index order.
    pub fn from_bit_str(n: u32, bits: &str) -> Result<Self> {
        check_dim(n)?;
        let expected = 1usize << n;
        if bits.len() != expected {
            return Err(Error::TruthTable(format!("expected {expected} table entries for n = {n}, found {}", bits.len())));
        }
        let mut f = Self::zeros(n)?;
        for (i, c) in bits.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => f.words[i >> 6] |= 1 << (i & 63),
                other => return Err(Error::TruthTable(format!("invalid character {:?} at table position {i}", other as char))),
            }
        }
        Ok(f)
    }

    pub fn from_words(n: u32, words: Vec<u64>) -> Result<Self> {
        check_dim(n)?;
        if words.len() != word_count(n) {
            return Err(Error::TruthTable(format!("expected {} words for n = {n}, found {}", word_count(n), words.len())));
        }
        let mut f = BoolFn { n, words };
        let before = f.words.clone();
        f.mask_tail();
        if f.words != before {
            return Err(Error::TruthTable(format!("bits beyond 2^{n} are set")));
        }
        Ok(f)
    }

    fn mask_tail(&mut self) {
        let len = 1u64 << self.n;
        if len < 64 {
            self.words[0] &= (1u64 << len) - 1;
        }
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    /// Number of points, `N = 2ⁿ`.
    pub fn len(&self) -> u32 {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Integer encoding for `n ≤ 6`.
    pub fn as_u64(&self) -> Option<u64> {
        (self.n <= 6).then(|| self.words[0])
    }

    /// Value at index `i`. `i` must be below `2ⁿ`.
    #[inline]
    pub fn get(&self, i: u32) -> bool {
        (self.words[(i >> 6) as usize] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub(crate) fn bit(&self, i: u32) -> u64 {
        (self.words[(i >> 6) as usize] >> (i & 63)) & 1
    }

    pub fn set(&mut self, i: u32, value: bool) {
        let w = &mut self.words[(i >> 6) as usize];
        if value {
            *w |= 1 << (i & 63);
        } else {
            *w &= !(1 << (i & 63));
        }
    }

    pub fn with(&self, i: u32, value: bool) -> BoolFn {
        let mut g = self.clone();
        g.set(i, value);
        g
    }

    pub fn eval(&self, x: Point) -> Result<bool> {
        same_dim(self.n, x.n)?;
        Ok(self.get(x.bits))
    }

    pub fn weight(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Points where the function is 1, in increasing index order.
    pub fn support(&self) -> Vec<Point> {
        self.support_indices().map(|bits| Point { n: self.n, bits }).collect()
    }

    pub fn support_indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some((wi as u32) * 64 + b)
            })
        })
    }

    pub fn complement(&self) -> BoolFn {
        let mut g = BoolFn { n: self.n, words: self.words.iter().map(|w| !w).collect() };
        g.mask_tail();
        g
    }

    fn zip_words(&self, other: &BoolFn, op: impl Fn(u64, u64) -> u64) -> Result<BoolFn> {
        same_dim(self.n, other.n)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| op(*a, *b)).collect();
        Ok(BoolFn { n: self.n, words })
    }

    pub fn or(&self, other: &BoolFn) -> Result<BoolFn> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn and(&self, other: &BoolFn) -> Result<BoolFn> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn xor(&self, other: &BoolFn) -> Result<BoolFn> {
        self.zip_words(other, |a, b| a ^ b)
    }

    /// `supp(self) ⊆ supp(other)`.
    pub fn is_subfunction_of(&self, other: &BoolFn) -> Result<bool> {
        same_dim(self.n, other.n)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    /// Number of points where the two tables differ.
    pub fn disagreements(&self, other: &BoolFn) -> Result<u64> {
        same_dim(self.n, other.n)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| u64::from((a ^ b).count_ones())).sum())
    }

    /// Exact normalized Hamming distance.
    pub fn dist(&self, other: &BoolFn) -> Result<Rational> {
        Ok(Rational::new(self.disagreements(other)? as i64, i64::from(self.len())))
    }

    /// Table as a string of `2ⁿ` characters in index order (the `.tt` body).
    pub fn to_bit_string(&self) -> String {
        (0..self.len()).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for BoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoolFn(n={}, {})", self.n, self.to_bit_string())
    }
}

/// Orders by dimension, then by the table read as an integer with entry `i`
/// weighted `2^i`.
impl Ord for BoolFn {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BoolFn {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The linear function `x ↦ a·x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearForm {
    a: Point,
}

impl LinearForm {
    pub fn new(a: Point) -> Self {
        LinearForm { a }
    }

    pub fn from_bits(n: u32, a: u32) -> Result<Self> {
        Ok(LinearForm { a: Point::new(n, a)? })
    }

    pub fn coefficients(self) -> Point {
        self.a
    }

    pub fn dim(self) -> u32 {
        self.a.n
    }

    pub fn is_trivial(self) -> bool {
        self.a.bits == 0
    }

    pub fn eval(self, x: Point) -> Result<bool> {
        same_dim(self.a.n, x.n)?;
        Ok(self.a.dot(x))
    }

    pub fn materialize(self) -> BoolFn {
        let a = self.a.bits;
        BoolFn::from_fn(self.a.n, |x| (a & x).count_ones() & 1 == 1).expect("dimension already validated")
    }

    /// All `2ⁿ` linear forms in coefficient order.
    pub fn all(n: u32) -> Result<impl Iterator<Item = LinearForm>> {
        check_dim(n)?;
        Ok((0..1u32 << n).map(move |a| LinearForm { a: Point { n, bits: a } }))
    }
}

/// OR of the given linear forms; the empty disjunction is all-zeros.
pub fn make_disjunction(n: u32, forms: &[LinearForm]) -> Result<BoolFn> {
    check_dim(n)?;
    for form in forms {
        same_dim(n, form.dim())?;
    }
    let coeffs: Vec<u32> = forms.iter().map(|f| f.a.bits).collect();
    BoolFn::from_fn(n, |x| coeffs.iter().any(|a| (a & x).count_ones() & 1 == 1))
}
