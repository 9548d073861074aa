//! C ABI over `ptlab`. Truth tables and testers cross the boundary as opaque
//! handles that the caller frees. Every fallible call returns a
//! [`PtlabStatus`]; on failure [`ptlab_last_error_message`] describes the
//! error for the calling thread. Exact rationals come back as
//! [`PtlabFraction`] numerator/denominator pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ptlab::combinators::parse_tester;
use ptlab::patterns::{count_triangles, rejection_probability, PatternClass};
use ptlab::properties::{distance_to, membership, PropertyId};
use ptlab::testers::{run_once, Tester};
use ptlab::{BoolFn, Error, Rational};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutOfRange = 4,
    CapExceeded = 5,
    Parse = 6,
    Io = 7,
    Unsupported = 8,
    Panic = 9,
}

/// An exact rational `num / den` with `den > 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PtlabFraction {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for PtlabFraction {
    fn from(r: Rational) -> Self {
        PtlabFraction { num: *r.numer(), den: *r.denom() }
    }
}

/// Outcome of one tester run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PtlabVerdict {
    pub accept: bool,
    pub rounds: u64,
    pub queries: u64,
    pub seed: u64,
}

/// Opaque truth table of a Boolean function on F₂ⁿ.
pub struct PtlabBoolFn(BoolFn);

/// Opaque tester built from an expression.
pub struct PtlabTester(Box<dyn Tester>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PtlabStatus {
    match err {
        Error::DimensionMismatch { .. } => PtlabStatus::DimensionMismatch,
        Error::DimensionOutOfRange { .. } | Error::PointOutOfRange { .. } => PtlabStatus::OutOfRange,
        Error::CapExceeded { .. } => PtlabStatus::CapExceeded,
        Error::Parse { .. } | Error::TruthTable(_) => PtlabStatus::Parse,
        Error::Io(_) => PtlabStatus::Io,
        Error::UnsupportedProperty(_) => PtlabStatus::Unsupported,
        _ => PtlabStatus::InvalidArgument,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (PtlabStatus, String)>) -> PtlabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PtlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PtlabStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PtlabStatus, String)>;
}

impl<T> IntoFfi<T> for ptlab::Result<T> {
    fn ffi(self) -> Result<T, (PtlabStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (PtlabStatus, String) {
    (PtlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PtlabStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PtlabStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PtlabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (PtlabStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn epsilon(eps: PtlabFraction) -> Result<Rational, (PtlabStatus, String)> {
    if eps.den <= 0 {
        return Err((PtlabStatus::InvalidArgument, "epsilon denominator must be positive".into()));
    }
    Ok(Rational::new(eps.num, eps.den))
}

/// Message for the last failing call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ptlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a function from `2ⁿ` characters `'0'`/`'1'` in index order.
///
/// # Safety
/// `bits` must be a NUL-terminated string and `out_fn` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_from_bits(n: u32, bits: *const c_char, out_fn: *mut *mut PtlabBoolFn) -> PtlabStatus {
    guard(|| {
        let slot = out(out_fn, "out")?;
        let f = BoolFn::from_bit_str(n, string(bits, "bits")?).ffi()?;
        *slot = Box::into_raw(Box::new(PtlabBoolFn(f)));
        Ok(())
    })
}

/// Reads a `.tt` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_fn` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_read_tt(path: *const c_char, out_fn: *mut *mut PtlabBoolFn) -> PtlabStatus {
    guard(|| {
        let slot = out(out_fn, "out")?;
        let f = ptlab::tt::read(string(path, "path")?).ffi()?;
        *slot = Box::into_raw(Box::new(PtlabBoolFn(f)));
        Ok(())
    })
}

/// Frees a function handle. NULL is ignored.
///
/// # Safety
/// `f` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_free(f: *mut PtlabBoolFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Dimension `n`, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_dim(f: *const PtlabBoolFn) -> u32 {
    f.as_ref().map_or(0, |f| f.0.dim())
}

/// Writes the table as `2ⁿ` characters plus a NUL into `buf` when it fits.
/// `needed` always receives the required buffer size including the NUL.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes; `needed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_to_bits(f: *const PtlabBoolFn, buf: *mut c_char, len: usize, needed: *mut usize) -> PtlabStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let needed = out(needed, "needed")?;
        let text = f.0.to_bit_string();
        *needed = text.len() + 1;
        if buf.is_null() || len < text.len() + 1 {
            return Err((PtlabStatus::OutOfRange, format!("buffer needs {} bytes", text.len() + 1)));
        }
        ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// `f(x)` for the point with index `x` (bit `j` holds coordinate `j+1`).
///
/// # Safety
/// `f` and `value` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_eval(f: *const PtlabBoolFn, x: u32, value: *mut bool) -> PtlabStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let value = out(value, "value")?;
        let point = ptlab::Point::new(f.0.dim(), x).ffi()?;
        *value = f.0.eval(point).ffi()?;
        Ok(())
    })
}

/// Number of points where `f` is 1.
///
/// # Safety
/// `f` and `weight` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_weight(f: *const PtlabBoolFn, weight: *mut u64) -> PtlabStatus {
    guard(|| {
        *out(weight, "weight")? = borrow(f, "f")?.0.weight();
        Ok(())
    })
}

/// Relative Hamming distance between two functions of the same dimension.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ptlab_boolfn_dist(f: *const PtlabBoolFn, g: *const PtlabBoolFn, dist: *mut PtlabFraction) -> PtlabStatus {
    guard(|| {
        let d = borrow(f, "f")?.0.dist(&borrow(g, "g")?.0).ffi()?;
        *out(dist, "dist")? = d.into();
        Ok(())
    })
}

/// Exact probability that one uniform `(x, y)` draw shows the pattern with
/// `ones` ones (0 to 3) on `(f(x), f(y), f(x+y))`.
///
/// # Safety
/// `f` and `prob` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ptlab_rejection_probability(f: *const PtlabBoolFn, ones: u8, prob: *mut PtlabFraction) -> PtlabStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let p = PatternClass::new(ones).ffi()?;
        *out(prob, "prob")? = rejection_probability(&f.0, p).ffi()?.into();
        Ok(())
    })
}

/// Number of unordered triangles `{x, y, x+y}` inside the support.
///
/// # Safety
/// `f` and `count` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ptlab_triangle_count(f: *const PtlabBoolFn, count: *mut u64) -> PtlabStatus {
    guard(|| {
        *out(count, "count")? = count_triangles(&borrow(f, "f")?.0).unordered_count;
        Ok(())
    })
}

/// Exact distance to a property named `lin`, `free100`, `free110`, `free111`,
/// `nltf` or `all1`. When `witness` is not NULL it receives a new handle for a
/// nearest member (NULL if the property has none to report).
///
/// # Safety
/// `property` must be a NUL-terminated string; other pointers valid or, for
/// `witness`, NULL.
#[no_mangle]
pub unsafe extern "C" fn ptlab_distance_to(
    property: *const c_char,
    f: *const PtlabBoolFn,
    dist: *mut PtlabFraction,
    witness: *mut *mut PtlabBoolFn,
) -> PtlabStatus {
    guard(|| {
        let id: PropertyId = string(property, "property")?.parse().ffi()?;
        let f = borrow(f, "f")?;
        let dist = out(dist, "dist")?;
        let result = distance_to(&id, &f.0).ffi()?;
        *dist = result.value.into();
        if let Some(slot) = witness.as_mut() {
            *slot = result.witness.map_or(ptr::null_mut(), |w| Box::into_raw(Box::new(PtlabBoolFn(w))));
        }
        Ok(())
    })
}

/// Whether `f` belongs to the named property.
///
/// # Safety
/// `property` must be a NUL-terminated string; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn ptlab_membership(property: *const c_char, f: *const PtlabBoolFn, member: *mut bool) -> PtlabStatus {
    guard(|| {
        let id: PropertyId = string(property, "property")?.parse().ffi()?;
        *out(member, "member")? = membership(&id, &borrow(f, "f")?.0).ffi()?;
        Ok(())
    })
}

/// Parses a tester expression such as `"intersect(free111, free100, eps0=1/4)"`.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out_tester` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptlab_tester_parse(expr: *const c_char, out_tester: *mut *mut PtlabTester) -> PtlabStatus {
    guard(|| {
        let slot = out(out_tester, "out")?;
        let t = parse_tester(string(expr, "expr")?).ffi()?;
        *slot = Box::into_raw(Box::new(PtlabTester(t)));
        Ok(())
    })
}

/// Frees a tester handle. NULL is ignored.
///
/// # Safety
/// `t` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ptlab_tester_free(t: *mut PtlabTester) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Worst-case query count at distance parameter `eps`.
///
/// # Safety
/// `t` and `queries` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ptlab_tester_budget(t: *const PtlabTester, eps: PtlabFraction, queries: *mut u64) -> PtlabStatus {
    guard(|| {
        let t = borrow(t, "tester")?;
        *out(queries, "queries")? = t.0.budget(&epsilon(eps)?).ffi()?;
        Ok(())
    })
}

/// Runs the tester once on `f` with a fresh oracle and the given seed.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ptlab_tester_run(
    t: *const PtlabTester,
    f: *const PtlabBoolFn,
    eps: PtlabFraction,
    seed: u64,
    verdict: *mut PtlabVerdict,
) -> PtlabStatus {
    guard(|| {
        let t = borrow(t, "tester")?;
        let f = borrow(f, "f")?;
        let verdict = out(verdict, "verdict")?;
        let v = run_once(t.0.as_ref(), &f.0, &epsilon(eps)?, seed).ffi()?;
        *verdict = PtlabVerdict { accept: v.accept, rounds: v.rounds_run, queries: v.queries_used, seed: v.seed };
        Ok(())
    })
}
