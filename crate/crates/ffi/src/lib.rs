//! C ABI for bsync.
//!
//! Every function returns a [`BsyncStatus`]; results come back through out
//! parameters. Objects are opaque handles released with their `_free`
//! function. Strings handed out by the library are released with
//! [`bsync_string_free`]. After a failure, [`bsync_last_error`] describes it
//! on the calling thread.
//!
//! Very large terms recurse deeply; callers working with them should run on
//! a thread with a generous stack.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bsync::bits::{count_executions, is_bit_decomposable, BitsError};
use bsync::calculus::{parse_process, validate, CalculusError, ProcessTerm};
use bsync::ctlgraph::{build_ctg, has_deadlock, parse_edge_list, ControlGraph, CtgError};
use bsync::random::{seeded, RandomSource};
use bsync::sampler::{Sampler, SamplerError};
use bsync::subclasses::{fj_count, is_fork_join, sp_tree, SubclassError};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsyncStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Deadlock = 4,
    Inapplicable = 5,
    ResourceLimit = 6,
    Internal = 7,
}

/// A validated process term.
pub struct BsyncProcess(ProcessTerm);

/// A control graph or bare DAG.
pub struct BsyncGraph(ControlGraph);

/// A uniform sampler with its own random stream.
pub struct BsyncSampler {
    sampler: Sampler,
    rng: RandomSource,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Error(BsyncStatus, String);

impl From<CalculusError> for Error {
    fn from(e: CalculusError) -> Self {
        let s = match e {
            CalculusError::LimitExceeded(_) => BsyncStatus::ResourceLimit,
            _ => BsyncStatus::Parse,
        };
        Error(s, e.to_string())
    }
}

impl From<CtgError> for Error {
    fn from(e: CtgError) -> Self {
        let s = match e {
            CtgError::DeadlockedGraph(_) | CtgError::CyclicInput => BsyncStatus::Deadlock,
            CtgError::TooLarge(..) => BsyncStatus::ResourceLimit,
            _ => BsyncStatus::Parse,
        };
        Error(s, e.to_string())
    }
}

impl From<BitsError> for Error {
    fn from(e: BitsError) -> Self {
        let s = match e {
            BitsError::DeadlockedGraph(_) => BsyncStatus::Deadlock,
            BitsError::NonIntegerVolume(_) => BsyncStatus::Internal,
            _ => BsyncStatus::ResourceLimit,
        };
        Error(s, e.to_string())
    }
}

impl From<SamplerError> for Error {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Bits(b) => b.into(),
            other => Error(BsyncStatus::Internal, other.to_string()),
        }
    }
}

impl From<SubclassError> for Error {
    fn from(e: SubclassError) -> Self {
        match e {
            SubclassError::Graph(g) => g.into(),
            other => Error(BsyncStatus::Inapplicable, other.to_string()),
        }
    }
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, record any failure and turn panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> BsyncStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsyncStatus::Ok,
        Ok(Err(Error(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BsyncStatus::Internal
        }
    }
}

fn null() -> Error {
    Error(BsyncStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Error> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Error(BsyncStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Error> {
    p.as_ref().ok_or_else(null)
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bsync_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bsync_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bsync_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse and validate a process term.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsync_process_parse(text_in: *const c_char, out: *mut *mut BsyncProcess) -> BsyncStatus {
    guard(|| {
        let p = parse_process(text(text_in)?)?;
        validate(&p)?;
        put(out, Box::into_raw(Box::new(BsyncProcess(p))))
    })
}

/// # Safety
/// `p` must come from [`bsync_process_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bsync_process_free(p: *mut BsyncProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of actions in the term.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_process_size(p: *const BsyncProcess, out: *mut usize) -> BsyncStatus {
    guard(|| put(out, deref(p)?.0.size()))
}

/// Control graph of a process. Deadlocked processes still yield a graph.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_graph_from_process(p: *const BsyncProcess, out: *mut *mut BsyncGraph) -> BsyncStatus {
    guard(|| {
        let g = build_ctg(&deref(p)?.0)?;
        put(out, Box::into_raw(Box::new(BsyncGraph(g))))
    })
}

/// Parse an edge list: one `u -> v` per line, or a lone vertex name.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsync_graph_parse_edges(text_in: *const c_char, out: *mut *mut BsyncGraph) -> BsyncStatus {
    guard(|| {
        let g = parse_edge_list(text(text_in)?)?;
        put(out, Box::into_raw(Box::new(BsyncGraph(g))))
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bsync_graph_free(g: *mut BsyncGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_graph_num_vertices(g: *const BsyncGraph, out: *mut usize) -> BsyncStatus {
    guard(|| put(out, deref(g)?.0.len()))
}

/// Whether the graph has a cycle or a residual barrier.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_graph_has_deadlock(g: *const BsyncGraph, out: *mut bool) -> BsyncStatus {
    guard(|| put(out, has_deadlock(&deref(g)?.0)))
}

/// Exact number of executions as a decimal string.
///
/// # Safety
/// Pointers must be valid; free the result with [`bsync_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bsync_count(g: *const BsyncGraph, out: *mut *mut c_char) -> BsyncStatus {
    guard(|| {
        let c = count_executions(&deref(g)?.0)?;
        put(out, c_string(c.to_string()))
    })
}

/// Exact count through the fork-join shape of the term.
///
/// # Safety
/// Pointers must be valid; free the result with [`bsync_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bsync_count_fork_join(p: *const BsyncProcess, out: *mut *mut c_char) -> BsyncStatus {
    guard(|| {
        let t = sp_tree(&deref(p)?.0)?;
        put(out, c_string(fj_count(&t).to_string()))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_is_fork_join(p: *const BsyncProcess, out: *mut bool) -> BsyncStatus {
    guard(|| put(out, is_fork_join(&deref(p)?.0)))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_is_bit_decomposable(g: *const BsyncGraph, out: *mut bool) -> BsyncStatus {
    guard(|| put(out, is_bit_decomposable(&deref(g)?.0)?))
}

/// Prepare a uniform sampler for `g`, seeded with `seed`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bsync_sampler_new(g: *const BsyncGraph, seed: u64, out: *mut *mut BsyncSampler) -> BsyncStatus {
    guard(|| {
        let sampler = Sampler::new(&deref(g)?.0)?;
        let handle = BsyncSampler {
            sampler,
            rng: seeded(seed),
        };
        put(out, Box::into_raw(Box::new(handle)))
    })
}

/// Next execution as space-separated action labels.
///
/// # Safety
/// Pointers must be valid; free the result with [`bsync_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bsync_sampler_next(s: *mut BsyncSampler, out: *mut *mut c_char) -> BsyncStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(null)?;
        let e = s.sampler.sample(&mut s.rng)?;
        put(out, c_string(e.to_string()))
    })
}

/// # Safety
/// `s` must come from [`bsync_sampler_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bsync_sampler_free(s: *mut BsyncSampler) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
