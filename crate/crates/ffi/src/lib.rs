//! C interface to `ultratree`.
//!
//! Trees and indexes are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a [`UtStatus`];
//! on failure a message is kept per thread and read back with
//! [`ut_last_error`]. Strings returned through out-parameters are owned by
//! the caller and released with [`ut_string_free`]. Exact values cross the
//! boundary as `"p/q"` strings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ultratree::generators::{truncate, LabelingScheme, TreeGenerator};
use ultratree::index::IndexError;
use ultratree::io::{tree_from_json, tree_to_json, ReadError};
use ultratree::{LabeledTree, Radius, UltrametricIndex, VertexId};

/// A finite labeled tree.
pub struct UtTree(LabeledTree);

/// Distance index over a tree.
pub struct UtIndex(UltrametricIndex);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// malformed JSON, fraction or vertex id
    InvalidInput = 3,
    /// the input is well formed but not a valid tree
    InvalidTree = 4,
    /// some edge has both endpoints labeled 0
    Degenerate = 5,
    UnknownVertex = 6,
    /// a generator could not be truncated with the given scheme
    Generator = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: UtStatus, message: impl std::fmt::Display) -> UtStatus {
    let text = CString::new(message.to_string().replace('\0', " ")).expect("nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
    status
}

fn guard(f: impl FnOnce() -> Result<(), UtStatus>) -> UtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(UtStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, UtStatus> {
    if s.is_null() {
        return Err(fail(UtStatus::NullPointer, "null string argument"));
    }
    // SAFETY: non-null and, by contract, a nul-terminated string
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|e| fail(UtStatus::InvalidUtf8, e))
}

unsafe fn vertex(s: *const c_char) -> Result<VertexId, UtStatus> {
    unsafe { text(s) }?.parse().map_err(|e| fail(UtStatus::InvalidInput, e))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), UtStatus> {
    if out.is_null() {
        return Err(fail(UtStatus::NullPointer, "null out-parameter"));
    }
    // SAFETY: non-null and, by contract, valid for writes
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), UtStatus> {
    let c = CString::new(s).map_err(|e| fail(UtStatus::InvalidInput, e))?;
    unsafe { put(out, c.into_raw()) }
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, UtStatus> {
    // SAFETY: by contract a live handle from this library, or null
    unsafe { p.as_ref() }.ok_or_else(|| fail(UtStatus::NullPointer, "null handle"))
}

fn index_status(e: IndexError) -> UtStatus {
    match e {
        IndexError::DegenerateLabeling(_) => fail(UtStatus::Degenerate, e),
        IndexError::UnknownVertex(_) => fail(UtStatus::UnknownVertex, e),
        _ => fail(UtStatus::InvalidInput, e),
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ut_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ut_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw in this library
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a tree from its JSON form.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ut_tree_from_json(json: *const c_char, out: *mut *mut UtTree) -> UtStatus {
    guard(|| {
        let tree = tree_from_json(unsafe { text(json) }?).map_err(|e| match e {
            ReadError::Json(_) => fail(UtStatus::InvalidInput, e),
            ReadError::Tree(_) => fail(UtStatus::InvalidTree, e),
        })?;
        unsafe { put(out, Box::into_raw(Box::new(UtTree(tree)))) }
    })
}

/// Materializes `budget` vertices of a generator and labels them.
///
/// # Safety
/// Both strings are nul-terminated; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ut_tree_truncate(
    generator_json: *const c_char,
    scheme_json: *const c_char,
    budget: usize,
    out: *mut *mut UtTree,
) -> UtStatus {
    guard(|| {
        let gen: TreeGenerator =
            serde_json::from_str(unsafe { text(generator_json) }?).map_err(|e| fail(UtStatus::InvalidInput, e))?;
        let scheme: LabelingScheme =
            serde_json::from_str(unsafe { text(scheme_json) }?).map_err(|e| fail(UtStatus::InvalidInput, e))?;
        let tree = truncate(&gen, &scheme, budget).map_err(|e| fail(UtStatus::Generator, e))?;
        unsafe { put(out, Box::into_raw(Box::new(UtTree(tree)))) }
    })
}

/// # Safety
/// `tree` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ut_tree_len(tree: *const UtTree, out: *mut usize) -> UtStatus {
    guard(|| {
        let t = unsafe { handle(tree) }?;
        unsafe { put(out, t.0.len()) }
    })
}

/// # Safety
/// `tree` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ut_tree_to_json(tree: *const UtTree, out: *mut *mut c_char) -> UtStatus {
    guard(|| {
        let t = unsafe { handle(tree) }?;
        unsafe { put_string(out, tree_to_json(&t.0)) }
    })
}

/// # Safety
/// `tree` is null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ut_tree_free(tree: *mut UtTree) {
    if !tree.is_null() {
        // SAFETY: allocated by Box::into_raw in this library
        drop(unsafe { Box::from_raw(tree) });
    }
}

/// Builds a distance index over a copy of `tree`. Fails with
/// `UT_STATUS_DEGENERATE` if the labeling is not an ultrametric.
///
/// # Safety
/// `tree` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ut_index_build(tree: *const UtTree, out: *mut *mut UtIndex) -> UtStatus {
    guard(|| {
        let t = unsafe { handle(tree) }?;
        let ix = UltrametricIndex::build(t.0.clone()).map_err(index_status)?;
        unsafe { put(out, Box::into_raw(Box::new(UtIndex(ix)))) }
    })
}

/// # Safety
/// `index` is null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ut_index_free(index: *mut UtIndex) {
    if !index.is_null() {
        // SAFETY: allocated by Box::into_raw in this library
        drop(unsafe { Box::from_raw(index) });
    }
}

/// `d(u, v)` as `"p/q"`.
///
/// # Safety
/// `index` is a live handle; `u` and `v` are nul-terminated; `out` is valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn ut_index_distance(
    index: *const UtIndex,
    u: *const c_char,
    v: *const c_char,
    out: *mut *mut c_char,
) -> UtStatus {
    guard(|| {
        let ix = unsafe { handle(index) }?;
        let (u, v) = unsafe { (vertex(u)?, vertex(v)?) };
        let d = ix.0.distance(&u, &v).map_err(index_status)?;
        unsafe { put_string(out, d.to_string()) }
    })
}

/// Number of open balls of radius `radius` (a positive fraction) needed to
/// cover the tree.
///
/// # Safety
/// `index` is a live handle; `radius` is nul-terminated; `out` is valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ut_index_covering_number(
    index: *const UtIndex,
    radius: *const c_char,
    out: *mut usize,
) -> UtStatus {
    guard(|| {
        let ix = unsafe { handle(index) }?;
        let r: Radius = unsafe { text(radius) }?
            .parse()
            .map_err(|e| fail(UtStatus::InvalidInput, e))?;
        unsafe { put(out, ix.0.covering_number(&r)) }
    })
}

/// Distance from `v` to its nearest other vertex, as `"p/q"`.
///
/// # Safety
/// `index` is a live handle; `v` is nul-terminated; `out` is valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ut_index_isolation_radius(
    index: *const UtIndex,
    v: *const c_char,
    out: *mut *mut c_char,
) -> UtStatus {
    guard(|| {
        let ix = unsafe { handle(index) }?;
        let r = ix.0.isolation_radius(&unsafe { vertex(v) }?).map_err(index_status)?;
        unsafe { put_string(out, r.to_string()) }
    })
}
