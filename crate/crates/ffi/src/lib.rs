//! C interface to `hypercolor`.
//!
//! Hypergraphs and colorings are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`HcStatus`]; on failure, [`hc_last_error`] describes what went wrong
//! on the calling thread. Panics never cross the boundary: they are caught
//! and reported as [`HcStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hypercolor::gen::{self, GenSpec};
use hypercolor::pipeline::{self, PipelineConfig, PipelineMode};
use hypercolor::{format, Coloring, Error, Hypergraph};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent.
    InvalidArgument = 2,
    /// The input could not be parsed.
    Parse = 3,
    /// Reading or writing a file failed.
    Io = 4,
    /// Two edges share more than one vertex.
    NotSimple = 5,
    /// The operation requires a triangle-free hypergraph.
    HasTriangle = 6,
    /// The resampling finisher gave up.
    ResampleCapExceeded = 7,
    /// An internal consistency check failed.
    Invariant = 8,
    /// The library panicked.
    Panic = 9,
}

/// Which pipeline to run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcMode {
    /// Direct when the hypergraph is triangle-free, full otherwise.
    Auto = 0,
    /// Nibble and finisher on the whole hypergraph (must be triangle-free).
    Direct = 1,
    /// Partition into triangle-free classes first.
    Full = 2,
}

/// Opaque hypergraph handle.
pub struct HcHypergraph {
    inner: Hypergraph,
}

/// Opaque coloring handle.
pub struct HcColoring {
    inner: Coloring,
    colors_used: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HcStatus {
    match e {
        Error::Parse { .. } => HcStatus::Parse,
        Error::Io(_) => HcStatus::Io,
        Error::NotSimple(..) | Error::DuplicateEdge { .. } => HcStatus::NotSimple,
        Error::HasTriangle(..) => HcStatus::HasTriangle,
        Error::ResampleCapExceeded { .. } => HcStatus::ResampleCapExceeded,
        Error::Invariant(_) => HcStatus::Invariant,
        _ => HcStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for [`hc_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (HcStatus, String)>) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HcStatus::Panic
        }
    }
}

fn lib(e: Error) -> (HcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HcStatus, String) {
    (HcStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (HcStatus, String) {
    (HcStatus::InvalidArgument, msg.into())
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a `k`-uniform hypergraph on `n` vertices from `num_edges` edges
/// stored row-major in `edges` (`k * num_edges` vertex ids).
///
/// # Safety
/// `edges` must point to `k * num_edges` readable `u32` values (it may be
/// null when `num_edges` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_from_edges(
    k: usize,
    n: usize,
    edges: *const u32,
    num_edges: usize,
    out: *mut *mut HcHypergraph,
) -> HcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if edges.is_null() && num_edges > 0 {
            return Err(null("edges"));
        }
        let len = k
            .checked_mul(num_edges)
            .ok_or_else(|| invalid("k * num_edges overflows"))?;
        let flat: &[u32] = if len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(edges, len)
        };
        let h = if k == 0 {
            Hypergraph::new(k, n, Vec::<Vec<u32>>::new()).map_err(lib)?
        } else {
            Hypergraph::new(k, n, flat.chunks(k).map(<[u32]>::to_vec)).map_err(lib)?
        };
        put(out, HcHypergraph { inner: h });
        Ok(())
    })
}

/// Reads a hypergraph in the text format from `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_read_file(path: *const c_char, out: *mut *mut HcHypergraph) -> HcStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let h = format::read(path).map_err(lib)?;
        put(out, HcHypergraph { inner: h });
        Ok(())
    })
}

/// Generates a random simple `k`-uniform hypergraph with maximum degree at
/// most `max_degree`, optionally with no triangles.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_generate(
    k: usize,
    n: usize,
    max_degree: usize,
    triangle_free: bool,
    seed: u64,
    out: *mut *mut HcHypergraph,
) -> HcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = GenSpec::new(k, n, max_degree, seed).triangle_free(triangle_free);
        let g = gen::generate(&spec).map_err(lib)?;
        put(out, HcHypergraph { inner: g.graph });
        Ok(())
    })
}

/// Releases a hypergraph. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_free(h: *mut HcHypergraph) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Edge size `k`, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_k(h: *const HcHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.inner.k())
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_num_vertices(h: *const HcHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.inner.num_vertices())
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_num_edges(h: *const HcHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.inner.num_edges())
}

/// Maximum vertex degree, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_max_degree(h: *const HcHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.inner.max_degree())
}

/// Whether every two edges share at most one vertex. False for null.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_hypergraph_is_simple(h: *const HcHypergraph) -> bool {
    h.as_ref().is_some_and(|h| h.inner.is_simple())
}

/// Colors `h` and stores a new coloring handle in `out`. The coloring is
/// verified before it is returned.
///
/// # Safety
/// `h` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_color(
    h: *const HcHypergraph,
    mode: HcMode,
    seed: u64,
    out: *mut *mut HcColoring,
) -> HcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = PipelineConfig {
            mode: match mode {
                HcMode::Auto => PipelineMode::Auto,
                HcMode::Direct => PipelineMode::Direct,
                HcMode::Full => PipelineMode::Full,
            },
            seed,
            ..PipelineConfig::default()
        };
        let o = pipeline::color(&h.inner, &cfg).map_err(lib)?;
        put(
            out,
            HcColoring {
                inner: o.coloring,
                colors_used: o.colors_used,
            },
        );
        Ok(())
    })
}

/// Releases a coloring. Null is ignored.
///
/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hc_coloring_free(c: *mut HcColoring) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of vertices covered by the coloring, or 0 for null.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_coloring_len(c: *const HcColoring) -> usize {
    c.as_ref().map_or(0, |c| c.inner.len())
}

/// Number of distinct colors, or 0 for null.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_coloring_colors_used(c: *const HcColoring) -> usize {
    c.as_ref().map_or(0, |c| c.colors_used)
}

/// Copies the colors into `buf`, which must hold `hc_coloring_len(c)` values.
///
/// # Safety
/// `c` must be a live handle and `buf` must point to `len` writable `u32`s.
#[no_mangle]
pub unsafe extern "C" fn hc_coloring_copy(c: *const HcColoring, buf: *mut u32, len: usize) -> HcStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("c"))?;
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        if len != c.inner.len() {
            return Err(invalid(format!(
                "buffer holds {len} values, coloring has {}",
                c.inner.len()
            )));
        }
        let dst = if len == 0 {
            &mut [][..]
        } else {
            std::slice::from_raw_parts_mut(buf, len)
        };
        for (d, s) in dst.iter_mut().zip(c.inner.colors()) {
            *d = s.ok_or_else(|| invalid("coloring is partial"))?;
        }
        Ok(())
    })
}

/// Checks a coloring given as one color per vertex. Writes whether it is
/// proper to `proper` and the number of monochromatic edges to
/// `monochromatic` (which may be null).
///
/// # Safety
/// `h` must be a live handle, `colors` must point to `n` readable values
/// and `proper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_verify(
    h: *const HcHypergraph,
    colors: *const u32,
    n: usize,
    proper: *mut bool,
    monochromatic: *mut usize,
) -> HcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        if proper.is_null() {
            return Err(null("proper"));
        }
        if colors.is_null() && n > 0 {
            return Err(null("colors"));
        }
        let src: &[u32] = if n == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(colors, n)
        };
        let palette = src.iter().max().map_or(1, |&m| m.saturating_add(1));
        let coloring = Coloring::from_colors(src.to_vec(), palette).map_err(lib)?;
        let report = h.inner.verify_coloring(&coloring).map_err(lib)?;
        *proper = report.proper;
        if !monochromatic.is_null() {
            *monochromatic = report.monochromatic_edges.len();
        }
        Ok(())
    })
}
