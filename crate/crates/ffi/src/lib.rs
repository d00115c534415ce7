//! C interface to the scoring engine.
//!
//! Functions return a [`GraspaStatus`]; on failure the message is available
//! from [`graspa_last_error`] on the same thread. Strings returned by the
//! library are owned by the caller and released with [`graspa_string_free`].
//! Handles are released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use graspa_core::data::{parse_config, BenchmarkConfig};
use graspa_core::scorecard::{emit_report, LayoutScore, ReportFormat};
use graspa_core::se3::{orientation_error, Pose};
use graspa_core::wrench::{hull_radius, Wrench};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraspaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    OutOfRange = 4,
    /// The requested score is N/A.
    NotAvailable = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraspaFormat {
    Text = 0,
    Markdown = 1,
    Html = 2,
    Xml = 3,
}

/// A computed or loaded layout scorecard.
pub struct GraspaScorecard {
    score: LayoutScore,
    config: BenchmarkConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(GraspaStatus, String);

type Result<T> = std::result::Result<T, Failure>;

fn fail<T>(status: GraspaStatus, message: impl Into<String>) -> Result<T> {
    Err(Failure(status, message.into()))
}

/// Runs `f`, recording its error and turning panics into a status.
fn guard(f: impl FnOnce() -> Result<()>) -> GraspaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GraspaStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(p) => {
            let message = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {message}"));
            GraspaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str> {
    if p.is_null() {
        return fail(GraspaStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(GraspaStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<&'static mut T> {
    // SAFETY: checked for null; the caller guarantees the pointer is writable.
    unsafe { p.as_mut() }.map_or_else(|| fail(GraspaStatus::NullArgument, format!("{what} is null")), Ok)
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn scorecard<'a>(h: *const GraspaScorecard) -> Result<&'a GraspaScorecard> {
    // SAFETY: the caller passes a handle from this library or null.
    unsafe { h.as_ref() }.map_or_else(|| fail(GraspaStatus::NullArgument, "scorecard is null"), Ok)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn graspa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn graspa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the command line with `argc` arguments (program name first) and
/// stores the exit code in `exit_code`. Standard output and error are
/// returned as strings when `out_text` / `err_text` are not null.
///
/// # Safety
/// `argv` must hold `argc` valid C strings; output pointers must be writable
/// or null.
#[no_mangle]
pub unsafe extern "C" fn graspa_run(
    argc: c_int,
    argv: *const *const c_char,
    exit_code: *mut c_int,
    out_text: *mut *mut c_char,
    err_text: *mut *mut c_char,
) -> GraspaStatus {
    guard(|| {
        if argv.is_null() || argc < 1 {
            return fail(GraspaStatus::NullArgument, "argv must hold at least the program name");
        }
        let code = out_ptr(exit_code, "exit_code")?;
        let mut args = Vec::with_capacity(argc as usize);
        for i in 0..argc as usize {
            args.push(text(*argv.add(i), "argument")?.to_string());
        }
        let (mut out, mut err) = (Vec::new(), Vec::new());
        *code = graspa_core::cli::run(args, &mut out, &mut err);
        if let Some(o) = out_text.as_mut() {
            *o = owned(String::from_utf8_lossy(&out).into_owned());
        }
        if let Some(e) = err_text.as_mut() {
            *e = owned(String::from_utf8_lossy(&err).into_owned());
        }
        Ok(())
    })
}

fn load_config(data_dir: &Path) -> Result<BenchmarkConfig> {
    let path = data_dir.join("config.xml");
    if !path.exists() {
        return Ok(BenchmarkConfig::default());
    }
    parse_config(&path).or_else(|e| fail(GraspaStatus::InvalidInput, e.to_string()))
}

/// Scores `layout_id` from the benchmark files in `data_dir`, using cached
/// stage files where present.
///
/// # Safety
/// `data_dir` must be a C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_compute(
    data_dir: *const c_char,
    layout_id: u8,
    out: *mut *mut GraspaScorecard,
) -> GraspaStatus {
    guard(|| {
        let dir = text(data_dir, "data_dir")?;
        let slot = out_ptr(out, "out")?;
        *slot = ptr::null_mut();
        let id = layout_id.to_string();
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let args = ["graspa", "report", "--data-dir", dir, "--layout", &id, "--format", "xml"];
        if graspa_core::cli::run(args, &mut o, &mut e) != 0 {
            return fail(GraspaStatus::InvalidInput, String::from_utf8_lossy(&e).trim().to_string());
        }
        let xml = String::from_utf8_lossy(&o);
        let score = LayoutScore::parse_str(&xml, "report").or_else(|e| fail(GraspaStatus::InvalidInput, e.to_string()))?;
        let config = load_config(Path::new(dir))?;
        *slot = Box::into_raw(Box::new(GraspaScorecard { score, config }));
        Ok(())
    })
}

/// Loads a scorecard XML file. `config_path` may be null for the default
/// configuration, which only affects the settings echoed in reports.
///
/// # Safety
/// `path` must be a C string, `config_path` a C string or null; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_load(
    path: *const c_char,
    config_path: *const c_char,
    out: *mut *mut GraspaScorecard,
) -> GraspaStatus {
    guard(|| {
        let path = text(path, "path")?;
        let slot = out_ptr(out, "out")?;
        *slot = ptr::null_mut();
        let xml = std::fs::read_to_string(path).or_else(|e| fail(GraspaStatus::InvalidInput, format!("{path}: {e}")))?;
        let score = LayoutScore::parse_str(&xml, path).or_else(|e| fail(GraspaStatus::InvalidInput, e.to_string()))?;
        let config = if config_path.is_null() {
            BenchmarkConfig::default()
        } else {
            let c = text(config_path, "config_path")?;
            parse_config(Path::new(c)).or_else(|e| fail(GraspaStatus::InvalidInput, e.to_string()))?
        };
        *slot = Box::into_raw(Box::new(GraspaScorecard { score, config }));
        Ok(())
    })
}

/// Releases a scorecard. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_free(h: *mut GraspaScorecard) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Layout composite score. `GRASPA_STATUS_NOT_AVAILABLE` when no object is
/// eligible.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_composite(h: *const GraspaScorecard, out: *mut f64) -> GraspaStatus {
    guard(|| {
        let s = scorecard(h)?;
        let o = out_ptr(out, "out")?;
        match s.score.final_score {
            Some(f) => {
                *o = f;
                Ok(())
            }
            None => fail(GraspaStatus::NotAvailable, format!("layout {} has no eligible objects", s.score.layout_id)),
        }
    })
}

/// Number of object rows.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_row_count(h: *const GraspaScorecard, out: *mut usize) -> GraspaStatus {
    guard(|| {
        *out_ptr(out, "out")? = scorecard(h)?.score.rows.len();
        Ok(())
    })
}

/// Name of row `index`, to be released with [`graspa_string_free`].
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_row_name(
    h: *const GraspaScorecard,
    index: usize,
    out: *mut *mut c_char,
) -> GraspaStatus {
    guard(|| {
        let s = scorecard(h)?;
        let o = out_ptr(out, "out")?;
        let row = s.score.rows.get(index).map_or_else(|| fail(GraspaStatus::OutOfRange, format!("no row {index}")), Ok)?;
        *o = owned(row.name.clone());
        Ok(())
    })
}

/// Final score of row `index`. `GRASPA_STATUS_NOT_AVAILABLE` when the object
/// is not eligible.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_row_final(h: *const GraspaScorecard, index: usize, out: *mut f64) -> GraspaStatus {
    guard(|| {
        let s = scorecard(h)?;
        let o = out_ptr(out, "out")?;
        let row = s.score.rows.get(index).map_or_else(|| fail(GraspaStatus::OutOfRange, format!("no row {index}")), Ok)?;
        match row.final_score {
            Some(f) => {
                *o = f;
                Ok(())
            }
            None => fail(GraspaStatus::NotAvailable, format!("{} is not eligible", row.name)),
        }
    })
}

/// Report document in `format`, one of the [`GraspaFormat`] values, to be
/// released with [`graspa_string_free`].
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_scorecard_report(
    h: *const GraspaScorecard,
    format: c_int,
    out: *mut *mut c_char,
) -> GraspaStatus {
    guard(|| {
        let s = scorecard(h)?;
        let o = out_ptr(out, "out")?;
        let doc = match format {
            f if f == GraspaFormat::Text as c_int => emit_report(&s.score, &s.config, ReportFormat::Text),
            f if f == GraspaFormat::Markdown as c_int => emit_report(&s.score, &s.config, ReportFormat::Markdown),
            f if f == GraspaFormat::Html as c_int => emit_report(&s.score, &s.config, ReportFormat::Html),
            f if f == GraspaFormat::Xml as c_int => s.score.to_xml(),
            f => return fail(GraspaStatus::OutOfRange, format!("unknown report format {f}")),
        };
        *o = owned(doc);
        Ok(())
    })
}

/// ε-metric of `count` wrenches stored row-major as `count × 6` doubles.
///
/// # Safety
/// `wrenches` must point to `6 * count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_hull_radius(wrenches: *const f64, count: usize, out: *mut f64) -> GraspaStatus {
    guard(|| {
        let o = out_ptr(out, "out")?;
        if count == 0 {
            *o = 0.0;
            return Ok(());
        }
        if wrenches.is_null() {
            return fail(GraspaStatus::NullArgument, "wrenches is null");
        }
        let values = std::slice::from_raw_parts(wrenches, 6 * count);
        let w: Vec<Wrench> = values.chunks_exact(6).map(Wrench::from_row_slice).collect();
        *o = hull_radius(&w);
        Ok(())
    })
}

/// Position error (meters) and orientation angle (radians) between two
/// row-major 4×4 homogeneous poses.
///
/// # Safety
/// `desired` and `reached` must point to 16 doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn graspa_pose_error(
    desired: *const f64,
    reached: *const f64,
    position: *mut f64,
    angle: *mut f64,
) -> GraspaStatus {
    guard(|| {
        let pose = |p: *const f64, what: &str| -> Result<Pose> {
            if p.is_null() {
                return fail(GraspaStatus::NullArgument, format!("{what} is null"));
            }
            let m: &[f64; 16] = &*(p as *const [f64; 16]);
            Pose::from_row_major(m).or_else(|e| fail(GraspaStatus::InvalidInput, format!("{what}: {e}")))
        };
        let (d, r) = (pose(desired, "desired")?, pose(reached, "reached")?);
        let (p, a) = (out_ptr(position, "position")?, out_ptr(angle, "angle")?);
        let e = orientation_error(&d, &r);
        *p = e.position;
        *a = e.angle;
        Ok(())
    })
}
