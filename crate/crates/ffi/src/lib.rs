//! C ABI over `dmk-core`.
//!
//! Objects cross the boundary as opaque handles created by `dmk_*_new`/`dmk_*_parse`
//! style calls and released with the matching `dmk_*_free`. Every fallible call
//! returns a [`DmkStatus`]; on failure, [`dmk_last_error`] describes what went wrong
//! on the calling thread. Outputs are written through pointer arguments only on success.
//!
//! Masks are row-major `uint8_t` arrays, 0 background and 1-4 damage classes.
//! Images are interleaved `double` arrays of `width * height * channels` values.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use dmk_core::imaging::{ssim, ImageBuffer, SsimParams};
use dmk_core::labels::{parse_scene_label, BuildingAnnotation, DamageClass, DamageLabel, DatasetManifest};
use dmk_core::metrics::{combined_score, miou, weighted_f1, ConfusionMatrix};
use dmk_core::raster::{polygonize, rasterize_label};
use dmk_core::split::{stratified_split, SplitManifest};
use dmk_core::{Mask, SceneLabel};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent with another.
    InvalidArgument = 2,
    /// Input text (label JSON, WKT, manifest CSV) could not be parsed.
    Parse = 3,
    /// A file could not be read.
    Io = 4,
    /// A Rust panic was caught; the library state is unaffected.
    Panic = 99,
}

/// Scene annotation: size plus building footprints and damage labels.
pub struct DmkLabel(SceneLabel);

/// Class mask, values 0-4.
pub struct DmkMask(Mask);

/// Pixel confusion matrix indexed `[ground truth][prediction]`.
pub struct DmkConfusion(ConfusionMatrix);

/// Train/validation scene ids.
pub struct DmkSplit {
    train: Vec<CString>,
    val: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(DmkStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(DmkStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(msg: impl ToString) -> Self {
        Failure(DmkStatus::InvalidArgument, msg.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, recording the error message and mapping panics to [`DmkStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DmkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DmkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            DmkStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| Failure::null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or_else(|| Failure::null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Failure::invalid(format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next `dmk_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dmk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, e.g. `"0.1.0"`. Static storage.
#[no_mangle]
pub extern "C" fn dmk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must come from a `dmk_*` call that documents it as caller-owned, or be null.
#[no_mangle]
pub unsafe extern "C" fn dmk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------- labels

/// Parses xBD-style label JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_label_parse(json: *const c_char, out: *mut *mut DmkLabel) -> DmkStatus {
    guard(|| {
        let text = unsafe { as_str(json, "json") }?;
        let label = parse_scene_label(text).map_err(|e| Failure(DmkStatus::Parse, e.to_string()))?;
        unsafe { write_out(out, boxed(DmkLabel(label))) }
    })
}

/// Serializes a label back to JSON. Free the result with `dmk_string_free`.
///
/// # Safety
/// `label` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_label_to_json(label: *const DmkLabel, out: *mut *mut c_char) -> DmkStatus {
    guard(|| {
        let label = unsafe { as_ref(label, "label") }?;
        let s = CString::new(label.0.to_json()).map_err(Failure::invalid)?;
        unsafe { write_out(out, s.into_raw()) }
    })
}

/// Number of buildings, or 0 for a null handle.
///
/// # Safety
/// `label` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dmk_label_building_count(label: *const DmkLabel) -> usize {
    unsafe { label.as_ref() }.map_or(0, |l| l.0.buildings.len())
}

/// Damage ordinal (0 no damage … 3 destroyed) of building `index`, or -1 when unassessed.
///
/// # Safety
/// `label` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_label_building_class(label: *const DmkLabel, index: usize, out: *mut i32) -> DmkStatus {
    guard(|| {
        let label = unsafe { as_ref(label, "label") }?;
        let b = label.0.buildings.get(index).ok_or_else(|| Failure::invalid(format!("building {index} out of range")))?;
        unsafe { write_out(out, b.damage().map_or(-1, |c| i32::from(c.ordinal()))) }
    })
}

/// # Safety
/// `label` must come from this library and not be used afterwards, or be null.
#[no_mangle]
pub unsafe extern "C" fn dmk_label_free(label: *mut DmkLabel) {
    unsafe { free(label) }
}

// ---------------------------------------------------------------- masks

/// Copies `width * height` class values into a new mask.
///
/// # Safety
/// `data` must point to `width * height` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_mask_new(width: u32, height: u32, data: *const u8, out: *mut *mut DmkMask) -> DmkStatus {
    guard(|| {
        if data.is_null() {
            return Err(Failure::null("data"));
        }
        let n = (width as usize).checked_mul(height as usize).ok_or_else(|| Failure::invalid("mask too large"))?;
        let values = unsafe { std::slice::from_raw_parts(data, n) }.to_vec();
        let mask = Mask::from_vec(width, height, values).map_err(Failure::invalid)?;
        unsafe { write_out(out, boxed(DmkMask(mask))) }
    })
}

/// # Safety
/// `mask` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dmk_mask_width(mask: *const DmkMask) -> u32 {
    unsafe { mask.as_ref() }.map_or(0, |m| m.0.width())
}

/// # Safety
/// `mask` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dmk_mask_height(mask: *const DmkMask) -> u32 {
    unsafe { mask.as_ref() }.map_or(0, |m| m.0.height())
}

/// Row-major class values, owned by the mask.
///
/// # Safety
/// `mask` must be a live handle or null; the pointer dies with the mask.
#[no_mangle]
pub unsafe extern "C" fn dmk_mask_data(mask: *const DmkMask) -> *const u8 {
    unsafe { mask.as_ref() }.map_or(std::ptr::null(), |m| m.0.data().as_ptr())
}

/// # Safety
/// `mask` must come from this library and not be used afterwards, or be null.
#[no_mangle]
pub unsafe extern "C" fn dmk_mask_free(mask: *mut DmkMask) {
    unsafe { free(mask) }
}

/// Paints each building with its damage class (1-4) at pixel centers, last building wins.
///
/// # Safety
/// `label` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_rasterize(label: *const DmkLabel, out: *mut *mut DmkMask) -> DmkStatus {
    guard(|| {
        let label = unsafe { as_ref(label, "label") }?;
        let raster = rasterize_label(&label.0).map_err(Failure::invalid)?;
        unsafe { write_out(out, boxed(DmkMask(raster.mask))) }
    })
}

/// Traces 8-connected components of at least `min_area` pixels into a label,
/// one building per component with its majority class.
///
/// # Safety
/// `mask` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_polygonize(mask: *const DmkMask, min_area: usize, out: *mut *mut DmkLabel) -> DmkStatus {
    guard(|| {
        let mask = unsafe { as_ref(mask, "mask") }?;
        let mut label = SceneLabel::new("", "", mask.0.width(), mask.0.height()).map_err(Failure::invalid)?;
        for (i, (footprint, value)) in polygonize(&mask.0, min_area).into_iter().enumerate() {
            let class = DamageClass::from_mask_value(value).expect("nonzero mask value");
            label.buildings.push(BuildingAnnotation {
                uid: format!("p{i:04}"),
                footprint,
                label: DamageLabel::Assessed(class),
            });
        }
        unsafe { write_out(out, boxed(DmkLabel(label))) }
    })
}

// ---------------------------------------------------------------- ssim

/// Mean SSIM (Gaussian window 11, sigma 1.5, data range 255) of two images.
///
/// # Safety
/// `a` and `b` must each point to `width * height * channels` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_ssim(
    a: *const f64,
    b: *const f64,
    width: u32,
    height: u32,
    channels: u8,
    out: *mut f64,
) -> DmkStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(Failure::null("image"));
        }
        let n = (width as usize)
            .checked_mul(height as usize)
            .and_then(|v| v.checked_mul(usize::from(channels)))
            .ok_or_else(|| Failure::invalid("image too large"))?;
        let image = |p: *const f64| {
            let data = unsafe { std::slice::from_raw_parts(p, n) }.to_vec();
            ImageBuffer::from_vec(width, height, channels, data).map_err(Failure::invalid)
        };
        let v = ssim(&image(a)?, &image(b)?, &SsimParams::default()).map_err(Failure::invalid)?;
        unsafe { write_out(out, v) }
    })
}

// ---------------------------------------------------------------- metrics

/// `0.3 * seg_f1 + 0.7 * cls_f1`; both inputs must lie in [0, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_combined_score(seg_f1: f64, cls_f1: f64, out: *mut f64) -> DmkStatus {
    guard(|| {
        let v = combined_score(seg_f1, cls_f1).map_err(Failure::invalid)?;
        unsafe { write_out(out, v) }
    })
}

/// Empty `k`-class matrix (5 for damage masks).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_new(k: usize, out: *mut *mut DmkConfusion) -> DmkStatus {
    guard(|| {
        if !(1..=256).contains(&k) {
            return Err(Failure::invalid(format!("class count {k} outside 1..=256")));
        }
        unsafe { write_out(out, boxed(DmkConfusion(ConfusionMatrix::new(k)))) }
    })
}

/// Adds every pixel of a prediction/ground-truth pair.
///
/// # Safety
/// All handles must be live.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_accumulate(
    cm: *mut DmkConfusion,
    pred: *const DmkMask,
    gt: *const DmkMask,
) -> DmkStatus {
    guard(|| {
        let cm = unsafe { as_mut(cm, "matrix") }?;
        let (pred, gt) = unsafe { (as_ref(pred, "pred")?, as_ref(gt, "gt")?) };
        cm.0.accumulate(&pred.0, &gt.0).map_err(Failure::invalid)
    })
}

/// Adds `other` into `cm`; both must have the same class count.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_merge(cm: *mut DmkConfusion, other: *const DmkConfusion) -> DmkStatus {
    guard(|| {
        let cm = unsafe { as_mut(cm, "matrix") }?;
        let other = unsafe { as_ref(other, "other") }?;
        cm.0.merge(&other.0).map_err(Failure::invalid)
    })
}

/// Count of pixels with ground truth `gt` predicted as `pred`.
///
/// # Safety
/// `cm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_get(cm: *const DmkConfusion, gt: usize, pred: usize, out: *mut u64) -> DmkStatus {
    guard(|| {
        let cm = unsafe { as_ref(cm, "matrix") }?;
        if gt >= cm.0.k() || pred >= cm.0.k() {
            return Err(Failure::invalid(format!("({gt}, {pred}) outside a {}-class matrix", cm.0.k())));
        }
        unsafe { write_out(out, cm.0.get(gt, pred)) }
    })
}

/// Mean IoU over classes present in ground truth or prediction.
///
/// # Safety
/// `cm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_miou(cm: *const DmkConfusion, out: *mut f64) -> DmkStatus {
    guard(|| {
        let cm = unsafe { as_ref(cm, "matrix") }?;
        let v = miou(&cm.0).map_err(Failure::invalid)?;
        unsafe { write_out(out, v) }
    })
}

/// Ground-truth-support-weighted mean F1 over all classes.
///
/// # Safety
/// `cm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_weighted_f1(cm: *const DmkConfusion, out: *mut f64) -> DmkStatus {
    guard(|| {
        let cm = unsafe { as_ref(cm, "matrix") }?;
        let v = weighted_f1(&cm.0).map_err(Failure::invalid)?;
        unsafe { write_out(out, v) }
    })
}

/// # Safety
/// `cm` must come from this library and not be used afterwards, or be null.
#[no_mangle]
pub unsafe extern "C" fn dmk_confusion_free(cm: *mut DmkConfusion) {
    unsafe { free(cm) }
}

// ---------------------------------------------------------------- split

fn c_ids(ids: Vec<String>) -> Vec<CString> {
    ids.into_iter().map(|s| CString::new(s.replace('\0', " ")).unwrap_or_default()).collect()
}

fn to_handle(s: SplitManifest) -> DmkSplit {
    DmkSplit { train: c_ids(s.train), val: c_ids(s.val) }
}

/// Seeded per-disaster split of a manifest CSV file (`scene_id,disaster,pre_image,post_image,label`).
///
/// # Safety
/// `manifest_path` must be a NUL-terminated path; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmk_split(
    manifest_path: *const c_char,
    val_fraction: f64,
    seed: u64,
    out: *mut *mut DmkSplit,
) -> DmkStatus {
    guard(|| {
        let path = unsafe { as_str(manifest_path, "manifest_path") }?;
        let manifest = DatasetManifest::read(Path::new(path)).map_err(|e| {
            let status = if Path::new(path).is_file() { DmkStatus::Parse } else { DmkStatus::Io };
            Failure(status, e.to_string())
        })?;
        let split = stratified_split(&manifest, val_fraction, seed).map_err(Failure::invalid)?;
        unsafe { write_out(out, boxed(to_handle(split))) }
    })
}

/// # Safety
/// `split` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dmk_split_train_count(split: *const DmkSplit) -> usize {
    unsafe { split.as_ref() }.map_or(0, |s| s.train.len())
}

/// # Safety
/// `split` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dmk_split_val_count(split: *const DmkSplit) -> usize {
    unsafe { split.as_ref() }.map_or(0, |s| s.val.len())
}

/// Training scene id `index` in sorted order, owned by the split; null when out of range.
///
/// # Safety
/// `split` must be a live handle or null; the pointer dies with the split.
#[no_mangle]
pub unsafe extern "C" fn dmk_split_train_id(split: *const DmkSplit, index: usize) -> *const c_char {
    unsafe { split.as_ref() }.and_then(|s| s.train.get(index)).map_or(std::ptr::null(), |c| c.as_ptr())
}

/// Validation scene id `index` in sorted order, owned by the split; null when out of range.
///
/// # Safety
/// `split` must be a live handle or null; the pointer dies with the split.
#[no_mangle]
pub unsafe extern "C" fn dmk_split_val_id(split: *const DmkSplit, index: usize) -> *const c_char {
    unsafe { split.as_ref() }.and_then(|s| s.val.get(index)).map_or(std::ptr::null(), |c| c.as_ptr())
}

/// # Safety
/// `split` must come from this library and not be used afterwards, or be null.
#[no_mangle]
pub unsafe extern "C" fn dmk_split_free(split: *mut DmkSplit) {
    unsafe { free(split) }
}
