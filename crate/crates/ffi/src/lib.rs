//! C ABI over the segmentation library.
//!
//! Images and configurations are opaque heap handles released with their
//! `_free` function. Every entry point returns an [`MdsegStatus`]; on failure
//! a description is available from [`mdseg_last_error_message`] on the same
//! thread. Masks cross the boundary as one byte per pixel, row-major, with
//! nonzero meaning foreground.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mdseg::synth::{add_noise, make_shape, NoiseSpec, ShapeKind, ShapeSpec};
use mdseg::{
    Error, Exec, Image, InitMode, Mask, Mode, NetgainMode, Partition, SegConfig, TsetMode,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdsegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidImage = 3,
    InvalidConfig = 4,
    EmptySide = 5,
    NonConvergence = 6,
    Io = 7,
    Format = 8,
    UndefinedDice = 9,
    BufferSize = 10,
    Panic = 11,
}

/// Values accepted by [`mdseg_segment`].
#[repr(C)]
pub enum MdsegMode {
    Full = 0,
    Patch = 1,
    Together = 2,
}

/// Values accepted by [`mdseg_config_set_netgain`].
#[repr(C)]
pub enum MdsegNetgain {
    Exact = 0,
    Asymptotic = 1,
}

/// Values accepted by [`mdseg_config_set_tset`].
#[repr(C)]
pub enum MdsegTset {
    Strict = 0,
    Sorted = 1,
}

/// Values accepted by [`mdseg_config_set_init`].
#[repr(C)]
pub enum MdsegInit {
    Random = 0,
    Threshold = 1,
}

/// Values accepted by [`mdseg_synth`].
#[repr(C)]
pub enum MdsegShape {
    Circle = 0,
    Square = 1,
    Triangle = 2,
    Star = 3,
    Qr = 4,
}

pub struct MdsegImage {
    inner: Image,
}

pub struct MdsegConfig {
    inner: SegConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(MdsegStatus, String);

fn status_of(e: &Error) -> MdsegStatus {
    match e {
        Error::InvalidImage(_) | Error::PartitionSize { .. } | Error::PixelOutOfRange { .. } => {
            MdsegStatus::InvalidImage
        }
        Error::InvalidConfig(_) | Error::Geometry(_) => MdsegStatus::InvalidConfig,
        Error::EmptySide(_) | Error::LastPixelOnSide { .. } | Error::MixedTransfer => {
            MdsegStatus::EmptySide
        }
        Error::NonConvergence { .. } => MdsegStatus::NonConvergence,
        Error::Patch { source, .. } => status_of(source),
        Error::UndefinedDice => MdsegStatus::UndefinedDice,
        Error::MalformedHeader { .. } | Error::DimensionMismatch { .. } | Error::Report(_) => {
            MdsegStatus::Format
        }
        Error::Io { .. } => MdsegStatus::Io,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl Failure {
    fn null(what: &str) -> Self {
        Failure(MdsegStatus::NullPointer, format!("{what} is null"))
    }

    fn arg(msg: impl Into<String>) -> Self {
        Failure(MdsegStatus::InvalidArgument, msg.into())
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MdsegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MdsegStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MdsegStatus::Panic
        }
    }
}

unsafe fn image_ref<'a>(img: *const MdsegImage) -> Result<&'a Image, Failure> {
    img.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure::null("image"))
}

unsafe fn config_ref<'a>(cfg: *const MdsegConfig) -> Result<&'a SegConfig, Failure> {
    cfg.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure::null("config"))
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(Failure::null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure::arg("path is not valid UTF-8"))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn check_len(len: usize, expected: usize) -> Result<(), Failure> {
    if len != expected {
        return Err(Failure(
            MdsegStatus::BufferSize,
            format!("buffer holds {len} pixels, image has {expected}"),
        ));
    }
    Ok(())
}

fn store_image(out: *mut *mut MdsegImage, img: Image) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(MdsegImage { inner: img })) };
    Ok(())
}

/// Message for the most recent failure on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mdseg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mdseg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `width * height` row-major values into a new image.
///
/// # Safety
/// `values` must point to `width * height` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_new(
    width: usize,
    height: usize,
    values: *const f64,
    out: *mut *mut MdsegImage,
) -> MdsegStatus {
    guard(|| {
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Failure::arg("image dimensions overflow"))?;
        let values = in_slice(values, n, "values")?;
        store_image(out, Image::new(width, height, values.to_vec())?)
    })
}

/// Reads a `.pgm`, `.ascii.pgm` or `.f64` image.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_read(
    path: *const c_char,
    out: *mut *mut MdsegImage,
) -> MdsegStatus {
    guard(|| {
        let path = path_arg(path)?;
        store_image(out, mdseg::read_image(path)?)
    })
}

/// Writes an image; the format follows the file extension.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_write(
    img: *const MdsegImage,
    path: *const c_char,
) -> MdsegStatus {
    guard(|| {
        let img = image_ref(img)?;
        Ok(mdseg::write_image(path_arg(path)?, img)?)
    })
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_width(img: *const MdsegImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.width())
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_height(img: *const MdsegImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.height())
}

/// Copies the pixel values into `out`, which must hold exactly
/// `width * height` doubles.
///
/// # Safety
/// `img` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_values(
    img: *const MdsegImage,
    out: *mut f64,
    len: usize,
) -> MdsegStatus {
    guard(|| {
        let img = image_ref(img)?;
        check_len(len, img.len())?;
        out_slice(out, len, "out")?.copy_from_slice(img.values());
        Ok(())
    })
}

/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdseg_image_free(img: *mut MdsegImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// New configuration with default settings. Never null.
#[no_mangle]
pub extern "C" fn mdseg_config_new() -> *mut MdsegConfig {
    Box::into_raw(Box::new(MdsegConfig {
        inner: SegConfig::default(),
    }))
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_free(cfg: *mut MdsegConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies `update` to a copy and commits it only if it validates.
unsafe fn update_config(
    cfg: *mut MdsegConfig,
    update: impl FnOnce(&mut SegConfig) -> Result<(), Failure>,
) -> MdsegStatus {
    guard(|| {
        let handle = cfg.as_mut().ok_or_else(|| Failure::null("config"))?;
        let mut next = handle.inner.clone();
        update(&mut next)?;
        next.validate()?;
        handle.inner = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_targets(
    cfg: *mut MdsegConfig,
    p1: f64,
    p2: f64,
) -> MdsegStatus {
    update_config(cfg, |c| {
        c.p1 = p1;
        c.p2 = p2;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_patch(
    cfg: *mut MdsegConfig,
    patch_len: usize,
    stride: usize,
) -> MdsegStatus {
    update_config(cfg, |c| {
        c.patch_len = patch_len;
        c.stride = stride;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_vote_threshold(
    cfg: *mut MdsegConfig,
    threshold: f64,
) -> MdsegStatus {
    update_config(cfg, |c| {
        c.vote_threshold = threshold;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_median_window(
    cfg: *mut MdsegConfig,
    window: usize,
) -> MdsegStatus {
    update_config(cfg, |c| {
        c.median_window = window;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_seed(cfg: *mut MdsegConfig, seed: u64) -> MdsegStatus {
    update_config(cfg, |c| {
        c.init_seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_max_sweeps(
    cfg: *mut MdsegConfig,
    max_sweeps: usize,
) -> MdsegStatus {
    update_config(cfg, |c| {
        c.max_sweeps = max_sweeps;
        Ok(())
    })
}

/// `mode` is an [`MdsegNetgain`] value.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_netgain(cfg: *mut MdsegConfig, mode: u32) -> MdsegStatus {
    update_config(cfg, |c| {
        c.netgain_mode = match mode {
            0 => NetgainMode::Exact,
            1 => NetgainMode::Asymptotic,
            other => return Err(Failure::arg(format!("unknown netgain mode {other}"))),
        };
        Ok(())
    })
}

/// `mode` is an [`MdsegTset`] value.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_tset(cfg: *mut MdsegConfig, mode: u32) -> MdsegStatus {
    update_config(cfg, |c| {
        c.tset_mode = match mode {
            0 => TsetMode::Strict,
            1 => TsetMode::SortedHeuristic,
            other => return Err(Failure::arg(format!("unknown transfer-set mode {other}"))),
        };
        Ok(())
    })
}

/// `mode` is an [`MdsegInit`] value.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdseg_config_set_init(cfg: *mut MdsegConfig, mode: u32) -> MdsegStatus {
    update_config(cfg, |c| {
        c.init = match mode {
            0 => InitMode::RandomBalanced,
            1 => InitMode::Threshold,
            other => return Err(Failure::arg(format!("unknown init mode {other}"))),
        };
        Ok(())
    })
}

/// Segments `img` and writes the foreground mask into `mask_out`.
///
/// # Safety
/// Handles must be live; `mask_out` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mdseg_segment(
    img: *const MdsegImage,
    cfg: *const MdsegConfig,
    mode: u32,
    mask_out: *mut u8,
    len: usize,
) -> MdsegStatus {
    guard(|| {
        let img = image_ref(img)?;
        let cfg = config_ref(cfg)?;
        let mode = match mode {
            0 => Mode::Full,
            1 => Mode::Patch,
            2 => Mode::Together,
            other => return Err(Failure::arg(format!("unknown mode {other}"))),
        };
        check_len(len, img.len())?;
        let out = out_slice(mask_out, len, "mask_out")?;
        let seg = mdseg::segment(img, cfg, mode, Exec::Parallel)?;
        for (o, &b) in out.iter_mut().zip(seg.mask.bits()) {
            *o = b as u8;
        }
        Ok(())
    })
}

/// Distance of the partition whose side one is the nonzero entries of
/// `labels`.
///
/// # Safety
/// Handles must be live; `labels` must point to `len` readable bytes and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mdseg_distance(
    img: *const MdsegImage,
    cfg: *const MdsegConfig,
    labels: *const u8,
    len: usize,
    out: *mut f64,
) -> MdsegStatus {
    guard(|| {
        let img = image_ref(img)?;
        let cfg = config_ref(cfg)?;
        check_len(len, img.len())?;
        let bools: Vec<bool> = in_slice(labels, len, "labels")?
            .iter()
            .map(|&b| b != 0)
            .collect();
        let d = mdseg::distance(img, &Partition::from_bools(&bools), cfg)?;
        *out.as_mut().ok_or_else(|| Failure::null("out"))? = d;
        Ok(())
    })
}

/// Dice coefficient of two masks of `len` bytes.
///
/// # Safety
/// `a` and `b` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mdseg_dsc(
    a: *const u8,
    b: *const u8,
    len: usize,
    out: *mut f64,
) -> MdsegStatus {
    guard(|| {
        let to_mask = |s: &[u8]| Mask::new(len, 1, s.iter().map(|&v| v != 0).collect());
        let a = to_mask(in_slice(a, len, "a")?)?;
        let b = to_mask(in_slice(b, len, "b")?)?;
        let d = mdseg::dsc_masks(&a, &b)?;
        *out.as_mut().ok_or_else(|| Failure::null("out"))? = d;
        Ok(())
    })
}

/// Synthetic shape with Gaussian noise. `truth_out` may be null; otherwise
/// it receives the `width * height` byte truth mask.
///
/// # Safety
/// `out` must be writable; `truth_out`, when non-null, must point to
/// `truth_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mdseg_synth(
    shape: u32,
    width: usize,
    height: usize,
    sigma: f64,
    seed: u64,
    out: *mut *mut MdsegImage,
    truth_out: *mut u8,
    truth_len: usize,
) -> MdsegStatus {
    guard(|| {
        let kind = match shape {
            0 => ShapeKind::Circle,
            1 => ShapeKind::Square,
            2 => ShapeKind::Triangle,
            3 => ShapeKind::Star,
            4 => ShapeKind::PseudoQr,
            other => return Err(Failure::arg(format!("unknown shape {other}"))),
        };
        let (clean, truth) = make_shape(&ShapeSpec::default_for(kind, width, height, seed))?;
        let noisy = add_noise(&clean, NoiseSpec { sigma, seed })?;
        if !truth_out.is_null() {
            check_len(truth_len, truth.len())?;
            let dst = out_slice(truth_out, truth_len, "truth_out")?;
            for (d, b) in dst.iter_mut().zip(truth.side_one_mask()) {
                *d = b as u8;
            }
        }
        store_image(out, noisy)
    })
}
