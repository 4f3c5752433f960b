//! C ABI over `artqr`.
//!
//! Images and codes are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`ArtqrStatus`]; on failure the
//! message is available from [`artqr_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use artqr::correction::RobustnessParams;
use artqr::decoder::decode_check;
use artqr::pipeline::{generate, stage_c, GenerateOptions, Generated};
use artqr::qr::{EcLevel, Version};
use artqr::stylize::{apply_stylizer, Builtin, Stylizer};
use artqr::Error;
use image::RgbImage;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtqrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    DecodeFailed = 4,
    NonConvergence = 5,
    Stylizer = 6,
    Panic = 7,
}

/// An 8-bit RGB raster.
pub struct ArtqrImage {
    inner: RgbImage,
}

/// A generated code: the scheduled symbol, its geometry and the composed image.
pub struct ArtqrCode {
    payload: Vec<u8>,
    generated: Generated,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ArtqrGenerateOptions {
    /// Symbol version, 1 to 40.
    pub version: u8,
    /// 0 = L, 1 = M, 2 = Q, 3 = H.
    pub ec_level: u8,
    /// Mask pattern, 0 to 7.
    pub mask: u8,
    /// Pixels per module; odd, at least 3.
    pub module_px: u32,
    /// Spot radius in pixels, or a negative value for the default.
    pub spot_radius: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(ArtqrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            e if e.is_decode_failure() => ArtqrStatus::DecodeFailed,
            Error::NonConvergence { .. } => ArtqrStatus::NonConvergence,
            Error::Stylizer(_) => ArtqrStatus::Stylizer,
            Error::Io(_) | Error::Image(_) => ArtqrStatus::Io,
            _ => ArtqrStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ArtqrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(ArtqrStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ArtqrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArtqrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ArtqrStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn image_handle(inner: RgbImage) -> ArtqrImage {
    ArtqrImage { inner }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn artqr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn artqr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn artqr_generate_options_default() -> ArtqrGenerateOptions {
    let d = GenerateOptions::default();
    ArtqrGenerateOptions {
        version: d.version.value(),
        ec_level: 0,
        mask: d.mask,
        module_px: d.module_px,
        spot_radius: -1,
    }
}

/// Copies `len` = `width`·`height`·3 bytes of row-major RGB into a new image.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_from_rgb(
    width: u32,
    height: u32,
    data: *const u8,
    len: usize,
    out: *mut *mut ArtqrImage,
) -> ArtqrStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let need = width as usize * height as usize * 3;
        if len != need || need == 0 {
            return Err(invalid(format!(
                "expected {need} bytes for {width}x{height}, got {len}"
            )));
        }
        let bytes = std::slice::from_raw_parts(data, len).to_vec();
        let img = RgbImage::from_raw(width, height, bytes).ok_or_else(|| invalid("bad raster"))?;
        put(out, image_handle(img))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_load_png(path: *const c_char, out: *mut *mut ArtqrImage) -> ArtqrStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let img = image::open(path).map_err(|e| Fail::from(Error::from(e)))?.to_rgb8();
        put(out, image_handle(img))
    })
}

/// # Safety
/// `image` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_save_png(image: *const ArtqrImage, path: *const c_char) -> ArtqrStatus {
    guard(|| {
        let image = borrow(image, "image")?;
        let path = c_str(path, "path")?;
        image.inner.save(path).map_err(|e| Fail::from(Error::from(e)))
    })
}

/// Width in pixels, 0 for a null handle.
///
/// # Safety
/// `image` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_width(image: *const ArtqrImage) -> u32 {
    image.as_ref().map_or(0, |i| i.inner.width())
}

/// Height in pixels, 0 for a null handle.
///
/// # Safety
/// `image` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_height(image: *const ArtqrImage) -> u32 {
    image.as_ref().map_or(0, |i| i.inner.height())
}

/// Copies the raster into `buf`, which must hold exactly width·height·3 bytes.
///
/// # Safety
/// `image` must be a live handle; `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_copy_rgb(image: *const ArtqrImage, buf: *mut u8, len: usize) -> ArtqrStatus {
    guard(|| {
        let image = borrow(image, "image")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let raw = image.inner.as_raw();
        if len != raw.len() {
            return Err(invalid(format!("buffer holds {len} bytes, image needs {}", raw.len())));
        }
        ptr::copy_nonoverlapping(raw.as_ptr(), buf, len);
        Ok(())
    })
}

/// # Safety
/// `image` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn artqr_image_free(image: *mut ArtqrImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Encodes `message` and blends it into `image`. `options` may be null for
/// the defaults.
///
/// # Safety
/// `message` must point to `len` bytes; `image` must be a live handle;
/// `options` null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_generate(
    message: *const u8,
    len: usize,
    image: *const ArtqrImage,
    options: *const ArtqrGenerateOptions,
    out: *mut *mut ArtqrCode,
) -> ArtqrStatus {
    guard(|| {
        if message.is_null() && len > 0 {
            return Err(null("message"));
        }
        let payload = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(message, len).to_vec()
        };
        let image = borrow(image, "image")?;
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| artqr_generate_options_default());
        let ec_level = match o.ec_level {
            0 => EcLevel::L,
            1 => EcLevel::M,
            2 => EcLevel::Q,
            3 => EcLevel::H,
            n => return Err(invalid(format!("ec_level {n} out of range"))),
        };
        let opts = GenerateOptions {
            version: Version::new(o.version)?,
            ec_level,
            mask: o.mask,
            module_px: o.module_px,
            spot_radius: u32::try_from(o.spot_radius).ok(),
        };
        let generated = generate(&payload, &image.inner, &opts)?;
        put(out, ArtqrCode { payload, generated })
    })
}

/// Side of the code image in pixels, 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn artqr_code_side(code: *const ArtqrCode) -> u32 {
    code.as_ref().map_or(0, |c| c.generated.grid.side())
}

/// Mask pattern of the symbol, 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn artqr_code_mask(code: *const ArtqrCode) -> u8 {
    code.as_ref().map_or(0, |c| c.generated.scheduled.matrix.mask_index)
}

/// Copies the composed code image (no quiet zone) into a new handle.
///
/// # Safety
/// `code` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_code_image(code: *const ArtqrCode, out: *mut *mut ArtqrImage) -> ArtqrStatus {
    guard(|| {
        let code = borrow(code, "code")?;
        put(out, image_handle(code.generated.qa.clone()))
    })
}

/// # Safety
/// `code` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn artqr_code_free(code: *mut ArtqrCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Applies a built-in stylizer given as e.g. `"posterize:4"` or `"hue:120"`.
///
/// # Safety
/// `image` must be a live handle; `spec` a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_stylize_builtin(
    image: *const ArtqrImage,
    spec: *const c_char,
    out: *mut *mut ArtqrImage,
) -> ArtqrStatus {
    guard(|| {
        let image = borrow(image, "image")?;
        let builtin: Builtin = c_str(spec, "spec")?.parse()?;
        let styled = apply_stylizer(&image.inner, &Stylizer::Builtin(builtin))?;
        put(out, image_handle(styled))
    })
}

/// Corrects a stylized version of `code` at margin `delta`. `iterations` may
/// be null.
///
/// # Safety
/// `code` and `stylized` must be live handles; `out` writable; `iterations`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_correct(
    code: *const ArtqrCode,
    stylized: *const ArtqrImage,
    delta: f64,
    out: *mut *mut ArtqrImage,
    iterations: *mut u32,
) -> ArtqrStatus {
    guard(|| {
        let code = borrow(code, "code")?;
        let stylized = borrow(stylized, "stylized")?;
        let g = &code.generated;
        let params = RobustnessParams {
            delta,
            spot_radius: g.spot_radius,
            ..RobustnessParams::default()
        };
        let result = stage_c(&stylized.inner, &g.scheduled.matrix, &g.grid, &params)?;
        if let Some(it) = iterations.as_mut() {
            *it = result.correction.report.iterations_used as u32;
        }
        put(out, image_handle(result.qc))
    })
}

/// Decodes `image` on the geometry of `code` and checks the payload.
/// Returns `DecodeFailed` when decoding fails or the payload differs.
/// `corrections` may be null.
///
/// # Safety
/// `code` and `image` must be live handles; `corrections` null or writable.
#[no_mangle]
pub unsafe extern "C" fn artqr_verify(
    code: *const ArtqrCode,
    image: *const ArtqrImage,
    corrections: *mut u32,
) -> ArtqrStatus {
    guard(|| {
        let code = borrow(code, "code")?;
        let image = borrow(image, "image")?;
        let g = &code.generated;
        let d = decode_check(&image.inner, &g.grid, g.scheduled.matrix.mask_index)?;
        if let Some(c) = corrections.as_mut() {
            *c = d.corrections as u32;
        }
        if d.payload != code.payload {
            return Err(Fail(ArtqrStatus::DecodeFailed, "decoded payload differs".into()));
        }
        Ok(())
    })
}
