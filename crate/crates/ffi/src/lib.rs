//! C ABI over `sraug`.
//!
//! Every entry point returns an [`SrStatus`]; values come back through out
//! pointers. On failure a message for the calling thread is available from
//! [`sraug_last_error_message`]. Handles are opaque and owned by the caller,
//! who releases them with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use sraug::audio_io::{read_wav, resample, write_wav, Waveform};
use sraug::pipeline::{run, PipelineConfig};
use sraug::pitch_eval::{f0_pcc, PitchConfig};
use sraug::spectral::{mel_spectrogram, read_melf, write_melf, MelSpectrogram, SpectralConfig};
use sraug::sr_ops::{apply_resize, RatioRange, ResizeAxis, ResizeSpec};
use sraug::vc_losses::{kl_diag_gaussian, DiagGaussian};
use sraug::vocoder::{reconstruct_from_mel, GriffinLimConfig};
use sraug::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    Io = -3,
    MalformedContainer = -4,
    UnsupportedFormat = -5,
    ConfigMismatch = -6,
    DegenerateWindowSum = -7,
    DimensionMismatch = -8,
    DegenerateVariance = -9,
    InsufficientVoicedOverlap = -10,
    InputTooShort = -11,
    Vocoder = -12,
    EmptyCorpus = -13,
    BufferTooSmall = -14,
    Panic = -99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrAxis {
    Vertical = 0,
    Horizontal = 1,
}

impl From<SrAxis> for ResizeAxis {
    fn from(a: SrAxis) -> Self {
        match a {
            SrAxis::Vertical => ResizeAxis::Vertical,
            SrAxis::Horizontal => ResizeAxis::Horizontal,
        }
    }
}

/// Opaque waveform handle.
pub struct SrWaveform(Waveform);

/// Opaque log-mel spectrogram handle.
pub struct SrMel(MelSpectrogram);

/// Batch augmentation settings. Obtain defaults from
/// [`sraug_augment_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrAugmentOptions {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub variants_per_file: usize,
    pub axis: SrAxis,
    pub master_seed: u64,
    pub pad_noise_std: f64,
    pub gl_iters: usize,
    /// 0 means one worker per core.
    pub jobs: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SrAugmentSummary {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub n_failures: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::MalformedContainer(_) => SrStatus::MalformedContainer,
            Error::UnsupportedFormat(_) => SrStatus::UnsupportedFormat,
            Error::IoFailure(_) => SrStatus::Io,
            Error::ConfigMismatch(_) => SrStatus::ConfigMismatch,
            Error::DegenerateWindowSum { .. } => SrStatus::DegenerateWindowSum,
            Error::InputTooShort { .. } => SrStatus::InputTooShort,
            Error::DegenerateVariance(_) => SrStatus::DegenerateVariance,
            Error::InsufficientVoicedOverlap { .. } => SrStatus::InsufficientVoicedOverlap,
            Error::DimensionMismatch(_) => SrStatus::DimensionMismatch,
            Error::VocoderProcessFailure { .. }
            | Error::VocoderOutputMissing(_)
            | Error::VocoderTimeout(_) => SrStatus::Vocoder,
            Error::EmptyCorpus(_) => SrStatus::EmptyCorpus,
            _ => SrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SrStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            SrStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(Some(format!("panic: {msg}")));
            SrStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn emit<H>(out: *mut *mut H, handle: H) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(Box::into_raw(Box::new(handle))) };
    Ok(())
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(SrStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, capacity: usize, written: *mut usize) -> Result<(), Failure> {
    unsafe { put(written, src.len(), "written") }?;
    if capacity < src.len() {
        return Err(Failure(
            SrStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, need {}", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    }
    Ok(())
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sraug_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn sraug_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `samples` must point to `len` readable doubles (may be NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_new(
    samples: *const f64,
    len: usize,
    sample_rate: u32,
    out: *mut *mut SrWaveform,
) -> SrStatus {
    guard(|| {
        let s = unsafe { slice_arg(samples, len, "samples") }?;
        let w = Waveform::new(s.to_vec(), sample_rate)?;
        unsafe { emit(out, SrWaveform(w)) }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_read(path: *const c_char, out: *mut *mut SrWaveform) -> SrStatus {
    guard(|| {
        let w = read_wav(unsafe { path_arg(path, "path") }?)?;
        unsafe { emit(out, SrWaveform(w)) }
    })
}

/// Writes 16-bit PCM mono.
///
/// # Safety
/// `w` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_write(w: *const SrWaveform, path: *const c_char) -> SrStatus {
    guard(|| {
        let w = unsafe { as_ref(w, "waveform") }?;
        write_wav(unsafe { path_arg(path, "path") }?, &w.0)?;
        Ok(())
    })
}

/// # Safety
/// `w` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_len(w: *const SrWaveform) -> usize {
    unsafe { w.as_ref() }.map_or(0, |w| w.0.len())
}

/// # Safety
/// `w` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_sample_rate(w: *const SrWaveform) -> u32 {
    unsafe { w.as_ref() }.map_or(0, |w| w.0.sample_rate())
}

/// Copies the samples into `buf`. `*written` always receives the sample
/// count, so a call with `capacity` 0 queries the required size.
///
/// # Safety
/// `w` must be a live handle and `buf` writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_copy(
    w: *const SrWaveform,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SrStatus {
    guard(|| {
        let w = unsafe { as_ref(w, "waveform") }?;
        unsafe { copy_out(w.0.samples(), buf, capacity, written) }
    })
}

/// # Safety
/// `w` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_resample(
    w: *const SrWaveform,
    target_rate: u32,
    out: *mut *mut SrWaveform,
) -> SrStatus {
    guard(|| {
        let w = unsafe { as_ref(w, "waveform") }?;
        let r = resample(&w.0, target_rate)?;
        unsafe { emit(out, SrWaveform(r)) }
    })
}

/// # Safety
/// `w` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sraug_waveform_free(w: *mut SrWaveform) {
    if !w.is_null() {
        drop(unsafe { Box::from_raw(w) });
    }
}

/// Log-mel spectrogram with the default 16 kHz analysis settings.
///
/// # Safety
/// `w` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_from_waveform(w: *const SrWaveform, out: *mut *mut SrMel) -> SrStatus {
    guard(|| {
        let w = unsafe { as_ref(w, "waveform") }?;
        let m = mel_spectrogram(&w.0, &SpectralConfig::default())?;
        unsafe { emit(out, SrMel(m)) }
    })
}

/// # Safety
/// `m` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_shape(
    m: *const SrMel,
    n_frames: *mut usize,
    n_mels: *mut usize,
) -> SrStatus {
    guard(|| {
        let m = unsafe { as_ref(m, "mel") }?;
        unsafe { put(n_frames, m.0.n_frames(), "n_frames") }?;
        unsafe { put(n_mels, m.0.n_mels(), "n_mels") }
    })
}

/// Copies natural-log mel values, frame-major.
///
/// # Safety
/// `m` must be a live handle and `buf` writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_copy(
    m: *const SrMel,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SrStatus {
    guard(|| {
        let m = unsafe { as_ref(m, "mel") }?;
        let values: Vec<f64> = m.0.logmels.iter().copied().collect();
        unsafe { copy_out(&values, buf, capacity, written) }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_read(path: *const c_char, out: *mut *mut SrMel) -> SrStatus {
    guard(|| {
        let m = read_melf(unsafe { path_arg(path, "path") }?, &SpectralConfig::default())?;
        unsafe { emit(out, SrMel(m)) }
    })
}

/// # Safety
/// `m` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_write(m: *const SrMel, path: *const c_char) -> SrStatus {
    guard(|| {
        let m = unsafe { as_ref(m, "mel") }?;
        write_melf(unsafe { path_arg(path, "path") }?, &m.0)?;
        Ok(())
    })
}

/// Resizes along `axis` by `ratio` in [0.5, 2]. Vertical padding noise is
/// drawn from `seed`.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_resize(
    m: *const SrMel,
    ratio: f64,
    axis: SrAxis,
    pad_noise_std: f64,
    seed: u64,
    out: *mut *mut SrMel,
) -> SrStatus {
    guard(|| {
        let m = unsafe { as_ref(m, "mel") }?;
        let spec = ResizeSpec {
            ratio,
            axis: axis.into(),
            pad_noise_std,
            seed,
        };
        let r = apply_resize(&m.0, &spec)?;
        unsafe { emit(out, SrMel(r)) }
    })
}

/// Griffin-Lim reconstruction with zero-phase init and momentum 0.99.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_reconstruct(
    m: *const SrMel,
    gl_iters: usize,
    out: *mut *mut SrWaveform,
) -> SrStatus {
    guard(|| {
        let m = unsafe { as_ref(m, "mel") }?;
        let gl = GriffinLimConfig {
            n_iters: gl_iters,
            ..Default::default()
        };
        let w = reconstruct_from_mel(&m.0, &gl)?;
        unsafe { emit(out, SrWaveform(w)) }
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sraug_mel_free(m: *mut SrMel) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Pearson correlation of the F0 contours over co-voiced frames.
///
/// # Safety
/// `source` and `converted` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn sraug_f0_pcc(
    source: *const SrWaveform,
    converted: *const SrWaveform,
    out: *mut f64,
) -> SrStatus {
    guard(|| {
        let a = unsafe { as_ref(source, "source") }?;
        let b = unsafe { as_ref(converted, "converted") }?;
        let r = f0_pcc(&a.0, &b.0, &PitchConfig::default())?;
        unsafe { put(out, r, "out") }
    })
}

/// KL(q || p) between diagonal Gaussians given as means and log standard
/// deviations of length `dim`.
///
/// # Safety
/// Each array must hold `dim` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn sraug_kl_diag_gaussian(
    q_mean: *const f64,
    q_log_std: *const f64,
    p_mean: *const f64,
    p_log_std: *const f64,
    dim: usize,
    out: *mut f64,
) -> SrStatus {
    guard(|| {
        let load = |mean, log_std, name: &str| -> Result<DiagGaussian, Failure> {
            let m = unsafe { slice_arg(mean, dim, name) }?;
            let s = unsafe { slice_arg(log_std, dim, name) }?;
            Ok(DiagGaussian::new(m.to_vec(), s.to_vec())?)
        };
        let q = load(q_mean, q_log_std, "q")?;
        let p = load(p_mean, p_log_std, "p")?;
        unsafe { put(out, kl_diag_gaussian(&q, &p)?, "out") }
    })
}

#[no_mangle]
pub extern "C" fn sraug_augment_options_default() -> SrAugmentOptions {
    let cfg = PipelineConfig::new("", "");
    SrAugmentOptions {
        ratio_min: cfg.ratio_range.lo,
        ratio_max: cfg.ratio_range.hi,
        variants_per_file: cfg.variants_per_file,
        axis: SrAxis::Vertical,
        master_seed: cfg.master_seed,
        pad_noise_std: cfg.pad_noise_std,
        gl_iters: cfg.gl.n_iters,
        jobs: cfg.jobs,
    }
}

/// Augments a WAV file or directory tree into `output_dir` and writes
/// `manifest.jsonl` there. Per-file failures are counted in the summary and
/// do not change the status.
///
/// # Safety
/// `input` and `output_dir` must be NUL-terminated strings; `opts` may be NULL
/// for defaults; `summary` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn sraug_augment(
    input: *const c_char,
    output_dir: *const c_char,
    opts: *const SrAugmentOptions,
    summary: *mut SrAugmentSummary,
) -> SrStatus {
    guard(|| {
        let o = unsafe { opts.as_ref() }
            .copied()
            .unwrap_or_else(|| sraug_augment_options_default());
        let mut cfg = PipelineConfig::new(unsafe { path_arg(input, "input") }?, unsafe {
            path_arg(output_dir, "output_dir")
        }?);
        cfg.ratio_range = RatioRange {
            lo: o.ratio_min,
            hi: o.ratio_max,
        };
        cfg.variants_per_file = o.variants_per_file;
        cfg.axis = o.axis.into();
        cfg.master_seed = o.master_seed;
        cfg.pad_noise_std = o.pad_noise_std;
        cfg.gl.n_iters = o.gl_iters;
        cfg.jobs = o.jobs;
        let report = run(&cfg)?;
        if let Some(s) = unsafe { summary.as_mut() } {
            *s = SrAugmentSummary {
                n_inputs: report.n_inputs,
                n_outputs: report.manifest.len(),
                n_failures: report.failures.len(),
            };
        }
        Ok(())
    })
}
