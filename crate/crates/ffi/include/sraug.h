#ifndef SRAUG_H
#define SRAUG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = -1,
  SR_STATUS_INVALID_ARGUMENT = -2,
  SR_STATUS_IO = -3,
  SR_STATUS_MALFORMED_CONTAINER = -4,
  SR_STATUS_UNSUPPORTED_FORMAT = -5,
  SR_STATUS_CONFIG_MISMATCH = -6,
  SR_STATUS_DEGENERATE_WINDOW_SUM = -7,
  SR_STATUS_DIMENSION_MISMATCH = -8,
  SR_STATUS_DEGENERATE_VARIANCE = -9,
  SR_STATUS_INSUFFICIENT_VOICED_OVERLAP = -10,
  SR_STATUS_INPUT_TOO_SHORT = -11,
  SR_STATUS_VOCODER = -12,
  SR_STATUS_EMPTY_CORPUS = -13,
  SR_STATUS_BUFFER_TOO_SMALL = -14,
  SR_STATUS_PANIC = -99,
} SrStatus;

typedef enum SrAxis {
  SR_AXIS_VERTICAL = 0,
  SR_AXIS_HORIZONTAL = 1,
} SrAxis;

// Opaque log-mel spectrogram handle.
typedef struct SrMel SrMel;

// Opaque waveform handle.
typedef struct SrWaveform SrWaveform;

// Batch augmentation settings. Obtain defaults from
// [`sraug_augment_options_default`].
typedef struct SrAugmentOptions {
  double ratio_min;
  double ratio_max;
  size_t variants_per_file;
  enum SrAxis axis;
  uint64_t master_seed;
  double pad_noise_std;
  size_t gl_iters;
  // 0 means one worker per core.
  size_t jobs;
} SrAugmentOptions;

typedef struct SrAugmentSummary {
  size_t n_inputs;
  size_t n_outputs;
  size_t n_failures;
} SrAugmentSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a
// successful call. Valid until the next call on the same thread.
const char *sraug_last_error_message(void);

// Static NUL-terminated version string.
const char *sraug_version(void);

// # Safety
// `samples` must point to `len` readable doubles (may be NULL when `len` is 0).
enum SrStatus sraug_waveform_new(const double *samples,
                                 size_t len,
                                 uint32_t sample_rate,
                                 struct SrWaveform **out);

// # Safety
// `path` must be a NUL-terminated string.
enum SrStatus sraug_waveform_read(const char *path, struct SrWaveform **out);

// Writes 16-bit PCM mono.
//
// # Safety
// `w` must be a live handle and `path` a NUL-terminated string.
enum SrStatus sraug_waveform_write(const struct SrWaveform *w, const char *path);

// # Safety
// `w` must be a live handle or NULL.
size_t sraug_waveform_len(const struct SrWaveform *w);

// # Safety
// `w` must be a live handle or NULL.
uint32_t sraug_waveform_sample_rate(const struct SrWaveform *w);

// Copies the samples into `buf`. `*written` always receives the sample
// count, so a call with `capacity` 0 queries the required size.
//
// # Safety
// `w` must be a live handle and `buf` writable for `capacity` doubles.
enum SrStatus sraug_waveform_copy(const struct SrWaveform *w,
                                  double *buf,
                                  size_t capacity,
                                  size_t *written);

// # Safety
// `w` must be a live handle.
enum SrStatus sraug_waveform_resample(const struct SrWaveform *w,
                                      uint32_t target_rate,
                                      struct SrWaveform **out);

// # Safety
// `w` must come from this library and not be used afterwards. NULL is a no-op.
void sraug_waveform_free(struct SrWaveform *w);

// Log-mel spectrogram with the default 16 kHz analysis settings.
//
// # Safety
// `w` must be a live handle.
enum SrStatus sraug_mel_from_waveform(const struct SrWaveform *w, struct SrMel **out);

// # Safety
// `m` must be a live handle; the out pointers must be writable.
enum SrStatus sraug_mel_shape(const struct SrMel *m, size_t *n_frames, size_t *n_mels);

// Copies natural-log mel values, frame-major.
//
// # Safety
// `m` must be a live handle and `buf` writable for `capacity` doubles.
enum SrStatus sraug_mel_copy(const struct SrMel *m, double *buf, size_t capacity, size_t *written);

// # Safety
// `path` must be a NUL-terminated string.
enum SrStatus sraug_mel_read(const char *path, struct SrMel **out);

// # Safety
// `m` must be a live handle and `path` a NUL-terminated string.
enum SrStatus sraug_mel_write(const struct SrMel *m, const char *path);

// Resizes along `axis` by `ratio` in [0.5, 2]. Vertical padding noise is
// drawn from `seed`.
//
// # Safety
// `m` must be a live handle.
enum SrStatus sraug_mel_resize(const struct SrMel *m,
                               double ratio,
                               enum SrAxis axis,
                               double pad_noise_std,
                               uint64_t seed,
                               struct SrMel **out);

// Griffin-Lim reconstruction with zero-phase init and momentum 0.99.
//
// # Safety
// `m` must be a live handle.
enum SrStatus sraug_mel_reconstruct(const struct SrMel *m,
                                    size_t gl_iters,
                                    struct SrWaveform **out);

// # Safety
// `m` must come from this library and not be used afterwards. NULL is a no-op.
void sraug_mel_free(struct SrMel *m);

// Pearson correlation of the F0 contours over co-voiced frames.
//
// # Safety
// `source` and `converted` must be live handles.
enum SrStatus sraug_f0_pcc(const struct SrWaveform *source,
                           const struct SrWaveform *converted,
                           double *out);

// KL(q || p) between diagonal Gaussians given as means and log standard
// deviations of length `dim`.
//
// # Safety
// Each array must hold `dim` readable doubles.
enum SrStatus sraug_kl_diag_gaussian(const double *q_mean,
                                     const double *q_log_std,
                                     const double *p_mean,
                                     const double *p_log_std,
                                     size_t dim,
                                     double *out);

struct SrAugmentOptions sraug_augment_options_default(void);

// Augments a WAV file or directory tree into `output_dir` and writes
// `manifest.jsonl` there. Per-file failures are counted in the summary and
// do not change the status.
//
// # Safety
// `input` and `output_dir` must be NUL-terminated strings; `opts` may be NULL
// for defaults; `summary` may be NULL.
enum SrStatus sraug_augment(const char *input,
                            const char *output_dir,
                            const struct SrAugmentOptions *opts,
                            struct SrAugmentSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRAUG_H */
