#ifndef EMODIA_H
#define EMODIA_H

/* Generated by cbindgen from emodia-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of an FFI call.
 */
typedef enum EmodiaStatus {
  EMODIA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EMODIA_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EMODIA_STATUS_INVALID_UTF8 = 2,
  /**
   * Arguments were structurally invalid (bad kind value, zero rows).
   */
  EMODIA_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Input was readable but failed validation (overlap, duration
   * mismatch, too few raters, ...).
   */
  EMODIA_STATUS_DOMAIN = 4,
  /**
   * Input could not be read or parsed.
   */
  EMODIA_STATUS_INPUT = 5,
} EmodiaStatus;

/**
 * Kind of timeline being constructed.
 */
typedef enum EmodiaTimelineKind {
  EMODIA_TIMELINE_KIND_REFERENCE = 0,
  EMODIA_TIMELINE_KIND_HYPOTHESIS = 1,
} EmodiaTimelineKind;

/**
 * An opaque timeline handle.
 */
typedef struct EmodiaTimeline EmodiaTimeline;

/**
 * Per-utterance scoring result. Tick counts are 100 µs units.
 */
typedef struct EmodiaEderBreakdown {
  uint64_t false_alarm_ticks;
  uint64_t missed_emotion_ticks;
  uint64_t confusion_ticks;
  uint64_t overlap_ticks;
  uint64_t correct_ticks;
  uint64_t duration_ticks;
  /**
   * (fa + me + cf + ol) / duration, in [0, 1].
   */
  double eder;
} EmodiaEderBreakdown;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. Borrowed;
 * valid until the next failing call on the same thread.
 */
const char *emodia_last_error(void);

/**
 * Toolkit version as a static string (never freed).
 */
const char *emodia_version(void);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by an emodia function documented as
 * caller-owned, and not freed before.
 */
void emodia_string_free(char *s);

/**
 * Read an interval JSON file into a timeline handle.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid
 * pointer; on success the caller owns the handle.
 */
enum EmodiaStatus emodia_timeline_read(const char *path,
                                       enum EmodiaTimelineKind kind,
                                       bool lenient,
                                       struct EmodiaTimeline **out);

/**
 * Parse interval JSON from a string into a timeline handle.
 *
 * # Safety
 * Same contract as [`emodia_timeline_read`].
 */
enum EmodiaStatus emodia_timeline_from_json(const char *json,
                                            enum EmodiaTimelineKind kind,
                                            bool lenient,
                                            struct EmodiaTimeline **out);

/**
 * Release a timeline handle.
 *
 * # Safety
 * `timeline` must be a handle from this library, not yet freed. Null
 * is a no-op.
 */
void emodia_timeline_free(struct EmodiaTimeline *timeline);

/**
 * Utterance duration in 100 µs ticks.
 *
 * # Safety
 * `timeline` and `out` must be valid pointers.
 */
enum EmodiaStatus emodia_timeline_duration_ticks(const struct EmodiaTimeline *timeline,
                                                 uint64_t *out);

/**
 * Utterance id as a caller-owned string.
 *
 * # Safety
 * `timeline` and `out` must be valid; free the string with
 * [`emodia_string_free`].
 */
enum EmodiaStatus emodia_timeline_utterance_id(const struct EmodiaTimeline *timeline, char **out);

/**
 * The timeline's transition pattern ("happy", "null-sad-null",
 * "invalid", ...) as a caller-owned string. Only meaningful for
 * non-overlapping timelines.
 *
 * # Safety
 * `timeline` and `out` must be valid; free the string with
 * [`emodia_string_free`].
 */
enum EmodiaStatus emodia_timeline_pattern(const struct EmodiaTimeline *timeline, char **out);

/**
 * Score a hypothesis against a reference.
 *
 * # Safety
 * All pointers must be valid; `reference` must be reference-kind and
 * both timelines must share one duration.
 */
enum EmodiaStatus emodia_eder(const struct EmodiaTimeline *reference,
                              const struct EmodiaTimeline *hypothesis,
                              struct EmodiaEderBreakdown *out);

/**
 * Fleiss' kappa over a row-major `n_items x 4` table of category
 * counts (happy, sad, angry, null); every row must sum to `n_raters`.
 *
 * # Safety
 * `counts` must point to `n_items * 4` readable u32 values; `out`
 * must be valid.
 */
enum EmodiaStatus emodia_fleiss_kappa(const uint32_t *counts,
                                      uintptr_t n_items,
                                      uint32_t n_raters,
                                      double *out);

/**
 * Screen a WAV file for over-long silences. `accepted` is false when
 * some silent run is strictly longer than `max_silence_s`;
 * `longest_silence_s` reports the longest run (0 when none).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; out pointers must be
 * valid.
 */
enum EmodiaStatus emodia_validate_wav(const char *path,
                                      double max_silence_s,
                                      double floor_dbfs,
                                      bool *accepted,
                                      double *longest_silence_s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMODIA_H */
