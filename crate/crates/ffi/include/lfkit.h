/* lfkit C interface. Generated by cbindgen; do not edit. */

#ifndef LFKIT_H
#define LFKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an lfkit call.
 */
typedef enum LfkitStatus {
  LfkitStatus_Ok = 0,
  /**
   * Invalid argument or configuration.
   */
  LfkitStatus_Usage = 1,
  /**
   * Malformed or inconsistent data.
   */
  LfkitStatus_Data = 2,
  /**
   * Endpoint or backend unreachable.
   */
  LfkitStatus_Transport = 3,
  /**
   * A required pointer was null.
   */
  LfkitStatus_NullPointer = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  LfkitStatus_InvalidUtf8 = 5,
  /**
   * Internal invariant failure.
   */
  LfkitStatus_Panic = 6,
} LfkitStatus;

/**
 * Opaque three-way aggregate.
 */
typedef struct LfkitAggregatedVerdict LfkitAggregatedVerdict;

/**
 * Opaque per-configuration judge verdict.
 */
typedef struct LfkitVerdict LfkitVerdict;

/**
 * chrF++ parameters; defaults are character 6-grams, word 2-grams,
 * beta = 2.
 */
typedef struct LfkitChrfParams {
  size_t char_order;
  size_t word_order;
  double beta;
} LfkitChrfParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Valid until the
 * next failing lfkit call on the same thread.
 */
const char *lfkit_last_error_message(void);

/**
 * Library version as a static string; do not free.
 */
const char *lfkit_version(void);

/**
 * Releases a string returned by lfkit.
 *
 * # Safety
 * `s` must come from an lfkit function that transfers ownership, and
 * must not be used afterwards.
 */
void lfkit_string_free(char *s);

struct LfkitChrfParams lfkit_chrf_params_default(void);

/**
 * Sentence chrF++ of `caption` against `n_references` reference strings.
 * Writes a score in [0, 100] to `out_score`; `out_degenerate` (optional)
 * reports whether the caption was empty.
 *
 * # Safety
 * `references` must point to `n_references` valid NUL-terminated strings;
 * out-pointers must be writable.
 */
enum LfkitStatus lfkit_chrf_sentence(const char *caption,
                                     const char *const *references,
                                     size_t n_references,
                                     const struct LfkitChrfParams *params,
                                     double *out_score,
                                     bool *out_degenerate);

/**
 * Elementwise (1-alpha)*w1 + alpha*w2 over `len` floats into `out`.
 *
 * # Safety
 * `w1`, `w2`, and `out` must each point to `len` readable (writable for
 * `out`) f32 values.
 */
enum LfkitStatus lfkit_lerp_f32(const float *w1,
                                const float *w2,
                                size_t len,
                                double alpha,
                                float *out);

/**
 * Spherical interpolation over `len` floats into `out`, falling back to
 * lerp when the angle or either norm is below `epsilon`.
 *
 * # Safety
 * Same as `lfkit_lerp_f32`.
 */
enum LfkitStatus lfkit_slerp_f32(const float *w1,
                                 const float *w2,
                                 size_t len,
                                 double alpha,
                                 double epsilon,
                                 float *out);

/**
 * Renders the language-consistency evaluation prompt for a caption.
 * Returns an owned string, or null on invalid input.
 *
 * # Safety
 * `caption` must be a valid NUL-terminated string.
 */
char *lfkit_build_prompt(const char *caption);

/**
 * Parses a raw judge reply produced under generation config `config`
 * ('A', 'B', or 'C'). Malformed fields come back absent, never an error.
 *
 * # Safety
 * `raw` must be a valid NUL-terminated string; `out` must be writable.
 * The handle must be released with `lfkit_verdict_free`.
 */
enum LfkitStatus lfkit_parse_verdict(const char *raw, char config, struct LfkitVerdict **out);

/**
 * # Safety
 * `v` must come from `lfkit_parse_verdict` and not be used afterwards.
 */
void lfkit_verdict_free(struct LfkitVerdict *v);

/**
 * Writes the language score if present; returns whether it was present.
 *
 * # Safety
 * `v` must be a live verdict handle; `out_score` must be writable.
 */
bool lfkit_verdict_language_score(const struct LfkitVerdict *v, double *out_score);

/**
 * Writes the fully-in-language boolean if present; returns presence.
 *
 * # Safety
 * `v` must be a live verdict handle; `out_fully` must be writable.
 */
bool lfkit_verdict_fully_in_language(const struct LfkitVerdict *v, bool *out_fully);

/**
 * The judge's language guess, or null when absent. Caller frees.
 *
 * # Safety
 * `v` must be a live verdict handle.
 */
char *lfkit_verdict_language_guess(const struct LfkitVerdict *v);

/**
 * The judge's summary, or null when absent. Caller frees.
 *
 * # Safety
 * `v` must be a live verdict handle.
 */
char *lfkit_verdict_summary(const struct LfkitVerdict *v);

/**
 * Aggregates exactly one verdict per config A, B, C (any argument
 * order): numeric scores average over present values, booleans take the
 * majority with ties resolving to false.
 *
 * # Safety
 * All three handles must be live; `out` must be writable. The result is
 * released with `lfkit_aggregated_free`.
 */
enum LfkitStatus lfkit_aggregate_verdicts(const struct LfkitVerdict *a,
                                          const struct LfkitVerdict *b,
                                          const struct LfkitVerdict *c,
                                          struct LfkitAggregatedVerdict **out);

/**
 * # Safety
 * `agg` must come from `lfkit_aggregate_verdicts` and not be used after.
 */
void lfkit_aggregated_free(struct LfkitAggregatedVerdict *agg);

/**
 * # Safety
 * `agg` must be a live aggregate handle.
 */
bool lfkit_aggregated_fully_in_language(const struct LfkitAggregatedVerdict *agg);

/**
 * # Safety
 * `agg` must be a live aggregate handle.
 */
bool lfkit_aggregated_unparseable(const struct LfkitAggregatedVerdict *agg);

/**
 * Writes the mean language score if any per-config score was present;
 * returns presence.
 *
 * # Safety
 * `agg` must be a live aggregate handle; `out_mean` must be writable.
 */
bool lfkit_aggregated_mean_score(const struct LfkitAggregatedVerdict *agg, double *out_mean);

/**
 * Identifies `text` with the builtin trigram classifier. Writes the
 * language code (NUL-terminated) into `out_code` and the confidence in
 * [0, 1] into `out_confidence` (optional).
 *
 * # Safety
 * `out_code` must hold at least `out_code_len` writable bytes.
 */
enum LfkitStatus lfkit_identify_builtin(const char *text,
                                        char *out_code,
                                        size_t out_code_len,
                                        double *out_confidence);

/**
 * Distributes `text_total` across `n_stages` stages proportionally to
 * their visual volumes under the named strategy ("TR-3S", "TR-2S", or
 * "TR-1S"). `stage_ids` are "1", "1.5", "2", "2.5". Allocations land in
 * `out_allocations`, parallel to the inputs; stages the strategy does
 * not use receive 0.
 *
 * # Safety
 * The three arrays must each hold `n_stages` elements; `stage_ids`
 * entries must be valid NUL-terminated strings.
 */
enum LfkitStatus lfkit_plan_mix(const char *strategy,
                                uint64_t text_total,
                                const char *const *stage_ids,
                                const uint64_t *visual_counts,
                                size_t n_stages,
                                uint64_t *out_allocations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LFKIT_H */
