#ifndef BEAMPRUNE_H
#define BEAMPRUNE_H

/* Generated by cbindgen from beamprune-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code for every fallible entry point.
 */
typedef enum BpStatus {
  BpStatus_Ok = 0,
  BpStatus_NullPointer = 1,
  BpStatus_InvalidUtf8 = 2,
  BpStatus_InvalidArgument = 3,
  BpStatus_RuntimeError = 4,
} BpStatus;

/**
 * Opaque decode configuration handle.
 */
typedef struct BpConfig BpConfig;

/**
 * Opaque scoring model handle.
 */
typedef struct BpModel BpModel;

/**
 * Opaque decode result handle.
 */
typedef struct BpResult BpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bp_version(void);

/**
 * Message for the most recent failure on this thread. Never null; empty
 * before the first failure. Valid until the next failing call here.
 */
const char *bp_last_error_message(void);

/**
 * Build a scoring model from a spec string
 * (`uniform[:v=N]`, `ngram:train=F,...`, `planted:...`, `table:file=F,vocab=F`).
 *
 * # Safety
 * `spec` must point to a NUL-terminated string; `out_model` must be a valid
 * destination pointer.
 */
enum BpStatus bp_model_new(const char *spec, struct BpModel **out_model);

/**
 * # Safety
 * `model` must come from `bp_model_new` and not have been freed.
 */
void bp_model_free(struct BpModel *model);

/**
 * Vocabulary size of the model, or 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t bp_model_vocab_size(const struct BpModel *model);

/**
 * Neutral-pruning configuration with the given beam size (`>= 1`).
 *
 * # Safety
 * `out_config` must be a valid destination pointer.
 */
enum BpStatus bp_config_new(size_t beam_size, struct BpConfig **out_config);

/**
 * Parse a configuration from its JSON document form (fields `rp`, `ap`,
 * `rpl`, `mc`, `beam_size`, `max_len_factor`, `max_len_offset`,
 * `normalize_by_length`, `unbounded_cap`; `"inf"`, `"unlimited"` and
 * `"unbounded"` encode the unbounded sentinels).
 *
 * # Safety
 * `json` must point to a NUL-terminated string; `out_config` must be a
 * valid destination pointer.
 */
enum BpStatus bp_config_from_json(const char *json, struct BpConfig **out_config);

/**
 * # Safety
 * `config` must come from a `bp_config_*` constructor and not have been freed.
 */
void bp_config_free(struct BpConfig *config);

/**
 * Decode one source sentence (whitespace-separated tokens; may be empty)
 * and return a result handle.
 *
 * # Safety
 * `model` and `config` must be live handles; `source` must point to a
 * NUL-terminated string; `out_result` must be a valid destination pointer.
 */
enum BpStatus bp_decode(const struct BpModel *model,
                        const char *source,
                        const struct BpConfig *config,
                        struct BpResult **out_result);

/**
 * # Safety
 * `result` must come from `bp_decode` and not have been freed.
 */
void bp_result_free(struct BpResult *result);

/**
 * Best decoded sequence as a space-joined token string. Owned by the
 * result handle; valid until `bp_result_free`.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
const char *bp_result_best_tokens(const struct BpResult *result);

/**
 * # Safety
 * `result` must be a live handle or null (returns NaN for null).
 */
double bp_result_total_score(const struct BpResult *result);

/**
 * # Safety
 * `result` must be a live handle or null (returns NaN for null).
 */
double bp_result_normalized_score(const struct BpResult *result);

/**
 * Number of decode steps executed.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
size_t bp_result_steps(const struct BpResult *result);

/**
 * Number of completed hypotheses in the final candidate list.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
size_t bp_result_num_finals(const struct BpResult *result);

/**
 * Total fan-out (candidates expanded) across all steps.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
uint64_t bp_result_tot_fan_out(const struct BpResult *result);

/**
 * Mean fan-out per step.
 *
 * # Safety
 * `result` must be a live handle or null (returns NaN for null).
 */
double bp_result_avg_fan_out(const struct BpResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEAMPRUNE_H */
