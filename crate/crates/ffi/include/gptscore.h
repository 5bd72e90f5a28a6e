#ifndef GPTSCORE_H
#define GPTSCORE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call.
typedef enum GsStatus {
  GS_STATUS_OK = 0,
  // Null pointer, invalid UTF-8, unknown enum name or out-of-range value.
  GS_STATUS_INVALID_ARGUMENT = 1,
  // Unknown aspect or missing template.
  GS_STATUS_NOT_FOUND = 2,
  // Malformed data or JSON.
  GS_STATUS_DATA = 3,
  // Transport or logprob failure from a backend.
  GS_STATUS_BACKEND = 4,
  // Correlation of a constant vector.
  GS_STATUS_DEGENERATE = 5,
  // A Rust panic was caught at the boundary.
  GS_STATUS_PANIC = 6,
} GsStatus;

typedef struct GsAspectRegistry GsAspectRegistry;

typedef struct GsBackend GsBackend;

typedef struct GsTemplates GsTemplates;

// Precision, recall and F1 of a ROUGE comparison.
typedef struct GsRouge {
  double precision;
  double recall;
  double f1;
} GsRouge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call on the same thread.
const char *gs_last_error(void);

// Library version as a static string.
const char *gs_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void gs_string_free(char *s);

// Pearson correlation of `x` and `y`, both of length `n`.
//
// # Safety
// `x` and `y` must point to `n` doubles; `out` must be writable.
enum GsStatus gs_pearson(const double *x, const double *y, size_t n, double *out);

// Spearman rank correlation of `x` and `y`, both of length `n`.
//
// # Safety
// As for [`gs_pearson`].
enum GsStatus gs_spearman(const double *x, const double *y, size_t n, double *out);

// GPTScore of `n` target-token logprobs: their mean.
//
// # Safety
// `logprobs` must point to `n` doubles; `out` must be writable.
enum GsStatus gs_gptscore(const double *logprobs, size_t n, double *out);

// ROUGE of `hypo` against `reference`. `variant` is 1 or 2 for ROUGE-N and
// 0 for ROUGE-L.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum GsStatus gs_rouge(const char *hypo, const char *reference, int variant, struct GsRouge *out);

// The built-in aspect registry.
//
// # Safety
// `out` must be writable.
enum GsStatus gs_aspects_builtin(struct GsAspectRegistry **out);

// An aspect registry parsed from JSON.
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum GsStatus gs_aspects_from_json(const char *json, struct GsAspectRegistry **out);

// # Safety
// `reg` must come from this library and not have been freed. Null is ignored.
void gs_aspects_free(struct GsAspectRegistry *reg);

// Definition of `target` with `extras` merged in.
//
// # Safety
// `extras` must point to `n_extras` NUL-terminated strings; `out` must be
// writable.
enum GsStatus gs_compose_definition(const struct GsAspectRegistry *reg,
                                    const char *target,
                                    const char *const *extras,
                                    size_t n_extras,
                                    char **out);

// The built-in prompt templates.
//
// # Safety
// `out` must be writable.
enum GsStatus gs_templates_builtin(struct GsTemplates **out);

// Templates parsed from JSON.
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum GsStatus gs_templates_from_json(const char *json, struct GsTemplates **out);

// # Safety
// `t` must come from this library and not have been freed. Null is ignored.
void gs_templates_free(struct GsTemplates *t);

// Renders a template. `bindings_json` is an object of placeholder values
// such as `{"src": "...", "hypo": "..."}`; `demos_json` is null or an array
// of such objects. The scored prompt is `*prefix_out` followed by
// `*target_out`.
//
// # Safety
// Strings must be NUL-terminated; out-pointers must be writable.
enum GsStatus gs_render(const struct GsTemplates *templates,
                        const char *task,
                        const char *aspect,
                        const char *direction,
                        const char *setting,
                        const char *bindings_json,
                        const char *demos_json,
                        char **prefix_out,
                        char **target_out);

// A backend described by a JSON backend config (kind, model_id,
// endpoint_url, cache_dir, ...).
//
// # Safety
// `config_json` must be NUL-terminated; `out` must be writable.
enum GsStatus gs_backend_from_config(const char *config_json, struct GsBackend **out);

// An add-one smoothed unigram model estimated from `corpus`.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum GsStatus gs_backend_unigram(const char *model_id, const char *corpus, struct GsBackend **out);

// # Safety
// `b` must come from this library and not have been freed. Null is ignored.
void gs_backend_free(struct GsBackend *b);

// Scores one hypothesis. `source` and `reference` may be null when the
// template does not use them. Writes the GPTScore and the number of target
// tokens.
//
// # Safety
// Handles must be live; strings NUL-terminated; out-pointers writable.
enum GsStatus gs_score(const struct GsBackend *backend,
                       const struct GsTemplates *templates,
                       const char *task,
                       const char *aspect,
                       const char *direction,
                       const char *setting,
                       const char *source,
                       const char *reference,
                       const char *hypothesis,
                       double *score_out,
                       size_t *tokens_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPTSCORE_H */
