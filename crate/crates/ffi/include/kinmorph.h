#ifndef KINMORPH_H
#define KINMORPH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Length of one candidate feature vector.
 */
#define KM_FEATURES 64

typedef enum KmStatus {
  KM_STATUS_OK = 0,
  KM_STATUS_NULL_POINTER = 1,
  KM_STATUS_INVALID_UTF8 = 2,
  KM_STATUS_IO = 3,
  KM_STATUS_PARSE = 4,
  KM_STATUS_VALIDATION = 5,
  KM_STATUS_DOMAIN = 6,
  KM_STATUS_INVALID_ARGUMENT = 7,
  KM_STATUS_PANIC = 8,
} KmStatus;

/**
 * Opaque analyzer handle.
 */
typedef struct KmAnalyzer KmAnalyzer;

/**
 * Opaque scorer handle.
 */
typedef struct KmModel KmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *km_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void km_string_free(char *s);

/**
 * Builds an analyzer. Each source argument holds the text of the
 * corresponding resource file; null selects the built-in resource. With
 * `use_stem_lexicon` zero, stems are not checked against a lexicon.
 *
 * # Safety
 * Non-null string arguments must be NUL-terminated; `out` must be writable.
 */
enum KmStatus km_analyzer_new(const char *inventory,
                              const char *rules,
                              const char *constraints,
                              const char *stems,
                              int32_t use_stem_lexicon,
                              struct KmAnalyzer **out);

/**
 * # Safety
 * `a` must come from [`km_analyzer_new`] and not have been freed.
 */
void km_analyzer_free(struct KmAnalyzer *a);

/**
 * Analyzes one word. On success `*out` holds one line per analysis:
 * the column serialization, the stem and the comma-separated indicator
 * numbers, tab-separated. `*count` receives the number of analyses.
 *
 * # Safety
 * `a` must be a live handle, `word` NUL-terminated, `out` and `count`
 * writable.
 */
enum KmStatus km_analyze(const struct KmAnalyzer *a, const char *word, char **out, size_t *count);

/**
 * Renders a deep morpheme sequence (`"ku-som-a"`) to its surface form.
 *
 * # Safety
 * As for [`km_analyze`].
 */
enum KmStatus km_surface(const struct KmAnalyzer *a, const char *deep, char **out);

/**
 * Loads a scorer from checkpoint JSON text.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` writable.
 */
enum KmStatus km_model_from_json(const char *json, struct KmModel **out);

/**
 * # Safety
 * `m` must come from [`km_model_from_json`] and not have been freed.
 */
void km_model_free(struct KmModel *m);

/**
 * Scores `n` candidates laid out row-major in `features` (`n * 64`
 * finite values, normally in [0, 1]) and writes their softmax probabilities to `probs`.
 *
 * # Safety
 * `features` must hold `n * 64` doubles and `probs` room for `n`.
 */
enum KmStatus km_model_predict(const struct KmModel *m,
                               const double *features,
                               size_t n,
                               double *probs);

/**
 * The normalizing sigmoid `(1 + exp(-8 (z - min) / (max - min)))^-8`.
 */
double km_norm_sigmoid(double z, double min, double max);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KINMORPH_H */
