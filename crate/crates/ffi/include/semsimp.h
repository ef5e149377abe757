#ifndef SEMSIMP_H
#define SEMSIMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SemsimpStatus {
  SEMSIMP_STATUS_OK = 0,
  // A required pointer argument was null.
  SEMSIMP_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  SEMSIMP_STATUS_INVALID_UTF8 = 2,
  // Bad options, such as an unknown stage name.
  SEMSIMP_STATUS_CONFIG = 3,
  // Unreadable models or input that could not be simplified.
  SEMSIMP_STATUS_DATA = 4,
  // The library panicked; the handle involved should be discarded.
  SEMSIMP_STATUS_PANIC = 5,
} SemsimpStatus;

// Loaded models plus stage selection.
typedef struct SemsimpPipeline SemsimpPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *semsimp_version(void);

// Message of the last failed call on this thread, or null if none.
// Valid until the next failing call on the same thread.
const char *semsimp_last_error_message(void);

// Loads a pipeline from a model directory holding `sft.tsv`, `lm.counts`,
// `rules.tsv` (with `rules.tsv.vectors`) and `relprobs.tsv`.
//
// `stages` is a comma-separated subset of `lex,split,delete`; null means
// all three. `min_deleted_tokens` asks compression to remove at least that
// many tokens (0 for the single-phrase minimum).
//
// # Safety
// `models_dir` and a non-null `stages` must be NUL-terminated strings;
// `out` must be a valid pointer. On success `*out` owns a handle to be
// released with [`semsimp_pipeline_free`].
enum SemsimpStatus semsimp_pipeline_new(const char *models_dir,
                                        const char *stages,
                                        size_t min_deleted_tokens,
                                        struct SemsimpPipeline **out);

// # Safety
// `pipeline` must be null or a handle from [`semsimp_pipeline_new`] not
// yet freed.
void semsimp_pipeline_free(struct SemsimpPipeline *pipeline);

// Simplifies one DRS-JSON record. On success `*out` receives the simplified
// text, sentences separated by single spaces.
//
// # Safety
// `pipeline` must be a live handle, `record` a NUL-terminated string and
// `out` a valid pointer. Release `*out` with [`semsimp_string_free`].
enum SemsimpStatus semsimp_pipeline_simplify(const struct SemsimpPipeline *pipeline,
                                             const char *record,
                                             char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void semsimp_string_free(char *s);

// Token-level edit distance between two whitespace-tokenized strings.
//
// # Safety
// `a` and `b` must be NUL-terminated strings and `out` a valid pointer.
enum SemsimpStatus semsimp_levenshtein(const char *a, const char *b, size_t *out);

// Corpus BLEU-4 (0 to 100) of newline-separated candidates against
// newline-separated references, one reference per candidate.
//
// # Safety
// `candidates` and `references` must be NUL-terminated strings and `out` a
// valid pointer.
enum SemsimpStatus semsimp_bleu(const char *candidates, const char *references, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMSIMP_H */
