#ifndef LGGNORM_H
#define LGGNORM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum LggStatus {
  LGG_STATUS_OK = 0,
  LGG_STATUS_NULL_ARGUMENT = 1,
  // Input text or a path is not valid UTF-8.
  LGG_STATUS_INVALID_UTF8 = 2,
  // Input text is not in Unicode normalization form C.
  LGG_STATUS_NOT_NFC = 3,
  LGG_STATUS_IO = 4,
  LGG_STATUS_DICTIONARY = 5,
  LGG_STATUS_GRAMMAR = 6,
  // A Rust panic was caught at the boundary.
  LGG_STATUS_INTERNAL = 7,
} LggStatus;

typedef enum LggMode {
  LGG_MODE_REPLACE = 0,
  LGG_MODE_MERGE = 1,
} LggMode;

// Opaque engine handle.
typedef struct LggEngine LggEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an engine from the dictionaries and grammars built into the
// library.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum LggStatus lgg_engine_new_bundled(struct LggEngine **out);

// Creates an engine from `n_dicts` dictionary files and a grammar
// directory or file. Relative paths that do not exist are looked up
// under the asset root.
//
// # Safety
// `dict_paths` must point to `n_dicts` NUL-terminated strings,
// `grammar_path` must be NUL-terminated and `out` writable.
enum LggStatus lgg_engine_new(const char *const *dict_paths,
                              uintptr_t n_dicts,
                              const char *grammar_path,
                              struct LggEngine **out);

// Releases an engine. NULL is ignored.
//
// # Safety
// `engine` must come from `lgg_engine_new*` and not be used afterwards.
void lgg_engine_free(struct LggEngine *engine);

// Rewrites recognized variants in `text`.
//
// # Safety
// `engine` must be live, `text` NUL-terminated, `out` writable.
enum LggStatus lgg_normalize(const struct LggEngine *engine,
                             const char *text,
                             enum LggMode mode,
                             char **out);

// Classification of every non-analyzable type of `text` as JSON.
//
// # Safety
// As for `lgg_normalize`.
enum LggStatus lgg_classify_json(const struct LggEngine *engine, const char *text, char **out);

// Corpus statistics of `text` as JSON.
//
// # Safety
// As for `lgg_normalize`.
enum LggStatus lgg_stats_json(const struct LggEngine *engine, const char *text, char **out);

// Tokens of `text` as `start<TAB>end<TAB>class<TAB>surface` lines.
//
// # Safety
// `text` NUL-terminated, `out` writable.
enum LggStatus lgg_tokenize_tsv(const char *text, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void lgg_string_free(char *s);

// Message for the last failed call on this thread, or NULL. Valid until
// the next call into the library from the same thread.
const char *lgg_last_error_message(void);

// Library version as a static string.
const char *lgg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LGGNORM_H */
