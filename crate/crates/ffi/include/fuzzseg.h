/* C interface of the fuzzseg vehicle recognition engine. */

#ifndef FUZZSEG_H
#define FUZZSEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a call. Anything but `FZS_STATUS_OK` leaves a
 * description in [`fzs_last_error`].
 */
typedef enum {
  /**
   * The call succeeded.
   */
  FZS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FZS_STATUS_NULL_ARGUMENT = 1,
  /**
   * An input string was not valid UTF-8.
   */
  FZS_STATUS_INVALID_UTF8 = 2,
  /**
   * An input document failed to parse.
   */
  FZS_STATUS_PARSE_ERROR = 3,
  /**
   * The configuration was rejected.
   */
  FZS_STATUS_INVALID_CONFIG = 4,
  /**
   * The model or camera was rejected.
   */
  FZS_STATUS_INVALID_MODEL = 5,
  /**
   * The rulebase was rejected or conflicts with one already loaded.
   */
  FZS_STATUS_INVALID_RULE = 6,
  /**
   * A scene descriptor was rejected.
   */
  FZS_STATUS_INVALID_SCENE = 7,
  /**
   * The input held nothing to work on (empty scene or mask, or an
   * engine with no rulebases).
   */
  FZS_STATUS_EMPTY_INPUT = 8,
  /**
   * The engine panicked or could not encode its result.
   */
  FZS_STATUS_INTERNAL = 9,
} FzsStatus;

/**
 * Recognition engine: a tunable configuration plus the loaded
 * per-class rulebases.
 */
typedef struct FzsEngine FzsEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a borrowed static string.
 */
const char *fzs_version(void);

/**
 * Description of the most recent failure on the calling thread, or an
 * empty string when the last call succeeded. Borrowed; valid until the
 * next call into the library on the same thread.
 */
const char *fzs_last_error(void);

/**
 * Releases a string returned through an out-parameter. Null is a no-op.
 *
 * # Safety
 * `s` must have come from this library and not have been freed before.
 */
void fzs_string_free(char *s);

/**
 * Creates an engine with default configuration and no rulebases.
 */
FzsEngine *fzs_engine_new(void);

/**
 * Destroys an engine. Null is a no-op.
 *
 * # Safety
 * `engine` must have come from [`fzs_engine_new`] and not have been
 * freed before.
 */
void fzs_engine_free(FzsEngine *engine);

/**
 * Replaces the engine configuration from a JSON document; omitted
 * fields keep their defaults.
 *
 * # Safety
 * `engine` must be a live engine; `config_json` must be null or point
 * to a NUL-terminated string.
 */
FzsStatus fzs_engine_set_config_json(FzsEngine *engine, const char *config_json);

/**
 * Loads one rulebase from its JSON form. Each vehicle class may be
 * loaded once per engine.
 *
 * # Safety
 * `engine` must be a live engine; `rulebase_json` must be null or
 * point to a NUL-terminated string.
 */
FzsStatus fzs_engine_add_rulebase_json(FzsEngine *engine, const char *rulebase_json);

/**
 * Number of rulebases loaded; 0 for a null engine.
 *
 * # Safety
 * `engine` must be null or a live engine.
 */
size_t fzs_engine_rulebase_count(const FzsEngine *engine);

/**
 * Classifies a scene of JSON-lines segment descriptors against the
 * loaded rulebases. On success `*out_json` receives the result
 * document (scores, winner, anchor index); release it with
 * [`fzs_string_free`].
 *
 * # Safety
 * `engine` must be a live engine; `scene_jsonl` must be null or point
 * to a NUL-terminated string; `out_json` must be null or valid for a
 * pointer write.
 */
FzsStatus fzs_engine_classify_jsonl(const FzsEngine *engine,
                                    const char *scene_jsonl,
                                    char **out_json);

/**
 * Builds a rulebase by projecting a 3-D model JSON through a camera
 * JSON and fuzzifying the result. `config_json` may be null for
 * default trapezoid widths. On success `*out_json` receives the
 * rulebase document; release it with [`fzs_string_free`].
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out_json` must be
 * null or valid for a pointer write.
 */
FzsStatus fzs_induct(const char *model_json,
                     const char *camera_json,
                     const char *config_json,
                     char **out_json);

/**
 * Extracts segment descriptors from a text label mask (rows of
 * whitespace-separated integers, 0 = background) rotated by `angle`
 * radians. On success `*out_jsonl` receives one JSON line per label;
 * release it with [`fzs_string_free`].
 *
 * # Safety
 * `mask_text` must be null or NUL-terminated; `out_jsonl` must be null
 * or valid for a pointer write.
 */
FzsStatus fzs_extract_text_mask(const char *mask_text, double angle, char **out_jsonl);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUZZSEG_H */
