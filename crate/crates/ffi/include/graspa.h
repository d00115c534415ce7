#ifndef GRASPA_H
#define GRASPA_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GraspaStatus {
  GRASPA_STATUS_OK = 0,
  GRASPA_STATUS_NULL_ARGUMENT = 1,
  GRASPA_STATUS_INVALID_UTF8 = 2,
  GRASPA_STATUS_INVALID_INPUT = 3,
  GRASPA_STATUS_OUT_OF_RANGE = 4,
  /**
   * The requested score is N/A.
   */
  GRASPA_STATUS_NOT_AVAILABLE = 5,
  GRASPA_STATUS_PANIC = 6,
} GraspaStatus;

typedef enum GraspaFormat {
  GRASPA_FORMAT_TEXT = 0,
  GRASPA_FORMAT_MARKDOWN = 1,
  GRASPA_FORMAT_HTML = 2,
  GRASPA_FORMAT_XML = 3,
} GraspaFormat;

/**
 * A computed or loaded layout scorecard.
 */
typedef struct GraspaScorecard GraspaScorecard;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *graspa_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void graspa_string_free(char *s);

/**
 * Runs the command line with `argc` arguments (program name first) and
 * stores the exit code in `exit_code`. Standard output and error are
 * returned as strings when `out_text` / `err_text` are not null.
 *
 * # Safety
 * `argv` must hold `argc` valid C strings; output pointers must be writable
 * or null.
 */
enum GraspaStatus graspa_run(int argc,
                             const char *const *argv,
                             int *exit_code,
                             char **out_text,
                             char **err_text);

/**
 * Scores `layout_id` from the benchmark files in `data_dir`, using cached
 * stage files where present.
 *
 * # Safety
 * `data_dir` must be a C string; `out` must be writable.
 */
enum GraspaStatus graspa_scorecard_compute(const char *data_dir,
                                           uint8_t layout_id,
                                           struct GraspaScorecard **out);

/**
 * Loads a scorecard XML file. `config_path` may be null for the default
 * configuration, which only affects the settings echoed in reports.
 *
 * # Safety
 * `path` must be a C string, `config_path` a C string or null; `out` must be
 * writable.
 */
enum GraspaStatus graspa_scorecard_load(const char *path,
                                        const char *config_path,
                                        struct GraspaScorecard **out);

/**
 * Releases a scorecard. Null is ignored.
 *
 * # Safety
 * `h` must come from this library and not have been freed.
 */
void graspa_scorecard_free(struct GraspaScorecard *h);

/**
 * Layout composite score. `GRASPA_STATUS_NOT_AVAILABLE` when no object is
 * eligible.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GraspaStatus graspa_scorecard_composite(const struct GraspaScorecard *h, double *out);

/**
 * Number of object rows.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GraspaStatus graspa_scorecard_row_count(const struct GraspaScorecard *h, size_t *out);

/**
 * Name of row `index`, to be released with [`graspa_string_free`].
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GraspaStatus graspa_scorecard_row_name(const struct GraspaScorecard *h,
                                            size_t index,
                                            char **out);

/**
 * Final score of row `index`. `GRASPA_STATUS_NOT_AVAILABLE` when the object
 * is not eligible.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GraspaStatus graspa_scorecard_row_final(const struct GraspaScorecard *h,
                                             size_t index,
                                             double *out);

/**
 * Report document in `format`, one of the [`GraspaFormat`] values, to be
 * released with [`graspa_string_free`].
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GraspaStatus graspa_scorecard_report(const struct GraspaScorecard *h, int format, char **out);

/**
 * ε-metric of `count` wrenches stored row-major as `count × 6` doubles.
 *
 * # Safety
 * `wrenches` must point to `6 * count` doubles; `out` must be writable.
 */
enum GraspaStatus graspa_hull_radius(const double *wrenches, size_t count, double *out);

/**
 * Position error (meters) and orientation angle (radians) between two
 * row-major 4×4 homogeneous poses.
 *
 * # Safety
 * `desired` and `reached` must point to 16 doubles; outputs must be writable.
 */
enum GraspaStatus graspa_pose_error(const double *desired,
                                    const double *reached,
                                    double *position,
                                    double *angle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASPA_H */
