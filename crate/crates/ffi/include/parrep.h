#ifndef PARREP_H
#define PARREP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum PrStatus {
  PR_STATUS_OK = 0,
  PR_STATUS_NULL_POINTER = 1,
  PR_STATUS_INVALID_UTF8 = 2,
  PR_STATUS_INVALID_ARGUMENT = 3,
  /*
   A fixture name or file could not be resolved or parsed.
   */
  PR_STATUS_NOT_FOUND = 4,
  /*
   The computation itself failed (size caps, numerical checks).
   */
  PR_STATUS_COMPUTATION = 5,
  PR_STATUS_PANIC = 6,
} PrStatus;

/*
 Game description.
 */
typedef struct PrGame PrGame;

/*
 Result of a reduction run together with its JSON serialization.
 */
typedef struct PrReport PrReport;

/*
 Strategy for a game repeated `n` times.
 */
typedef struct PrStrategy PrStrategy;

/*
 Headline numbers of a reduction report.
 */
typedef struct PrReductionSummary {
  double avg_p_tilde;
  double avg_p_target;
  double avg_residual;
  double budget;
  double std_error;
  double p_wc;
  bool within_budget;
} PrReductionSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call into this library from the same thread.
 */
const char *pr_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *pr_version(void);

/*
 Looks up a built-in game (`chsh`, `trivial`, `asym3`).

 # Safety
 `name` must be a NUL-terminated string and `game_out` a writable pointer.
 */
enum PrStatus pr_game_from_fixture(const char *name, struct PrGame **game_out);

/*
 Parses a game in the text file format.

 # Safety
 `source` must be a NUL-terminated string and `game_out` a writable pointer.
 */
enum PrStatus pr_game_parse(const char *source, struct PrGame **game_out);

/*
 Writes the question and answer alphabet sizes.

 # Safety
 `game` must be a live handle; each output pointer must be writable.
 */
enum PrStatus pr_game_sizes(const struct PrGame *game, size_t *x, size_t *y, size_t *a, size_t *b);

/*
 # Safety
 `game` must be null or a handle from this library that has not been freed.
 */
void pr_game_free(struct PrGame *game);

/*
 Best classical winning probability of the `n`-fold repetition.

 # Safety
 `game` must be a live handle and `value_out` writable.
 */
enum PrStatus pr_classical_value(const struct PrGame *game, size_t n, double *value_out);

/*
 Builds a strategy from a fixture name (`tsirelson`, `printing`, `detprod`) or a strategy file path.

 # Safety
 `game` must be a live handle, `name` a NUL-terminated string and `strategy_out` writable.
 */
enum PrStatus pr_strategy_load(const struct PrGame *game,
                               const char *name,
                               size_t n,
                               struct PrStrategy **strategy_out);

/*
 Parses a strategy in the text file format.

 # Safety
 `source` must be a NUL-terminated string and `strategy_out` writable.
 */
enum PrStatus pr_strategy_parse(const char *source, struct PrStrategy **strategy_out);

/*
 # Safety
 `strategy` must be null or a handle from this library that has not been freed.
 */
void pr_strategy_free(struct PrStrategy *strategy);

/*
 Probability that the strategy wins every coordinate of the repeated game.

 # Safety
 Both handles must be live and `value_out` writable.
 */
enum PrStatus pr_win_probability(const struct PrGame *game,
                                 const struct PrStrategy *strategy,
                                 double *value_out);

/*
 Evaluates the repetition upper bound. `log_base` is 2 or 0 (natural log).

 # Safety
 Output pointers must be writable.
 */
enum PrStatus pr_repetition_bound(double eps,
                                  double s_bits,
                                  uint64_t n,
                                  double c,
                                  uint32_t log_base,
                                  double *value_out,
                                  bool *vacuous_out);

/*
 Runs the reduction harness. `config_json` is a JSON object with any of the fields
 `game, strategy, n, c, eps, t_max, mode_classical, mode_quantum, seed, trials`;
 missing fields take their defaults. Coordinates in `c` are 0-based.

 # Safety
 `config_json` must be a NUL-terminated string and `report_out` writable.
 */
enum PrStatus pr_reduction_run(const char *config_json, struct PrReport **report_out);

/*
 Full report as JSON; owned by the handle. Null if `report` is null.

 # Safety
 `report` must be null or a live handle.
 */
const char *pr_report_json(const struct PrReport *report);

/*
 # Safety
 `report` must be a live handle and `summary_out` writable.
 */
enum PrStatus pr_report_summary(const struct PrReport *report,
                                struct PrReductionSummary *summary_out);

/*
 # Safety
 `report` must be null or a handle from this library that has not been freed.
 */
void pr_report_free(struct PrReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARREP_H */
