#ifndef MPS_H
#define MPS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum MpsStatus {
  MPS_STATUS_OK = 0,
  /*
   The instance or schedule admits no feasible plan.
   */
  MPS_STATUS_INFEASIBLE = 1,
  /*
   Malformed JSON, wrong shapes or out-of-range values.
   */
  MPS_STATUS_INVALID_INPUT = 2,
  /*
   An iteration, node or enumeration limit was reached.
   */
  MPS_STATUS_LIMIT_REACHED = 3,
  /*
   A required pointer argument was null.
   */
  MPS_STATUS_NULL_POINTER = 4,
  /*
   A panic or other unexpected failure inside the library.
   */
  MPS_STATUS_INTERNAL = 5,
} MpsStatus;

/*
 Opaque instance handle.
 */
typedef struct MpsInstance MpsInstance;

/*
 Opaque schedule handle.
 */
typedef struct MpsSchedule MpsSchedule;

/*
 Profit decomposition of one schedule.
 */
typedef struct MpsProfit {
  double revenue;
  double material_cost;
  double inventory_cost;
  double variable_cost;
  double fixed_cost;
  double profit;
  double utilization;
} MpsProfit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses and validates an instance document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MpsStatus mps_instance_from_json(const char *json, struct MpsInstance **out);

/*
 Builds the six-product base case with materials drawn from `material_seed`.

 # Safety
 `out` must be writable.
 */
enum MpsStatus mps_instance_base_case(uint64_t material_seed, struct MpsInstance **out);

/*
 Generates a random instance with the default ranges.

 # Safety
 `out` must be writable.
 */
enum MpsStatus mps_instance_generate(uint64_t seed,
                                     uintptr_t n_products,
                                     uintptr_t n_materials,
                                     uintptr_t n_periods,
                                     struct MpsInstance **out);

/*
 Serializes an instance to JSON.

 # Safety
 `inst` must be a live handle; `out` must be writable.
 */
enum MpsStatus mps_instance_to_json(const struct MpsInstance *inst, char **out);

/*
 Releases an instance handle. Null is ignored.

 # Safety
 `inst` must be null or a handle not yet freed.
 */
void mps_instance_free(struct MpsInstance *inst);

/*
 Parses a schedule document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MpsStatus mps_schedule_from_json(const char *json, struct MpsSchedule **out);

/*
 Serializes a schedule to a schedule document.

 # Safety
 `sched` must be a live handle; `out` must be writable.
 */
enum MpsStatus mps_schedule_to_json(const struct MpsSchedule *sched, char **out);

/*
 Number of products and periods of a schedule.

 # Safety
 `sched` must be a live handle; the out-pointers must be writable.
 */
enum MpsStatus mps_schedule_shape(const struct MpsSchedule *sched,
                                  uintptr_t *n_products,
                                  uintptr_t *n_periods);

/*
 Production of product `product` in period `period`.

 # Safety
 `sched` must be a live handle; `out` must be writable.
 */
enum MpsStatus mps_schedule_get(const struct MpsSchedule *sched,
                                uintptr_t product,
                                uintptr_t period,
                                double *out);

/*
 Releases a schedule handle. Null is ignored.

 # Safety
 `sched` must be null or a handle not yet freed.
 */
void mps_schedule_free(struct MpsSchedule *sched);

/*
 Profit with whole-lot material purchasing.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MpsStatus mps_true_profit(const struct MpsInstance *inst,
                               const struct MpsSchedule *sched,
                               struct MpsProfit *out);

/*
 Profit with fractional material cost.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MpsStatus mps_linear_profit(const struct MpsInstance *inst,
                                 const struct MpsSchedule *sched,
                                 struct MpsProfit *out);

/*
 Solves the integer linear model and applies lot rounding. Writes the
 schedule handle and, when `profit` is non-null, its updated profit.

 # Safety
 `inst` must be live; `out` must be writable; `profit` may be null.
 */
enum MpsStatus mps_run_heuristic(const struct MpsInstance *inst,
                                 struct MpsSchedule **out,
                                 struct MpsProfit *profit);

/*
 Multi-start search on the lot-quantized profit. `threads` of 0 uses all
 cores; results do not depend on it.

 # Safety
 `inst` must be live; `out` must be writable; `profit` may be null.
 */
enum MpsStatus mps_multi_start(const struct MpsInstance *inst,
                               bool integer_mode,
                               uintptr_t starts,
                               uint64_t seed,
                               uintptr_t budget,
                               uintptr_t threads,
                               struct MpsSchedule **out,
                               struct MpsProfit *profit);

/*
 Runs all three models and renders the comparison. `format` is one of
 `table-text`, `csv` or `structured`.

 # Safety
 `inst` must be live; `format` must be a NUL-terminated string; `out` must
 be writable.
 */
enum MpsStatus mps_compare(const struct MpsInstance *inst,
                           uint64_t seed,
                           const char *format,
                           char **out);

/*
 Profit breakdown of a schedule as JSON, lot-quantized when `lots` is true.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MpsStatus mps_profit_json(const struct MpsInstance *inst,
                               const struct MpsSchedule *sched,
                               bool lots,
                               char **out);

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next call on this thread and must not be freed.
 */
const char *mps_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must be null or a string from this library not yet freed.
 */
void mps_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPS_H */
