#ifndef PRICING_H
#define PRICING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes; `PRICING_OK` is zero.
typedef enum PricingStatus {
  PRICING_STATUS_OK = 0,
  PRICING_STATUS_NULL_POINTER = 1,
  PRICING_STATUS_INVALID_UTF8 = 2,
  PRICING_STATUS_PARSE = 3,
  PRICING_STATUS_INVALID_INSTANCE = 4,
  PRICING_STATUS_BUDGET_VIOLATION = 5,
  PRICING_STATUS_CAPACITY_VIOLATION = 6,
  PRICING_STATUS_SHAPE_VIOLATION = 7,
  PRICING_STATUS_UNSUPPORTED_ENCODING = 8,
  PRICING_STATUS_INFEASIBLE = 9,
  PRICING_STATUS_UNBOUNDED = 10,
  PRICING_STATUS_NUMERIC_FAILURE = 11,
  PRICING_STATUS_BUDGET_EXCEEDED = 12,
  PRICING_STATUS_NOT_A_TREE = 13,
  PRICING_STATUS_VERIFIER_CONTRACT_BROKEN = 14,
  PRICING_STATUS_MODE_MISMATCH = 15,
  PRICING_STATUS_MONOTONE_VIOLATION = 16,
  PRICING_STATUS_NO_PROGRESS = 17,
  PRICING_STATUS_NO_PRIVATE_ITEM = 18,
  PRICING_STATUS_IO = 19,
  PRICING_STATUS_OUT_OF_RANGE = 20,
  PRICING_STATUS_PANIC = 99,
} PricingStatus;

// Rounding used by [`pricing_run_alg1`].
typedef enum PricingAlg1Mode {
  PRICING_ALG1_MODE_SUBADDITIVE = 0,
  PRICING_ALG1_MODE_GENERAL = 1,
} PricingAlg1Mode;

// Trimming used by [`pricing_run_highway`].
typedef enum PricingHighwayMode {
  PRICING_HIGHWAY_MODE_SUBADDITIVE = 0,
  PRICING_HIGHWAY_MODE_UNLIMITED = 1,
} PricingHighwayMode;

// Opaque instance handle.
typedef struct PricingInstance PricingInstance;

// Opaque outcome handle: prices, allocation and profit.
typedef struct PricingOutcome PricingOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *pricing_last_error(void);

// Parses a JSON instance into `*out`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PricingStatus pricing_instance_from_json(const char *json, struct PricingInstance **out);

// # Safety
// `inst` must be null or a live handle; it is invalid afterwards.
void pricing_instance_free(struct PricingInstance *inst);

// Number of items, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t pricing_instance_item_count(const struct PricingInstance *inst);

// Number of customers, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t pricing_instance_customer_count(const struct PricingInstance *inst);

// The capacity-schedule algorithm in exact arithmetic; `epsilon` is a decimal or fraction string.
//
// # Safety
// Pointers must be valid as documented on the module.
enum PricingStatus pricing_run_alg1(const struct PricingInstance *inst,
                                    const char *epsilon,
                                    enum PricingAlg1Mode mode,
                                    uint32_t trials,
                                    uint64_t seed,
                                    struct PricingOutcome **out);

// The capacity-schedule algorithm with the tree rounding at scale `alpha`.
//
// # Safety
// Pointers must be valid as documented on the module.
enum PricingStatus pricing_run_tree(const struct PricingInstance *inst,
                                    const char *epsilon,
                                    double alpha,
                                    uint32_t trials,
                                    uint64_t seed,
                                    struct PricingOutcome **out);

// The highway pipeline.
//
// # Safety
// Pointers must be valid as documented on the module.
enum PricingStatus pricing_run_highway(const struct PricingInstance *inst,
                                       enum PricingHighwayMode mode,
                                       uint32_t trials,
                                       uint64_t seed,
                                       struct PricingOutcome **out);

// Multi-product pricing.
//
// # Safety
// Pointers must be valid as documented on the module.
enum PricingStatus pricing_run_maxbuy(const struct PricingInstance *inst,
                                      uint32_t trials,
                                      uint64_t seed,
                                      struct PricingOutcome **out);

// Exhaustive optimum with the default enumeration budget.
//
// # Safety
// Pointers must be valid as documented on the module.
enum PricingStatus pricing_exact_profit(const struct PricingInstance *inst,
                                        struct PricingOutcome **out);

// Re-checks `outcome` against `inst` with capacities enforced.
//
// # Safety
// Both handles must be live.
enum PricingStatus pricing_evaluate(const struct PricingInstance *inst,
                                    const struct PricingOutcome *outcome);

// # Safety
// `outcome` must be null or a live handle; it is invalid afterwards.
void pricing_outcome_free(struct PricingOutcome *outcome);

// Profit as a double (NaN for a null handle).
//
// # Safety
// `outcome` must be null or a live handle.
double pricing_outcome_profit(const struct PricingOutcome *outcome);

// Exact profit string; free with [`pricing_string_free`]. Null for a null handle.
//
// # Safety
// `outcome` must be null or a live handle.
char *pricing_outcome_profit_string(const struct PricingOutcome *outcome);

// Price of item `item` as a double.
//
// # Safety
// `outcome` must be a live handle and `price` writable.
enum PricingStatus pricing_outcome_price(const struct PricingOutcome *outcome,
                                         size_t item,
                                         double *price);

// Whole outcome as JSON; free with [`pricing_string_free`].
//
// # Safety
// `outcome` must be null or a live handle.
char *pricing_outcome_to_json(const struct PricingOutcome *outcome);

// # Safety
// `s` must be null or a string returned by this library.
void pricing_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRICING_H */
