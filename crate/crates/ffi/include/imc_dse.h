#ifndef IMC_DSE_H
#define IMC_DSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ImcMode {
  IMC_MODE_WEIGHT_STATIONARY = 0,
  IMC_MODE_WEIGHT_SWAPPING = 1,
} ImcMode;

typedef enum ImcStatus {
  IMC_STATUS_OK = 0,
  IMC_STATUS_NULL_POINTER = 1,
  IMC_STATUS_INVALID_ARGUMENT = 2,
  IMC_STATUS_PARSE_ERROR = 3,
  IMC_STATUS_CONFIG_ERROR = 4,
  IMC_STATUS_INFEASIBLE = 5,
  IMC_STATUS_SAMPLING_EXHAUSTED = 6,
  IMC_STATUS_IO_ERROR = 7,
  IMC_STATUS_PANIC = 8,
} ImcStatus;

typedef enum ImcAggregation {
  IMC_AGGREGATION_MAX = 0,
  IMC_AGGREGATION_ALL = 1,
  IMC_AGGREGATION_MEAN = 2,
} ImcAggregation;

typedef enum ImcStrategy {
  IMC_STRATEGY_PROPOSED = 0,
  IMC_STRATEGY_PLAIN_GA = 1,
  IMC_STRATEGY_SEPARATE = 2,
  IMC_STRATEGY_LARGEST = 3,
  IMC_STRATEGY_SEQUENTIAL_MAX = 4,
  IMC_STRATEGY_SEQUENTIAL_MEDIAN = 5,
} ImcStrategy;

// Opaque run record.
typedef struct ImcRunResult ImcRunResult;

// Opaque search space.
typedef struct ImcSpace ImcSpace;

// Opaque list of workloads.
typedef struct ImcWorkloadSet ImcWorkloadSet;

// Search options. Start from [`imc_options_default`].
typedef struct ImcOptions {
  // Objective name (`edap`, `edp`, `energy`, `latency`, `area`,
  // `ed-cost`); NULL means `edap`.
  const char *objective;
  enum ImcAggregation aggregation;
  enum ImcStrategy strategy;
  double area_constraint_mm2;
  size_t p_h;
  size_t p_e;
  size_t p_ga;
  // Generations per phase.
  size_t generations;
  uint64_t seed;
} ImcOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the latest failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *imc_last_error_message(void);

// Built-in default space for `mode`.
struct ImcSpace *imc_space_default(enum ImcMode mode);

// The 375-point weight-stationary space over crossbar rows, columns,
// crossbars per tile and bits per cell.
struct ImcSpace *imc_space_reduced(void);

// Parse a space from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ImcStatus imc_space_from_json(const char *json, struct ImcSpace **out);

// Number of design points, saturating at `UINT64_MAX`; 0 for NULL.
//
// # Safety
// `space` must be NULL or a live handle.
uint64_t imc_space_size(const struct ImcSpace *space);

// Number of genes (parameters) per design point; 0 for NULL.
//
// # Safety
// `space` must be NULL or a live handle.
size_t imc_space_gene_count(const struct ImcSpace *space);

// # Safety
// `space` must be NULL or a handle not yet freed.
void imc_space_free(struct ImcSpace *space);

// ResNet18, VGG16, AlexNet and MobileNetV3.
struct ImcWorkloadSet *imc_workloads_default(void);

// Parse one workload object or an array of them.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ImcStatus imc_workloads_from_json(const char *json, struct ImcWorkloadSet **out);

// # Safety
// `set` must be NULL or a live handle.
size_t imc_workloads_len(const struct ImcWorkloadSet *set);

// # Safety
// `set` must be NULL or a handle not yet freed.
void imc_workloads_free(struct ImcWorkloadSet *set);

// EDAP objective, Max aggregation, 800 mm² area limit, default population
// sizes and 10 generations per phase, seed 0.
struct ImcOptions imc_options_default(void);

// Run a search. On success `*out` receives a result handle.
//
// # Safety
// All pointers must be valid; `options` may be NULL for the defaults.
enum ImcStatus imc_optimize(const struct ImcSpace *space,
                            const struct ImcWorkloadSet *workloads,
                            const struct ImcOptions *options,
                            struct ImcRunResult **out);

// Score of the best design on all workloads; NaN for NULL, +inf when the
// design cannot be mapped.
//
// # Safety
// `result` must be NULL or a live handle.
double imc_result_best_score(const struct ImcRunResult *result);

// # Safety
// `result` must be NULL or a live handle.
bool imc_result_best_feasible(const struct ImcRunResult *result);

// # Safety
// `result` must be NULL or a live handle.
uint64_t imc_result_eval_count(const struct ImcRunResult *result);

// Copy the best design's option indices into `buf`. `*written` receives
// the gene count; when `len` is too small nothing is copied and
// `IMC_STATUS_INVALID_ARGUMENT` is returned.
//
// # Safety
// `buf` must hold `len` elements (or be NULL when `len` is 0); `written`
// must be valid.
enum ImcStatus imc_result_best_genes(const struct ImcRunResult *result,
                                     size_t *buf,
                                     size_t len,
                                     size_t *written);

// The run record as JSON; release with [`imc_string_free`]. NULL on error.
//
// # Safety
// `result` must be NULL or a live handle.
char *imc_result_to_json(const struct ImcRunResult *result);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void imc_string_free(char *s);

// # Safety
// `result` must be NULL or a handle not yet freed.
void imc_result_free(struct ImcRunResult *result);

// Fabrication cost of `area_mm2` at `tech_nm`, in 32 nm-normalized units.
//
// # Safety
// `out` must be a valid pointer.
enum ImcStatus imc_cost(double area_mm2, uint32_t tech_nm, double *out);

// Hamming distance between two gene vectors of length `len`.
//
// # Safety
// `a` and `b` must each hold `len` elements; `out` must be valid.
enum ImcStatus imc_hamming(const size_t *a, const size_t *b, size_t len, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMC_DSE_H */
