#ifndef WPCN_H
#define WPCN_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum WpcnStatus {
  WPCN_STATUS_OK = 0,
  WPCN_STATUS_NULL_POINTER = 1,
  WPCN_STATUS_INVALID_PARAMETER = 2,
  WPCN_STATUS_PARSE = 3,
  WPCN_STATUS_DOMAIN = 4,
  WPCN_STATUS_CYCLING = 5,
  /*
   No deployment within the caps meets the target; the best infeasible
   one is returned.
   */
  WPCN_STATUS_INFEASIBLE = 6,
  WPCN_STATUS_IO = 7,
  WPCN_STATUS_PANIC = 8,
} WpcnStatus;

typedef enum WpcnMode {
  WPCN_MODE_SEPARATED = 0,
  WPCN_MODE_HAP = 1,
} WpcnMode;

/*
 Opaque placement of ENs and APs (or HAPs).
 */
typedef struct WpcnPlacement WpcnPlacement;

/*
 Opaque problem instance.
 */
typedef struct WpcnScenario WpcnScenario;

/*
 Result of a minimum-cost search.
 */
typedef struct WpcnPlan {
  size_t m;
  /*
   AP count; 0 for HAP deployments.
   */
  size_t n;
  double cost;
  /*
   Minimum net rate of the plan, watts.
   */
  double t_star;
  bool feasible;
} WpcnPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *wpcn_last_error(void);

/*
 Parses a scenario from NUL-terminated JSON text.

 # Safety
 `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum WpcnStatus wpcn_scenario_from_json(const char *json, struct WpcnScenario **out);

/*
 `k` devices uniform in a square of side `side` meters, default
 parameters.

 # Safety
 `out` must be a valid pointer.
 */
enum WpcnStatus wpcn_scenario_generate(size_t k,
                                       double side,
                                       uint64_t seed,
                                       struct WpcnScenario **out);

/*
 Serializes a scenario to JSON. Release the string with
 [`wpcn_string_free`].

 # Safety
 `scenario` must come from this library; `out` must be a valid pointer.
 */
enum WpcnStatus wpcn_scenario_to_json(const struct WpcnScenario *scenario, char **out);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void wpcn_string_free(char *s);

/*
 # Safety
 `scenario` must be null or a handle from this library, freed once.
 */
void wpcn_scenario_free(struct WpcnScenario *scenario);

/*
 Number of devices; 0 for a null handle.

 # Safety
 `scenario` must be null or a live handle.
 */
size_t wpcn_scenario_num_devices(const struct WpcnScenario *scenario);

/*
 Sets the target net rate, watts.

 # Safety
 `scenario` must be a live handle.
 */
enum WpcnStatus wpcn_scenario_set_gamma(struct WpcnScenario *scenario, double gamma);

/*
 Joint EN/AP placement with `l` alternating iterations. `p_r` may be
 null; otherwise it receives the minimum net rate.

 # Safety
 `scenario` must be a live handle; `out` a valid pointer.
 */
enum WpcnStatus wpcn_place_joint(const struct WpcnScenario *scenario,
                                 size_t m,
                                 size_t n,
                                 size_t l,
                                 uint64_t seed,
                                 struct WpcnPlacement **out,
                                 double *p_r);

/*
 Greedy placement of `m` HAPs.

 # Safety
 `scenario` must be a live handle; `out` a valid pointer.
 */
enum WpcnStatus wpcn_place_hap(const struct WpcnScenario *scenario,
                               size_t m,
                               uint64_t seed,
                               struct WpcnPlacement **out,
                               double *p_r);

/*
 Nodes at cluster centers; `n` is ignored when `hap` is true.

 # Safety
 `scenario` must be a live handle; `out` a valid pointer.
 */
enum WpcnStatus wpcn_cluster_centers(const struct WpcnScenario *scenario,
                                     size_t m,
                                     size_t n,
                                     bool hap,
                                     uint64_t seed,
                                     struct WpcnPlacement **out,
                                     double *p_r);

/*
 Cheapest deployment meeting the scenario's target. Returns
 `Infeasible` with the best infeasible plan when none qualifies.
 `max_n` and `l` apply to separated mode only.

 # Safety
 `scenario` must be a live handle; `plan` and `out` valid pointers.
 */
enum WpcnStatus wpcn_min_cost(const struct WpcnScenario *scenario,
                              enum WpcnMode mode,
                              size_t max_m,
                              size_t max_n,
                              size_t l,
                              uint64_t seed,
                              struct WpcnPlan *plan,
                              struct WpcnPlacement **out);

/*
 # Safety
 `placement` must be null or a handle from this library, freed once.
 */
void wpcn_placement_free(struct WpcnPlacement *placement);

/*
 Builds a placement from coordinate arrays `xs[i], ys[i]`. With
 `colocated` set, the EN arrays give the HAP sites and the AP arrays are
 ignored.

 # Safety
 Arrays must hold the stated number of elements.
 */
enum WpcnStatus wpcn_placement_new(const struct WpcnScenario *scenario,
                                   const double *en_xs,
                                   const double *en_ys,
                                   size_t num_ens,
                                   const double *ap_xs,
                                   const double *ap_ys,
                                   size_t num_aps,
                                   bool colocated,
                                   struct WpcnPlacement **out);

/*
 Number of ENs (HAPs when co-located); 0 for a null handle.

 # Safety
 `placement` must be null or a live handle.
 */
size_t wpcn_placement_num_ens(const struct WpcnPlacement *placement);

/*
 Number of APs (HAPs when co-located); 0 for a null handle.

 # Safety
 `placement` must be null or a live handle.
 */
size_t wpcn_placement_num_aps(const struct WpcnPlacement *placement);

/*
 # Safety
 `placement` must be null or a live handle.
 */
bool wpcn_placement_is_colocated(const struct WpcnPlacement *placement);

/*
 Coordinates of EN `index`, meters.

 # Safety
 `placement` must be a live handle; `x`, `y` valid pointers.
 */
enum WpcnStatus wpcn_placement_en(const struct WpcnPlacement *placement,
                                  size_t index,
                                  double *x,
                                  double *y);

/*
 Coordinates of AP `index`, meters.

 # Safety
 `placement` must be a live handle; `x`, `y` valid pointers.
 */
enum WpcnStatus wpcn_placement_ap(const struct WpcnPlacement *placement,
                                  size_t index,
                                  double *x,
                                  double *y);

/*
 Evaluates a placement. `omega` may be null; otherwise it must hold
 `len >= number of devices` entries and receives each device's net rate.

 # Safety
 Handles must be live; `p_r` valid; `omega` null or `len` long.
 */
enum WpcnStatus wpcn_evaluate(const struct WpcnScenario *scenario,
                              const struct WpcnPlacement *placement,
                              double *p_r,
                              double *omega,
                              size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WPCN_H */
