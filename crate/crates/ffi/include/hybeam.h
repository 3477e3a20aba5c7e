/* C ABI for the hybeam link-level simulator. Generated by cbindgen; do not edit. */

#ifndef HYBEAM_H
#define HYBEAM_H

/* This file is regenerated by the crate's build script. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Outcome of a call. Anything but `Ok` leaves a message for
 `hybeam_last_error_message`.
 */
typedef enum HybeamStatus {
  /*
   The call succeeded.
   */
  HYBEAM_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  HYBEAM_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  HYBEAM_STATUS_INVALID_UTF8 = 2,
  /*
   An argument value was rejected (unknown name, out-of-range index...).
   */
  HYBEAM_STATUS_INVALID_ARGUMENT = 3,
  /*
   The scenario is inconsistent (failed validation or parsing).
   */
  HYBEAM_STATUS_CONFIG_ERROR = 4,
  /*
   More than the tolerated share of Monte-Carlo trials failed.
   */
  HYBEAM_STATUS_CAMPAIGN_FAILED = 5,
  /*
   Any other simulator error.
   */
  HYBEAM_STATUS_RUNTIME_ERROR = 6,
  /*
   A panic was caught at the language boundary; state may be stale.
   */
  HYBEAM_STATUS_PANIC = 7,
} HybeamStatus;

/*
 Opaque result set from one campaign.
 */
typedef struct HybeamResults HybeamResults;

/*
 Opaque scenario handle: one fully resolved simulation configuration.
 */
typedef struct HybeamScenario HybeamScenario;

/*
 One result row, minus the two string columns (see
 `hybeam_results_scenario` / `hybeam_results_metric`).
 */
typedef struct HybeamRecord {
  /*
   Trial index within the SNR point, 0-based.
   */
  uint64_t trial;
  /*
   Operating SNR in dB.
   */
  double snr_db;
  /*
   User index, or -1 for rows aggregated over users.
   */
  int32_t user;
  /*
   Metric value (unit depends on the metric name).
   */
  double value;
  /*
   Exact RNG seed the trial ran under.
   */
  uint64_t seed;
} HybeamRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Create a scenario from a built-in preset: "mmwave", "sub6", or
 "mode1".."mode4". Returns NULL on unknown names.
 */
struct HybeamScenario *hybeam_scenario_preset(const char *name);

/*
 Create a scenario from TOML text. The `band` key picks the preset the
 remaining keys override. Returns NULL on parse or validation errors.
 */
struct HybeamScenario *hybeam_scenario_from_toml(const char *toml);

/*
 Create a scenario from a preset name or a TOML file path (tried in that
 order, like the command-line tool). Returns NULL on failure.
 */
struct HybeamScenario *hybeam_scenario_load(const char *name_or_path);

/*
 Release a scenario. NULL is a no-op.
 */
void hybeam_scenario_free(struct HybeamScenario *scenario);

/*
 Set the master seed every record derives from.
 */
enum HybeamStatus hybeam_scenario_set_master_seed(struct HybeamScenario *scenario, uint64_t seed);

/*
 Set the Monte-Carlo trial count per SNR point.
 */
enum HybeamStatus hybeam_scenario_set_trials(struct HybeamScenario *scenario, size_t trials);

/*
 Replace the SNR sweep (dB values, copied).
 */
enum HybeamStatus hybeam_scenario_set_snr_sweep(struct HybeamScenario *scenario,
                                                const double *snr_db,
                                                size_t len);

/*
 Pick the precoder: "v1-mrt", "v1-zf", "v1-mmse", "v2-rate", "v2-sinr", or
 "exhaustive".
 */
enum HybeamStatus hybeam_scenario_set_variant(struct HybeamScenario *scenario, const char *variant);

/*
 Set the UE speed in km/h. Speed changes the Doppler multipliers only, so
 runs at different speeds with the same seed stay paired draw-for-draw.
 */
enum HybeamStatus hybeam_scenario_set_velocity_kmh(struct HybeamScenario *scenario,
                                                   double velocity_kmh);

/*
 Validate the scenario without running anything.
 */
enum HybeamStatus hybeam_scenario_validate(const struct HybeamScenario *scenario);

/*
 Serialize the scenario back to TOML. Free with `hybeam_string_free`.
 */
char *hybeam_scenario_to_toml(const struct HybeamScenario *scenario);

/*
 Release a result set. NULL is a no-op.
 */
void hybeam_results_free(struct HybeamResults *results);

/*
 Number of rows in the result set.
 */
size_t hybeam_results_len(const struct HybeamResults *results);

/*
 Copy the numeric fields of row `index` into `out`.
 */
enum HybeamStatus hybeam_results_record(const struct HybeamResults *results,
                                        size_t index,
                                        struct HybeamRecord *out);

/*
 Scenario label of row `index`; borrowed, valid while the result set lives.
 NULL if the index is out of bounds.
 */
const char *hybeam_results_scenario(const struct HybeamResults *results, size_t index);

/*
 Metric name of row `index`; borrowed, valid while the result set lives.
 NULL if the index is out of bounds.
 */
const char *hybeam_results_metric(const struct HybeamResults *results, size_t index);

/*
 Whole result set as CSV text (`scenario,trial,snr_db,user,metric,value,seed`).
 Free with `hybeam_string_free`. NULL on failure.
 */
char *hybeam_results_to_csv(const struct HybeamResults *results);

/*
 Whole result set as a JSON array of row objects. Free with
 `hybeam_string_free`. NULL on failure.
 */
char *hybeam_results_to_json(const struct HybeamResults *results);

/*
 Release a string returned by this library. NULL is a no-op.
 */
void hybeam_string_free(char *text);

/*
 Per-user rate/SINR and sum-rate campaign over the scenario's SNR sweep.
 `workers` pins the thread count; 0 means the library default. The records
 do not depend on the worker count. Returns NULL on failure.
 */
struct HybeamResults *hybeam_run_rate(const struct HybeamScenario *scenario, size_t workers);

/*
 Rate campaign plus per-SNR outage probabilities at `targets` (bits/s/Hz)
 and epsilon-rates at `epsilons` (fractions in (0,1)). Returns NULL on
 failure.
 */
struct HybeamResults *hybeam_run_outage(const struct HybeamScenario *scenario,
                                        const double *targets,
                                        size_t n_targets,
                                        const double *epsilons,
                                        size_t n_epsilons,
                                        size_t workers);

/*
 Bit/block error-count campaign over full transmit/receive frames.
 `coded` runs the rate-1/2 LDPC chain; otherwise raw QPSK. Returns NULL on
 failure.
 */
struct HybeamResults *hybeam_run_ber(const struct HybeamScenario *scenario,
                                     size_t frames_per_trial,
                                     bool coded,
                                     size_t workers);

/*
 Energy-efficiency campaign: mean sum rate per watt for each entry of
 `user_counts`. A NULL/empty list sweeps 1..=n_rf. Returns NULL on failure.
 */
struct HybeamResults *hybeam_run_energy(const struct HybeamScenario *scenario,
                                        const size_t *user_counts,
                                        size_t n_counts,
                                        size_t workers);

/*
 Message of the last failure on this thread; borrowed, valid until the next
 failing call on the same thread. NULL when the last call succeeded.
 */
const char *hybeam_last_error_message(void);

/*
 Status of the last failure on this thread, or `Ok` if the last call
 succeeded.
 */
enum HybeamStatus hybeam_last_status(void);

/*
 Thermal noise floor in dBm for a bandwidth in Hz (9 dB receiver noise
 figure included). Returns a status; the value lands in `out`.
 */
enum HybeamStatus hybeam_noise_floor_dbm(double bandwidth_hz, double *out);

/*
 Library version as a static string (do not free).
 */
const char *hybeam_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBEAM_H */
