//! C ABI for the hybeam link-level simulator.
//!
//! Conventions, mirrored in the generated `include/hybeam.h`:
//!
//! * Scenarios and result sets are opaque handles created and destroyed by
//!   this library. Passing a handle after freeing it is undefined behaviour,
//!   as in any C API; passing NULL is always safe and reports
//!   [`HybeamStatus::NullArgument`].
//! * Functions that produce a handle return NULL on failure; functions that
//!   do not return a [`HybeamStatus`]. Either way the failure detail is kept
//!   per thread and can be read back with [`hybeam_last_error_message`] /
//!   [`hybeam_last_status`].
//! * Strings returned as `char*` are owned by the caller and must be released
//!   with [`hybeam_string_free`]. Strings returned as `const char*` are
//!   borrowed: they stay valid while the handle they came from is alive (or,
//!   for error messages, until the next failing call on the same thread).
//! * Campaigns are deterministic: the records depend only on the scenario
//!   (including its master seed), never on the worker count.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hybeam::campaign::{run_campaign, CampaignKind};
use hybeam::results::{write_csv, write_json, ResultRecord};
use hybeam::scenario::{ScenarioConfig, Variant};
use hybeam::Error;

/// Outcome of a call. Anything but `Ok` leaves a message for
/// `hybeam_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HybeamStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument value was rejected (unknown name, out-of-range index...).
    InvalidArgument = 3,
    /// The scenario is inconsistent (failed validation or parsing).
    ConfigError = 4,
    /// More than the tolerated share of Monte-Carlo trials failed.
    CampaignFailed = 5,
    /// Any other simulator error.
    RuntimeError = 6,
    /// A panic was caught at the language boundary; state may be stale.
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<(CString, HybeamStatus)>> = const { RefCell::new(None) };
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn set_error(status: HybeamStatus, message: &str) -> HybeamStatus {
    let msg = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some((msg, status)));
    status
}

fn set_core_error(err: &Error) -> HybeamStatus {
    let status = match err {
        Error::Config(_) | Error::ConfigFile { .. } => HybeamStatus::ConfigError,
        Error::CampaignFailed { .. } => HybeamStatus::CampaignFailed,
        _ => HybeamStatus::RuntimeError,
    };
    set_error(status, &err.to_string())
}

/// Run `body` with panics contained to this call. `on_panic` is the value
/// reported if `body` panics.
fn guarded<T>(on_panic: T, body: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(v) => v,
        Err(_) => {
            set_error(HybeamStatus::Panic, "internal panic caught at the C boundary");
            on_panic
        }
    }
}

/// Borrow a C string as UTF-8, reporting the proper status on failure.
///
/// # Safety
/// `ptr` must be NULL or a NUL-terminated string.
unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, HybeamStatus> {
    if ptr.is_null() {
        return Err(set_error(HybeamStatus::NullArgument, "string argument is NULL"));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| set_error(HybeamStatus::InvalidUtf8, "string argument is not valid UTF-8"))
}

// ---------------------------------------------------------------------------
// Scenario handle
// ---------------------------------------------------------------------------

/// Opaque scenario handle: one fully resolved simulation configuration.
pub struct HybeamScenario {
    cfg: ScenarioConfig,
}

fn scenario_into_handle(cfg: ScenarioConfig) -> *mut HybeamScenario {
    clear_error();
    Box::into_raw(Box::new(HybeamScenario { cfg }))
}

/// Create a scenario from a built-in preset: "mmwave", "sub6", or
/// "mode1".."mode4". Returns NULL on unknown names.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_preset(name: *const c_char) -> *mut HybeamScenario {
    guarded(ptr::null_mut(), || {
        let name = match unsafe { cstr(name) } {
            Ok(s) => s,
            Err(_) => return ptr::null_mut(),
        };
        match ScenarioConfig::preset(name) {
            Some(cfg) => scenario_into_handle(cfg),
            None => {
                set_error(
                    HybeamStatus::InvalidArgument,
                    &format!("unknown preset {name:?} (try mmwave, sub6, mode1..mode4)"),
                );
                ptr::null_mut()
            }
        }
    })
}

/// Create a scenario from TOML text. The `band` key picks the preset the
/// remaining keys override. Returns NULL on parse or validation errors.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_from_toml(toml: *const c_char) -> *mut HybeamScenario {
    guarded(ptr::null_mut(), || {
        let text = match unsafe { cstr(toml) } {
            Ok(s) => s,
            Err(_) => return ptr::null_mut(),
        };
        match ScenarioConfig::from_toml_str(text).and_then(|cfg| cfg.validate().map(|_| cfg)) {
            Ok(cfg) => scenario_into_handle(cfg),
            Err(e) => {
                set_core_error(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Create a scenario from a preset name or a TOML file path (tried in that
/// order, like the command-line tool). Returns NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_load(name_or_path: *const c_char) -> *mut HybeamScenario {
    guarded(ptr::null_mut(), || {
        let source = match unsafe { cstr(name_or_path) } {
            Ok(s) => s,
            Err(_) => return ptr::null_mut(),
        };
        match ScenarioConfig::load(source).and_then(|cfg| cfg.validate().map(|_| cfg)) {
            Ok(cfg) => scenario_into_handle(cfg),
            Err(e) => {
                set_core_error(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Release a scenario. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_free(scenario: *mut HybeamScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

unsafe fn scenario_mut<'a>(
    scenario: *mut HybeamScenario,
) -> Result<&'a mut ScenarioConfig, HybeamStatus> {
    if scenario.is_null() {
        return Err(set_error(HybeamStatus::NullArgument, "scenario handle is NULL"));
    }
    Ok(&mut unsafe { &mut *scenario }.cfg)
}

unsafe fn scenario_ref<'a>(
    scenario: *const HybeamScenario,
) -> Result<&'a ScenarioConfig, HybeamStatus> {
    if scenario.is_null() {
        return Err(set_error(HybeamStatus::NullArgument, "scenario handle is NULL"));
    }
    Ok(&unsafe { &*scenario }.cfg)
}

/// Set the master seed every record derives from.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_set_master_seed(
    scenario: *mut HybeamScenario,
    seed: u64,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || match unsafe { scenario_mut(scenario) } {
        Ok(cfg) => {
            clear_error();
            cfg.master_seed = seed;
            HybeamStatus::Ok
        }
        Err(s) => s,
    })
}

/// Set the Monte-Carlo trial count per SNR point.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_set_trials(
    scenario: *mut HybeamScenario,
    trials: usize,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || match unsafe { scenario_mut(scenario) } {
        Ok(cfg) => {
            if trials == 0 {
                return set_error(HybeamStatus::InvalidArgument, "trials must be positive");
            }
            clear_error();
            cfg.trials = trials;
            HybeamStatus::Ok
        }
        Err(s) => s,
    })
}

/// Replace the SNR sweep (dB values, copied).
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_set_snr_sweep(
    scenario: *mut HybeamScenario,
    snr_db: *const f64,
    len: usize,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || match unsafe { scenario_mut(scenario) } {
        Ok(cfg) => {
            if snr_db.is_null() || len == 0 {
                return set_error(
                    HybeamStatus::NullArgument,
                    "snr sweep must contain at least one value",
                );
            }
            let sweep = unsafe { slice::from_raw_parts(snr_db, len) };
            if sweep.iter().any(|v| !v.is_finite()) {
                return set_error(HybeamStatus::InvalidArgument, "snr sweep must be finite");
            }
            clear_error();
            cfg.snr_db_sweep = sweep.to_vec();
            HybeamStatus::Ok
        }
        Err(s) => s,
    })
}

/// Pick the precoder: "v1-mrt", "v1-zf", "v1-mmse", "v2-rate", "v2-sinr", or
/// "exhaustive".
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_set_variant(
    scenario: *mut HybeamScenario,
    variant: *const c_char,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || {
        let cfg = match unsafe { scenario_mut(scenario) } {
            Ok(c) => c,
            Err(s) => return s,
        };
        let name = match unsafe { cstr(variant) } {
            Ok(s) => s,
            Err(s) => return s,
        };
        match Variant::from_name(name) {
            Some(v) => {
                clear_error();
                cfg.variant = v;
                HybeamStatus::Ok
            }
            None => set_error(
                HybeamStatus::InvalidArgument,
                &format!(
                    "unknown variant {name:?} (valid: v1-mrt, v1-zf, v1-mmse, v2-rate, v2-sinr, exhaustive)"
                ),
            ),
        }
    })
}

/// Set the UE speed in km/h. Speed changes the Doppler multipliers only, so
/// runs at different speeds with the same seed stay paired draw-for-draw.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_set_velocity_kmh(
    scenario: *mut HybeamScenario,
    velocity_kmh: f64,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || match unsafe { scenario_mut(scenario) } {
        Ok(cfg) => {
            if !(velocity_kmh >= 0.0) || !velocity_kmh.is_finite() {
                return set_error(HybeamStatus::InvalidArgument, "velocity must be >= 0");
            }
            clear_error();
            cfg.velocity_kmh = velocity_kmh;
            HybeamStatus::Ok
        }
        Err(s) => s,
    })
}

/// Validate the scenario without running anything.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_validate(
    scenario: *const HybeamScenario,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || match unsafe { scenario_ref(scenario) } {
        Ok(cfg) => match cfg.validate() {
            Ok(()) => {
                clear_error();
                HybeamStatus::Ok
            }
            Err(e) => set_core_error(&e),
        },
        Err(s) => s,
    })
}

/// Serialize the scenario back to TOML. Free with `hybeam_string_free`.
#[no_mangle]
pub unsafe extern "C" fn hybeam_scenario_to_toml(
    scenario: *const HybeamScenario,
) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let cfg = match unsafe { scenario_ref(scenario) } {
            Ok(c) => c,
            Err(_) => return ptr::null_mut(),
        };
        match toml_string(cfg) {
            Ok(text) => owned_string(&text),
            Err(msg) => {
                set_error(HybeamStatus::RuntimeError, &msg);
                ptr::null_mut()
            }
        }
    })
}

fn toml_string(cfg: &ScenarioConfig) -> Result<String, String> {
    cfg.to_toml_string().map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Results handle
// ---------------------------------------------------------------------------

/// One result row, minus the two string columns (see
/// `hybeam_results_scenario` / `hybeam_results_metric`).
#[repr(C)]
#[derive(Clone, Copy)]
pub struct HybeamRecord {
    /// Trial index within the SNR point, 0-based.
    pub trial: u64,
    /// Operating SNR in dB.
    pub snr_db: f64,
    /// User index, or -1 for rows aggregated over users.
    pub user: i32,
    /// Metric value (unit depends on the metric name).
    pub value: f64,
    /// Exact RNG seed the trial ran under.
    pub seed: u64,
}

/// Opaque result set from one campaign.
pub struct HybeamResults {
    records: Vec<ResultRecord>,
    // NUL-terminated copies handed out as borrowed pointers.
    scenarios: Vec<CString>,
    metrics: Vec<CString>,
}

fn results_into_handle(records: Vec<ResultRecord>) -> *mut HybeamResults {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
    let scenarios = records.iter().map(|r| clean(&r.scenario)).collect();
    let metrics = records.iter().map(|r| clean(&r.metric)).collect();
    clear_error();
    Box::into_raw(Box::new(HybeamResults { records, scenarios, metrics }))
}

/// Release a result set. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_free(results: *mut HybeamResults) {
    if !results.is_null() {
        drop(unsafe { Box::from_raw(results) });
    }
}

unsafe fn results_ref<'a>(
    results: *const HybeamResults,
) -> Result<&'a HybeamResults, HybeamStatus> {
    if results.is_null() {
        return Err(set_error(HybeamStatus::NullArgument, "results handle is NULL"));
    }
    Ok(unsafe { &*results })
}

/// Number of rows in the result set.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_len(results: *const HybeamResults) -> usize {
    guarded(0, || match unsafe { results_ref(results) } {
        Ok(r) => {
            clear_error();
            r.records.len()
        }
        Err(_) => 0,
    })
}

/// Copy the numeric fields of row `index` into `out`.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_record(
    results: *const HybeamResults,
    index: usize,
    out: *mut HybeamRecord,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || {
        let r = match unsafe { results_ref(results) } {
            Ok(r) => r,
            Err(s) => return s,
        };
        if out.is_null() {
            return set_error(HybeamStatus::NullArgument, "output record pointer is NULL");
        }
        let Some(rec) = r.records.get(index) else {
            return set_error(
                HybeamStatus::InvalidArgument,
                &format!("row {index} out of bounds ({} rows)", r.records.len()),
            );
        };
        clear_error();
        unsafe {
            *out = HybeamRecord {
                trial: rec.trial,
                snr_db: rec.snr_db,
                user: rec.user,
                value: rec.value,
                seed: rec.seed,
            };
        }
        HybeamStatus::Ok
    })
}

/// Scenario label of row `index`; borrowed, valid while the result set lives.
/// NULL if the index is out of bounds.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_scenario(
    results: *const HybeamResults,
    index: usize,
) -> *const c_char {
    guarded(ptr::null(), || match unsafe { results_ref(results) } {
        Ok(r) => match r.scenarios.get(index) {
            Some(s) => {
                clear_error();
                s.as_ptr()
            }
            None => {
                set_error(
                    HybeamStatus::InvalidArgument,
                    &format!("row {index} out of bounds ({} rows)", r.records.len()),
                );
                ptr::null()
            }
        },
        Err(_) => ptr::null(),
    })
}

/// Metric name of row `index`; borrowed, valid while the result set lives.
/// NULL if the index is out of bounds.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_metric(
    results: *const HybeamResults,
    index: usize,
) -> *const c_char {
    guarded(ptr::null(), || match unsafe { results_ref(results) } {
        Ok(r) => match r.metrics.get(index) {
            Some(s) => {
                clear_error();
                s.as_ptr()
            }
            None => {
                set_error(
                    HybeamStatus::InvalidArgument,
                    &format!("row {index} out of bounds ({} rows)", r.records.len()),
                );
                ptr::null()
            }
        },
        Err(_) => ptr::null(),
    })
}

fn owned_string(text: &str) -> *mut c_char {
    match CString::new(text.replace('\0', " ")) {
        Ok(c) => c.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// Whole result set as CSV text (`scenario,trial,snr_db,user,metric,value,seed`).
/// Free with `hybeam_string_free`. NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_to_csv(results: *const HybeamResults) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let r = match unsafe { results_ref(results) } {
            Ok(r) => r,
            Err(_) => return ptr::null_mut(),
        };
        let mut buf = Vec::new();
        match write_csv(&r.records, &mut buf) {
            Ok(()) => {
                clear_error();
                owned_string(&String::from_utf8_lossy(&buf))
            }
            Err(e) => {
                set_core_error(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Whole result set as a JSON array of row objects. Free with
/// `hybeam_string_free`. NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_results_to_json(results: *const HybeamResults) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let r = match unsafe { results_ref(results) } {
            Ok(r) => r,
            Err(_) => return ptr::null_mut(),
        };
        let mut buf = Vec::new();
        match write_json(&r.records, &mut buf) {
            Ok(()) => {
                clear_error();
                owned_string(&String::from_utf8_lossy(&buf))
            }
            Err(e) => {
                set_core_error(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Release a string returned by this library. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn hybeam_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

// ---------------------------------------------------------------------------
// Campaign runners
// ---------------------------------------------------------------------------

fn run_kind(
    scenario: *const HybeamScenario,
    workers: usize,
    kind: CampaignKind,
) -> *mut HybeamResults {
    let cfg = match unsafe { scenario_ref(scenario) } {
        Ok(c) => c,
        Err(_) => return ptr::null_mut(),
    };
    let workers = if workers == 0 { None } else { Some(workers) };
    match run_campaign(cfg, &kind, workers) {
        Ok(records) => results_into_handle(records),
        Err(e) => {
            set_core_error(&e);
            ptr::null_mut()
        }
    }
}

/// Per-user rate/SINR and sum-rate campaign over the scenario's SNR sweep.
/// `workers` pins the thread count; 0 means the library default. The records
/// do not depend on the worker count. Returns NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_run_rate(
    scenario: *const HybeamScenario,
    workers: usize,
) -> *mut HybeamResults {
    guarded(ptr::null_mut(), || run_kind(scenario, workers, CampaignKind::Rate))
}

/// Rate campaign plus per-SNR outage probabilities at `targets` (bits/s/Hz)
/// and epsilon-rates at `epsilons` (fractions in (0,1)). Returns NULL on
/// failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_run_outage(
    scenario: *const HybeamScenario,
    targets: *const f64,
    n_targets: usize,
    epsilons: *const f64,
    n_epsilons: usize,
    workers: usize,
) -> *mut HybeamResults {
    guarded(ptr::null_mut(), || {
        if (targets.is_null() && n_targets > 0) || (epsilons.is_null() && n_epsilons > 0) {
            set_error(HybeamStatus::NullArgument, "non-empty array argument is NULL");
            return ptr::null_mut();
        }
        let targets = if n_targets == 0 {
            Vec::new()
        } else {
            unsafe { slice::from_raw_parts(targets, n_targets) }.to_vec()
        };
        let epsilons = if n_epsilons == 0 {
            Vec::new()
        } else {
            unsafe { slice::from_raw_parts(epsilons, n_epsilons) }.to_vec()
        };
        run_kind(scenario, workers, CampaignKind::Outage { targets, epsilons })
    })
}

/// Bit/block error-count campaign over full transmit/receive frames.
/// `coded` runs the rate-1/2 LDPC chain; otherwise raw QPSK. Returns NULL on
/// failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_run_ber(
    scenario: *const HybeamScenario,
    frames_per_trial: usize,
    coded: bool,
    workers: usize,
) -> *mut HybeamResults {
    guarded(ptr::null_mut(), || {
        if frames_per_trial == 0 {
            set_error(HybeamStatus::InvalidArgument, "frames_per_trial must be positive");
            return ptr::null_mut();
        }
        run_kind(scenario, workers, CampaignKind::Ber { frames_per_trial, coded })
    })
}

/// Energy-efficiency campaign: mean sum rate per watt for each entry of
/// `user_counts`. A NULL/empty list sweeps 1..=n_rf. Returns NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn hybeam_run_energy(
    scenario: *const HybeamScenario,
    user_counts: *const usize,
    n_counts: usize,
    workers: usize,
) -> *mut HybeamResults {
    guarded(ptr::null_mut(), || {
        let counts = if user_counts.is_null() || n_counts == 0 {
            let cfg = match unsafe { scenario_ref(scenario) } {
                Ok(c) => c,
                Err(_) => return ptr::null_mut(),
            };
            (1..=cfg.n_rf).collect()
        } else {
            unsafe { slice::from_raw_parts(user_counts, n_counts) }.to_vec()
        };
        run_kind(scenario, workers, CampaignKind::Energy { user_counts: counts })
    })
}

// ---------------------------------------------------------------------------
// Diagnostics and helpers
// ---------------------------------------------------------------------------

/// Message of the last failure on this thread; borrowed, valid until the next
/// failing call on the same thread. NULL when the last call succeeded.
#[no_mangle]
pub extern "C" fn hybeam_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some((msg, _)) => msg.as_ptr(),
        None => ptr::null(),
    })
}

/// Status of the last failure on this thread, or `Ok` if the last call
/// succeeded.
#[no_mangle]
pub extern "C" fn hybeam_last_status() -> HybeamStatus {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some((_, status)) => *status,
        None => HybeamStatus::Ok,
    })
}

/// Thermal noise floor in dBm for a bandwidth in Hz (9 dB receiver noise
/// figure included). Returns a status; the value lands in `out`.
#[no_mangle]
pub unsafe extern "C" fn hybeam_noise_floor_dbm(
    bandwidth_hz: f64,
    out: *mut f64,
) -> HybeamStatus {
    guarded(HybeamStatus::Panic, || {
        if out.is_null() {
            return set_error(HybeamStatus::NullArgument, "output pointer is NULL");
        }
        match hybeam::metrics::noise_floor_dbm(bandwidth_hz) {
            Ok(v) => {
                clear_error();
                unsafe { *out = v };
                HybeamStatus::Ok
            }
            Err(e) => set_core_error(&e),
        }
    })
}

/// Library version as a static string (do not free).
#[no_mangle]
pub extern "C" fn hybeam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
