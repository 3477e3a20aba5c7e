//! Monte-Carlo campaign driver.
//!
//! A campaign sweeps the scenario's SNR grid, runs `trials` independent
//! channel draws per point, and emits flat [`ResultRecord`]s. Reproducibility
//! is seed-derived, not execution-ordered: every (SNR index, trial) cell
//! mixes its coordinates into the master seed with splitmix64 and then opens
//! independent ChaCha streams per purpose ("lane"), so results are identical
//! for any `--workers` setting and any scheduling order. Sharing the channel
//! lanes across campaigns with the same master seed pairs the channel draws,
//! which makes variant-vs-variant comparisons paired rather than independent.
//!
//! A failed trial (e.g. a rank-deficient zero-forcing draw when two users
//! quantize to the same beam) contributes no records. If more than 10% of
//! cells fail, the whole campaign reports [`Error::CampaignFailed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::ChannelRealization;
use crate::codebook::{beamsteering_codebook, digital_codebook, rvq_codebook, Codebook, DigitalCodebook};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::link::{run_ber_frame, BerCounts, Coding};
use crate::link::ldpc::LdpcCode;
use crate::metrics::{
    self, epsilon_rate, outage_probability, per_user_rate, per_user_sinr, sum_rate, Architecture,
    PowerModel,
};
use crate::precoding::{
    solve_codebook_search, solve_exhaustive, solve_linear, Feedback, LinearPrecoder,
    PrecodingSolution, SearchMetric,
};
use crate::results::{ResultRecord, AGGREGATE_USER};
use crate::scenario::{FeedbackMode, ScenarioConfig, Variant};

/// Lane offsets for the per-trial RNG streams. User `u`'s channel draw uses
/// lane `CHANNEL_LANE + u`, so campaigns that share a master seed see the
/// same channels regardless of variant, feedback mode, or payload.
pub const CHANNEL_LANE: u64 = 0x10;
/// Lane for the per-fading-block RVQ codebook draw.
pub const RVQ_LANE: u64 = 0x4000;
/// Lane for payload bits and receiver noise in BER campaigns.
pub const DATA_LANE: u64 = 0x8000;

/// Default ceiling on the exhaustive search's combination count.
pub const DEFAULT_SEARCH_GUARD: u128 = 1 << 24;

/// Fraction of failed trials above which a campaign is declared failed.
pub const FAILURE_THRESHOLD: f64 = 0.10;

/// splitmix64 finalizer; the standard 64-bit mix with good avalanche.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (SNR index, trial) cell: coordinates folded into the master
/// seed through successive splitmix64 rounds.
pub fn trial_seed(master_seed: u64, snr_idx: usize, trial: usize) -> u64 {
    let mut s = splitmix64(master_seed);
    s = splitmix64(s ^ snr_idx as u64);
    splitmix64(s ^ trial as u64)
}

/// Independent RNG stream for one purpose within a trial.
pub fn lane_rng(trial_seed: u64, lane: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(trial_seed ^ lane))
}

/// What a campaign measures.
#[derive(Clone, Debug)]
pub enum CampaignKind {
    /// Per-user rate and SINR plus sum rate, one row set per trial.
    Rate,
    /// Rate records plus outage probabilities at `targets` (bits/s/Hz) and
    /// epsilon-rates at `epsilons`, aggregated per SNR point.
    Outage { targets: Vec<f64>, epsilons: Vec<f64> },
    /// Error-count records from full transmit/receive frames.
    Ber { frames_per_trial: usize, coded: bool },
    /// Sum rate per served-user count, converted to bits/s/Hz per watt with
    /// the hybrid receiver power model (one RF chain per served user).
    Energy { user_counts: Vec<usize> },
}

/// Precomputed campaign state shared by every trial.
struct Context {
    ue_codebook: Codebook,
    bs_codebook: Codebook,
    digital: Option<DigitalCodebook>,
    ldpc: Option<LdpcCode>,
}

impl Context {
    fn build(cfg: &ScenarioConfig, need_ldpc: bool) -> Result<Context> {
        let ue_codebook = beamsteering_codebook(cfg.bits.ue_rf, cfg.n_ue, cfg.antenna_spacing)
            .map_err(|e| Error::Config(format!("bits.ue_rf: {e}")))?;
        let bs_codebook = beamsteering_codebook(cfg.bits.bs_rf, cfg.n_bs, cfg.antenna_spacing)
            .map_err(|e| Error::Config(format!("bits.bs_rf: {e}")))?;
        let digital = match cfg.variant {
            Variant::V2Rate | Variant::V2Sinr | Variant::Exhaustive => Some(
                digital_codebook(cfg.bits.bb, cfg.n_users)
                    .map_err(|e| Error::Config(format!("bits.bb: {e}")))?,
            ),
            _ => None,
        };
        let ldpc = if need_ldpc { Some(LdpcCode::builtin()?) } else { None };
        Ok(Context { ue_codebook, bs_codebook, digital, ldpc })
    }
}

/// Draw each user's channel from its own lane so that campaigns with the
/// same master seed are paired draw-for-draw.
fn draw_channels(
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<Vec<ChannelRealization>> {
    let geom = cfg.geometry();
    (0..cfg.n_users)
        .map(|u| {
            let mut rng = lane_rng(seed, CHANNEL_LANE + u as u64);
            ChannelRealization::draw(&geom, cfg.n_subcarriers, &mut rng)
        })
        .collect()
}

/// Run the configured precoding variant on one trial's channels.
fn solve_variant(
    cfg: &ScenarioConfig,
    ctx: &Context,
    subs: &[Vec<CMat>],
    seed: u64,
    snr: f64,
) -> Result<PrecodingSolution> {
    match cfg.variant {
        Variant::V1Mrt | Variant::V1Zf | Variant::V1Mmse => {
            let kind = match cfg.variant {
                Variant::V1Mrt => LinearPrecoder::Mrt,
                Variant::V1Zf => LinearPrecoder::Zf,
                _ => LinearPrecoder::Mmse,
            };
            match cfg.feedback {
                FeedbackMode::Perfect => solve_linear(
                    subs,
                    &ctx.ue_codebook,
                    &ctx.bs_codebook,
                    Feedback::Perfect,
                    kind,
                    snr,
                ),
                FeedbackMode::Quantized => {
                    let mut rng = lane_rng(seed, RVQ_LANE);
                    let rvq = rvq_codebook(cfg.bits.bb, cfg.n_users, &mut rng)?;
                    solve_linear(
                        subs,
                        &ctx.ue_codebook,
                        &ctx.bs_codebook,
                        Feedback::Rvq { codebook: &rvq, cqi_gain: true },
                        kind,
                        snr,
                    )
                }
            }
        }
        Variant::V2Rate | Variant::V2Sinr => {
            let metric = if cfg.variant == Variant::V2Rate {
                SearchMetric::SumRate
            } else {
                SearchMetric::SumSinr
            };
            solve_codebook_search(
                subs,
                &ctx.ue_codebook,
                &ctx.bs_codebook,
                ctx.digital.as_ref().expect("digital codebook built for v2"),
                metric,
                snr,
            )
        }
        Variant::Exhaustive => solve_exhaustive(
            subs,
            &ctx.ue_codebook,
            &ctx.bs_codebook,
            ctx.digital.as_ref().expect("digital codebook built for exhaustive"),
            snr,
            DEFAULT_SEARCH_GUARD,
        ),
    }
}

fn record(
    cfg: &ScenarioConfig,
    trial: usize,
    snr_db: f64,
    user: i32,
    metric: &str,
    value: f64,
    seed: u64,
) -> ResultRecord {
    ResultRecord {
        scenario: cfg.id.clone(),
        trial: trial as u64,
        snr_db,
        user,
        metric: metric.to_string(),
        value,
        seed,
    }
}

/// One rate trial: draw channels, precode, score.
fn rate_trial(
    cfg: &ScenarioConfig,
    ctx: &Context,
    snr_idx: usize,
    trial: usize,
) -> Result<Vec<ResultRecord>> {
    let seed = trial_seed(cfg.master_seed, snr_idx, trial);
    let snr_db = cfg.snr_db_sweep[snr_idx];
    let snr = 10f64.powf(snr_db / 10.0);
    let realizations = draw_channels(cfg, seed)?;
    let subs: Vec<Vec<CMat>> = realizations.into_iter().map(|r| r.subcarriers).collect();
    let solution = solve_variant(cfg, ctx, &subs, seed, snr)?;

    let mut out = Vec::with_capacity(2 * cfg.n_users + 1);
    for u in 0..cfg.n_users {
        let rate = per_user_rate(&subs[u], &solution, u, snr);
        out.push(record(cfg, trial, snr_db, u as i32, "rate", rate, seed));
    }
    for u in 0..cfg.n_users {
        let sinr = per_user_sinr(&subs[u], &solution, u, snr);
        out.push(record(cfg, trial, snr_db, u as i32, "sinr", sinr, seed));
    }
    let sum = sum_rate(&subs, &solution, snr);
    out.push(record(cfg, trial, snr_db, AGGREGATE_USER, "sum_rate", sum, seed));
    Ok(out)
}

/// One BER trial: design once, then push `frames_per_trial` frames through
/// the time-varying channel and tally bit/block errors.
fn ber_trial(
    cfg: &ScenarioConfig,
    ctx: &Context,
    snr_idx: usize,
    trial: usize,
    frames: usize,
    coded: bool,
) -> Result<Vec<ResultRecord>> {
    let seed = trial_seed(cfg.master_seed, snr_idx, trial);
    let snr_db = cfg.snr_db_sweep[snr_idx];
    let snr = 10f64.powf(snr_db / 10.0);
    let geom = cfg.geometry();
    let realizations = draw_channels(cfg, seed)?;
    let subs: Vec<Vec<CMat>> = realizations.iter().map(|r| r.subcarriers.clone()).collect();
    let solution = solve_variant(cfg, ctx, &subs, seed, snr)?;

    let coding = if coded {
        Coding::Ldpc(ctx.ldpc.as_ref().expect("LDPC code built for coded BER"))
    } else {
        Coding::Uncoded
    };
    let mut data_rng = lane_rng(seed, DATA_LANE);
    let mut counts = BerCounts::default();
    for _ in 0..frames {
        let frame = run_ber_frame(
            &realizations,
            &geom,
            &solution,
            cfg.cp_len,
            snr,
            coding,
            &mut data_rng,
        )?;
        counts.merge(&frame);
    }

    Ok(vec![
        record(cfg, trial, snr_db, AGGREGATE_USER, "bit_errors", counts.bit_errors as f64, seed),
        record(cfg, trial, snr_db, AGGREGATE_USER, "bits", counts.bits as f64, seed),
        record(cfg, trial, snr_db, AGGREGATE_USER, "block_errors", counts.block_errors as f64, seed),
        record(cfg, trial, snr_db, AGGREGATE_USER, "blocks", counts.blocks as f64, seed),
    ])
}

/// Outcome of one parallel section: per-cell record batches in sweep order
/// plus the failure tally.
struct SweepOutcome {
    records: Vec<ResultRecord>,
    failed: usize,
    total: usize,
    first_failure: Option<String>,
}

/// Run `trials` cells per SNR point in parallel, preserving sweep order.
fn run_cells<F>(cfg: &ScenarioConfig, run: F) -> SweepOutcome
where
    F: Fn(usize, usize) -> Result<Vec<ResultRecord>> + Sync,
{
    let cells: Vec<(usize, usize)> = (0..cfg.snr_db_sweep.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let results: Vec<Result<Vec<ResultRecord>>> =
        cells.par_iter().map(|&(s, t)| run(s, t)).collect();

    let total = results.len();
    let mut records = Vec::new();
    let mut failed = 0;
    let mut first_failure = None;
    for result in results {
        match result {
            Ok(batch) => records.extend(batch),
            Err(e) => {
                failed += 1;
                if first_failure.is_none() {
                    first_failure = Some(e.to_string());
                }
            }
        }
    }
    SweepOutcome { records, failed, total, first_failure }
}

/// Values of `metric` at one SNR point for one exact user index.
fn collect_samples(records: &[ResultRecord], metric: &str, snr_db: f64, user: i32) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.metric == metric && r.snr_db == snr_db && r.user == user)
        .map(|r| r.value)
        .collect()
}

/// Per-user values of `metric` at one SNR point pooled across all users.
fn pooled_samples(records: &[ResultRecord], metric: &str, snr_db: f64) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.metric == metric && r.snr_db == snr_db && r.user >= 0)
        .map(|r| r.value)
        .collect()
}

fn outage_records(
    cfg: &ScenarioConfig,
    rate_records: &[ResultRecord],
    targets: &[f64],
    epsilons: &[f64],
) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for &snr_db in &cfg.snr_db_sweep {
        // user = -1 pools every user's per-trial rate into one sample set;
        // individual users get their own rows as well.
        let mut scopes: Vec<i32> = (0..cfg.n_users as i32).collect();
        scopes.push(AGGREGATE_USER);
        for user in scopes {
            let samples = if user == AGGREGATE_USER {
                pooled_samples(rate_records, "rate", snr_db)
            } else {
                collect_samples(rate_records, "rate", snr_db, user)
            };
            if samples.is_empty() {
                continue;
            }
            for &target in targets {
                let p = outage_probability(&samples, target)?;
                let metric = format!("outage_r{target}");
                out.push(record(cfg, 0, snr_db, user, &metric, p, cfg.master_seed));
            }
            for &eps in epsilons {
                let r = epsilon_rate(&samples, eps)?;
                let metric = format!("epsilon_rate_e{eps}");
                out.push(record(cfg, 0, snr_db, user, &metric, r, cfg.master_seed));
            }
        }
    }
    Ok(out)
}

fn ber_aggregates(cfg: &ScenarioConfig, records: &[ResultRecord]) -> Vec<ResultRecord> {
    let mut out = Vec::new();
    for &snr_db in &cfg.snr_db_sweep {
        let sum = |metric: &str| -> f64 {
            collect_samples(records, metric, snr_db, AGGREGATE_USER).iter().sum()
        };
        let bits = sum("bits");
        let blocks = sum("blocks");
        if bits == 0.0 {
            continue;
        }
        out.push(record(cfg, 0, snr_db, AGGREGATE_USER, "ber", sum("bit_errors") / bits, cfg.master_seed));
        if blocks > 0.0 {
            out.push(record(
                cfg,
                0,
                snr_db,
                AGGREGATE_USER,
                "bler",
                sum("block_errors") / blocks,
                cfg.master_seed,
            ));
        }
    }
    out
}

/// Receiver power for the energy figure: hybrid architecture with the
/// scenario's connection topology, the BS array size, and one RF chain per
/// served user.
pub fn scenario_power_w(cfg: &ScenarioConfig, n_users: usize) -> Result<f64> {
    PowerModel {
        architecture: Architecture::HybridCombining,
        connection: cfg.connection,
        n_antennas: cfg.n_bs,
        n_chains: n_users,
        devices: cfg.device_powers(),
    }
    .total()
}

fn merge_outcomes(into: &mut SweepOutcome, from: SweepOutcome) {
    into.records.extend(from.records);
    into.failed += from.failed;
    into.total += from.total;
    if into.first_failure.is_none() {
        into.first_failure = from.first_failure;
    }
}

fn finish(outcome: SweepOutcome) -> Result<Vec<ResultRecord>> {
    if outcome.failed as f64 > FAILURE_THRESHOLD * outcome.total as f64 {
        return Err(Error::CampaignFailed {
            failed: outcome.failed,
            total: outcome.total,
            threshold: 100.0 * FAILURE_THRESHOLD,
            first: outcome
                .first_failure
                .unwrap_or_else(|| "no failure message captured".into()),
        });
    }
    Ok(outcome.records)
}

/// Run a campaign. `workers` pins the rayon pool size; `None` uses the
/// global default. Output is identical for every worker count.
pub fn run_campaign(
    cfg: &ScenarioConfig,
    kind: &CampaignKind,
    workers: Option<usize>,
) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    match workers {
        None => run_campaign_inner(cfg, kind),
        Some(0) => Err(Error::Config("workers must be positive (got 0)".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("workers: {e}")))?
            .install(|| run_campaign_inner(cfg, kind)),
    }
}

fn run_campaign_inner(cfg: &ScenarioConfig, kind: &CampaignKind) -> Result<Vec<ResultRecord>> {
    match kind {
        CampaignKind::Rate => {
            let ctx = Context::build(cfg, false)?;
            finish(run_cells(cfg, |s, t| rate_trial(cfg, &ctx, s, t)))
        }
        CampaignKind::Outage { targets, epsilons } => {
            let ctx = Context::build(cfg, false)?;
            let mut outcome = run_cells(cfg, |s, t| rate_trial(cfg, &ctx, s, t));
            let aggregates = outage_records(cfg, &outcome.records, targets, epsilons)?;
            outcome.records.extend(aggregates);
            finish(outcome)
        }
        CampaignKind::Ber { frames_per_trial, coded } => {
            if *frames_per_trial == 0 {
                return Err(Error::Config("frames_per_trial must be positive (got 0)".into()));
            }
            let ctx = Context::build(cfg, *coded)?;
            let mut outcome =
                run_cells(cfg, |s, t| ber_trial(cfg, &ctx, s, t, *frames_per_trial, *coded));
            let aggregates = ber_aggregates(cfg, &outcome.records);
            outcome.records.extend(aggregates);
            finish(outcome)
        }
        CampaignKind::Energy { user_counts } => {
            if user_counts.is_empty() {
                return Err(Error::Config("energy campaign needs at least one user count".into()));
            }
            let mut combined =
                SweepOutcome { records: Vec::new(), failed: 0, total: 0, first_failure: None };
            for &users in user_counts {
                let arm = ScenarioConfig {
                    id: format!("{}_u{users}", cfg.id),
                    n_users: users,
                    ..cfg.clone()
                };
                arm.validate()?;
                let ctx = Context::build(&arm, false)?;
                let mut outcome = run_cells(&arm, |s, t| rate_trial(&arm, &ctx, s, t));
                let power = scenario_power_w(&arm, users)?;
                for &snr_db in &arm.snr_db_sweep {
                    let sums = collect_samples(&outcome.records, "sum_rate", snr_db, AGGREGATE_USER);
                    if sums.is_empty() {
                        continue;
                    }
                    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
                    let ee = metrics::energy_efficiency(mean, power)?;
                    outcome.records.push(record(
                        &arm,
                        0,
                        snr_db,
                        AGGREGATE_USER,
                        "mean_sum_rate",
                        mean,
                        arm.master_seed,
                    ));
                    outcome.records.push(record(
                        &arm,
                        0,
                        snr_db,
                        AGGREGATE_USER,
                        "power_w",
                        power,
                        arm.master_seed,
                    ));
                    outcome.records.push(record(
                        &arm,
                        0,
                        snr_db,
                        AGGREGATE_USER,
                        "energy_efficiency",
                        ee,
                        arm.master_seed,
                    ));
                }
                merge_outcomes(&mut combined, outcome);
            }
            finish(combined)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Band;

    /// Small scenario for fast campaign tests.
    fn tiny(variant: Variant) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::for_band(Band::Mmwave);
        cfg.id = "tiny".into();
        cfg.n_bs = 8;
        cfg.n_ue = 2;
        cfg.n_subcarriers = 8;
        cfg.cp_len = 4;
        cfg.bits.bs_rf = 3;
        cfg.bits.ue_rf = 2;
        cfg.bits.bb = 6;
        cfg.trials = 4;
        cfg.snr_db_sweep = vec![-5.0, 5.0];
        cfg.variant = variant;
        cfg.master_seed = 99;
        cfg.validate().unwrap();
        cfg
    }

    #[test]
    fn splitmix_chain_is_stable() {
        // First two outputs of the published splitmix64 sequence seeded at 0:
        // the generator's state advances by the golden gamma per call, so
        // output i is our stateless mix applied to i * 0x9E3779B97F4A7C15.
        assert_eq!(splitmix64(0), 0xE220A8397B1DCDAF);
        assert_eq!(splitmix64(0x9E3779B97F4A7C15), 0x6E789E6AA1B965F4);
        assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 0, 1));
        assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 1, 0));
        assert_ne!(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
    }

    #[test]
    fn rate_campaign_emits_the_documented_record_set() {
        let mut cfg = tiny(Variant::V1Zf);
        cfg.trials = 1;
        cfg.snr_db_sweep = vec![0.0];
        cfg.feedback = FeedbackMode::Perfect;
        // A single zero-forcing trial dies whenever both users pick the same
        // BS beam, so take the first master seed whose draw is usable; the
        // contract under test is the record set, not one particular draw.
        let records = (0..64)
            .find_map(|seed| {
                cfg.master_seed = seed;
                run_campaign(&cfg, &CampaignKind::Rate, Some(1)).ok()
            })
            .expect("some seed below 64 should avoid a beam collision");
        // Two users: 2 rate rows, 2 SINR rows, 1 sum-rate row.
        assert_eq!(records.len(), 5);
        let metrics: Vec<&str> = records.iter().map(|r| r.metric.as_str()).collect();
        assert_eq!(metrics, ["rate", "rate", "sinr", "sinr", "sum_rate"]);
        assert_eq!(records[0].user, 0);
        assert_eq!(records[1].user, 1);
        assert_eq!(records[4].user, AGGREGATE_USER);
        assert!(records.iter().all(|r| r.scenario == "tiny"));
        assert!(records.iter().all(|r| r.snr_db == 0.0));
        assert!(records.iter().all(|r| r.seed == trial_seed(cfg.master_seed, 0, 0)));
        let sum: f64 = records[..2].iter().map(|r| r.value).sum();
        assert!((sum - records[4].value).abs() < 1e-12, "sum rate adds the per-user rates");
    }

    #[test]
    fn identical_output_for_any_worker_count() {
        let cfg = tiny(Variant::V1Mmse);
        let one = run_campaign(&cfg, &CampaignKind::Rate, Some(1)).unwrap();
        let four = run_campaign(&cfg, &CampaignKind::Rate, Some(4)).unwrap();
        let auto = run_campaign(&cfg, &CampaignKind::Rate, None).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, auto);
        assert!(!one.is_empty());
    }

    #[test]
    fn channel_lanes_pair_campaigns_that_share_a_master_seed() {
        let quantized = tiny(Variant::V1Mmse);
        let mut perfect = quantized.clone();
        perfect.feedback = FeedbackMode::Perfect;
        let q = run_campaign(&quantized, &CampaignKind::Rate, Some(2)).unwrap();
        let p = run_campaign(&perfect, &CampaignKind::Rate, Some(2)).unwrap();
        // Same channels, better feedback: perfect-CSIT sum rate wins on
        // average and the records line up row for row.
        assert_eq!(q.len(), p.len());
        let (mut q_sum, mut p_sum) = (0.0, 0.0);
        for (a, b) in q.iter().zip(&p) {
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.metric, b.metric);
            if a.metric == "sum_rate" {
                q_sum += a.value;
                p_sum += b.value;
            }
        }
        assert!(p_sum > q_sum, "perfect {p_sum} vs quantized {q_sum}");
    }

    #[test]
    fn mean_sum_rate_grows_with_snr() {
        let mut cfg = tiny(Variant::V1Mmse);
        cfg.trials = 12;
        cfg.snr_db_sweep = vec![-20.0, 0.0, 20.0];
        let records = run_campaign(&cfg, &CampaignKind::Rate, Some(2)).unwrap();
        let mean_at = |snr: f64| {
            let v = collect_samples(&records, "sum_rate", snr, AGGREGATE_USER);
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (lo, mid, hi) = (mean_at(-20.0), mean_at(0.0), mean_at(20.0));
        assert!(lo < mid && mid < hi, "{lo} < {mid} < {hi}");
    }

    #[test]
    fn outage_campaign_appends_per_snr_aggregates() {
        let mut cfg = tiny(Variant::V1Mmse);
        cfg.snr_db_sweep = vec![0.0];
        cfg.trials = 8;
        let kind = CampaignKind::Outage { targets: vec![0.0, 1e9], epsilons: vec![0.5] };
        let records = run_campaign(&cfg, &kind, Some(2)).unwrap();
        // No rate reaches 1e9, every rate exceeds 0.
        let all_out = collect_samples(&records, "outage_r1000000000", 0.0, AGGREGATE_USER);
        let never_out = collect_samples(&records, "outage_r0", 0.0, AGGREGATE_USER);
        assert_eq!(all_out, vec![1.0]);
        assert_eq!(never_out, vec![0.0]);
        // Per-user and pooled rows both exist: users 0, 1, and -1.
        let rows: Vec<i32> = records
            .iter()
            .filter(|r| r.metric == "outage_r0")
            .map(|r| r.user)
            .collect();
        assert_eq!(rows, vec![0, 1, AGGREGATE_USER]);
        let eps = collect_samples(&records, "epsilon_rate_e0.5", 0.0, AGGREGATE_USER);
        assert_eq!(eps.len(), 1);
        assert!(eps[0] > 0.0);
    }

    #[test]
    fn ber_campaign_counts_bits_and_pools_per_snr() {
        let mut cfg = tiny(Variant::V1Mmse);
        cfg.feedback = FeedbackMode::Perfect;
        cfg.trials = 2;
        cfg.snr_db_sweep = vec![10.0];
        let kind = CampaignKind::Ber { frames_per_trial: 1, coded: false };
        let records = run_campaign(&cfg, &kind, Some(2)).unwrap();
        let bits = collect_samples(&records, "bits", 10.0, AGGREGATE_USER);
        // 1296 payload bits per user per frame, two users, one frame.
        assert_eq!(bits, vec![2592.0, 2592.0]);
        let ber = collect_samples(&records, "ber", 10.0, AGGREGATE_USER);
        assert_eq!(ber.len(), 1);
        assert!(ber[0] >= 0.0 && ber[0] <= 1.0);
        let total_errors: f64 =
            collect_samples(&records, "bit_errors", 10.0, AGGREGATE_USER).iter().sum();
        assert!((ber[0] - total_errors / 5184.0).abs() < 1e-15);
    }

    #[test]
    fn coded_ber_beats_uncoded_on_the_same_channels() {
        let mut cfg = tiny(Variant::V1Mmse);
        cfg.feedback = FeedbackMode::Perfect;
        cfg.n_users = 1;
        cfg.variant = Variant::V1Mrt;
        cfg.trials = 6;
        // High enough that LDPC cleans up, low enough that raw QPSK errs.
        cfg.snr_db_sweep = vec![18.0];
        let coded = run_campaign(
            &cfg,
            &CampaignKind::Ber { frames_per_trial: 1, coded: true },
            Some(2),
        )
        .unwrap();
        let uncoded = run_campaign(
            &cfg,
            &CampaignKind::Ber { frames_per_trial: 1, coded: false },
            Some(2),
        )
        .unwrap();
        let pick = |recs: &[ResultRecord]| collect_samples(recs, "ber", 18.0, AGGREGATE_USER)[0];
        let (c, u) = (pick(&coded), pick(&uncoded));
        assert!(c <= u, "coded {c} should not exceed uncoded {u}");
    }

    #[test]
    fn energy_campaign_scales_power_with_served_users() {
        let mut cfg = tiny(Variant::V1Mmse);
        cfg.n_rf = 4;
        cfg.trials = 3;
        cfg.snr_db_sweep = vec![0.0];
        let kind = CampaignKind::Energy { user_counts: vec![1, 2, 4] };
        let records = run_campaign(&cfg, &kind, Some(2)).unwrap();
        let power = |u: usize| {
            records
                .iter()
                .find(|r| r.scenario == format!("tiny_u{u}") && r.metric == "power_w")
                .unwrap()
                .value
        };
        assert!(power(1) < power(2) && power(2) < power(4));
        let arm = ScenarioConfig { n_users: 2, ..cfg.clone() };
        assert!((power(2) - scenario_power_w(&arm, 2).unwrap()).abs() < 1e-15);
        for u in [1usize, 2, 4] {
            let id = format!("tiny_u{u}");
            let ee = records
                .iter()
                .find(|r| r.scenario == id && r.metric == "energy_efficiency")
                .unwrap();
            let mean = records
                .iter()
                .find(|r| r.scenario == id && r.metric == "mean_sum_rate")
                .unwrap();
            assert!((ee.value - mean.value / power(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_guard_failures_sink_the_campaign() {
        let mut cfg = tiny(Variant::Exhaustive);
        // 64 BS beams: 4^2 * 64^2 * 64 * 8 = 2^25 combinations > the 2^24
        // guard, so every trial fails before any search work happens.
        cfg.bits.bs_rf = 6;
        cfg.trials = 2;
        cfg.snr_db_sweep = vec![0.0];
        let err = run_campaign(&cfg, &CampaignKind::Rate, Some(1)).unwrap_err();
        match &err {
            Error::CampaignFailed { failed, total, first, .. } => {
                assert_eq!((*failed, *total), (2, 2));
                assert!(first.contains("search space"), "{first}");
            }
            other => panic!("expected CampaignFailed, got {other}"),
        }
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn zero_workers_is_a_config_error() {
        let cfg = tiny(Variant::V1Mmse);
        let err = run_campaign(&cfg, &CampaignKind::Rate, Some(0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
