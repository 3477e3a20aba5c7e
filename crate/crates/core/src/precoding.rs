//! Two-stage multiuser hybrid precoding with limited feedback.
//!
//! Stage 1 picks, per user, the analog combiner/beam pair maximizing the
//! wideband single-user gain over the shared beamsteering codebooks; the
//! winning BS beams become the columns of the frequency-flat analog precoder.
//! Stage 2 designs per-subcarrier digital precoders, either in closed form
//! (MRT/ZF/MMSE) from quantized effective-channel feedback, or by scanning a
//! shared matrix codebook for the best sum metric. An exhaustive joint search
//! over all stages serves as the benchmark upper bound.

use num_complex::Complex64;

use crate::codebook::{Codebook, DigitalCodebook};
use crate::error::{Error, Result};
use crate::linalg::{dot_unconj, hermitian, invert_with_condition, norm2, CMat, CVec};
use crate::metrics;

/// Digital precoders whose feedback Gram matrix conditioning exceeds this are
/// treated as rank deficient.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Winning codebook indices of one user's analog stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamChoice {
    pub ue_index: usize,
    pub bs_index: usize,
    /// Wideband objective Σ_k |g^H H[k] v|² of the winning pair.
    pub objective: f64,
}

/// Everything the receiver fed back or the search logged, for bookkeeping
/// and overhead accounting.
#[derive(Clone, Debug, Default)]
pub struct FeedbackRecord {
    pub ue_beam: Vec<usize>,
    pub bs_beam: Vec<usize>,
    pub stage1_objective: Vec<f64>,
    /// rvq_index[k][u]: quantized effective-channel word (closed-form stage).
    pub rvq_index: Vec<Vec<usize>>,
    /// cqi_gain[k][u]: effective-channel norm fed back alongside the word.
    pub cqi_gain: Vec<Vec<f64>>,
    /// digital_index[k]: winning matrix-codebook entry (search stages).
    pub digital_index: Vec<usize>,
    /// Training slots spent sounding digital candidates.
    pub training_slots: usize,
}

/// A complete transmit/receive design for one channel realization.
#[derive(Clone, Debug)]
pub struct PrecodingSolution {
    /// Per-user receive combiners, unit norm.
    pub combiners: Vec<CVec>,
    /// Frequency-flat analog precoder, n_bs × U, constant-modulus entries.
    pub analog_precoder: CMat,
    /// Per-subcarrier digital precoders, U × U, jointly power normalized.
    pub digital_precoders: Vec<CMat>,
    /// Scale applied to each digital precoder by the power normalization.
    pub power_scales: Vec<f64>,
    pub feedback: FeedbackRecord,
}

/// How the BS learns the effective channels for the closed-form stage.
#[derive(Clone, Copy, Debug)]
pub enum Feedback<'a> {
    /// Genie-aided: exact effective rows.
    Perfect,
    /// Random-vector quantization of the row direction; `cqi_gain` keeps the
    /// fed-back norm attached (false reconstructs bare directions).
    Rvq { codebook: &'a Codebook, cqi_gain: bool },
}

/// Closed-form digital precoder families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearPrecoder {
    Mrt,
    Zf,
    Mmse,
}

/// Objective for the per-subcarrier digital codebook search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMetric {
    SumRate,
    SumSinr,
}

fn validate_channels(subs: &[Vec<CMat>]) -> Result<(usize, usize)> {
    if subs.is_empty() {
        return Err(Error::Empty("per-user channel list".into()));
    }
    let k_total = subs[0].len();
    if k_total == 0 {
        return Err(Error::Empty("subcarrier responses".into()));
    }
    for (u, chans) in subs.iter().enumerate() {
        if chans.len() != k_total {
            return Err(Error::Dimension(format!(
                "user {u} has {} subcarriers, user 0 has {k_total}",
                chans.len()
            )));
        }
    }
    Ok((subs.len(), k_total))
}

/// Stage 1: per user, the combiner/beam pair maximizing the wideband gain
/// Σ_k |g^H H_u[k] v|². Ties break to the lowest (ue index, bs index) pair.
pub fn stage1_analog_search(
    subs: &[Vec<CMat>],
    ue_codebook: &Codebook,
    bs_codebook: &Codebook,
) -> Result<Vec<BeamChoice>> {
    let (_, k_total) = validate_channels(subs)?;
    if ue_codebook.is_empty() || bs_codebook.is_empty() {
        return Err(Error::Empty("analog codebook".into()));
    }
    let mut choices = Vec::with_capacity(subs.len());
    for chans in subs {
        let mut best = BeamChoice { ue_index: 0, bs_index: 0, objective: f64::NEG_INFINITY };
        for (gi, g) in ue_codebook.entries.iter().enumerate() {
            // Precompute g^H H[k] once per combiner.
            let rows: Vec<CVec> = (0..k_total)
                .map(|k| {
                    let h = &chans[k];
                    let mut row = CVec::zeros(h.ncols());
                    for t in 0..h.ncols() {
                        let mut acc = Complex64::ZERO;
                        for r in 0..h.nrows() {
                            acc += g[r].conj() * h[(r, t)];
                        }
                        row[t] = acc;
                    }
                    row
                })
                .collect();
            for (vi, v) in bs_codebook.entries.iter().enumerate() {
                let objective: f64 = rows.iter().map(|row| dot_unconj(row, v).norm_sqr()).sum();
                if objective > best.objective {
                    best = BeamChoice { ue_index: gi, bs_index: vi, objective };
                }
            }
        }
        choices.push(best);
    }
    Ok(choices)
}

/// Stack the winning BS beams as the columns of the analog precoder.
pub fn build_analog_precoder(choices: &[BeamChoice], bs_codebook: &Codebook) -> CMat {
    let n_bs = bs_codebook.entries[0].len();
    let mut f_rf = CMat::zeros((n_bs, choices.len()));
    for (u, choice) in choices.iter().enumerate() {
        let beam = &bs_codebook.entries[choice.bs_index];
        for m in 0..n_bs {
            f_rf[(m, u)] = beam[m];
        }
    }
    f_rf
}

/// Pairs of users whose stage-1 BS beams coincide.
pub fn colliding_users(choices: &[BeamChoice]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..choices.len() {
        for b in a + 1..choices.len() {
            if choices[a].bs_index == choices[b].bs_index {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Effective post-combining row of one user at one subcarrier.
pub fn effective_channel(channel_k: &CMat, combiner: &CVec, analog: &CMat) -> CVec {
    metrics::effective_row(channel_k, combiner, analog)
}

/// One user's effective channel at one subcarrier, as fed back to the BS.
#[derive(Clone, Debug)]
pub struct EffectiveChannel {
    /// Exact row h̄ = w^H H F_RF.
    pub raw: CVec,
    /// Unit feedback direction (column convention: reconstructed row is
    /// gain · direction^H).
    pub direction: CVec,
    /// Fed-back channel-quality gain ‖h̄‖.
    pub gain: f64,
    /// Codebook word, when quantized.
    pub index: Option<usize>,
}

/// Quantize a row against an RVQ codebook: the winner maximizes |h̄ · c|
/// (unconjugated product), ties to the lowest index.
pub fn quantize_effective(raw: &CVec, rvq: &Codebook) -> Result<EffectiveChannel> {
    if rvq.is_empty() {
        return Err(Error::Empty("rvq codebook".into()));
    }
    if rvq.entries[0].len() != raw.len() {
        return Err(Error::Dimension(format!(
            "rvq dimension {} does not match effective row length {}",
            rvq.entries[0].len(),
            raw.len()
        )));
    }
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, c) in rvq.entries.iter().enumerate() {
        let v = dot_unconj(raw, c).norm();
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    Ok(EffectiveChannel {
        raw: raw.clone(),
        direction: rvq.entries[best_idx].clone(),
        gain: norm2(raw),
        index: Some(best_idx),
    })
}

/// Genie feedback: the exact direction, so the reconstructed row equals h̄.
pub fn perfect_effective(raw: &CVec) -> Result<EffectiveChannel> {
    let gain = norm2(raw);
    if gain == 0.0 {
        return Err(Error::Degenerate("effective channel row is zero".into()));
    }
    let direction = raw.mapv(|z| z.conj() / gain);
    Ok(EffectiveChannel { raw: raw.clone(), direction, gain, index: None })
}

/// Reconstruct the BS-side channel estimate: row u = gain_u · direction_u^H
/// (bare directions when `use_gain` is false).
pub fn assemble_feedback_matrix(effs: &[EffectiveChannel], use_gain: bool) -> CMat {
    let n_users = effs.len();
    let dim = effs[0].direction.len();
    CMat::from_shape_fn((n_users, dim), |(u, j)| {
        let g = if use_gain { effs[u].gain } else { 1.0 };
        effs[u].direction[j].conj() * g
    })
}

/// Closed-form digital precoder from the reconstructed channel estimate.
/// `snr` is linear; the MMSE regularizer is K·U/snr.
pub fn linear_digital_precoder(
    h_hat: &CMat,
    kind: LinearPrecoder,
    snr: f64,
    k_total: usize,
    colliding: &[(usize, usize)],
) -> Result<CMat> {
    let n_users = h_hat.nrows();
    let hh = hermitian(h_hat);
    match kind {
        LinearPrecoder::Mrt => Ok(hh),
        LinearPrecoder::Zf => {
            let gram = h_hat.dot(&hh);
            let (inv, cond) = invert_with_condition(&gram)?;
            if !(cond <= CONDITION_LIMIT) {
                return Err(Error::RankDeficient { cond, colliding: colliding.to_vec() });
            }
            Ok(hh.dot(&inv))
        }
        LinearPrecoder::Mmse => {
            if !(snr > 0.0) {
                return Err(Error::Config(format!("mmse needs positive linear snr, got {snr}")));
            }
            let mut gram = h_hat.dot(&hh);
            let lambda = (k_total * n_users) as f64 / snr;
            for u in 0..n_users {
                gram[(u, u)] += Complex64::new(lambda, 0.0);
            }
            let (inv, _) = invert_with_condition(&gram)?;
            Ok(hh.dot(&inv))
        }
    }
}

/// Scale the digital precoder so ‖F_RF · F_BB‖_F = sqrt(U). Returns the
/// scale that was applied.
pub fn normalize_power(analog: &CMat, digital: &mut CMat) -> Result<f64> {
    let n_users = digital.ncols() as f64;
    let norm = crate::linalg::frobenius(&analog.dot(digital));
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate("digital precoder has no transmit power".into()));
    }
    let scale = n_users.sqrt() / norm;
    digital.mapv_inplace(|z| z * scale);
    Ok(scale)
}

/// Full two-stage design with a closed-form digital stage.
pub fn solve_linear(
    subs: &[Vec<CMat>],
    ue_codebook: &Codebook,
    bs_codebook: &Codebook,
    feedback: Feedback,
    kind: LinearPrecoder,
    snr: f64,
) -> Result<PrecodingSolution> {
    let (n_users, k_total) = validate_channels(subs)?;
    let choices = stage1_analog_search(subs, ue_codebook, bs_codebook)?;
    let analog = build_analog_precoder(&choices, bs_codebook);
    let colliding = colliding_users(&choices);
    let combiners: Vec<CVec> = choices
        .iter()
        .map(|c| ue_codebook.entries[c.ue_index].clone())
        .collect();

    let mut digital_precoders = Vec::with_capacity(k_total);
    let mut power_scales = Vec::with_capacity(k_total);
    let mut rvq_index = Vec::new();
    let mut cqi_gain = Vec::new();

    for k in 0..k_total {
        let effs: Vec<EffectiveChannel> = (0..n_users)
            .map(|u| {
                let raw = effective_channel(&subs[u][k], &combiners[u], &analog);
                match feedback {
                    Feedback::Perfect => perfect_effective(&raw),
                    Feedback::Rvq { codebook, .. } => quantize_effective(&raw, codebook),
                }
            })
            .collect::<Result<_>>()?;
        let use_gain = match feedback {
            Feedback::Perfect => true,
            Feedback::Rvq { cqi_gain, .. } => cqi_gain,
        };
        let h_hat = assemble_feedback_matrix(&effs, use_gain);
        let mut f_bb = linear_digital_precoder(&h_hat, kind, snr, k_total, &colliding)?;
        let scale = normalize_power(&analog, &mut f_bb)?;
        digital_precoders.push(f_bb);
        power_scales.push(scale);
        if matches!(feedback, Feedback::Rvq { .. }) {
            rvq_index.push(effs.iter().map(|e| e.index.unwrap_or(0)).collect());
            cqi_gain.push(effs.iter().map(|e| e.gain).collect());
        }
    }

    Ok(PrecodingSolution {
        combiners,
        analog_precoder: analog,
        digital_precoders,
        power_scales,
        feedback: FeedbackRecord {
            ue_beam: choices.iter().map(|c| c.ue_index).collect(),
            bs_beam: choices.iter().map(|c| c.bs_index).collect(),
            stage1_objective: choices.iter().map(|c| c.objective).collect(),
            rvq_index,
            cqi_gain,
            digital_index: Vec::new(),
            training_slots: 0,
        },
    })
}

/// Best normalized candidate for one subcarrier: (index, scale, objective).
/// Candidates are evaluated power-normalized on the true channels.
fn best_digital_candidate(
    channels_k: &[&CMat],
    combiners: &[CVec],
    analog: &CMat,
    digital_cb: &DigitalCodebook,
    metric: SearchMetric,
    symbol_snr: f64,
) -> Result<(usize, f64, f64)> {
    let rows = metrics::effective_rows(channels_k, combiners, analog);
    let n_users = combiners.len() as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, cand) in digital_cb.entries.iter().enumerate() {
        let norm = crate::linalg::frobenius(&analog.dot(cand));
        // A candidate whose cascade carries (numerically) no transmit power is
        // not a usable precoder: when two users share a beam, an antisymmetric
        // candidate cancels exactly, and normalizing the float residue would
        // amplify rounding noise into fictitious gains.
        if norm <= 1e-9 * crate::linalg::frobenius(cand) {
            continue;
        }
        let scale = n_users.sqrt() / norm;
        let scaled = cand.mapv(|z| z * scale);
        let gains = metrics::gains_from_rows(&rows, &scaled);
        let objective = match metric {
            SearchMetric::SumRate => metrics::subcarrier_sum_rate(&gains, symbol_snr),
            SearchMetric::SumSinr => metrics::subcarrier_sum_sinr(&gains, symbol_snr),
        };
        if best.map_or(true, |(_, _, b)| objective > b) {
            best = Some((i, scale, objective));
        }
    }
    best.ok_or_else(|| Error::Empty("digital codebook".into()))
}

/// Full two-stage design with a per-subcarrier digital codebook search on
/// the true channels.
pub fn solve_codebook_search(
    subs: &[Vec<CMat>],
    ue_codebook: &Codebook,
    bs_codebook: &Codebook,
    digital_cb: &DigitalCodebook,
    metric: SearchMetric,
    snr: f64,
) -> Result<PrecodingSolution> {
    let (n_users, k_total) = validate_channels(subs)?;
    if digital_cb.entries[0].nrows() != n_users {
        return Err(Error::Dimension(format!(
            "digital codebook is for {} users, channel set has {n_users}",
            digital_cb.entries[0].nrows()
        )));
    }
    let choices = stage1_analog_search(subs, ue_codebook, bs_codebook)?;
    let analog = build_analog_precoder(&choices, bs_codebook);
    let combiners: Vec<CVec> = choices
        .iter()
        .map(|c| ue_codebook.entries[c.ue_index].clone())
        .collect();
    let symbol_snr = snr / (k_total * n_users) as f64;

    let mut digital_precoders = Vec::with_capacity(k_total);
    let mut power_scales = Vec::with_capacity(k_total);
    let mut digital_index = Vec::with_capacity(k_total);
    for k in 0..k_total {
        let channels_k: Vec<&CMat> = subs.iter().map(|c| &c[k]).collect();
        let (idx, scale, _) = best_digital_candidate(
            &channels_k,
            &combiners,
            &analog,
            digital_cb,
            metric,
            symbol_snr,
        )?;
        digital_precoders.push(digital_cb.entries[idx].mapv(|z| z * scale));
        power_scales.push(scale);
        digital_index.push(idx);
    }

    Ok(PrecodingSolution {
        combiners,
        analog_precoder: analog,
        digital_precoders,
        power_scales,
        feedback: FeedbackRecord {
            ue_beam: choices.iter().map(|c| c.ue_index).collect(),
            bs_beam: choices.iter().map(|c| c.bs_index).collect(),
            stage1_objective: choices.iter().map(|c| c.objective).collect(),
            rvq_index: Vec::new(),
            cqi_gain: Vec::new(),
            digital_index,
            training_slots: digital_cb.len(),
        },
    })
}

/// Joint benchmark: every per-user combiner choice × every per-user BS beam
/// × the best digital entry per subcarrier, maximizing the sum rate. The
/// total combination count must stay below `guard`.
pub fn solve_exhaustive(
    subs: &[Vec<CMat>],
    ue_codebook: &Codebook,
    bs_codebook: &Codebook,
    digital_cb: &DigitalCodebook,
    snr: f64,
    guard: u128,
) -> Result<PrecodingSolution> {
    let (n_users, k_total) = validate_channels(subs)?;
    let n_ue = ue_codebook.len() as u128;
    let n_bs = bs_codebook.len() as u128;
    let combinations = n_ue
        .checked_pow(n_users as u32)
        .and_then(|a| n_bs.checked_pow(n_users as u32).map(|b| (a, b)))
        .and_then(|(a, b)| a.checked_mul(b))
        .and_then(|ab| ab.checked_mul(digital_cb.len() as u128))
        .and_then(|abc| abc.checked_mul(k_total as u128))
        .ok_or(Error::SearchSpaceTooLarge { combinations: u128::MAX, guard })?;
    if combinations > guard {
        return Err(Error::SearchSpaceTooLarge { combinations, guard });
    }

    let symbol_snr = snr / (k_total * n_users) as f64;
    let mut best: Option<(f64, Vec<usize>, Vec<usize>, Vec<usize>, Vec<f64>)> = None;

    let mut ue_idx = vec![0usize; n_users];
    loop {
        let combiners: Vec<CVec> = ue_idx
            .iter()
            .map(|&i| ue_codebook.entries[i].clone())
            .collect();
        let mut bs_idx = vec![0usize; n_users];
        loop {
            let choices: Vec<BeamChoice> = bs_idx
                .iter()
                .zip(ue_idx.iter())
                .map(|(&b, &g)| BeamChoice { ue_index: g, bs_index: b, objective: 0.0 })
                .collect();
            let analog = build_analog_precoder(&choices, bs_codebook);

            let mut total = 0.0;
            let mut dig = Vec::with_capacity(k_total);
            let mut scales = Vec::with_capacity(k_total);
            for k in 0..k_total {
                let channels_k: Vec<&CMat> = subs.iter().map(|c| &c[k]).collect();
                let (idx, scale, obj) = best_digital_candidate(
                    &channels_k,
                    &combiners,
                    &analog,
                    digital_cb,
                    SearchMetric::SumRate,
                    symbol_snr,
                )?;
                total += obj;
                dig.push(idx);
                scales.push(scale);
            }
            if best.as_ref().map_or(true, |(b, ..)| total > *b) {
                best = Some((total, ue_idx.clone(), bs_idx.clone(), dig, scales));
            }

            // Odometer over BS beams, last user fastest.
            let mut pos = n_users;
            while pos > 0 {
                bs_idx[pos - 1] += 1;
                if bs_idx[pos - 1] < bs_codebook.len() {
                    break;
                }
                bs_idx[pos - 1] = 0;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
        let mut pos = n_users;
        while pos > 0 {
            ue_idx[pos - 1] += 1;
            if ue_idx[pos - 1] < ue_codebook.len() {
                break;
            }
            ue_idx[pos - 1] = 0;
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
    }

    let (_, ue_win, bs_win, dig_win, scale_win) =
        best.ok_or_else(|| Error::Empty("exhaustive search space".into()))?;
    let choices: Vec<BeamChoice> = bs_win
        .iter()
        .zip(ue_win.iter())
        .map(|(&b, &g)| BeamChoice { ue_index: g, bs_index: b, objective: 0.0 })
        .collect();
    let analog = build_analog_precoder(&choices, bs_codebook);
    let digital_precoders: Vec<CMat> = dig_win
        .iter()
        .zip(scale_win.iter())
        .map(|(&i, &s)| digital_cb.entries[i].mapv(|z| z * s))
        .collect();

    Ok(PrecodingSolution {
        combiners: ue_win.iter().map(|&i| ue_codebook.entries[i].clone()).collect(),
        analog_precoder: analog,
        digital_precoders,
        power_scales: scale_win,
        feedback: FeedbackRecord {
            ue_beam: ue_win,
            bs_beam: bs_win,
            stage1_objective: Vec::new(),
            rvq_index: Vec::new(),
            cqi_gain: Vec::new(),
            digital_index: dig_win,
            training_slots: 0,
        },
    })
}
