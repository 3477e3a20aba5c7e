//! Figures of merit: per-user spectral efficiency and SINR, outage
//! statistics, receiver power-consumption models, energy efficiency, and the
//! thermal noise floor.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::precoding::PrecodingSolution;

/// Post-combining effective row of one user at one subcarrier:
/// w^H · H · F_RF, length = number of RF chains.
pub fn effective_row(channel_k: &CMat, combiner: &CVec, analog: &CMat) -> CVec {
    let n_chains = analog.ncols();
    let mut row = CVec::zeros(n_chains);
    // w^H H first (1 × n_tx), then times F_RF.
    let mut wh = vec![Complex64::ZERO; channel_k.ncols()];
    for (t, acc) in wh.iter_mut().enumerate() {
        for rx in 0..channel_k.nrows() {
            *acc += combiner[rx].conj() * channel_k[(rx, t)];
        }
    }
    for j in 0..n_chains {
        let mut acc = Complex64::ZERO;
        for (t, w) in wh.iter().enumerate() {
            acc += w * analog[(t, j)];
        }
        row[j] = acc;
    }
    row
}

/// Stack of `effective_row` over users: U × n_chains.
pub fn effective_rows(channels_k: &[&CMat], combiners: &[CVec], analog: &CMat) -> CMat {
    let n_users = channels_k.len();
    let n_chains = analog.ncols();
    let mut rows = CMat::zeros((n_users, n_chains));
    for u in 0..n_users {
        let row = effective_row(channels_k[u], &combiners[u], analog);
        for j in 0..n_chains {
            rows[(u, j)] = row[j];
        }
    }
    rows
}

/// |row_u · f_n|^2 for every (user, stream) given precomputed effective rows.
pub fn gains_from_rows(rows: &CMat, digital: &CMat) -> Array2<f64> {
    let n_users = rows.nrows();
    let n_streams = digital.ncols();
    let mut gains = Array2::zeros((n_users, n_streams));
    for u in 0..n_users {
        for n in 0..n_streams {
            let mut g = Complex64::ZERO;
            for j in 0..rows.ncols() {
                g += rows[(u, j)] * digital[(j, n)];
            }
            gains[(u, n)] = g.norm_sqr();
        }
    }
    gains
}

/// |w_u^H H_u[k] F_RF f_n|^2 for every (user u, stream n) at one subcarrier.
/// `channels_k[u]` is user u's n_ue × n_bs response at this subcarrier.
pub fn link_gains(
    channels_k: &[&CMat],
    combiners: &[CVec],
    analog: &CMat,
    digital: &CMat,
) -> Array2<f64> {
    gains_from_rows(&effective_rows(channels_k, combiners, analog), digital)
}

/// SINR of user u at one subcarrier, with `symbol_snr` = ρ / (K·U·σ²).
pub fn subcarrier_sinr(gains: &Array2<f64>, symbol_snr: f64, user: usize) -> f64 {
    let n_streams = gains.ncols();
    let signal = symbol_snr * gains[(user, user)];
    let interference: f64 = (0..n_streams)
        .filter(|&n| n != user)
        .map(|n| symbol_snr * gains[(user, n)])
        .sum();
    signal / (interference + 1.0)
}

/// Σ_u log2(1 + SINR_u) at one subcarrier.
pub fn subcarrier_sum_rate(gains: &Array2<f64>, symbol_snr: f64) -> f64 {
    (0..gains.nrows())
        .map(|u| (1.0 + subcarrier_sinr(gains, symbol_snr, u)).log2())
        .sum()
}

/// Σ_u SINR_u at one subcarrier.
pub fn subcarrier_sum_sinr(gains: &Array2<f64>, symbol_snr: f64) -> f64 {
    (0..gains.nrows())
        .map(|u| subcarrier_sinr(gains, symbol_snr, u))
        .sum()
}

/// Spectral efficiency of one user in bits/s/Hz, averaged over subcarriers,
/// evaluated on that user's true subcarrier responses.
pub fn per_user_rate(
    channels_u: &[CMat],
    solution: &PrecodingSolution,
    user: usize,
    snr: f64,
) -> f64 {
    let k_total = channels_u.len();
    let n_users = solution.analog_precoder.ncols();
    let symbol_snr = snr / (k_total * n_users) as f64;
    let w = &solution.combiners[user];
    let mut rate = 0.0;
    for (k, h) in channels_u.iter().enumerate() {
        let gains = link_gains(
            &[h],
            std::slice::from_ref(w),
            &solution.analog_precoder,
            &solution.digital_precoders[k],
        );
        let signal = symbol_snr * gains[(0, user)];
        let interference: f64 = (0..n_users)
            .filter(|&n| n != user)
            .map(|n| symbol_snr * gains[(0, n)])
            .sum();
        rate += (1.0 + signal / (interference + 1.0)).log2();
    }
    rate / k_total as f64
}

/// Post-combining SINR of one user, averaged over subcarriers (linear scale).
pub fn per_user_sinr(
    channels_u: &[CMat],
    solution: &PrecodingSolution,
    user: usize,
    snr: f64,
) -> f64 {
    let k_total = channels_u.len();
    let n_users = solution.analog_precoder.ncols();
    let symbol_snr = snr / (k_total * n_users) as f64;
    let w = &solution.combiners[user];
    let mut acc = 0.0;
    for (k, h) in channels_u.iter().enumerate() {
        let gains = link_gains(
            &[h],
            std::slice::from_ref(w),
            &solution.analog_precoder,
            &solution.digital_precoders[k],
        );
        let signal = symbol_snr * gains[(0, user)];
        let interference: f64 = (0..n_users)
            .filter(|&n| n != user)
            .map(|n| symbol_snr * gains[(0, n)])
            .sum();
        acc += signal / (interference + 1.0);
    }
    acc / k_total as f64
}

/// Sum over users of `per_user_rate`.
pub fn sum_rate(channels: &[Vec<CMat>], solution: &PrecodingSolution, snr: f64) -> f64 {
    (0..channels.len())
        .map(|u| per_user_rate(&channels[u], solution, u, snr))
        .sum()
}

/// Fraction of samples strictly below the target.
pub fn outage_probability(samples: &[f64], target: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("outage samples".into()));
    }
    let below = samples.iter().filter(|&&x| x < target).count();
    Ok(below as f64 / samples.len() as f64)
}

/// Largest rate ζ whose empirical outage stays within ε: the order statistic
/// at index min(⌊ε·n⌋, n-1) of the ascending sample sort.
pub fn epsilon_rate(samples: &[f64], epsilon: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("epsilon-rate samples".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Config(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("rate samples must not be NaN"));
    let idx = ((epsilon * samples.len() as f64).floor() as usize).min(samples.len() - 1);
    Ok(sorted[idx])
}

/// Per-device power draw in watts.
#[derive(Clone, Debug, PartialEq)]
pub struct DevicePowers {
    pub lna: f64,
    pub splitter: f64,
    pub combiner: f64,
    pub phase_shifter: f64,
    pub mixer: f64,
    pub local_oscillator: f64,
    pub lowpass_filter: f64,
    pub baseband_amp: f64,
    pub adc: f64,
}

impl Default for DevicePowers {
    fn default() -> Self {
        DevicePowers {
            lna: 0.039,
            splitter: 0.0195,
            combiner: 0.0195,
            phase_shifter: 0.002,
            mixer: 0.0168,
            local_oscillator: 0.005,
            lowpass_filter: 0.014,
            baseband_amp: 0.005,
            adc: 0.25,
        }
    }
}

impl DevicePowers {
    /// One full RF chain: mixer + local oscillator + low-pass filter +
    /// baseband amplifier.
    pub fn rf_chain(&self) -> f64 {
        self.mixer + self.local_oscillator + self.lowpass_filter + self.baseband_amp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Architecture {
    AnalogCombining,
    DigitalCombining,
    HybridCombining,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connection {
    Fully,
    Partially,
}

/// Receiver power-consumption model.
#[derive(Clone, Debug)]
pub struct PowerModel {
    pub architecture: Architecture,
    pub connection: Connection,
    pub n_antennas: usize,
    pub n_chains: usize,
    pub devices: DevicePowers,
}

impl PowerModel {
    /// Total consumed power in watts.
    pub fn total(&self) -> Result<f64> {
        if self.n_antennas == 0 {
            return Err(Error::Config("power model needs at least one antenna".into()));
        }
        let d = &self.devices;
        let n = self.n_antennas as f64;
        let total = match self.architecture {
            Architecture::AnalogCombining => {
                n * (d.lna + d.phase_shifter) + d.rf_chain() + d.combiner + 2.0 * d.adc
            }
            Architecture::DigitalCombining => n * (d.lna + d.rf_chain() + 2.0 * d.adc),
            Architecture::HybridCombining => {
                if self.n_chains == 0 {
                    return Err(Error::Config("hybrid power model needs at least one chain".into()));
                }
                let n_rf = self.n_chains as f64;
                let n_ps = match self.connection {
                    Connection::Fully => n * n_rf,
                    Connection::Partially => n,
                };
                n * (d.lna + d.splitter)
                    + n_ps * d.phase_shifter
                    + n_rf * (d.rf_chain() + d.combiner + 2.0 * d.adc)
            }
        };
        Ok(total)
    }
}

/// Energy efficiency in bits/s/Hz per watt.
pub fn energy_efficiency(sum_rate: f64, total_power_w: f64) -> Result<f64> {
    if !(total_power_w > 0.0) {
        return Err(Error::Config(format!("total power {total_power_w} must be positive")));
    }
    Ok(sum_rate / total_power_w)
}

/// Thermal noise floor in dBm for the given bandwidth.
pub fn noise_floor_dbm(bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::Config(format!("bandwidth {bandwidth_hz} must be positive")));
    }
    Ok(-173.8 + 10.0 * bandwidth_hz.log10())
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
