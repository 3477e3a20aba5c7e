//! Doubly selective cluster/ray channel model.
//!
//! A realization is a sum over clusters and rays of complex gains attached to
//! transmit/receive array responses, shaped in delay by a truncated
//! raised-cosine pulse and rotated in time by a per-cluster Doppler phase.
//! Taps are normalized per realization so the expected subcarrier energy is
//! `n_rx * n_tx`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{outer, CMat, CVec};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Raised-cosine pulse support, in units of the sample interval, on each side
/// of the peak. Cluster delays are confined so the truncated pulse never
/// spills outside the tap window.
pub const PULSE_HALF_WIDTH: f64 = 4.0;

/// Static link geometry from which channel realizations are drawn.
#[derive(Clone, Debug)]
pub struct ChannelGeometry {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_clusters: usize,
    pub rays_per_cluster: usize,
    /// Standard deviation of the Laplacian ray angle offsets, radians.
    pub angular_spread_rad: f64,
    /// Number of delay taps L.
    pub n_taps: usize,
    /// Sample interval in seconds (1 / bandwidth).
    pub sample_interval_s: f64,
    pub carrier_hz: f64,
    /// Receiver speed in m/s.
    pub velocity_mps: f64,
    /// Raised-cosine roll-off in [0, 1].
    pub rolloff: f64,
    /// Antenna spacing over wavelength (0.5 for half-wavelength ULAs).
    pub antenna_spacing: f64,
}

impl ChannelGeometry {
    /// Largest per-cluster Doppler phase increment magnitude, radians/sample.
    pub fn max_doppler(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.carrier_hz * self.velocity_mps
            * self.sample_interval_s
            / SPEED_OF_LIGHT
    }
}

#[derive(Clone, Debug)]
pub struct Ray {
    pub gain: Complex64,
    /// Excess delay relative to the cluster mean, seconds.
    pub delay_s: f64,
    pub aoa_offset_rad: f64,
    pub aod_offset_rad: f64,
}

#[derive(Clone, Debug)]
pub struct Cluster {
    /// Mean delay, seconds.
    pub delay_s: f64,
    pub aoa_rad: f64,
    pub aod_rad: f64,
    /// Doppler phase increment, radians per sample.
    pub doppler: f64,
    pub rays: Vec<Ray>,
}

/// One random draw of cluster/ray parameters for a single link.
#[derive(Clone, Debug)]
pub struct ClusterRayParams {
    pub clusters: Vec<Cluster>,
}

/// Uniform linear array response, entry m = exp(j 2π (d/λ) m sin θ) / sqrt(N).
pub fn array_response(angle_rad: f64, n_antennas: usize, spacing: f64) -> CVec {
    let scale = 1.0 / (n_antennas as f64).sqrt();
    let step = 2.0 * std::f64::consts::PI * spacing * angle_rad.sin();
    CVec::from_shape_fn(n_antennas, |m| {
        Complex64::from_polar(scale, step * m as f64)
    })
}

/// Raised-cosine pulse, time in units of the sample interval. The removable
/// singularity at |2βt| = 1 takes its limit value (π/4)·sinc(t).
pub fn raised_cosine(t: f64, rolloff: f64) -> f64 {
    let sinc = if t.abs() < 1e-12 {
        1.0
    } else {
        (std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t)
    };
    let denom = 1.0 - (2.0 * rolloff * t).powi(2);
    if denom.abs() < 1e-9 {
        std::f64::consts::FRAC_PI_4 * sinc
    } else {
        sinc * (std::f64::consts::PI * rolloff * t).cos() / denom
    }
}

fn laplace(rng: &mut impl Rng, std_dev: f64) -> f64 {
    if std_dev == 0.0 {
        return 0.0;
    }
    let scale = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    let mag = (1.0 - 2.0 * u.abs()).max(1e-300);
    -scale * u.signum() * mag.ln()
}

/// Draw cluster mean delays, angles, Doppler increments and per-ray gains,
/// excess delays and angle offsets.
///
/// Cluster delays are uniform on [0, (L-1-W)·T_s] with W the pulse half
/// width, ray excess delays uniform on [0, T_s], so the truncated pulse of
/// every ray is fully contained in the L-tap window. Rejects geometries whose
/// window would be negative.
pub fn sample_cluster_rays(geom: &ChannelGeometry, rng: &mut impl Rng) -> Result<ClusterRayParams> {
    if geom.n_clusters == 0 || geom.rays_per_cluster == 0 {
        return Err(Error::Channel("need at least one cluster and one ray".into()));
    }
    let ts = geom.sample_interval_s;
    let window_taps = geom.n_taps as f64 - 1.0 - PULSE_HALF_WIDTH;
    if window_taps < 0.0 {
        return Err(Error::Channel(format!(
            "tap count {} cannot contain the pulse support (need at least {})",
            geom.n_taps,
            PULSE_HALF_WIDTH as usize + 1
        )));
    }
    let max_doppler = geom.max_doppler();
    let gain_std = (0.5 / (geom.n_clusters * geom.rays_per_cluster) as f64).sqrt();
    let half_pi = std::f64::consts::FRAC_PI_2;

    let clusters = (0..geom.n_clusters)
        .map(|_| {
            let delay_s = if window_taps > 0.0 {
                rng.random_range(0.0..window_taps * ts)
            } else {
                0.0
            };
            let aoa_rad = rng.random_range(-half_pi..half_pi);
            let aod_rad = rng.random_range(-half_pi..half_pi);
            let doppler = max_doppler * aoa_rad.sin();
            let rays = (0..geom.rays_per_cluster)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Ray {
                        gain: Complex64::new(re * gain_std, im * gain_std),
                        delay_s: rng.random_range(0.0..ts),
                        aoa_offset_rad: laplace(rng, geom.angular_spread_rad),
                        aod_offset_rad: laplace(rng, geom.angular_spread_rad),
                    }
                })
                .collect();
            Cluster { delay_s, aoa_rad, aod_rad, doppler, rays }
        })
        .collect();

    Ok(ClusterRayParams { clusters })
}

/// Pulse weights p[(c, r)][l] for every ray at every tap, truncated to the
/// pulse support, together with the normalization so expected tap energy over
/// the ray gains equals n_rx * n_tx.
fn pulse_weights(params: &ClusterRayParams, geom: &ChannelGeometry) -> Result<(Vec<Vec<Vec<f64>>>, f64)> {
    let ts = geom.sample_interval_s;
    let mut total = 0.0;
    let mut n_rays = 0usize;
    let mut weights = Vec::with_capacity(params.clusters.len());
    for cl in &params.clusters {
        let mut per_ray = Vec::with_capacity(cl.rays.len());
        for ray in &cl.rays {
            n_rays += 1;
            let mut taps = Vec::with_capacity(geom.n_taps);
            for l in 0..geom.n_taps {
                let t = (l as f64 * ts - cl.delay_s - ray.delay_s) / ts;
                let p = if t.abs() > PULSE_HALF_WIDTH {
                    0.0
                } else {
                    raised_cosine(t, geom.rolloff)
                };
                total += p * p;
                taps.push(p);
            }
            per_ray.push(taps);
        }
        weights.push(per_ray);
    }

    let gamma = total / n_rays.max(1) as f64;
    if !(gamma > 0.0) {
        return Err(Error::Channel("no pulse energy falls inside the tap window".into()));
    }
    Ok((weights, gamma))
}

/// Per-cluster static tap matrices (normalization applied, Doppler excluded).
/// Summing over clusters with phase exp(jω_c l) gives the design-domain taps;
/// with phase exp(jω_c n) it gives the channel at absolute sample n.
pub fn per_cluster_taps(params: &ClusterRayParams, geom: &ChannelGeometry) -> Result<Vec<Vec<CMat>>> {
    let (weights, gamma) = pulse_weights(params, geom)?;
    let scale = ((geom.n_rx * geom.n_tx) as f64 / gamma).sqrt();
    let taps = params
        .clusters
        .iter()
        .enumerate()
        .map(|(ci, cl)| {
            let mut cluster_taps = vec![CMat::zeros((geom.n_rx, geom.n_tx)); geom.n_taps];
            for (ri, ray) in cl.rays.iter().enumerate() {
                let a_rx = array_response(cl.aoa_rad + ray.aoa_offset_rad, geom.n_rx, geom.antenna_spacing);
                let a_tx = array_response(cl.aod_rad + ray.aod_offset_rad, geom.n_tx, geom.antenna_spacing);
                let steer = outer(&a_rx, &a_tx);
                for (l, tap) in cluster_taps.iter_mut().enumerate() {
                    let w = weights[ci][ri][l];
                    if w != 0.0 {
                        let g = ray.gain * scale * w;
                        tap.zip_mut_with(&steer, |t, s| *t += g * s);
                    }
                }
            }
            cluster_taps
        })
        .collect();
    Ok(taps)
}

/// Delay-tap matrices H[l], with the per-cluster Doppler phase attached to
/// the tap index (the block-fading convention used for precoder design and
/// frequency-domain metrics).
pub fn generate_taps(params: &ClusterRayParams, geom: &ChannelGeometry) -> Result<Vec<CMat>> {
    let cluster_taps = per_cluster_taps(params, geom)?;
    let mut taps = vec![CMat::zeros((geom.n_rx, geom.n_tx)); geom.n_taps];
    for (cl, ctaps) in params.clusters.iter().zip(cluster_taps.iter()) {
        for (l, tap) in ctaps.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, cl.doppler * l as f64);
            taps[l].zip_mut_with(tap, |t, s| *t += phase * s);
        }
    }
    Ok(taps)
}

/// Subcarrier responses H[k] = Σ_l H[l] exp(-j 2π k l / K), k = 0..K-1.
pub fn taps_to_subcarriers(taps: &[CMat], n_subcarriers: usize) -> Result<Vec<CMat>> {
    if taps.is_empty() {
        return Err(Error::Empty("taps".into()));
    }
    if n_subcarriers == 0 {
        return Err(Error::Dimension("need at least one subcarrier".into()));
    }
    let dims = taps[0].dim();
    let mut out = Vec::with_capacity(n_subcarriers);
    for k in 0..n_subcarriers {
        let mut h = CMat::zeros(dims);
        for (l, tap) in taps.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (k as f64) * (l as f64) / n_subcarriers as f64;
            let w = Complex64::from_polar(1.0, angle);
            h.zip_mut_with(tap, |acc, t| *acc += w * t);
        }
        out.push(h);
    }
    Ok(out)
}

/// One user's channel draw: parameters plus derived tap and subcarrier forms.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub params: ClusterRayParams,
    pub taps: Vec<CMat>,
    pub subcarriers: Vec<CMat>,
}

impl ChannelRealization {
    pub fn draw(geom: &ChannelGeometry, n_subcarriers: usize, rng: &mut impl Rng) -> Result<Self> {
        let params = sample_cluster_rays(geom, rng)?;
        let taps = generate_taps(&params, geom)?;
        let subcarriers = taps_to_subcarriers(&taps, n_subcarriers)?;
        Ok(ChannelRealization { params, taps, subcarriers })
    }
}

/// Pass transmit samples (n_tx × n) through the time-varying channel: each
/// cluster's contribution rotates by exp(jω_c n) at output sample n. Additive
/// noise is CN(0, noise_std²) per receive antenna per sample.
pub fn apply_time_varying_channel(
    params: &ClusterRayParams,
    geom: &ChannelGeometry,
    tx: &CMat,
    noise_std: f64,
    rng: &mut impl Rng,
) -> Result<CMat> {
    if tx.nrows() != geom.n_tx {
        return Err(Error::Dimension(format!(
            "tx has {} rows, geometry expects {}",
            tx.nrows(),
            geom.n_tx
        )));
    }
    let cluster_taps = per_cluster_taps(params, geom)?;
    let n = tx.ncols();
    let mut rx = CMat::zeros((geom.n_rx, n));

    for (cl, ctaps) in params.clusters.iter().zip(cluster_taps.iter()) {
        for sample in 0..n {
            let phase = Complex64::from_polar(1.0, cl.doppler * sample as f64);
            for (l, tap) in ctaps.iter().enumerate() {
                if l > sample {
                    break;
                }
                let x = tx.column(sample - l);
                for r in 0..geom.n_rx {
                    let mut acc = Complex64::ZERO;
                    for t in 0..geom.n_tx {
                        acc += tap[(r, t)] * x[t];
                    }
                    rx[(r, sample)] += phase * acc;
                }
            }
        }
    }

    if noise_std > 0.0 {
        let comp = noise_std / std::f64::consts::SQRT_2;
        for v in rx.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * comp, im * comp);
        }
    }
    Ok(rx)
}

/// Time-varying channel pre-projected through a receive combiner and the
/// frequency-flat analog precoder, so the waveform simulator convolves short
/// per-chain rows instead of full antenna matrices.
#[derive(Clone, Debug)]
pub struct ProjectedChannel {
    /// rows[c][l] is w^H · G_c[l] · F_RF, length n_chains.
    pub rows: Vec<Vec<CVec>>,
    pub doppler: Vec<f64>,
}

impl ProjectedChannel {
    pub fn new(
        params: &ClusterRayParams,
        geom: &ChannelGeometry,
        combiner: &CVec,
        analog_precoder: &CMat,
    ) -> Result<Self> {
        let cluster_taps = per_cluster_taps(params, geom)?;
        let n_chains = analog_precoder.ncols();
        let rows = cluster_taps
            .iter()
            .map(|ctaps| {
                ctaps
                    .iter()
                    .map(|tap| {
                        // w^H tap -> 1 x n_tx, then times F_RF -> 1 x n_chains
                        let mut row = CVec::zeros(n_chains);
                        for j in 0..n_chains {
                            let mut acc = Complex64::ZERO;
                            for t in 0..tap.ncols() {
                                let mut wt = Complex64::ZERO;
                                for r in 0..tap.nrows() {
                                    wt += combiner[r].conj() * tap[(r, t)];
                                }
                                acc += wt * analog_precoder[(t, j)];
                            }
                            row[j] = acc;
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        let doppler = params.clusters.iter().map(|c| c.doppler).collect();
        Ok(ProjectedChannel { rows, doppler })
    }

    /// Convolve chain samples (n_chains × n) into the combined scalar stream.
    pub fn apply(&self, chains: &CMat) -> Vec<Complex64> {
        let n = chains.ncols();
        let mut out = vec![Complex64::ZERO; n];
        for (ctaps, &omega) in self.rows.iter().zip(self.doppler.iter()) {
            for (sample, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::ZERO;
                for (l, row) in ctaps.iter().enumerate() {
                    if l > sample {
                        break;
                    }
                    let x = chains.column(sample - l);
                    for j in 0..row.len() {
                        acc += row[j] * x[j];
                    }
                }
                *o += Complex64::from_polar(1.0, omega * sample as f64) * acc;
            }
        }
        out
    }
}
