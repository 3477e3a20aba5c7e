//! Unitary OFDM modulation with a cyclic prefix.
//!
//! Transforms are the unitary DFT pair (1/sqrt(K) scaling both ways), so
//! symbol energy and noise variance are identical in both domains. The
//! direct O(K²) evaluation with precomputed twiddles is plenty for the
//! subcarrier counts used here.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Ofdm {
    n_subcarriers: usize,
    cp_len: usize,
    /// twiddles[i] = exp(-j 2π i / K), indexed modulo K.
    twiddles: Vec<Complex64>,
}

impl Ofdm {
    pub fn new(n_subcarriers: usize, cp_len: usize) -> Result<Ofdm> {
        if n_subcarriers == 0 {
            return Err(Error::Config("need at least one subcarrier".into()));
        }
        if cp_len >= n_subcarriers {
            return Err(Error::Config(format!(
                "cyclic prefix {cp_len} must be shorter than the symbol {n_subcarriers}"
            )));
        }
        let twiddles = (0..n_subcarriers)
            .map(|i| {
                Complex64::from_polar(
                    1.0,
                    -std::f64::consts::TAU * i as f64 / n_subcarriers as f64,
                )
            })
            .collect();
        Ok(Ofdm { n_subcarriers, cp_len, twiddles })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// Samples per transmitted symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// Frequency-domain symbols -> time-domain samples with cyclic prefix.
    pub fn modulate(&self, freq: &[Complex64]) -> Result<Vec<Complex64>> {
        let k_total = self.n_subcarriers;
        if freq.len() != k_total {
            return Err(Error::Dimension(format!(
                "expected {k_total} subcarrier symbols, got {}",
                freq.len()
            )));
        }
        let scale = 1.0 / (k_total as f64).sqrt();
        let mut body = vec![Complex64::ZERO; k_total];
        for (n, out) in body.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (k, x) in freq.iter().enumerate() {
                // Inverse transform: conjugated twiddle.
                acc += x * self.twiddles[n * k % k_total].conj();
            }
            *out = acc * scale;
        }
        let mut time = Vec::with_capacity(self.symbol_len());
        time.extend_from_slice(&body[k_total - self.cp_len..]);
        time.extend_from_slice(&body);
        Ok(time)
    }

    /// Time-domain samples (with prefix) -> frequency-domain symbols.
    pub fn demodulate(&self, time: &[Complex64]) -> Result<Vec<Complex64>> {
        let k_total = self.n_subcarriers;
        if time.len() != self.symbol_len() {
            return Err(Error::Dimension(format!(
                "expected {} time samples, got {}",
                self.symbol_len(),
                time.len()
            )));
        }
        let body = &time[self.cp_len..];
        let scale = 1.0 / (k_total as f64).sqrt();
        let mut freq = vec![Complex64::ZERO; k_total];
        for (k, out) in freq.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (n, x) in body.iter().enumerate() {
                acc += x * self.twiddles[n * k % k_total];
            }
            *out = acc * scale;
        }
        Ok(freq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symbols(k: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn modulate_then_demodulate_is_identity() {
        let ofdm = Ofdm::new(16, 4).unwrap();
        let freq = random_symbols(16, 1);
        let time = ofdm.modulate(&freq).unwrap();
        assert_eq!(time.len(), 20);
        let back = ofdm.demodulate(&time).unwrap();
        for (a, b) in back.iter().zip(freq.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn transform_preserves_energy() {
        let ofdm = Ofdm::new(32, 8).unwrap();
        let freq = random_symbols(32, 2);
        let time = ofdm.modulate(&freq).unwrap();
        let freq_energy: f64 = freq.iter().map(|z| z.norm_sqr()).sum();
        let body_energy: f64 = time[8..].iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(freq_energy, body_energy, epsilon = 1e-12 * freq_energy);
    }

    #[test]
    fn prefix_copies_the_symbol_tail() {
        let ofdm = Ofdm::new(16, 4).unwrap();
        let time = ofdm.modulate(&random_symbols(16, 3)).unwrap();
        for i in 0..4 {
            assert_eq!(time[i], time[16 + i]);
        }
    }

    #[test]
    fn single_tone_becomes_a_complex_exponential() {
        let k_total = 16;
        let ofdm = Ofdm::new(k_total, 4).unwrap();
        let tone = 5;
        let mut freq = vec![Complex64::ZERO; k_total];
        freq[tone] = Complex64::new(1.0, 0.0);
        let time = ofdm.modulate(&freq).unwrap();
        let scale = 1.0 / (k_total as f64).sqrt();
        for n in 0..k_total {
            let want = Complex64::from_polar(
                scale,
                std::f64::consts::TAU * (tone * n) as f64 / k_total as f64,
            );
            assert_abs_diff_eq!(time[4 + n].re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(time[4 + n].im, want.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn prefix_turns_a_short_fir_channel_into_per_subcarrier_gains() {
        // The property the frequency-domain equalizer relies on: convolving
        // the prefixed waveform with an FIR shorter than the prefix, then
        // demodulating, multiplies each subcarrier by the channel's DFT.
        let k_total = 16;
        let cp = 4;
        let ofdm = Ofdm::new(k_total, cp).unwrap();
        let freq = random_symbols(k_total, 4);
        let time = ofdm.modulate(&freq).unwrap();
        let taps = [
            Complex64::new(0.9, 0.1),
            Complex64::new(-0.3, 0.4),
            Complex64::new(0.1, -0.2),
        ];
        // Linear convolution starting from zero history.
        let mut rx = vec![Complex64::ZERO; time.len()];
        for (n, out) in rx.iter_mut().enumerate() {
            for (l, h) in taps.iter().enumerate() {
                if n >= l {
                    *out += h * time[n - l];
                }
            }
        }
        let got = ofdm.demodulate(&rx).unwrap();
        for k in 0..k_total {
            let mut gain = Complex64::ZERO;
            for (l, h) in taps.iter().enumerate() {
                gain += h
                    * Complex64::from_polar(
                        1.0,
                        -std::f64::consts::TAU * (k * l) as f64 / k_total as f64,
                    );
            }
            let want = freq[k] * gain;
            assert_abs_diff_eq!(got[k].re, want.re, epsilon = 1e-10);
            assert_abs_diff_eq!(got[k].im, want.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn degenerate_shapes_are_rejected() {
        assert!(Ofdm::new(0, 0).is_err());
        assert!(Ofdm::new(8, 8).is_err());
        let ofdm = Ofdm::new(8, 2).unwrap();
        assert!(ofdm.modulate(&random_symbols(7, 5)).is_err());
        assert!(ofdm.demodulate(&random_symbols(9, 6)).is_err());
    }
}
