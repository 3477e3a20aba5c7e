//! Gray-mapped QPSK with exact per-rail soft demodulation.
//!
//! Bit pairs map as (b0, b1) -> ((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2): the
//! first bit rides the imaginary rail, the second the real rail. Because the
//! rails are independent, the per-rail LLR 4 a r / v is the exact
//! log-likelihood ratio, not just its max-log approximation.

use num_complex::Complex64;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Unit-energy constellation point for one bit pair.
pub fn symbol(b0: u8, b1: u8) -> Complex64 {
    Complex64::new(
        (1.0 - 2.0 * (b1 & 1) as f64) * FRAC_1_SQRT_2,
        (1.0 - 2.0 * (b0 & 1) as f64) * FRAC_1_SQRT_2,
    )
}

/// Map a bit string (even length) onto unit-energy symbols.
pub fn modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "qpsk needs an even bit count, got {}",
            bits.len()
        )));
    }
    Ok(bits.chunks_exact(2).map(|p| symbol(p[0], p[1])).collect())
}

/// Exact LLRs (positive favors bit 0) for one received sample, given the
/// per-rail signal amplitude `rail_amp` and the total complex noise variance
/// `noise_var`. Returns (llr of b0, llr of b1).
pub fn llrs(received: Complex64, rail_amp: f64, noise_var: f64) -> (f64, f64) {
    let s = 4.0 * rail_amp / noise_var;
    (s * received.im, s * received.re)
}

/// Minimum-distance hard decision.
pub fn hard_decision(received: Complex64) -> (u8, u8) {
    ((received.im < 0.0) as u8, (received.re < 0.0) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constellation_matches_the_gray_table() {
        let r = FRAC_1_SQRT_2;
        assert_eq!(symbol(0, 0), Complex64::new(r, r));
        assert_eq!(symbol(0, 1), Complex64::new(-r, r));
        assert_eq!(symbol(1, 1), Complex64::new(-r, -r));
        assert_eq!(symbol(1, 0), Complex64::new(r, -r));
    }

    #[test]
    fn every_symbol_has_unit_energy() {
        for b0 in 0..2u8 {
            for b1 in 0..2u8 {
                assert_abs_diff_eq!(symbol(b0, b1).norm_sqr(), 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn neighboring_points_differ_in_one_bit() {
        // Walk the constellation circle; Gray labeling changes one bit per step.
        let order = [(0u8, 0u8), (0, 1), (1, 1), (1, 0)];
        for i in 0..4 {
            let (a0, a1) = order[i];
            let (b0, b1) = order[(i + 1) % 4];
            let flips = (a0 ^ b0) + (a1 ^ b1);
            assert_eq!(flips, 1);
            // And they really are angular neighbors.
            let ang = symbol(a0, a1).arg() - symbol(b0, b1).arg();
            let wrapped = (ang.abs() + 1e-12) % std::f64::consts::TAU;
            assert_abs_diff_eq!(
                wrapped.min(std::f64::consts::TAU - wrapped),
                std::f64::consts::FRAC_PI_2,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn modulate_then_hard_decide_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits: Vec<u8> = (0..256).map(|_| rng.random_range(0..2)).collect();
        let symbols = modulate(&bits).unwrap();
        for (i, s) in symbols.iter().enumerate() {
            let (b0, b1) = hard_decision(*s);
            assert_eq!((b0, b1), (bits[2 * i], bits[2 * i + 1]));
        }
        assert!(modulate(&[1, 0, 1]).is_err());
    }

    #[test]
    fn llr_signs_follow_the_transmitted_bits() {
        let amp = 0.8;
        for b0 in 0..2u8 {
            for b1 in 0..2u8 {
                let rx = symbol(b0, b1) * (amp * 2f64.sqrt());
                let (l0, l1) = llrs(rx, amp, 0.5);
                assert!(if b0 == 0 { l0 > 0.0 } else { l0 < 0.0 });
                assert!(if b1 == 0 { l1 > 0.0 } else { l1 < 0.0 });
            }
        }
    }

    #[test]
    fn llr_equals_the_exact_four_point_ratio() {
        // Exact LLR from the full constellation sum:
        //   ln Σ_{s: bit=0} exp(-|r - A s|²/v) - ln Σ_{s: bit=1} ...
        // with A the symbol amplitude and v the complex noise variance.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let amp_sym = 1.3; // symbol amplitude, rail amplitude is amp/√2
        let v = 0.7;
        for _ in 0..50 {
            let r = Complex64::new(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0);
            let metric = |b0: u8, b1: u8| (-(r - symbol(b0, b1) * amp_sym).norm_sqr() / v).exp();
            let exact0 = ((metric(0, 0) + metric(0, 1)) / (metric(1, 0) + metric(1, 1))).ln();
            let exact1 = ((metric(0, 0) + metric(1, 0)) / (metric(0, 1) + metric(1, 1))).ln();
            let (l0, l1) = llrs(r, amp_sym * FRAC_1_SQRT_2, v);
            assert_abs_diff_eq!(l0, exact0, epsilon = 1e-9 * exact0.abs().max(1.0));
            assert_abs_diff_eq!(l1, exact1, epsilon = 1e-9 * exact1.abs().max(1.0));
        }
    }
}
