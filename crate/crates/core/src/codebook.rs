//! Quantization codebooks: beamsteering (DFT-angle) vector codebooks for the
//! analog stage, random vector quantization for effective-channel feedback,
//! and a DFT-grid matrix codebook for the digital search stage.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::array_response;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};

/// Largest accepted codebook size exponent; 2^16 four-dimensional complex
/// entries is a few megabytes, anything beyond that is a config mistake.
pub const MAX_BITS: u32 = 16;

/// A finite set of unit-norm vectors indexed by feedback words.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub bits: u32,
    pub entries: Vec<CVec>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Beamsteering codebook: beams a(2π q / 2^bits) on the literal angle grid.
/// Grids nest when bits grow by one (the even-indexed beams of the finer
/// grid are exactly the coarser grid).
pub fn beamsteering_codebook(bits: u32, n_antennas: usize, spacing: f64) -> Result<Codebook> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::Codebook(format!("beamsteering bits {bits} outside 1..={MAX_BITS}")));
    }
    if n_antennas == 0 {
        return Err(Error::Codebook("need at least one antenna".into()));
    }
    let n_beams = 1usize << bits;
    let entries = (0..n_beams)
        .map(|q| {
            let angle = 2.0 * std::f64::consts::PI * q as f64 / n_beams as f64;
            array_response(angle, n_antennas, spacing)
        })
        .collect();
    Ok(Codebook { bits, entries })
}

/// Random vector quantization codebook: 2^bits isotropic unit vectors, drawn
/// from the given stream. Transmitter and receivers share the stream seed, so
/// both sides hold the same codebook without exchanging it.
pub fn rvq_codebook(bits: u32, dim: usize, rng: &mut impl Rng) -> Result<Codebook> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::Codebook(format!("rvq bits {bits} outside 1..={MAX_BITS}")));
    }
    if dim == 0 {
        return Err(Error::Codebook("rvq dimension must be positive".into()));
    }
    let n = 1usize << bits;
    let entries = (0..n)
        .map(|_| {
            let mut v = CVec::zeros(dim);
            loop {
                for z in v.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = Complex64::new(re, im);
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-30 {
                    v.mapv_inplace(|z| z / norm);
                    break;
                }
            }
            v
        })
        .collect();
    Ok(Codebook { bits, entries })
}

/// A finite set of U×U candidate digital precoders with unit-norm columns.
#[derive(Clone, Debug)]
pub struct DigitalCodebook {
    /// Effective bits: log2 of the entry count. When the requested bits are
    /// not a multiple of the user count the per-user grid floors, so this can
    /// be smaller than requested.
    pub bits: u32,
    pub entries: Vec<CMat>,
}

impl DigitalCodebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Matrix codebook for the digital stage: each candidate stacks U columns
/// drawn from a U-dimensional DFT phase grid of size 2^(bits/U), enumerated
/// lexicographically (first column most significant).
///
/// Grid vector q has entries exp(j 2π q (m+1) / G) / sqrt(U); starting the
/// phase ramp at exponent 1 keeps single-user grids distinct (U = 1 sweeps
/// the unit circle instead of collapsing to the constant beam).
pub fn digital_codebook(bits: u32, n_users: usize) -> Result<DigitalCodebook> {
    if n_users == 0 {
        return Err(Error::Codebook("need at least one user".into()));
    }
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::Codebook(format!("digital bits {bits} outside 1..={MAX_BITS}")));
    }
    let grid_bits = bits / n_users as u32;
    if grid_bits == 0 {
        return Err(Error::Codebook(format!(
            "digital bits {bits} too small for {n_users} users (per-user grid would be empty)"
        )));
    }
    let grid_size = 1usize << grid_bits;
    let scale = 1.0 / (n_users as f64).sqrt();
    let grid: Vec<CVec> = (0..grid_size)
        .map(|q| {
            CVec::from_shape_fn(n_users, |m| {
                let angle = 2.0 * std::f64::consts::PI * (q * (m + 1)) as f64 / grid_size as f64;
                Complex64::from_polar(scale, angle)
            })
        })
        .collect();

    let effective_bits = grid_bits * n_users as u32;
    let count = 1usize << effective_bits;
    let mut entries = Vec::with_capacity(count);
    for idx in 0..count {
        let mut m = CMat::zeros((n_users, n_users));
        // Decode idx as base-grid_size digits, first column most significant.
        let mut rem = idx;
        for col in (0..n_users).rev() {
            let q = rem % grid_size;
            rem /= grid_size;
            for row in 0..n_users {
                m[(row, col)] = grid[q][row];
            }
        }
        entries.push(m);
    }
    Ok(DigitalCodebook { bits: effective_bits, entries })
}
