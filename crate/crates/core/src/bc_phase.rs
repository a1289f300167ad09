//! Relay broadcast of the chain and per-user zero-forcing detection.

use crate::channel::GaussianSource;
use crate::error::{Error, Result};
use crate::mac_phase::map_bits_bpsk;
use crate::numkernel::{invert, CMatrix, CVector, C64};

/// Random orthonormal columns scaled to `sqrt(snr / streams)`.
///
/// Columns come from modified Gram–Schmidt on a seeded complex Gaussian draw.
pub fn build_relay_precoder(seed: u64, antennas: usize, streams: usize, snr: f64) -> Result<CMatrix> {
    if streams == 0 || streams > antennas {
        return Err(Error::InvalidConfig(format!(
            "relay precoder needs 1 <= streams <= antennas (streams = {streams}, antennas = {antennas})"
        )));
    }
    let mut src = GaussianSource::new(seed);
    let gain = C64::new((snr / streams as f64).sqrt(), 0.0);
    'draw: loop {
        let mut basis: Vec<CVector> = Vec::with_capacity(streams);
        for _ in 0..streams {
            let mut v = src.complex_vector(antennas, 1.0);
            for q in &basis {
                v = &v - &q.scale(q.dot(&v));
            }
            match v.normalized() {
                Some(q) if v.norm() > 1e-8 => basis.push(q),
                _ => continue 'draw,
            }
        }
        return Ok(CMatrix::from_columns(&basis).scale(gain));
    }
}

/// Relay transmit vector `V · bpsk(bits)`.
pub fn relay_transmit(bits: &[bool], v: &CMatrix) -> CVector {
    v.mul_vec(&CVector::from_real(&map_bits_bpsk(bits)))
}

/// Zero-forcing receiver of one user, `Q = H_down · V`.
#[derive(Debug, Clone)]
pub struct UserDecoder {
    inverse: CMatrix,
}

impl UserDecoder {
    pub fn new(h_down: &CMatrix, v: &CMatrix) -> Result<Self> {
        let q = h_down.mul_mat(v);
        if !q.is_square() {
            return Err(Error::InvalidConfig(format!("user effective channel is {}x{}, not square", q.rows(), q.cols())));
        }
        Ok(Self { inverse: invert(&q)? })
    }

    pub fn equalize(&self, y: &CVector) -> CVector {
        self.inverse.mul_vec(y)
    }

    /// Sign decisions on `Re(Q⁻¹ y)`: positive → 0, otherwise 1.
    pub fn decode(&self, y: &CVector) -> Vec<bool> {
        self.equalize(y).iter().map(|z| z.re <= 0.0).collect()
    }
}

pub fn user_receive_decode(y: &CVector, h_down: &CMatrix, v: &CMatrix) -> Result<Vec<bool>> {
    Ok(UserDecoder::new(h_down, v)?.decode(y))
}
