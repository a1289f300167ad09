//! Time-division baseline: one user at a time, `2K` slots per exchange.
//!
//! In round `i` user `i` sends `M` BPSK streams at power `SNR/M` each straight
//! out of its antennas; the relay zero-forces, hard-decides, and multicasts
//! the same streams through a scaled orthonormal precoder; every other user
//! zero-forces its own downlink.

use std::fmt;

use crate::bc_phase::{relay_transmit, UserDecoder};
use crate::channel::{GaussianSource, NetworkRealization};
use crate::decryption::DecodedSet;
use crate::error::{Error, Result};
use crate::mac_phase::{map_bits_bpsk, Message};
use crate::metrics::{stream_rates_bc, zf_stream_rates};
use crate::numkernel::{invert, CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Uplink { user: usize },
    Broadcast { source: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TdmaSchedule {
    pub users: usize,
    pub streams: usize,
}

impl TdmaSchedule {
    pub fn slots(&self) -> Vec<Slot> {
        (0..self.users)
            .flat_map(|i| [Slot::Uplink { user: i }, Slot::Broadcast { source: i }])
            .collect()
    }

    pub fn slot_count(&self) -> usize {
        2 * self.users
    }
}

/// Reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
}

impl Fraction {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "zero denominator");
        let g = gcd(numerator, denominator);
        Self { numerator: numerator / g, denominator: denominator / g }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// `K·M / 2K`.
pub fn tdma_dof_closed_form(users: usize, antennas: usize) -> Fraction {
    Fraction::new((users * antennas) as u64, (2 * users) as u64)
}

/// `K / 2` for the aligned scheme with `M = K - 1`.
pub fn aligned_dof_closed_form(users: usize) -> Fraction {
    Fraction::new(users as u64, 2)
}

/// Per-stream rates of one TDMA exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct TdmaRates {
    /// `[source][stream]` relay-side rates.
    pub mac: Vec<Vec<f64>>,
    /// `[user][stream]` broadcast rates (the relay precoder is shared by all rounds).
    pub bc: Vec<Vec<f64>>,
}

impl TdmaRates {
    /// `R_i = (1 / 2K) · Σ_k min(mac_{i,k}, min_{j≠i} bc_{j,k})`.
    pub fn multicast_rates(&self) -> Vec<f64> {
        let k = self.mac.len();
        (0..k)
            .map(|i| {
                let total: f64 = self.mac[i]
                    .iter()
                    .enumerate()
                    .map(|(s, &m)| (0..k).filter(|&j| j != i).map(|j| self.bc[j][s]).fold(m, f64::min))
                    .sum();
                total / (2 * k) as f64
            })
            .collect()
    }

    pub fn sum_rate(&self) -> f64 {
        self.multicast_rates().iter().sum()
    }
}

/// Stream rates for a TDMA exchange; `v` is the relay precoder already scaled to `snr`.
pub fn tdma_rates(net: &NetworkRealization, snr: f64, noise_variance: f64, v: &CMatrix) -> Result<TdmaRates> {
    let per_stream = snr / net.antennas as f64;
    let mac = net
        .uplink
        .iter()
        .map(|h| zf_stream_rates(h, per_stream, noise_variance))
        .collect::<Result<Vec<_>>>()?;
    let bc = net
        .downlink
        .iter()
        .map(|g| stream_rates_bc(&g.mul_mat(v), noise_variance))
        .collect::<Result<Vec<_>>>()?;
    Ok(TdmaRates { mac, bc })
}

#[derive(Debug, Clone)]
pub struct TdmaOutcome {
    pub decoded: Vec<DecodedSet>,
    pub rates: TdmaRates,
    pub slots_used: usize,
}

/// Runs one full TDMA exchange of `messages`.
///
/// `v` is the relay's `M × M` precoder scaled to `snr`; noise is CN(0, `noise_variance`)
/// drawn from `noise_seed`.
pub fn tdma_run(
    net: &NetworkRealization,
    snr: f64,
    noise_variance: f64,
    v: &CMatrix,
    messages: &[Message],
    noise_seed: u64,
) -> Result<TdmaOutcome> {
    let k = net.users;
    let m = net.antennas;
    if messages.len() != k {
        return Err(Error::LengthMismatch { expected: k, found: messages.len() });
    }
    let len = messages[0].len();
    if let Some(bad) = messages.iter().find(|w| w.len() != len) {
        return Err(Error::LengthMismatch { expected: len, found: bad.len() });
    }
    if v.rows() != m || v.cols() != m {
        return Err(Error::InvalidConfig(format!("relay precoder must be {m}x{m}")));
    }

    let amp = C64::new((snr / m as f64).sqrt(), 0.0);
    let epochs = len.div_ceil(m);
    let user_decoders = net.downlink.iter().map(|g| UserDecoder::new(g, v)).collect::<Result<Vec<_>>>()?;
    let mut noise = GaussianSource::new(noise_seed);
    let mut draw = |dim: usize| {
        if noise_variance == 0.0 {
            CVector::zeros(dim)
        } else {
            noise.complex_vector(dim, noise_variance)
        }
    };

    // received[j][i] accumulates user j's estimate of message i.
    let mut received: Vec<Vec<Vec<bool>>> = vec![vec![Vec::with_capacity(epochs * m); k]; k];
    let schedule = TdmaSchedule { users: k, streams: m };
    let mut slots_used = 0;
    for slot in schedule.slots() {
        slots_used += 1;
        let Slot::Uplink { user: i } = slot else { continue };
        let relay_inverse = invert(&net.uplink[i])?;
        let mut relay_bits = Vec::with_capacity(epochs * m);
        for t in 0..epochs {
            let chunk: Vec<bool> = (0..m).map(|s| messages[i].bits.get(t * m + s).copied().unwrap_or(false)).collect();
            let x = CVector::from_real(&map_bits_bpsk(&chunk)).scale(amp);
            let y = &net.uplink[i].mul_vec(&x) + &draw(m);
            relay_bits.extend(relay_inverse.mul_vec(&y).iter().map(|z| z.re <= 0.0));
        }
        // The matching broadcast slot follows.
        for t in 0..epochs {
            let x = relay_transmit(&relay_bits[t * m..(t + 1) * m], v);
            for (j, dec) in user_decoders.iter().enumerate() {
                let y = &net.downlink[j].mul_vec(&x) + &draw(m);
                if j != i {
                    received[j][i].extend(dec.decode(&y));
                }
            }
        }
    }

    let decoded = received
        .into_iter()
        .enumerate()
        .map(|(owner, row)| DecodedSet {
            owner,
            recovered: row
                .into_iter()
                .enumerate()
                .filter(|(src, _)| *src != owner)
                .map(|(src, mut bits)| {
                    bits.truncate(len);
                    (src, Message::new(bits))
                })
                .collect(),
        })
        .collect();
    Ok(TdmaOutcome { decoded, rates: tdma_rates(net, snr, noise_variance, v)?, slots_used })
}
