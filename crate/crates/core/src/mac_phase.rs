//! Uplink superposition, relay zero forcing, and PNC demapping.

use std::fmt;
use std::ops::BitXor;

use crate::alignment::PrecoderSet;
use crate::channel::NetworkRealization;
use crate::error::{Error, Result};
use crate::numkernel::{invert, CMatrix, CVector, C64};

/// Uncoded payload of one user.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    pub bits: Vec<bool>,
}

impl Message {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Self {
        Self { bits: s.chars().map(|c| c == '1').collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bitwise XOR; panics on unequal lengths.
    pub fn xor(&self, other: &Message) -> Message {
        assert_eq!(self.len(), other.len(), "XOR of unequal-length messages");
        Message { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect() }
    }

    pub fn hamming_distance(&self, other: &Message) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

impl BitXor for &Message {
    type Output = Message;
    fn bitxor(self, rhs: &Message) -> Message {
        self.xor(rhs)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The relay's network code chain: word `l` is `W_l ⊕ W_{l+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedChain {
    pub words: Vec<Message>,
}

impl EncryptedChain {
    /// XORs adjacent messages. Panics if lengths differ.
    pub fn from_messages(messages: &[Message]) -> Self {
        Self { words: messages.windows(2).map(|w| &w[0] ^ &w[1]).collect() }
    }

    /// Assembles a chain from per-epoch bit tuples (`epochs[t][l]`).
    pub fn from_epochs(epochs: &[Vec<bool>], streams: usize) -> Self {
        let words = (0..streams).map(|l| Message::new(epochs.iter().map(|e| e[l]).collect())).collect();
        Self { words }
    }

    /// Number of users the chain connects.
    pub fn users(&self) -> usize {
        self.words.len() + 1
    }

    pub fn payload_bits(&self) -> usize {
        self.words.first().map_or(0, Message::len)
    }

    /// Bits of every word at one epoch.
    pub fn epoch(&self, t: usize) -> Vec<bool> {
        self.words.iter().map(|w| w.bits[t]).collect()
    }

    /// XOR of words `first..=last`.
    pub fn span_xor(&self, first: usize, last: usize) -> Message {
        self.words[first + 1..=last].iter().fold(self.words[first].clone(), |acc, w| &acc ^ w)
    }
}

/// Bit 0 maps to +1, bit 1 to −1.
pub fn map_bits_bpsk(bits: &[bool]) -> Vec<f64> {
    bits.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect()
}

/// Relay observation of one symbol epoch.
pub fn mac_transmit(net: &NetworkRealization, prec: &PrecoderSet, symbols: &[f64], noise: &CVector) -> CVector {
    assert_eq!(symbols.len(), net.users, "one symbol per user");
    assert_eq!(noise.dim(), net.antennas);
    net.uplink
        .iter()
        .zip(&prec.users)
        .zip(symbols)
        .fold(noise.clone(), |acc, ((h, p), &s)| &acc + &h.mul_vec(&p.combined()).scale(C64::new(s, 0.0)))
}

/// Relay-side effective channel with the aligned directions as columns.
pub fn effective_channel(prec: &PrecoderSet) -> CMatrix {
    CMatrix::from_columns(&prec.links)
}

/// Zero-forcing detector for the pairwise sums, reusable across epochs.
#[derive(Debug, Clone)]
pub struct RelayDecoder {
    pseudo_inverse: CMatrix,
}

impl RelayDecoder {
    pub fn new(u: &CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidConfig(format!(
                "relay effective channel must be square, got {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        Ok(Self { pseudo_inverse: invert(u)? })
    }

    /// Full complex ZF output `U⁻¹ y`.
    pub fn equalize(&self, y: &CVector) -> CVector {
        self.pseudo_inverse.mul_vec(y)
    }

    /// Real parts of `U⁻¹ y`: noiselessly the pairwise sums `s_l + s_{l+1}`.
    pub fn decode(&self, y: &CVector) -> Vec<f64> {
        self.equalize(y).iter().map(|z| z.re).collect()
    }
}

pub fn relay_decode(y: &CVector, u: &CMatrix) -> Result<Vec<f64>> {
    Ok(RelayDecoder::new(u)?.decode(y))
}

/// XOR decision per stream: 1 when the sum is near 0, 0 when near ±2.
pub fn pnc_demap(sums: &[f64]) -> Vec<bool> {
    sums.iter().map(|s| s.abs() < 1.0).collect()
}
