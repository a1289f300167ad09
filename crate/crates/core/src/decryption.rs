//! Successive network-code decoding and the keyless-observer analysis.

use crate::error::{Error, Result};
use crate::mac_phase::{EncryptedChain, Message};

/// Messages one user recovered from the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSet {
    pub owner: usize,
    /// `(source, message)` for every user other than `owner`, ascending by source.
    pub recovered: Vec<(usize, Message)>,
}

impl DecodedSet {
    pub fn get(&self, source: usize) -> Option<&Message> {
        self.recovered.iter().find(|(s, _)| *s == source).map(|(_, m)| m)
    }
}

/// Unwinds the chain outward from `owner` using its own message as the key.
///
/// Upward: `Ŵ_{j+1} = word_j ⊕ Ŵ_j`; downward: `Ŵ_{j-1} = word_{j-1} ⊕ Ŵ_j`.
pub fn successive_decode(chain: &EncryptedChain, owner: usize, key: &Message) -> Result<DecodedSet> {
    let users = chain.users();
    if owner >= users {
        return Err(Error::InvalidConfig(format!("user {owner} is not on a chain of {users} users")));
    }
    let len = key.len();
    if let Some(bad) = chain.words.iter().find(|w| w.len() != len) {
        return Err(Error::LengthMismatch { expected: len, found: bad.len() });
    }

    let mut slots: Vec<Option<Message>> = vec![None; users];
    let mut current = key.clone();
    for j in owner..users - 1 {
        current = &chain.words[j] ^ &current;
        slots[j + 1] = Some(current.clone());
    }
    current = key.clone();
    for j in (1..=owner).rev() {
        current = &chain.words[j - 1] ^ &current;
        slots[j - 1] = Some(current.clone());
    }
    let recovered = slots.into_iter().enumerate().filter_map(|(j, m)| m.map(|m| (j, m))).collect();
    Ok(DecodedSet { owner, recovered })
}

/// What an observer learns from the chain alone, per bit position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub users: usize,
    /// Number of message tuples consistent with the chain at each bit position.
    pub consistent_per_bit: Vec<usize>,
    /// Messages whose value is pinned at every bit position.
    pub determined_messages: Vec<usize>,
}

impl AmbiguityReport {
    /// The common per-bit count, if every position agrees.
    pub fn uniform_count(&self) -> Option<usize> {
        let first = *self.consistent_per_bit.first()?;
        self.consistent_per_bit.iter().all(|&c| c == first).then_some(first)
    }
}

/// Counts the message tuples that explain the chain, given any known messages.
///
/// The chain fixes every message relative to `W_0`: `W_j = W_0 ⊕ word_0 ⊕ … ⊕ word_{j-1}`.
/// Each bit position therefore has one free bit unless a known message pins it.
pub fn eavesdrop_ambiguity(chain: &EncryptedChain, known: &[(usize, Message)]) -> Result<AmbiguityReport> {
    let users = chain.users();
    let len = chain.payload_bits();
    for (user, msg) in known {
        if *user >= users {
            return Err(Error::InvalidConfig(format!("known user {user} is not on a chain of {users} users")));
        }
        if msg.len() != len {
            return Err(Error::LengthMismatch { expected: len, found: msg.len() });
        }
    }

    let mut consistent_per_bit = Vec::with_capacity(len);
    for t in 0..len {
        // prefix[j] = W_j ⊕ W_0 at this bit.
        let mut prefix = vec![false; users];
        for j in 1..users {
            prefix[j] = prefix[j - 1] ^ chain.words[j - 1].bits[t];
        }
        let count = [false, true]
            .into_iter()
            .filter(|&w0| known.iter().all(|(u, m)| (w0 ^ prefix[*u]) == m.bits[t]))
            .count();
        consistent_per_bit.push(count);
    }

    // A message is determined iff the anchor bit is pinned everywhere, i.e. at most
    // one assignment survives at every position; all messages share the same fate.
    let determined_messages = if len > 0 && consistent_per_bit.iter().all(|&c| c <= 1) {
        (0..users).collect()
    } else {
        Vec::new()
    };
    Ok(AmbiguityReport { users, consistent_per_bit, determined_messages })
}
