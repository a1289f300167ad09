//! Link-level simulator for the MIMO Gaussian K-way relay channel.
//!
//! `K` users with `M = K - 1` antennas each exchange one multicast message
//! through a single relay in two half-duplex phases:
//!
//! 1. **MAC.** Adjacent users `l` and `l + 1` precode along a shared
//!    generalized eigenvector so that both arrive on the same relay direction
//!    `u_l`. The relay zero-forces the `K - 1` directions and demaps each
//!    pairwise BPSK sum straight to `W_l ⊕ W_{l+1}`.
//! 2. **BC.** The relay broadcasts the resulting chain of XOR words; each user
//!    zero-forces its downlink and unwinds the chain from its own message.
//!
//! Four users therefore finish an exchange in two slots, against `2K` for
//! time division, which shows up as a sum-rate DoF of `K / 2` against
//! `(K - 1) / 2`.
//!
//! ```
//! use kway_relay::prelude::*;
//!
//! let mut cfg = SimConfig::new(4, 30.0, 7, 1);
//! cfg.noise_variance = 0.0;
//! let outcome = run_aligned_trial(&cfg, 0).unwrap();
//! assert!(outcome.records.iter().all(|r| r.recovered_ok()));
//! ```
//!
//! Users are indexed from 0 in the API. The CLI and its CSV output number
//! users from 1.

pub mod alignment;
pub mod bc_phase;
pub mod channel;
pub mod cli;
pub mod decryption;
pub mod error;
pub mod mac_phase;
pub mod metrics;
pub mod numkernel;
pub mod protocol;
pub mod tdma;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::alignment::{alignment_residual, build_precoders, chain_basis, AlignmentBasis, PrecoderSet};
    pub use crate::bc_phase::{build_relay_precoder, relay_transmit, user_receive_decode};
    pub use crate::channel::{db_to_linear, sample_network, sample_noise, NetworkRealization, SimConfig};
    pub use crate::decryption::{eavesdrop_ambiguity, successive_decode, DecodedSet};
    pub use crate::error::{Error, Result};
    pub use crate::mac_phase::{mac_transmit, pnc_demap, relay_decode, EncryptedChain, Message};
    pub use crate::metrics::{dof_slope, message_error_rate, sum_rate_sweep, DofEstimate, MerReport, RateReport};
    pub use crate::numkernel::{CMatrix, CVector, C64};
    pub use crate::protocol::{run_aligned_trial, run_tdma_trial, AlignedSetup, Scheme};
    pub use crate::tdma::{tdma_dof_closed_form, tdma_run};
}
