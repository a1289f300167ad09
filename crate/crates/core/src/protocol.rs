//! Per-trial orchestration: channel resampling, precoder setup, and the full
//! two-phase exchange for both schemes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::alignment::{build_precoders, chain_basis, AlignmentBasis, PrecoderSet};
use crate::bc_phase::{build_relay_precoder, relay_transmit, UserDecoder};
use crate::channel::{derive_seed, sample_network, GaussianSource, NetworkRealization, Purpose, SimConfig};
use crate::decryption::{successive_decode, DecodedSet};
use crate::error::{Error, Result};
use crate::mac_phase::{effective_channel, mac_transmit, map_bits_bpsk, pnc_demap, EncryptedChain, Message, RelayDecoder};
use crate::metrics::{multicast_rates, stream_rates_bc, stream_rates_mac, RateReport};
use crate::numkernel::{min_singular, CMatrix, CVector};
use crate::tdma::{tdma_rates, tdma_run};

/// Channel draws attempted per trial before giving up.
pub const MAX_RESAMPLES: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Aligned,
    Tdma,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Aligned => "aligned",
            Scheme::Tdma => "tdma",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aligned" => Ok(Scheme::Aligned),
            "tdma" => Ok(Scheme::Tdma),
            other => Err(Error::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

fn is_degenerate(err: &Error) -> bool {
    matches!(err, Error::SingularMatrix { .. } | Error::NoConvergence { .. })
}

/// Retries `attempt` on degenerate draws; returns the value and the number of redraws.
fn with_resampling<T>(trial: u64, mut attempt: impl FnMut(u32) -> Result<T>) -> Result<(T, u32)> {
    for n in 0..MAX_RESAMPLES {
        match attempt(n) {
            Ok(v) => return Ok((v, n)),
            Err(e) if is_degenerate(&e) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResampleLimit { trial, attempts: MAX_RESAMPLES })
}

/// Channel block and alignment basis of one aligned-scheme trial. SNR independent.
#[derive(Debug, Clone)]
pub struct AlignedSetup {
    pub net: NetworkRealization,
    pub basis: AlignmentBasis,
    pub relay_seed: u64,
    pub resamples: u32,
}

impl AlignedSetup {
    /// Draws channels for `trial`, redrawing until alignment and every
    /// zero-forcing matrix are usable.
    pub fn sample(users: usize, master_seed: u64, trial: u64) -> Result<Self> {
        if users < 2 {
            return Err(Error::InvalidConfig(format!("K must be at least 2, got {users}")));
        }
        let (setup, resamples) = with_resampling(trial, |attempt| {
            let net = sample_network(derive_seed(master_seed, trial, Purpose::Channel { attempt }), users, users - 1);
            let basis = chain_basis(&net)?;
            let setup = AlignedSetup {
                net,
                basis,
                relay_seed: derive_seed(master_seed, trial, Purpose::RelayPrecoder { attempt }),
                resamples: 0,
            };
            // Invertibility is scale free, so a unit-SNR check covers every SNR.
            setup.prepare(1.0)?;
            Ok(setup)
        })?;
        Ok(Self { resamples, ..setup })
    }

    pub fn from_parts(net: NetworkRealization, basis: AlignmentBasis, relay_seed: u64) -> Self {
        Self { net, basis, relay_seed, resamples: 0 }
    }

    /// Builds precoders and receivers at one SNR.
    pub fn prepare(&self, snr: f64) -> Result<AlignedTrial> {
        let precoders = build_precoders(&self.basis, &self.net, snr)?;
        let u = effective_channel(&precoders);
        let relay = RelayDecoder::new(&u)?;
        let streams = self.net.users - 1;
        let v = build_relay_precoder(self.relay_seed, self.net.antennas, streams, snr)?;
        let user_decoders = self.net.downlink.iter().map(|g| UserDecoder::new(g, &v)).collect::<Result<Vec<_>>>()?;
        Ok(AlignedTrial { net: self.net.clone(), snr, precoders, u, relay, v, user_decoders })
    }
}

/// Everything needed to run the aligned exchange at a fixed SNR.
#[derive(Debug, Clone)]
pub struct AlignedTrial {
    pub net: NetworkRealization,
    pub snr: f64,
    pub precoders: PrecoderSet,
    /// Relay effective channel, columns `u_l`.
    pub u: CMatrix,
    relay: RelayDecoder,
    /// Relay broadcast precoder.
    pub v: CMatrix,
    user_decoders: Vec<UserDecoder>,
}

/// Seeds of the noise streams used by one exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseSeeds {
    pub relay: u64,
    pub users: Vec<u64>,
}

impl NoiseSeeds {
    pub fn derive(master_seed: u64, trial: u64, users: usize) -> Self {
        Self {
            relay: derive_seed(master_seed, trial, Purpose::RelayNoise),
            users: (0..users).map(|user| derive_seed(master_seed, trial, Purpose::UserNoise { user })).collect(),
        }
    }
}

/// What every node ended up with after one aligned exchange.
#[derive(Debug, Clone)]
pub struct ExchangeOutcome {
    pub relay_chain: EncryptedChain,
    /// Chain as detected by each user.
    pub user_chains: Vec<EncryptedChain>,
    pub decoded: Vec<DecodedSet>,
}

struct NoiseStream {
    src: GaussianSource,
    variance: f64,
    dim: usize,
}

impl NoiseStream {
    fn new(seed: u64, variance: f64, dim: usize) -> Self {
        Self { src: GaussianSource::new(seed), variance, dim }
    }

    fn next(&mut self) -> CVector {
        if self.variance == 0.0 {
            CVector::zeros(self.dim)
        } else {
            self.src.complex_vector(self.dim, self.variance)
        }
    }
}

impl AlignedTrial {
    pub fn users(&self) -> usize {
        self.net.users
    }

    pub fn relay_min_singular(&self) -> f64 {
        min_singular(&self.u)
    }

    /// Effective downlink matrix `H_down · V` of every user.
    pub fn user_channels(&self) -> Vec<CMatrix> {
        self.net.downlink.iter().map(|g| g.mul_mat(&self.v)).collect()
    }

    pub fn rate_report(&self, noise_variance: f64) -> Result<RateReport> {
        let mac = stream_rates_mac(&self.u, noise_variance)?;
        let bc = self
            .user_channels()
            .iter()
            .map(|q| stream_rates_bc(q, noise_variance))
            .collect::<Result<Vec<_>>>()?;
        let multicast = multicast_rates(&mac, &bc);
        Ok(RateReport::new(crate::channel::linear_to_db(self.snr), mac, bc, multicast))
    }

    /// Runs both phases over every payload bit, one epoch per bit.
    pub fn exchange(&self, messages: &[Message], noise_variance: f64, seeds: &NoiseSeeds) -> Result<ExchangeOutcome> {
        let k = self.users();
        let m = self.net.antennas;
        if messages.len() != k {
            return Err(Error::LengthMismatch { expected: k, found: messages.len() });
        }
        let len = messages[0].len();
        if let Some(bad) = messages.iter().find(|w| w.len() != len) {
            return Err(Error::LengthMismatch { expected: len, found: bad.len() });
        }
        if seeds.users.len() != k {
            return Err(Error::LengthMismatch { expected: k, found: seeds.users.len() });
        }

        let mut relay_noise = NoiseStream::new(seeds.relay, noise_variance, m);
        let mut user_noise: Vec<NoiseStream> = seeds.users.iter().map(|&s| NoiseStream::new(s, noise_variance, m)).collect();

        let mut relay_epochs = Vec::with_capacity(len);
        let mut user_epochs = vec![Vec::with_capacity(len); k];
        for t in 0..len {
            let bits: Vec<bool> = messages.iter().map(|w| w.bits[t]).collect();
            let y = mac_transmit(&self.net, &self.precoders, &map_bits_bpsk(&bits), &relay_noise.next());
            let chain_bits = pnc_demap(&self.relay.decode(&y));

            let x = relay_transmit(&chain_bits, &self.v);
            for (j, dec) in self.user_decoders.iter().enumerate() {
                let y = &self.net.downlink[j].mul_vec(&x) + &user_noise[j].next();
                user_epochs[j].push(dec.decode(&y));
            }
            relay_epochs.push(chain_bits);
        }

        let relay_chain = EncryptedChain::from_epochs(&relay_epochs, k - 1);
        let user_chains: Vec<EncryptedChain> = user_epochs.iter().map(|e| EncryptedChain::from_epochs(e, k - 1)).collect();
        let decoded = user_chains
            .iter()
            .enumerate()
            .map(|(j, chain)| successive_decode(chain, j, &messages[j]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExchangeOutcome { relay_chain, user_chains, decoded })
    }
}

/// Random payloads for every user of one trial.
pub fn sample_messages(seed: u64, users: usize, payload_bits: usize) -> Vec<Message> {
    let mut src = GaussianSource::new(seed);
    (0..users).map(|_| Message::new((0..payload_bits).map(|_| src.bit()).collect())).collect()
}

/// Recovery outcome of one `(destination, source)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRecord {
    pub destination: usize,
    pub source: usize,
    pub bits_total: usize,
    pub bits_wrong: usize,
}

impl PairRecord {
    pub fn recovered_ok(&self) -> bool {
        self.bits_wrong == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub resamples: u32,
    pub records: Vec<PairRecord>,
}

fn score(decoded: &[DecodedSet], messages: &[Message]) -> Vec<PairRecord> {
    decoded
        .iter()
        .flat_map(|set| {
            set.recovered.iter().map(move |(src, msg)| PairRecord {
                destination: set.owner,
                source: *src,
                bits_total: msg.len(),
                bits_wrong: msg.hamming_distance(&messages[*src]),
            })
        })
        .collect()
}

/// One complete aligned-scheme trial as configured.
pub fn run_aligned_trial(cfg: &SimConfig, trial: u64) -> Result<TrialOutcome> {
    let setup = AlignedSetup::sample(cfg.users, cfg.master_seed, trial)?;
    let prepared = setup.prepare(cfg.snr)?;
    let messages = sample_messages(derive_seed(cfg.master_seed, trial, Purpose::Messages), cfg.users, cfg.payload_bits);
    let seeds = NoiseSeeds::derive(cfg.master_seed, trial, cfg.users);
    let out = prepared.exchange(&messages, cfg.noise_variance, &seeds)?;
    Ok(TrialOutcome { trial, resamples: setup.resamples, records: score(&out.decoded, &messages) })
}

/// Channel block and relay precoder seed of one TDMA trial.
#[derive(Debug, Clone)]
pub struct TdmaSetup {
    pub net: NetworkRealization,
    pub relay_seed: u64,
    pub resamples: u32,
}

impl TdmaSetup {
    pub fn sample(users: usize, antennas: usize, master_seed: u64, trial: u64) -> Result<Self> {
        if users < 2 || antennas < 1 {
            return Err(Error::InvalidConfig(format!("need K >= 2 and M >= 1 (K = {users}, M = {antennas})")));
        }
        let (setup, resamples) = with_resampling(trial, |attempt| {
            let net = sample_network(derive_seed(master_seed, trial, Purpose::Channel { attempt }), users, antennas);
            let setup = TdmaSetup {
                net,
                relay_seed: derive_seed(master_seed, trial, Purpose::RelayPrecoder { attempt }),
                resamples: 0,
            };
            setup.sum_rate(1.0, 1.0)?;
            Ok(setup)
        })?;
        Ok(Self { resamples, ..setup })
    }

    pub fn relay_precoder(&self, snr: f64) -> Result<CMatrix> {
        build_relay_precoder(self.relay_seed, self.net.antennas, self.net.antennas, snr)
    }

    pub fn sum_rate(&self, snr: f64, noise_variance: f64) -> Result<f64> {
        Ok(tdma_rates(&self.net, snr, noise_variance, &self.relay_precoder(snr)?)?.sum_rate())
    }
}

/// One complete TDMA trial as configured.
pub fn run_tdma_trial(cfg: &SimConfig, trial: u64) -> Result<TrialOutcome> {
    let setup = TdmaSetup::sample(cfg.users, cfg.antennas, cfg.master_seed, trial)?;
    let messages = sample_messages(derive_seed(cfg.master_seed, trial, Purpose::Messages), cfg.users, cfg.payload_bits);
    let v = setup.relay_precoder(cfg.snr)?;
    let out = tdma_run(
        &setup.net,
        cfg.snr,
        cfg.noise_variance,
        &v,
        &messages,
        derive_seed(cfg.master_seed, trial, Purpose::RelayNoise),
    )?;
    Ok(TrialOutcome { trial, resamples: setup.resamples, records: score(&out.decoded, &messages) })
}

/// Maps `f` over trial indices `0..trials`, in parallel, preserving order.
///
/// `threads = None` uses the global rayon pool.
pub fn map_trials<T, F>(trials: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let run = || (0..trials).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
    }
}
