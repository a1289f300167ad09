//! Seeded quasi-static Rayleigh channel blocks and AWGN.
//!
//! Randomness is drawn from ChaCha8 streams. Each stream is keyed by a seed
//! derived from `(master_seed, trial_index, purpose)` through a SplitMix64
//! style mixer, so trials are independent of each other, of the thread that
//! runs them, and of the SNR point being evaluated.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkernel::{min_singular, CMatrix, CVector, C64};

/// Uplink matrices whose smallest singular value falls below this are redrawn.
pub const MIN_UPLINK_SINGULAR: f64 = 1e-12;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What a random stream is used for inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Channel block; `attempt` increments on every resample.
    Channel { attempt: u32 },
    RelayPrecoder { attempt: u32 },
    Messages,
    RelayNoise,
    UserNoise { user: usize },
}

impl Purpose {
    fn tag(self) -> u64 {
        let (kind, index) = match self {
            Purpose::Channel { attempt } => (1u64, u64::from(attempt)),
            Purpose::RelayPrecoder { attempt } => (2, u64::from(attempt)),
            Purpose::Messages => (3, 0),
            Purpose::RelayNoise => (4, 0),
            Purpose::UserNoise { user } => (5, user as u64),
        };
        (kind << 56) ^ index
    }
}

/// Derives the seed of one random stream.
pub fn derive_seed(master_seed: u64, trial: u64, purpose: Purpose) -> u64 {
    let mut h = mix64(master_seed.wrapping_add(GOLDEN_GAMMA));
    h = mix64(h ^ trial.wrapping_mul(GOLDEN_GAMMA).wrapping_add(0x5851_F42D_4C95_7F2D));
    mix64(h ^ purpose.tag().wrapping_mul(GOLDEN_GAMMA).wrapping_add(0x1405_7B7E_F767_814F))
}

/// Complex Gaussian generator: Box–Muller on ChaCha8 uniforms.
pub struct GaussianSource {
    rng: ChaCha8Rng,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A pair of independent standard normals.
    pub fn standard_pair(&mut self) -> (f64, f64) {
        // 1 - U maps [0, 1) onto (0, 1] so the logarithm stays finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// One draw from CN(0, variance).
    pub fn complex_normal(&mut self, variance: f64) -> C64 {
        let (a, b) = self.standard_pair();
        let sd = (variance / 2.0).sqrt();
        C64::new(a * sd, b * sd)
    }

    pub fn complex_vector(&mut self, dim: usize, variance: f64) -> CVector {
        CVector::new((0..dim).map(|_| self.complex_normal(variance)).collect())
    }

    pub fn complex_matrix(&mut self, rows: usize, cols: usize, variance: f64) -> CMatrix {
        CMatrix::from_row_major(rows, cols, (0..rows * cols).map(|_| self.complex_normal(variance)).collect())
    }

    pub fn bit(&mut self) -> bool {
        self.rng.random::<bool>()
    }
}

/// All channel matrices of one quasi-static block.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub users: usize,
    pub antennas: usize,
    /// `uplink[i]` carries user i to the relay.
    pub uplink: Vec<CMatrix>,
    /// `downlink[i]` carries the relay to user i.
    pub downlink: Vec<CMatrix>,
}

impl NetworkRealization {
    /// Wraps explicit matrices, checking shapes.
    pub fn from_matrices(uplink: Vec<CMatrix>, downlink: Vec<CMatrix>) -> Result<Self> {
        let users = uplink.len();
        if downlink.len() != users {
            return Err(Error::LengthMismatch { expected: users, found: downlink.len() });
        }
        if users < 2 {
            return Err(Error::InvalidConfig(format!("need at least two users, got {users}")));
        }
        let antennas = uplink[0].rows();
        for h in uplink.iter().chain(&downlink) {
            if h.rows() != antennas || h.cols() != antennas {
                return Err(Error::InvalidConfig(format!(
                    "every channel must be {antennas}x{antennas}, found {}x{}",
                    h.rows(),
                    h.cols()
                )));
            }
            if !h.is_finite() {
                return Err(Error::InvalidConfig("channel entries must be finite".into()));
            }
        }
        Ok(Self { users, antennas, uplink, downlink })
    }

    /// Identity channels on every link (useful for hand-checkable cases).
    pub fn identity(users: usize, antennas: usize) -> Self {
        let h = CMatrix::identity(antennas);
        Self { users, antennas, uplink: vec![h.clone(); users], downlink: vec![h; users] }
    }

    /// Whether the antenna count matches the aligned scheme (`M = K - 1`).
    pub fn supports_alignment(&self) -> bool {
        self.antennas + 1 == self.users
    }
}

/// Draws a network with i.i.d. CN(0, 1) entries; uplink and downlink are independent.
///
/// A draw with a near-singular uplink matrix is discarded and the stream
/// continues, so the output is still a pure function of the seed.
pub fn sample_network(seed: u64, users: usize, antennas: usize) -> NetworkRealization {
    assert!(users >= 2, "K must be at least 2");
    assert!(antennas >= 1, "M must be at least 1");
    let mut src = GaussianSource::new(seed);
    loop {
        let uplink: Vec<CMatrix> = (0..users).map(|_| src.complex_matrix(antennas, antennas, 1.0)).collect();
        let downlink: Vec<CMatrix> = (0..users).map(|_| src.complex_matrix(antennas, antennas, 1.0)).collect();
        if uplink.iter().all(|h| min_singular(h) > MIN_UPLINK_SINGULAR) {
            return NetworkRealization { users, antennas, uplink, downlink };
        }
    }
}

/// I.i.d. CN(0, variance) noise vector.
pub fn sample_noise(seed: u64, dim: usize, variance: f64) -> CVector {
    assert!(variance >= 0.0, "noise variance must be non-negative");
    if variance == 0.0 {
        return CVector::zeros(dim);
    }
    GaussianSource::new(seed).complex_vector(dim, variance)
}

/// Simulation parameters shared by all experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub users: usize,
    pub antennas: usize,
    /// Linear transmit power budget per node.
    pub snr: f64,
    pub noise_variance: f64,
    pub master_seed: u64,
    pub trials: u64,
    /// Payload bits per message.
    pub payload_bits: usize,
}

impl SimConfig {
    /// Aligned-scheme defaults: `M = K - 1`, unit noise.
    pub fn new(users: usize, snr_db: f64, master_seed: u64, trials: u64) -> Self {
        Self {
            users,
            antennas: users.saturating_sub(1),
            snr: db_to_linear(snr_db),
            noise_variance: 1.0,
            master_seed,
            trials,
            payload_bits: 64,
        }
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users < 2 {
            return Err(Error::InvalidConfig(format!("K must be at least 2, got {}", self.users)));
        }
        if self.antennas < 1 {
            return Err(Error::InvalidConfig("M must be at least 1".into()));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::InvalidConfig(format!("SNR must be positive, got {}", self.snr)));
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::InvalidConfig(format!("noise variance must be non-negative, got {}", self.noise_variance)));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
