//! Uplink precoders that align paired users onto a shared relay direction.
//!
//! Link `l` couples users `l` and `l + 1` (0-based). Both users transmit along
//! the same vector `f_l`, chosen so that `H[l+1] f_l = λ_l H[l] f_l`; their
//! complex gains are then matched so the two received vectors coincide and
//! the relay sees `u_l (s_l + s_{l+1})` on that dimension.

use crate::channel::NetworkRealization;
use crate::error::{Error, Result};
use crate::numkernel::{dominant_eigenpair, invert, CVector, C64};

/// Which eigenpair of `H[l]⁻¹ H[l+1]` defines each link direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EigenSelection {
    /// Largest eigenvalue modulus.
    #[default]
    Largest,
    /// Smallest eigenvalue modulus, for ablation runs.
    Smallest,
}

/// Direction and generalized eigenvalue of one chain link.
#[derive(Debug, Clone)]
pub struct LinkBasis {
    /// Unit-norm shared transmit direction.
    pub f: CVector,
    /// Ratio with `H[l+1] f = lambda · H[l] f`.
    pub lambda: C64,
}

#[derive(Debug, Clone)]
pub struct AlignmentBasis {
    pub links: Vec<LinkBasis>,
}

impl AlignmentBasis {
    /// Largest relative generalized-eigen residual over all links.
    pub fn residual(&self, net: &NetworkRealization) -> f64 {
        self.links
            .iter()
            .enumerate()
            .map(|(l, link)| {
                let lower = net.uplink[l].mul_vec(&link.f);
                let upper = net.uplink[l + 1].mul_vec(&link.f);
                (&upper - &lower.scale(link.lambda)).norm() / upper.norm().max(lower.norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Computes the chain basis with the default (largest) eigen selection.
pub fn chain_basis(net: &NetworkRealization) -> Result<AlignmentBasis> {
    chain_basis_with(net, EigenSelection::Largest)
}

pub fn chain_basis_with(net: &NetworkRealization, selection: EigenSelection) -> Result<AlignmentBasis> {
    if !net.supports_alignment() {
        return Err(Error::InvalidConfig(format!(
            "aligned scheme needs M = K - 1 antennas (K = {}, M = {})",
            net.users, net.antennas
        )));
    }
    let links = net
        .uplink
        .windows(2)
        .map(|pair| {
            let (lower, upper) = (&pair[0], &pair[1]);
            match selection {
                EigenSelection::Largest => {
                    let pair = dominant_eigenpair(&invert(lower)?.mul_mat(upper))?;
                    Ok(LinkBasis { f: pair.vector, lambda: pair.lambda })
                }
                EigenSelection::Smallest => {
                    // Dominant pair of the reversed ratio is the weakest pair of this one.
                    let pair = dominant_eigenpair(&invert(upper)?.mul_mat(lower))?;
                    Ok(LinkBasis { f: pair.vector, lambda: pair.lambda.inv() })
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlignmentBasis { links })
}

/// Precoders of one user. `v2` is zero for the two chain ends.
#[derive(Debug, Clone)]
pub struct UserPrecoder {
    /// Direction shared with the previous user (or with the next user, for user 0).
    pub v1: CVector,
    /// Direction shared with the next user.
    pub v2: CVector,
}

impl UserPrecoder {
    pub fn power(&self) -> f64 {
        self.v1.norm_sqr() + self.v2.norm_sqr()
    }

    /// Combined transmit vector for a symbol repeated on both directions.
    pub fn combined(&self) -> CVector {
        &self.v1 + &self.v2
    }
}

#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub users: Vec<UserPrecoder>,
    /// Common received direction `u_l` of every link.
    pub links: Vec<CVector>,
}

impl PrecoderSet {
    /// Precoder user `i` points at link `i` (towards user `i + 1`).
    pub fn toward_next(&self, i: usize) -> &CVector {
        if i == 0 {
            &self.users[0].v1
        } else {
            &self.users[i].v2
        }
    }

    /// Precoder user `i` points at link `i - 1` (towards user `i - 1`).
    pub fn toward_previous(&self, i: usize) -> &CVector {
        &self.users[i].v1
    }
}

/// Number of chain links a user takes part in.
pub fn active_directions(users: usize, i: usize) -> usize {
    if users == 2 || i == 0 || i + 1 == users {
        1
    } else {
        2
    }
}

/// Sets per-link gains so each pair lands on an identical relay vector.
///
/// The pair budget of link `l` is the smaller per-direction budget of its two
/// users (`SNR` for chain ends, `SNR / 2` for middle users). The user whose
/// channel gain `‖H f‖` is weaker spends the full pair budget; the other
/// user's gain is `1/λ` or `λ` times it, which fixes both magnitude and phase.
pub fn build_precoders(basis: &AlignmentBasis, net: &NetworkRealization, snr: f64) -> Result<PrecoderSet> {
    let k = net.users;
    if basis.links.len() + 1 != k {
        return Err(Error::LengthMismatch { expected: k - 1, found: basis.links.len() });
    }
    let m = net.antennas;
    let mut users: Vec<UserPrecoder> =
        (0..k).map(|_| UserPrecoder { v1: CVector::zeros(m), v2: CVector::zeros(m) }).collect();
    let mut links = Vec::with_capacity(k - 1);

    for (l, link) in basis.links.iter().enumerate() {
        let budget = (snr / active_directions(k, l) as f64).min(snr / active_directions(k, l + 1) as f64);
        let amp = C64::new(budget.sqrt(), 0.0);
        // |λ| > 1 means user l is the weaker side.
        let (lower_gain, upper_gain) = if link.lambda.norm() > 1.0 {
            (amp, amp / link.lambda)
        } else {
            (amp * link.lambda, amp)
        };
        let lower = link.f.scale(lower_gain);
        let upper = link.f.scale(upper_gain);
        links.push(net.uplink[l].mul_vec(&lower));
        if l == 0 {
            users[0].v1 = lower;
        } else {
            users[l].v2 = lower;
        }
        users[l + 1].v1 = upper;
    }
    Ok(PrecoderSet { users, links })
}

/// Largest relative mismatch between the two received vectors of any link.
pub fn alignment_residual(prec: &PrecoderSet, net: &NetworkRealization) -> f64 {
    (0..net.users - 1)
        .map(|l| {
            let from_lower = net.uplink[l].mul_vec(prec.toward_next(l));
            let from_upper = net.uplink[l + 1].mul_vec(prec.toward_previous(l + 1));
            let scale = prec.links[l].norm();
            if scale == 0.0 {
                (&from_lower - &from_upper).norm()
            } else {
                (&from_lower - &from_upper).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Largest colinearity defect `1 - |⟨a, b⟩| / (‖a‖‖b‖)` over the links.
pub fn span_residual(prec: &PrecoderSet, net: &NetworkRealization) -> f64 {
    (0..net.users - 1)
        .map(|l| {
            let a = net.uplink[l].mul_vec(prec.toward_next(l));
            let b = net.uplink[l + 1].mul_vec(prec.toward_previous(l + 1));
            1.0 - a.dot(&b).norm() / (a.norm() * b.norm())
        })
        .fold(0.0, f64::max)
}
