mod common;

use kway_relay::alignment::{alignment_residual, build_precoders, chain_basis, span_residual};
use kway_relay::bc_phase::{build_relay_precoder, relay_transmit, UserDecoder};
use kway_relay::channel::{db_to_linear, derive_seed, sample_network, sample_noise, GaussianSource, NetworkRealization, Purpose, SimConfig};
use kway_relay::mac_phase::{effective_channel, mac_transmit, map_bits_bpsk, EncryptedChain, RelayDecoder};
use kway_relay::metrics::{
    end_to_end_stream_rates, message_error_rate, multicast_rates, stream_rates_mac, sum_rate_sweep, MAC_PAIR_SIGNAL_POWER,
};
use kway_relay::numkernel::{min_singular, CMatrix, CVector, C64};
use kway_relay::protocol::{sample_messages, AlignedSetup, NoiseSeeds, Scheme};

fn aligned_setup(seed: u64, users: usize) -> AlignedSetup {
    AlignedSetup::sample(users, seed, 0).unwrap()
}

#[test]
fn five_user_precoders_are_feasible_and_aligned() {
    let snr = db_to_linear(25.0);
    for seed in 0..30 {
        let setup = aligned_setup(seed, 5);
        let prec = build_precoders(&setup.basis, &setup.net, snr).unwrap();
        // Oracle: evaluate both matrix-vector products of every link directly.
        for l in 0..4 {
            let lower = if l == 0 { &prec.users[0].v1 } else { &prec.users[l].v2 };
            let a = setup.net.uplink[l].mul_vec(lower);
            let b = setup.net.uplink[l + 1].mul_vec(&prec.users[l + 1].v1);
            assert!((&a - &b).norm() <= 1e-8 * a.norm(), "seed {seed} link {l}");
        }
        for (i, p) in prec.users.iter().enumerate() {
            let power = p.v1.norm_sqr() + p.v2.norm_sqr();
            assert!(power <= snr * (1.0 + 1e-9), "user {i} power {power}");
        }
        assert_eq!(prec.users[0].v2, CVector::zeros(4));
        assert_eq!(prec.users[4].v2, CVector::zeros(4));
        assert!(span_residual(&prec, &setup.net) < 1e-8);
    }
}

#[test]
fn snr_scales_amplitudes_not_directions() {
    let setup = aligned_setup(17, 4);
    let low = build_precoders(&setup.basis, &setup.net, 10.0).unwrap();
    let high = build_precoders(&setup.basis, &setup.net, 40.0).unwrap();
    for (a, b) in low.users.iter().zip(&high.users) {
        assert!((b.v1.norm_sqr() - 4.0 * a.v1.norm_sqr()).abs() < 1e-9 * b.v1.norm_sqr().max(1.0));
        assert!((b.v2.norm_sqr() - 4.0 * a.v2.norm_sqr()).abs() < 1e-9 * b.v2.norm_sqr().max(1.0));
    }
    for (a, b) in low.links.iter().zip(&high.links) {
        let (a, b) = (a.normalized().unwrap(), b.normalized().unwrap());
        assert!((&a - &b).norm() < 1e-12);
    }
}

#[test]
fn link_records_depend_only_on_their_pair() {
    // Relabeling users: each link of the permuted chain equals the two-user
    // basis of the pair it now joins.
    let net = sample_network(23, 4, 3);
    let order = [2usize, 0, 3, 1];
    let permuted = NetworkRealization::from_matrices(
        order.iter().map(|&i| net.uplink[i].clone()).collect(),
        order.iter().map(|&i| net.downlink[i].clone()).collect(),
    )
    .unwrap();
    let basis = chain_basis(&permuted).unwrap();
    for l in 0..3 {
        let pair_net = NetworkRealization {
            users: 2,
            antennas: 3,
            uplink: vec![net.uplink[order[l]].clone(), net.uplink[order[l + 1]].clone()],
            downlink: vec![net.downlink[order[l]].clone(), net.downlink[order[l + 1]].clone()],
        };
        // Two users with three antennas is outside the aligned regime, so
        // compute the pair's eigenpair the same way the chain does.
        let ratio = kway_relay::numkernel::invert(&pair_net.uplink[0]).unwrap().mul_mat(&pair_net.uplink[1]);
        let pair = kway_relay::numkernel::dominant_eigenpair(&ratio).unwrap();
        assert!((pair.lambda - basis.links[l].lambda).norm() < 1e-12);
        assert!((&pair.vector - &basis.links[l].f).norm() < 1e-12);
    }
}

#[test]
fn noisy_mac_matches_direct_expansion() {
    let setup = aligned_setup(31, 4);
    let prec = build_precoders(&setup.basis, &setup.net, 100.0).unwrap();
    let noise = sample_noise(32, 3, 1.0);
    let symbols = [1.0, -1.0, -1.0, 1.0];
    let y = mac_transmit(&setup.net, &prec, &symbols, &noise);
    // Expand every direction of every user separately.
    let mut expected = noise.clone();
    for i in 0..4 {
        for v in [&prec.users[i].v1, &prec.users[i].v2] {
            expected = &expected + &setup.net.uplink[i].mul_vec(v).scale(C64::new(symbols[i], 0.0));
        }
    }
    assert!((&y - &expected).norm() < 1e-10 * expected.norm());
}

#[test]
fn mac_is_linear_in_symbols() {
    let setup = aligned_setup(33, 5);
    let prec = build_precoders(&setup.basis, &setup.net, 50.0).unwrap();
    let zero = CVector::zeros(4);
    let symbols = [1.0, -1.0, 1.0, 1.0, -1.0];
    let total = mac_transmit(&setup.net, &prec, &symbols, &zero);
    let summed = (0..5).fold(CVector::zeros(4), |acc, i| {
        let mut single = [0.0; 5];
        single[i] = symbols[i];
        &acc + &mac_transmit(&setup.net, &prec, &single, &zero)
    });
    assert!((&total - &summed).norm() < 1e-10 * total.norm().max(1.0));
}

#[test]
fn noiseless_mac_chain_matches_xor_oracle() {
    for k in 2..=5 {
        for trial in 0..200 {
            let setup = AlignedSetup::sample(k, 9, trial).unwrap();
            let prepared = setup.prepare(db_to_linear(20.0)).unwrap();
            let msgs = sample_messages(derive_seed(9, trial, Purpose::Messages), k, 16);
            let seeds = NoiseSeeds::derive(9, trial, k);
            let out = prepared.exchange(&msgs, 0.0, &seeds).unwrap();
            for l in 0..k - 1 {
                let oracle: Vec<bool> = msgs[l].bits.iter().zip(&msgs[l + 1].bits).map(|(a, b)| a != b).collect();
                assert_eq!(out.relay_chain.words[l].bits, oracle, "K = {k}, trial {trial}, link {l}");
            }
            assert!(out.user_chains.iter().all(|c| *c == out.relay_chain));
        }
    }
}

#[test]
fn relay_lattice_on_a_well_conditioned_channel() {
    // U = sqrt(SNR/2)·I at 40 dB: post-ZF noise std per real part is about 0.007.
    let snr = db_to_linear(40.0);
    let u = CMatrix::identity(3).scale(C64::new((snr / 2.0).sqrt(), 0.0));
    let dec = RelayDecoder::new(&u).unwrap();
    let mut src = GaussianSource::new(3);
    let mut near = 0;
    let epochs = 10_000;
    for _ in 0..epochs {
        let s: Vec<f64> = (0..4).map(|_| if src.bit() { -1.0 } else { 1.0 }).collect();
        let clean = CVector::from_real(&[s[0] + s[1], s[1] + s[2], s[2] + s[3]]);
        let y = &u.mul_vec(&clean) + &src.complex_vector(3, 1.0);
        if dec.decode(&y).iter().all(|z| (z - 2.0 * (z / 2.0).round()).abs() < 0.1) {
            near += 1;
        }
    }
    assert!(near as f64 >= 0.999 * epochs as f64, "{near} / {epochs}");
}

#[test]
fn relay_lattice_spread_matches_zf_noise_model() {
    // On random aligned channels the fraction of epochs within 0.1 of the
    // lattice is predicted by the per-stream post-ZF variance σ²ρ_l/2.
    let snr = db_to_linear(40.0);
    let epochs = 64;
    let (mut observed, mut predicted, mut total) = (0.0, 0.0, 0.0);
    for trial in 0..300 {
        let setup = AlignedSetup::sample(4, 55, trial).unwrap();
        let prepared = setup.prepare(snr).unwrap();
        let inv = common::gauss_jordan_inverse(&prepared.u).unwrap();
        let p_in: f64 = inv
            .iter()
            .map(|row| {
                let sd = (row.iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0).sqrt();
                1.0 - 2.0 * common::q_function(0.1 / sd)
            })
            .product();
        let dec = RelayDecoder::new(&prepared.u).unwrap();
        let mut noise = GaussianSource::new(derive_seed(55, trial, Purpose::RelayNoise));
        let msgs = sample_messages(trial, 4, epochs);
        for t in 0..epochs {
            let s = map_bits_bpsk(&msgs.iter().map(|m| m.bits[t]).collect::<Vec<_>>());
            let y = mac_transmit(&prepared.net, &prepared.precoders, &s, &noise.complex_vector(3, 1.0));
            if dec.decode(&y).iter().all(|z| (z - 2.0 * (z / 2.0).round()).abs() < 0.1) {
                observed += 1.0;
            }
        }
        predicted += p_in * epochs as f64;
        total += epochs as f64;
    }
    let (obs, pred) = (observed / total, predicted / total);
    let sd = (pred * (1.0 - pred) / total).sqrt();
    // Epochs within one channel block are correlated through the channel only via the prediction.
    assert!((obs - pred).abs() < 5.0 * sd + 0.005, "observed {obs}, predicted {pred}");
}

#[test]
fn relay_power_audit() {
    let snr = 5.0;
    let v = build_relay_precoder(61, 3, 3, snr).unwrap();
    let mut src = GaussianSource::new(62);
    let n = 10_000;
    let mut power = 0.0;
    for _ in 0..n {
        let bits: Vec<bool> = (0..3).map(|_| src.bit()).collect();
        let x = relay_transmit(&bits, &v);
        // Column-sum oracle.
        let mut expect = CVector::zeros(3);
        for (j, &b) in bits.iter().enumerate() {
            expect = &expect + &v.column(j).scale(C64::new(if b { -1.0 } else { 1.0 }, 0.0));
        }
        assert!((&x - &expect).norm() < 1e-12);
        power += x.norm_sqr();
    }
    let avg = power / n as f64;
    assert!((avg - snr).abs() < 1e-9 * snr, "average power {avg}");
}

#[test]
fn broadcast_bit_error_rate_at_40_db() {
    let snr = db_to_linear(40.0);
    let (mut errors, mut bits) = (0usize, 0usize);
    let mut trial = 0;
    while bits < 100_000 {
        let setup = AlignedSetup::sample(4, 71, trial).unwrap();
        let prepared = setup.prepare(snr).unwrap();
        let mut src = GaussianSource::new(derive_seed(71, trial, Purpose::UserNoise { user: 0 }));
        for g in &prepared.net.downlink {
            assert!(min_singular(&g.mul_mat(&prepared.v)) > 0.0);
            let dec = UserDecoder::new(g, &prepared.v).unwrap();
            for _ in 0..32 {
                let tx: Vec<bool> = (0..3).map(|_| src.bit()).collect();
                let y = &g.mul_vec(&relay_transmit(&tx, &prepared.v)) + &src.complex_vector(3, 1.0);
                errors += dec.decode(&y).iter().zip(&tx).filter(|(a, b)| a != b).count();
                bits += 3;
            }
        }
        trial += 1;
    }
    let ber = errors as f64 / bits as f64;
    assert!(ber < 1e-3, "BER {ber}");
}

#[test]
fn mac_rates_match_direct_recomputation() {
    for seed in 0..20 {
        let setup = aligned_setup(80 + seed, 4);
        let prepared = setup.prepare(db_to_linear(30.0)).unwrap();
        let rates = stream_rates_mac(&prepared.u, 1.0).unwrap();
        let inv = common::gauss_jordan_inverse(&prepared.u).unwrap();
        for (l, row) in inv.iter().enumerate() {
            let rho: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            let expected = (1.0 + MAC_PAIR_SIGNAL_POWER / rho).log2();
            assert!((rates[l] - expected).abs() < 1e-9 * expected);
        }
    }
}

#[test]
fn multicast_rates_match_path_enumeration() {
    for seed in 0..20 {
        let setup = aligned_setup(90 + seed, 5);
        let report = setup.prepare(db_to_linear(30.0)).unwrap().rate_report(1.0).unwrap();
        let mac = &report.per_stream_mac;
        let bc = &report.per_stream_bc_per_user;
        let k = 5;
        // R_ji: min over the links between i and j of ½·min(mac_l, min over users bc_l).
        let link_rate = |l: usize| 0.5 * bc.iter().map(|b| b[l]).fold(mac[l], f64::min);
        for i in 0..k {
            let r_i = (0..k)
                .filter(|&j| j != i)
                .map(|j| (i.min(j)..i.max(j)).map(link_rate).fold(f64::INFINITY, f64::min))
                .fold(f64::INFINITY, f64::min);
            assert!((report.multicast_rates[i] - r_i).abs() < 1e-12);
        }
        assert!(report.multicast_rates.windows(2).all(|w| w[0] == w[1]));
        assert!((report.sum_rate - report.multicast_rates.iter().sum::<f64>()).abs() < 1e-12);
        let streams = end_to_end_stream_rates(mac, bc);
        assert_eq!(streams.len(), 4);
    }
}

#[test]
fn multicast_rates_relabel_with_users() {
    let mac = [3.0, 5.0, 4.0];
    let bc = vec![vec![4.0, 6.0, 2.5], vec![5.0, 5.0, 5.0], vec![3.5, 4.0, 6.0], vec![6.0, 6.0, 6.0]];
    let base = multicast_rates(&mac, &bc);
    let mut shuffled = bc.clone();
    shuffled.swap(0, 3);
    shuffled.swap(1, 2);
    assert_eq!(multicast_rates(&mac, &shuffled), base);
    assert_eq!(base, vec![1.25; 4]);
}

#[test]
fn noiseless_mer_is_zero() {
    let mut cfg = SimConfig::new(4, 10.0, 5, 50);
    cfg.noise_variance = 0.0;
    let report = message_error_rate(&cfg, None).unwrap();
    assert_eq!(report.errors, 0);
    assert_eq!(report.overall(), 0.0);
    assert_eq!(report.triples, 50 * 12);
}

#[test]
fn tdma_slope_matches_half_antennas() {
    let grid = [40.0, 45.0, 50.0, 55.0, 60.0];
    let est = sum_rate_sweep(Scheme::Tdma, 3, 2, &grid, 200, 4, 1.0, None).unwrap();
    assert!((est.slope - 1.0).abs() < 0.15, "slope {}", est.slope);
}

#[test]
fn three_user_chain_shapes() {
    let net = sample_network(2, 3, 2);
    let prec = build_precoders(&chain_basis(&net).unwrap(), &net, 10.0).unwrap();
    let u = effective_channel(&prec);
    assert_eq!((u.rows(), u.cols()), (2, 2));
    assert!(alignment_residual(&prec, &net) < 1e-8);
    let chain = EncryptedChain::from_messages(&sample_messages(1, 3, 8));
    assert_eq!(chain.words.len(), 2);
    assert_eq!(chain.payload_bits(), 8);
}
