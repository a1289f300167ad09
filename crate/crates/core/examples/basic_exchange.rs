//! One noisy four-user exchange: every user recovers the other three messages.
//!
//! Pass an SNR in dB as the first argument to see errors appear (try 20).

use kway_relay::prelude::*;
use kway_relay::protocol::AlignedSetup;

fn main() -> Result<()> {
    let snr_db: f64 = std::env::args().nth(1).map_or(45.0, |a| a.parse().expect("SNR in dB"));
    let cfg = SimConfig::new(4, snr_db, 42, 1);
    let setup = AlignedSetup::sample(cfg.users, cfg.master_seed, 0)?;
    let sigma = setup.prepare(cfg.snr)?.relay_min_singular();
    let out = run_aligned_trial(&cfg, 0)?;
    println!("K = {}, M = {}, SNR = {} dB, sigma_min(U) = {sigma:.3}", cfg.users, cfg.antennas, cfg.snr_db());
    for r in &out.records {
        println!(
            "user {} <- user {}: {}/{} bits wrong",
            r.destination + 1,
            r.source + 1,
            r.bits_wrong,
            r.bits_total
        );
    }
    Ok(())
}
