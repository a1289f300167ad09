//! The 2K-slot TDMA baseline: one message per slot, relayed through the broadcast precoder.

use kway_relay::bc_phase::build_relay_precoder;
use kway_relay::prelude::*;
use kway_relay::protocol::sample_messages;
use kway_relay::tdma::tdma_rates;

fn main() -> Result<()> {
    let (k, m) = (4, 3);
    let snr = db_to_linear(30.0);
    let net = sample_network(3, k, m);
    let v = build_relay_precoder(4, m, m, snr)?;
    let msgs = sample_messages(5, k, 3 * 16);
    let out = tdma_run(&net, snr, 1.0, &v, &msgs, 6)?;
    let wrong: usize = out
        .decoded
        .iter()
        .flat_map(|set| set.recovered.iter().map(|(s, w)| w.hamming_distance(&msgs[*s])))
        .sum();
    println!("{} slots, {wrong} bit errors across all pairs", out.slots_used);
    let rates = tdma_rates(&net, snr, 1.0, &v)?;
    println!("multicast rates {:?}", rates.multicast_rates());
    println!("sum rate {:.3} bit/s/Hz", rates.sum_rate());
    Ok(())
}
