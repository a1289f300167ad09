//! Relay-side effective channel U: invertibility margin and noiseless PNC demap.

use kway_relay::mac_phase::{map_bits_bpsk, relay_decode};
use kway_relay::numkernel::min_singular;
use kway_relay::prelude::*;
use kway_relay::protocol::AlignedSetup;

fn main() -> Result<()> {
    let setup = AlignedSetup::sample(4, 11, 0)?;
    let trial = setup.prepare(db_to_linear(30.0))?;
    println!("sigma_min(U) = {:.4}", min_singular(&trial.u));

    let bits = [true, false, false, true];
    let y = mac_transmit(&trial.net, &trial.precoders, &map_bits_bpsk(&bits), &CVector::zeros(3));
    let sums = relay_decode(&y, &trial.u)?;
    let chain = pnc_demap(&sums);
    println!("symbol sums {sums:?}");
    println!("decoded chain {chain:?}, expected {:?}", bits.windows(2).map(|w| w[0] ^ w[1]).collect::<Vec<_>>());
    Ok(())
}
