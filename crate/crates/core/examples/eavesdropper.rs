//! What a listener holding only the broadcast chain can infer.

use kway_relay::prelude::*;
use kway_relay::protocol::sample_messages;

fn main() -> Result<()> {
    for k in 2..=5 {
        let msgs = sample_messages(k as u64, k, 32);
        let chain = EncryptedChain::from_messages(&msgs);
        let blind = eavesdrop_ambiguity(&chain, &[])?;
        let keyed = eavesdrop_ambiguity(&chain, &[(0, msgs[0].clone())])?;
        println!(
            "K={k}: blind {:?} tuples/bit, {} determined; with W1 {:?} tuples/bit, {} determined",
            blind.uniform_count().unwrap_or(0),
            blind.determined_messages.len(),
            keyed.uniform_count().unwrap_or(0),
            keyed.determined_messages.len()
        );
    }
    Ok(())
}
