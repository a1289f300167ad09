//! Walking the network code chain outward from each user's own message.

use kway_relay::prelude::*;

fn main() -> Result<()> {
    let msgs: Vec<Message> = ["10110010", "01100111", "11100001", "00011110"]
        .iter()
        .map(|s| Message::from_bit_str(s))
        .collect();
    let chain = EncryptedChain::from_messages(&msgs);
    for (l, w) in chain.words.iter().enumerate() {
        println!("W{} xor W{} = {}", l + 1, l + 2, w);
    }
    for (i, key) in msgs.iter().enumerate() {
        let set = successive_decode(&chain, i, key)?;
        let got: Vec<String> = set.recovered.iter().map(|(s, m)| format!("W{}={}", s + 1, m)).collect();
        println!("user {}: {}", i + 1, got.join(" "));
    }
    Ok(())
}
