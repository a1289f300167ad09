//! Alignment basis for one channel draw: paired users land on one relay direction.

use kway_relay::alignment::{alignment_residual, chain_basis};
use kway_relay::channel::{db_to_linear, sample_network};
use kway_relay::prelude::*;

fn main() -> Result<()> {
    let net = sample_network(7, 4, 3);
    let basis = chain_basis(&net)?;
    let snr = db_to_linear(20.0);
    let prec = build_precoders(&basis, &net, snr)?;
    for (l, link) in basis.links.iter().enumerate() {
        println!("link {}-{}: |lambda| = {:.4}", l + 1, l + 2, link.lambda.norm());
    }
    for (i, p) in prec.users.iter().enumerate() {
        println!("user {}: power {:.3} of {:.3}", i + 1, p.power(), snr);
    }
    println!("max relative alignment residual: {:.2e}", alignment_residual(&prec, &net));
    Ok(())
}
