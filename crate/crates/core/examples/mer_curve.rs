//! Message error rate of the aligned exchange over SNR.

use kway_relay::prelude::*;

fn main() -> Result<()> {
    for db in [10.0, 20.0, 30.0, 40.0] {
        let cfg = SimConfig::new(4, db, 5, 500);
        let rep = message_error_rate(&cfg, None)?;
        println!("{db:>4} dB  MER {:.4} ± {:.4}  ({} of {})", rep.overall(), rep.std_error(), rep.errors, rep.triples);
    }
    Ok(())
}
