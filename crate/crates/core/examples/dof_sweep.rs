//! Sum rate against SNR for both schemes and the fitted high-SNR slope.

use kway_relay::metrics::snr_grid;
use kway_relay::prelude::*;
use kway_relay::tdma::aligned_dof_closed_form;

fn main() -> Result<()> {
    let grid = snr_grid(40.0, 60.0, 5.0)?;
    for scheme in [Scheme::Aligned, Scheme::Tdma] {
        let est = sum_rate_sweep(scheme, 4, 3, &grid, 200, 1, 1.0, None)?;
        println!("{scheme}:");
        for (db, r) in est.snr_grid_db.iter().zip(&est.sum_rates) {
            println!("  {db:>4} dB  {r:8.3} bit/s/Hz");
        }
        println!("  slope {:.3}", est.slope);
    }
    println!("closed form: aligned {}, tdma {}", aligned_dof_closed_form(4), tdma_dof_closed_form(4, 3));
    Ok(())
}
