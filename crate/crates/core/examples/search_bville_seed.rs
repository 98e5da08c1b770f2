//! Lists perturbation seeds whose B-Ville pair falls inside every band.
//!
//! Usage: `cargo run --release --example search_bville_seed -- [START] [COUNT]`

use leadtime_core::simulate::search_bville_seeds;
use leadtime_core::Execution;

fn main() {
    let mut args = std::env::args().skip(1);
    let start: u64 = args.next().map_or(0, |a| a.parse().expect("START"));
    let count: u64 = args.next().map_or(1_000_000, |a| a.parse().expect("COUNT"));
    let hits = search_bville_seeds(start..start + count, Execution::available());
    println!("seed,distance,mean_change,median_change,sd_change,l1,c_hist_17,mid_error");
    for (seed, c) in hits.iter().take(20) {
        println!(
            "{seed},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            c.distance_to_reference(),
            c.mean_change,
            c.median_change,
            c.sd_change,
            c.l1,
            c.hist_cumulative_mid,
            c.mid_window_error
        );
    }
    eprintln!("{} of {count} seeds inside the bands", hits.len());
}
