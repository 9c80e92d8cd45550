//! Schmidt tail study: for each inverse temperature, the smallest number of
//! Schmidt values `Q` at the middle cut whose discarded weight is below each
//! target `delta`, with `ln Q` fitted against `sqrt(ln 1/delta)` and against
//! `ln 1/delta`.
//!
//! ```text
//! cargo run --release --example schmidt_tail -- [n] [beta ...]
//! ```

use thermal_tn::harness::{run_tail, RunConfig};

fn main() -> thermal_tn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(32);
    let betas: Vec<f64> = args.iter().skip(1).filter_map(|s| s.parse().ok()).collect();
    let cfg = RunConfig {
        n: vec![n],
        beta: if betas.is_empty() {
            vec![0.5, 1.0, 2.0]
        } else {
            betas
        },
        ..RunConfig::default()
    };
    for report in run_tail(&cfg)? {
        println!("{report}");
        println!(
            "strictly decreasing local exponents: {:.0}%\n",
            100.0 * report.decreasing_fraction()
        );
    }
    Ok(())
}
