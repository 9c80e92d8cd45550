//! Smallest bond dimension reproducing every local Pauli expectation in a
//! centered window to within `eps`, across a grid of `eps`.
//!
//! ```text
//! cargo run --release --example bond_scaling -- [n] [beta]
//! ```

use thermal_tn::harness::{run_scaling, RunConfig};

fn main() -> thermal_tn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(32);
    let beta = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let cfg = RunConfig {
        n: vec![n],
        beta: vec![beta],
        eps: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
        ..RunConfig::default()
    };
    let outcome = run_scaling(&cfg)?;
    print!("{outcome}");
    for breach in outcome.breaches() {
        println!("threshold breach: {breach}");
    }
    Ok(())
}
