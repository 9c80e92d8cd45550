//! Compares the thermal MPO with exact diagonalization on a small chain, for
//! the untruncated state and for uniform truncations to a few bond dimensions.
//!
//! ```text
//! cargo run --example verify_small_chain -- [model] [n] [beta]
//! ```

use thermal_tn::harness::{run_verify, RunConfig};

fn main() -> thermal_tn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let model = args.first().cloned().unwrap_or_else(|| "heisenberg".into());
    let n = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let beta = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let cfg = RunConfig {
        g: (model == "tfim").then_some(1.05),
        seed: Some(7),
        model,
        n: vec![n],
        beta: vec![beta],
        q: vec![1, 2, 4, 8],
        ..RunConfig::default()
    };
    let report = run_verify(&cfg)?;
    println!("{report}");
    for b in report.breaches() {
        println!("breach: {b}");
    }
    Ok(())
}
