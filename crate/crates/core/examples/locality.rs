//! Truncation error in a centered window as the chain grows: each length is
//! compared against its own untruncated reference.
//!
//! ```text
//! cargo run --release --example locality -- [beta] [q ...]
//! ```

use thermal_tn::harness::{run_locality, RunConfig};

fn main() -> thermal_tn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let beta = args.first().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let qs: Vec<usize> = args.iter().skip(1).filter_map(|s| s.parse().ok()).collect();
    let cfg = RunConfig {
        n: vec![16, 32, 64],
        beta: vec![beta],
        q: if qs.is_empty() { vec![2, 4, 8, 32] } else { qs },
        ..RunConfig::default()
    };
    print!("{}", run_locality(&cfg)?);
    Ok(())
}
