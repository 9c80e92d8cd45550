//! Builds a thermal purification for a transverse-field Ising chain and
//! prints local expectation values, `ln Z` and the bond profile.
//!
//! ```text
//! cargo run --example build_and_measure -- [n] [beta] [g] [dt]
//! ```

use std::time::Instant;

use thermal_tn::observable::pauli_window;
use thermal_tn::{build_model, build_thermal_purification, BuildConfig, ModelFamily, Params};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args()
        .nth(i)
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

fn main() -> thermal_tn::Result<()> {
    let n: usize = arg(1, 16);
    let beta: f64 = arg(2, 1.0);
    let g: f64 = arg(3, 1.05);
    let dt: f64 = arg(4, 0.05);

    let mut params = Params::new();
    params.insert("g".into(), g);
    let model = build_model(ModelFamily::Tfim, n, &params, None)?;

    let start = Instant::now();
    let (state, report) = build_thermal_purification(&BuildConfig::new(model, beta).with_dt(dt))?;
    println!(
        "n={n} beta={beta} g={g} dt={dt}: ln Z = {:.10}, {} steps, max bond {}, discarded {:.2e}, {:.2?}",
        report.log_z,
        report.step_count,
        report.max_bond_reached,
        report.cumulative_discarded_weight,
        start.elapsed()
    );
    println!("bond dims: {:?}", state.bond_dims());

    let observables = pauli_window(n, 2)?;
    let values = state.expectations(&observables)?;
    for (obs, v) in observables.iter().zip(values) {
        println!("  <{obs}> = {v:+.10}");
    }
    Ok(())
}
