//! Schmidt values of the built purification next to those of the exact
//! purification from dense diagonalization, at every cut of a short chain.
//!
//! ```text
//! cargo run --example spectrum_vs_exact -- [n] [beta]
//! ```

use thermal_tn::exact::{dense_hamiltonian, exact_purification, DEFAULT_DIM_CAP};
use thermal_tn::{build_model, build_thermal_purification, BuildConfig, ModelFamily, Params};

fn main() -> thermal_tn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(6);
    let beta = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);

    let mut params = Params::new();
    params.insert("g".into(), 1.05);
    let model = build_model(ModelFamily::Tfim, n, &params, None)?;
    let exact = exact_purification(&dense_hamiltonian(&model, DEFAULT_DIM_CAP)?, beta)?;
    let (state, _) = build_thermal_purification(&BuildConfig::new(model, beta).with_dt(0.005))?;

    for cut in 1..n {
        let built = state.schmidt_spectrum(cut)?;
        let reference = exact.schmidt_values(cut)?;
        let worst = reference
            .iter()
            .enumerate()
            .map(|(j, e)| (built.values.get(j).copied().unwrap_or(0.0) - e).abs())
            .fold(0.0, f64::max);
        let head: Vec<String> = built.values.iter().take(4).map(|v| format!("{v:.6}")).collect();
        println!(
            "cut {cut}: {} values, entropy {:.6}, leading [{}], max deviation {worst:.2e}",
            built.len(),
            built.entropy(),
            head.join(", ")
        );
    }
    Ok(())
}
