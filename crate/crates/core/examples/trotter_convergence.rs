//! Second-order step-size convergence: error of local expectations against
//! exact diagonalization as the imaginary-time step shrinks, with the fitted
//! log-log slope.
//!
//! ```text
//! cargo run --example trotter_convergence -- [n] [beta]
//! ```

use thermal_tn::exact::{
    dense_hamiltonian, exact_expectation, exact_log_z, thermal_density, DEFAULT_DIM_CAP,
};
use thermal_tn::harness::fit_loglinear;
use thermal_tn::observable::pauli_window;
use thermal_tn::{build_model, build_thermal_purification, BuildConfig, ModelFamily, Params};

fn main() -> thermal_tn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(6);
    let beta = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);

    let mut params = Params::new();
    params.insert("g".into(), 1.05);
    let model = build_model(ModelFamily::Tfim, n, &params, None)?;
    let h = dense_hamiltonian(&model, DEFAULT_DIM_CAP)?;
    let rho = thermal_density(&h, beta)?;
    let log_z = exact_log_z(&h, beta)?;
    let obs = pauli_window(n, n)?;
    let exact: Vec<f64> = obs
        .iter()
        .map(|o| exact_expectation(&rho, o))
        .collect::<Result<_, _>>()?;

    let mut points = Vec::new();
    println!("{:>8} {:>12} {:>12}", "dt", "max error", "ln Z error");
    for dt in [0.2, 0.1, 0.05, 0.025, 0.0125] {
        let (state, report) = build_thermal_purification(&BuildConfig::new(model.clone(), beta).with_dt(dt))?;
        let err = state
            .expectations(&obs)?
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("{dt:>8} {err:>12.3e} {:>12.3e}", (report.log_z - log_z).abs());
        points.push((dt.ln(), err.ln()));
    }
    let fit = fit_loglinear(&points)?.with_form("lnErr-vs-lnDt");
    println!("\n{fit}");
    Ok(())
}
