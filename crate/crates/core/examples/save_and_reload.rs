//! Saves a thermal purification to disk, reloads it and checks that the
//! reloaded state gives identical expectations and Schmidt values.
//!
//! ```text
//! cargo run --example save_and_reload -- [path]
//! ```

use thermal_tn::observable::pauli_window;
use thermal_tn::serialize::{load_state, save_state};
use thermal_tn::{build_model, build_thermal_purification, BuildConfig, ModelFamily, Params};

fn main() -> thermal_tn::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("heisenberg_n12.ttns"));
    let model = build_model(ModelFamily::Heisenberg, 12, &Params::new(), None)?;
    let (state, _) = build_thermal_purification(&BuildConfig::new(model, 1.5))?;
    save_state(&state, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let back = load_state(&path)?;

    let obs = pauli_window(12, 4)?;
    let same_values = state.expectations(&obs)? == back.expectations(&obs)?;
    let same_spectrum = state.schmidt_spectrum(6)?.values == back.schmidt_spectrum(6)?.values;
    println!(
        "wrote {} ({bytes} bytes, bonds {:?})",
        path.display(),
        back.bond_dims()
    );
    println!("identical expectations: {same_values}, identical middle spectrum: {same_spectrum}");
    Ok(())
}
