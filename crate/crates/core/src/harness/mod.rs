//! Experiment drivers: oracle verification, locality across chain lengths,
//! Schmidt tail shape and bond-dimension scaling, with CSV and fit output.

mod config;
mod fit;
mod records;
mod runs;

pub use config::{default_delta_grid, RunConfig};
pub use fit::{fit_loglinear, local_slopes, FitReport};
pub use records::{
    append_fit_report, append_text, read_csv, read_csv_file, write_csv, write_csv_file, ScalingRecord,
    CSV_VERSION,
};
pub use runs::{
    check_q_min_monotone, error_ratio, run_locality, run_scaling, run_tail, run_verify,
    strictly_decreasing_fraction, tail_analysis, LocalityReport, LocalityRow, LocalitySummary, ScalingFit,
    ScalingOutcome, TailPoint, TailReport, VerifyReport, VerifyRow, LOCALITY_RATIO_MAX, NOISE_FLOOR,
    SCALING_CEILING_EXPONENT, TAIL_DECREASING_FRACTION, TAIL_R2_MIN, VERIFY_TOL,
};
