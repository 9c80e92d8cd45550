use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use thermal_tn::harness::{
    append_fit_report, append_text, run_locality, run_scaling, run_tail, run_verify, write_csv_file,
    RunConfig, TailPoint,
};
use thermal_tn::observable::pauli_window;
use thermal_tn::serialize::{load_state, save_state};
use thermal_tn::{build_thermal_purification, PurifiedMPS};

/// Thermal states of 1D chains as purified matrix product states.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare against exact diagonalization on small chains.
    Verify(RunArgs),
    /// Truncation error at fixed bond dimension across chain lengths.
    Locality(RunArgs),
    /// Schmidt tail shape at the middle cut.
    Tail(RunArgs),
    /// Smallest bond dimension per accuracy target.
    Scaling(RunArgs),
    /// Build one thermal state and save it with --state.
    Build(RunArgs),
    /// Print local Pauli expectations of a saved (or freshly built) state.
    Measure(RunArgs),
    /// Print the Schmidt spectrum of a saved (or freshly built) state.
    Spectrum(RunArgs),
}

/// Flags override values from --config.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    chi_max: Option<usize>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    eps: Vec<f64>,
    #[arg(long)]
    q: Vec<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fit report path (appended to).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Exit nonzero on any acceptance-threshold breach.
    #[arg(long)]
    strict: bool,
    /// Saved state file (written by build, read by measure and spectrum).
    #[arg(long)]
    state: Option<PathBuf>,
    /// Cut for spectrum (default: middle).
    #[arg(long)]
    cut: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                RunConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field { cfg.$field = v.into(); }
            )*};
        }
        set!(g, dt, tol, cutoff, window);
        if self.chi_max.is_some() {
            cfg.chi_max = self.chi_max;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        for (dst, src) in [(&mut cfg.beta, &self.beta), (&mut cfg.eps, &self.eps)] {
            if !src.is_empty() {
                *dst = src.clone();
            }
        }
        if !self.n.is_empty() {
            cfg.n = self.n.clone();
        }
        if !self.q.is_empty() {
            cfg.q = self.q.clone();
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.report.is_some() {
            cfg.report = self.report.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn single_state(&self, cfg: &RunConfig) -> Result<PurifiedMPS> {
        if let Some(path) = &self.state {
            return load_state(path).with_context(|| format!("loading {}", path.display()));
        }
        let (state, report) = build_thermal_purification(&cfg.build_config(cfg.n[0], cfg.beta[0])?)?;
        eprintln!("built n={} beta={}: {report:?}", cfg.n[0], cfg.beta[0]);
        Ok(state)
    }
}

fn report_breaches(breaches: &[String], strict: bool) -> Result<ExitCode> {
    for b in breaches {
        eprintln!("breach: {b}");
    }
    Ok(if strict && !breaches.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn append_report(path: Option<&Path>, text: &str) -> Result<()> {
    if let Some(p) = path {
        append_text(p, text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify(args) => {
            let cfg = args.config()?;
            let report = run_verify(&cfg)?;
            println!("{report}");
            if let Some(out) = &cfg.out {
                write_csv_file(out, &cfg.describe(), &report.rows)?;
            }
            append_report(
                cfg.report.as_deref(),
                &format!("## verify {}\n{report}\n", cfg.describe()),
            )?;
            // The untruncated comparison is the point of this command, so it always gates the exit code.
            report_breaches(&report.breaches(), true)
        }
        Command::Locality(args) => {
            let cfg = args.config()?;
            let report = run_locality(&cfg)?;
            println!("{report}");
            if let Some(out) = &cfg.out {
                write_csv_file(out, &cfg.describe(), &report.rows)?;
            }
            append_report(
                cfg.report.as_deref(),
                &format!("## locality {}\n{report}\n", cfg.describe()),
            )?;
            report_breaches(&report.breaches(), args.strict)
        }
        Command::Tail(args) => {
            let cfg = args.config()?;
            let reports = run_tail(&cfg)?;
            let mut points: Vec<TailPoint> = Vec::new();
            let mut breaches = Vec::new();
            for r in &reports {
                println!("{r}");
                points.extend(r.points.iter().cloned());
                breaches.extend(r.breaches());
                if let (Some(path), Some(fit)) = (&cfg.report, &r.sqrt_fit) {
                    append_fit_report(path, &format!("tail n={} beta={}", r.n, r.beta), fit)?;
                }
                if let (Some(path), Some(fit)) = (&cfg.report, &r.power_fit) {
                    append_fit_report(path, &format!("tail power law n={} beta={}", r.n, r.beta), fit)?;
                }
            }
            if let Some(out) = &cfg.out {
                write_csv_file(out, &cfg.describe(), &points)?;
            }
            report_breaches(&breaches, args.strict)
        }
        Command::Scaling(args) => {
            let cfg = args.config()?;
            let outcome = run_scaling(&cfg)?;
            println!("{outcome}");
            if let Some(out) = &cfg.out {
                write_csv_file(out, &cfg.describe(), &outcome.records)?;
            }
            if let Some(path) = &cfg.report {
                for f in &outcome.fits {
                    for fit in [&f.sqrt_fit, &f.power_fit].into_iter().flatten() {
                        append_fit_report(path, &format!("scaling n={} beta={}", f.n, f.beta), fit)?;
                    }
                }
            }
            report_breaches(&outcome.breaches(), args.strict)
        }
        Command::Build(args) => {
            let cfg = args.config()?;
            let Some(path) = &args.state else {
                bail!("build needs --state <file> to save the result");
            };
            let (state, report) = build_thermal_purification(&cfg.build_config(cfg.n[0], cfg.beta[0])?)?;
            save_state(&state, path)?;
            println!(
                "n={} beta={} dt={}: log_z={:.12} max_bond={} steps={} discarded={:.3e} -> {}",
                cfg.n[0],
                cfg.beta[0],
                cfg.dt,
                report.log_z,
                report.max_bond_reached,
                report.step_count,
                report.cumulative_discarded_weight,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Measure(args) => {
            let cfg = args.config()?;
            let state = args.single_state(&cfg)?;
            let rho = state.trace_out_auxiliary()?;
            println!("observable,value");
            for obs in pauli_window(state.n(), cfg.window)? {
                println!("{},{:.15e}", obs.label(), rho.expectation(&obs)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum(args) => {
            let cfg = args.config()?;
            let state = args.single_state(&cfg)?;
            let cut = args.cut.unwrap_or(state.n() / 2);
            let spectrum = state.schmidt_spectrum(cut)?;
            let tails = spectrum.tail_sums();
            println!("# cut {cut}, entropy {:.12}", spectrum.entropy());
            println!("j,lambda,tail_after");
            for (j, v) in spectrum.values.iter().enumerate() {
                println!("{},{:.15e},{:.6e}", j + 1, v, tails[j + 1]);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
