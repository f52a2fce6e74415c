//! Command-line front end for `ipr-rmt`.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for runtime or data errors.
//! The resolved settings of every run are echoed to stderr as one JSON line;
//! feeding that line back through `--config` reproduces the output.

pub mod args;
pub mod error;
pub mod output;
pub mod settings;

use std::ffi::OsString;

use clap::Parser;
use ipr_rmt::ensembles::EnsembleKind;
use ipr_rmt::experiments::{
    conditional_ipr, convergence_study, ks_distance, spectrum_ipr_map_streaming, Bin, ConvergenceMode, RunConfig,
    RunSummary,
};
use ipr_rmt::ipr::EigRecord;
use ipr_rmt::rng::stream;
use ipr_rmt::theory::{cdf_ell, density_ell, mean_ell, mean_ipr_depletion_finite_n, sample_ell, TheoryQuery};
use serde::Serialize;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::output::{num, with_output, write_density_csv, write_svg_scatter, write_xy_csv, RecordsCsv};
use crate::settings::{parse_grid, Settings};

/// Parse `argv` (including the program name), run the command and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    let base = match command.config_path() {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut settings = base.overlay(command.flag_settings());
    match command {
        Command::SampleSpectrum { .. } => sample_spectrum(&mut settings),
        Command::TheoryDensity { .. } => theory_table(&mut settings, "density"),
        Command::TheoryCdf { .. } => theory_table(&mut settings, "cdf"),
        Command::TheorySample { .. } => theory_sample(&mut settings),
        Command::TheoryMean { .. } => theory_mean(&mut settings),
        Command::Compare { .. } => compare(&mut settings),
        Command::Convergence { .. } => convergence(&mut settings),
        Command::Figure { .. } => figure(&mut settings),
    }
}

fn echo(settings: &Settings) -> Result<(), CliError> {
    eprintln!("{}", serde_json::to_string(settings)?);
    Ok(())
}

fn run_config(settings: &mut Settings, default_trials: usize) -> Result<RunConfig, CliError> {
    let spec = settings.resolve_ensemble()?;
    let trials = *settings.trials.get_or_insert(default_trials);
    let q_set = settings.resolve_q_list();
    let seed = settings.resolve_seed()?;
    let mut config = RunConfig::new(spec, trials, q_set, seed);
    config.workers = settings.resolve_workers();
    config.validate()?;
    Ok(config)
}

/// Run `config`, streaming every record into `each`.
fn run_records<F>(config: &RunConfig, mut each: F) -> Result<RunSummary, CliError>
where
    F: FnMut(&EigRecord) -> Result<(), CliError>,
{
    let mut failure = None;
    let result = spectrum_ipr_map_streaming(config, |batch| {
        for r in batch {
            if let Err(e) = each(r) {
                failure = Some(e);
                return Err(ipr_rmt::Error::Unsupported("output aborted".into()));
            }
        }
        Ok(())
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let summary = result?;
    for (trial, reason) in &summary.skipped {
        eprintln!("warning: trial {trial} skipped: {reason}");
    }
    Ok(summary)
}

fn sample_spectrum(settings: &mut Settings) -> Result<(), CliError> {
    let config = run_config(settings, 10)?;
    echo(settings)?;
    let mut kept = Vec::new();
    let want_svg = settings.svg.is_some();
    with_output(settings.out.as_deref(), |w| {
        let mut csv = RecordsCsv::new(w, &config.q_set)?;
        run_records(&config, |r| {
            if want_svg {
                kept.push(r.clone());
            }
            csv.write(r)
        })?;
        csv.finish()
    })?;
    if let Some(svg) = &settings.svg {
        write_svg_scatter(&kept, config.q_set[0], config.spec.is_real(), Some(svg))?;
    }
    Ok(())
}

fn figure(settings: &mut Settings) -> Result<(), CliError> {
    let config = run_config(settings, 1)?;
    let q = settings.resolve_single_q()?;
    echo(settings)?;
    let mut records = Vec::new();
    run_records(&config, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    write_svg_scatter(&records, q, config.spec.is_real(), settings.out.as_deref())
}

fn law(settings: &mut Settings) -> Result<TheoryQuery, CliError> {
    let q = settings.resolve_single_q()?;
    let y = Settings::require(&settings.y, "y")?;
    let tau = *settings.tau.get_or_insert(0.0);
    Ok(TheoryQuery::new(q, y, tau)?)
}

fn theory_table(settings: &mut Settings, what: &str) -> Result<(), CliError> {
    let query = law(settings)?;
    let (lo, hi) = query.support();
    let grid = parse_grid(settings.grid.get_or_insert_with(|| format!("{lo}:{hi}:500")))?;
    echo(settings)?;
    let values = grid
        .iter()
        .map(|&x| match what {
            "density" => density_ell(query.q, x, query.y, query.tau),
            _ => cdf_ell(query.q, x, query.y, query.tau),
        })
        .collect::<ipr_rmt::Result<Vec<f64>>>()?;
    match what {
        "density" => write_density_csv(&grid, &values, settings.out.as_deref()),
        _ => write_xy_csv(&grid, &values, what, settings.out.as_deref()),
    }
}

fn theory_sample(settings: &mut Settings) -> Result<(), CliError> {
    let query = law(settings)?;
    let count = *settings.count.get_or_insert(10_000);
    let seed = settings.resolve_seed()?;
    echo(settings)?;
    let mut rng = stream(seed, 0);
    with_output(settings.out.as_deref(), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["ell"])?;
        for _ in 0..count {
            csv.write_record([num(sample_ell(query.q, query.y, query.tau, &mut rng)?)])?;
        }
        csv.flush()?;
        Ok(())
    })
}

fn write_json<T: Serialize>(value: &T, settings: &Settings) -> Result<(), CliError> {
    with_output(settings.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

#[derive(Serialize)]
struct MeanReport {
    q: u32,
    y: f64,
    tau: f64,
    /// Smallest and largest possible IPR in the limit.
    support: (f64, f64),
    limit_mean: f64,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_n_mean: Option<f64>,
}

fn theory_mean(settings: &mut Settings) -> Result<(), CliError> {
    let query = law(settings)?;
    echo(settings)?;
    let finite_n_mean = settings.n.map(|n| mean_ipr_depletion_finite_n(n, query.q, query.y, query.tau)).transpose()?;
    let report = MeanReport {
        q: query.q,
        y: query.y,
        tau: query.tau,
        support: query.support(),
        limit_mean: mean_ell(query.q, query.y, query.tau)?,
        n: settings.n,
        finite_n_mean,
    };
    write_json(&report, settings)
}

#[derive(Serialize)]
struct CompareReport {
    ks_distance: f64,
    sample_count: usize,
    threshold: f64,
    pass: bool,
    sample_mean: f64,
    sample_std: f64,
    theory_mean: f64,
    q: u32,
    y_center: f64,
    rel_width: f64,
    x_window: f64,
    #[serde(rename = "N")]
    n: usize,
    tau: f64,
    trials: usize,
    skipped_trials: usize,
}

fn compare(settings: &mut Settings) -> Result<(), CliError> {
    let mut config = run_config(settings, 100)?;
    let q = settings.resolve_single_q()?;
    let tau = match config.spec.kind {
        EnsembleKind::EllipticReal => config.spec.tau,
        EnsembleKind::GinibreReal => 0.0,
        _ => return Err(CliError::Usage("compare needs the elliptic or real Ginibre ensemble".into())),
    };
    if tau >= 1.0 {
        return Err(CliError::Usage("compare needs τ < 1: the symmetric ensemble has no complex eigenvalues".into()));
    }
    config.bin =
        Bin { y_center: Settings::require(&settings.y, "y")?, rel_width: *settings.relwidth.get_or_insert(0.1) };
    config.x_window = *settings.xwindow.get_or_insert(0.5);
    let threshold = *settings.threshold.get_or_insert(0.06);
    config.validate()?;
    echo(settings)?;
    let mut records = Vec::new();
    let summary = run_records(&config, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    let n = config.spec.n;
    let y = config.bin.y_center;
    let dist = conditional_ipr(&records, n, q, config.bin, config.x_window)?;
    let ks = ks_distance(&dist, |l| cdf_ell(q, l, y, tau).unwrap_or(f64::NAN));
    let report = CompareReport {
        ks_distance: ks,
        sample_count: dist.count(),
        threshold,
        pass: ks < threshold,
        sample_mean: dist.summary().mean,
        sample_std: dist.summary().std,
        theory_mean: mean_ell(q, y, tau)?,
        q,
        y_center: y,
        rel_width: config.bin.rel_width,
        x_window: config.x_window,
        n,
        tau,
        trials: config.trials,
        skipped_trials: summary.skipped.len(),
    };
    write_json(&report, settings)
}

fn convergence(settings: &mut Settings) -> Result<(), CliError> {
    let q = settings.resolve_single_q()?;
    let mode = match (settings.s, settings.t) {
        (Some(s), Some(t)) => ConvergenceMode::FixedMixing { s, t },
        (None, None) => {
            let query = law(settings)?;
            ConvergenceMode::Depletion { y: query.y, tau: query.tau }
        }
        _ => return Err(CliError::Usage("--s and --t must be given together".into())),
    };
    let n_list = settings.n_list.get_or_insert_with(|| vec![256, 1024, 4096]).clone();
    let trials = *settings.trials.get_or_insert(10_000);
    let seed = settings.resolve_seed()?;
    echo(settings)?;
    let rows = convergence_study(q, mode, &n_list, trials, seed)?;
    with_output(settings.out.as_deref(), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["N", "mean", "std", "std_error", "theory_mean"])?;
        for r in &rows {
            csv.write_record([r.n.to_string(), num(r.mean), num(r.std), num(r.std_error), num(r.theory_mean)])?;
        }
        csv.flush()?;
        Ok(())
    })
}
