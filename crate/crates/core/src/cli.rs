//! Command-line surface: subcommands mirror the experiment drivers, flags
//! mirror config keys (with `--set section.key=value` overrides), exit code 0
//! on pass, 1 on property failure, 2 on usage or configuration errors.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{apply_override, parse_config, validate_config, RunConfig};
use crate::error::Result;
use crate::experiments::{
    run_acoustic_decay, run_example42, run_limit_convergence, run_linearized_probe,
    run_operator_suite, run_uniform_sweep,
};
use crate::experiments::acoustic_decay::AcousticDecayConfig;
use crate::experiments::example42::Example42Config;
use crate::experiments::linearized_probe::LinearizedProbeConfig;
use crate::model::{validate_assumptions, MainSystem, StateU};
use crate::norms::{frequency_split_report, CompositeNormAccumulator};
use crate::params::ParamTriple;
use crate::report::{fmt_float, LinePlot, ReportWriter};
use crate::spectral::{make_grid, random_band_limited_field};
use crate::stepper::{integrate_full, Monitor};

#[derive(Parser)]
#[command(
    name = "lowmach",
    about = "Pseudospectral laboratory for the scaled low-Mach-number Navier-Stokes systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// JSON config file; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides config and LOWMACH_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key: --set section.key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Random seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per dimension override.
    #[arg(long)]
    n: Option<usize>,
    /// Dimension override.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the transformed system for a single parameter triple.
    Simulate(CommonArgs),
    /// Uniform-boundedness sweep over the (eps, mu, kappa) grid.
    Sweep(CommonArgs),
    /// Verify the frequency-localization operator calculus.
    VerifyOperators(CommonArgs),
    /// Energy identities of the simplified constant-coefficient system.
    Example42 {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        beta: Option<f64>,
        /// Comma-separated eps list.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Singular-limit convergence with well-prepared data.
    LimitConvergence(CommonArgs),
    /// Windowed local-energy decay of the scaled wave equation.
    AcousticDecay {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated eps list.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Dimensions to run (comma-separated).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
    },
    /// Structural-assumption validator for a coefficient preset.
    ValidateModel {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "perfect-gas")]
        preset: String,
    },
    /// Growth-factor probe for the frozen-coefficient linearized system.
    LinearizedProbe {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated eps list.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
}

fn load_config(common: &CommonArgs, experiment: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => {
            let mut c = RunConfig::default();
            c.experiment = experiment.to_string();
            c
        }
    };
    cfg.experiment = experiment.to_string();
    for spec in &common.overrides {
        apply_override(&mut cfg, spec)?;
    }
    if let Some(seed) = common.seed {
        cfg.data.seed = seed;
    }
    if let Some(n) = common.n {
        cfg.grid.n = n;
        cfg.data.band = cfg.data.band.min(n / 3);
    }
    if let Some(d) = common.d {
        cfg.grid.d = d;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.display().to_string();
    } else if let Ok(root) = std::env::var("LOWMACH_OUT") {
        cfg.output.dir = PathBuf::from(root)
            .join(&cfg.output.dir)
            .display()
            .to_string();
    }
    validate_config(&cfg)?;
    Ok(cfg)
}

fn print_checks(checks: &[crate::experiments::CheckRow]) {
    for c in checks {
        println!(
            "[{}] {} = {:.6e} ({} {:.3e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.relation,
            c.threshold
        );
    }
}

fn exec_simulate(cfg: &RunConfig) -> Result<bool> {
    let grid = make_grid(cfg.grid.d, cfg.grid.n, cfg.grid.length)?;
    let a = ParamTriple::new(
        cfg.params.eps[0],
        cfg.params.mu[0],
        cfg.params.kappa[0],
    )?;
    let coeffs = cfg.model.build()?;
    let sys = MainSystem::new(grid.clone(), a, coeffs);
    let s = cfg.data.sobolev_order;
    let sigma = s + 1.0;
    let state0 = StateU::new(
        random_band_limited_field(cfg.data.seed, &grid, cfg.data.band, sigma, cfg.data.target_norm)?,
        (0..cfg.grid.d)
            .map(|i| {
                random_band_limited_field(
                    cfg.data.seed + 1 + i as u64,
                    &grid,
                    cfg.data.band,
                    sigma,
                    cfg.data.target_norm,
                )
            })
            .collect::<Result<_>>()?,
        random_band_limited_field(cfg.data.seed + 4, &grid, cfg.data.band, sigma, cfg.data.target_norm)?,
    )?;

    let writer = ReportWriter::new(&cfg.output.dir, "simulate", &cfg.output.formats)?;
    let mut acc = CompositeNormAccumulator::new(a, s);
    let mut rows: Vec<crate::norms::NormReport> = Vec::new();
    {
        let mut monitors: Vec<Monitor> = vec![Box::new(|t, fields| {
            let state = StateU::from_bundle(fields);
            acc.record(t, &state.p, &state.v, &state.theta)?;
            rows.push(frequency_split_report(
                t,
                &state.p,
                &state.v,
                &state.theta,
                &a,
                s,
                acc.value(),
            )?);
            Ok(())
        })];
        integrate_full(&sys, state0.to_bundle(), &cfg.stepper, &mut monitors)?;
    }

    // NormReport CSV: one row per recorded time.
    if !rows.is_empty() {
        let mut text = rows[0].csv_header();
        text.push('\n');
        for r in &rows {
            text.push_str(&r.csv_row());
            text.push('\n');
        }
        if cfg.output.formats.iter().any(|f| f == "csv") {
            fs::write(writer.path("csv"), text)?;
        }
    }
    let mut plot = LinePlot::new("composite norm along the trajectory", "t", "norm");
    plot.add_series(
        "composite",
        &rows.iter().map(|r| (r.time, r.composite)).collect::<Vec<_>>(),
    );
    plot.add_series(
        "split_high",
        &rows.iter().map(|r| (r.time, r.split_high)).collect::<Vec<_>>(),
    );
    writer.write_plot(&plot)?;
    writer.write_summary(true, cfg, &json!({ "composite": acc.value() }))?;
    println!("composite norm over [0, {}]: {}", cfg.stepper.t_end, fmt_float(acc.value()));
    Ok(true)
}

fn exec_sweep(cfg: &RunConfig) -> Result<bool> {
    let report = run_uniform_sweep(cfg)?;
    let writer = ReportWriter::new(&cfg.output.dir, "sweep", &cfg.output.formats)?;
    writer.write_csv(&report.table)?;
    let mut plot = LinePlot::new("composite norm vs eps", "eps", "composite").loglog();
    for (mu, kappa) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        let pts: Vec<(f64, f64)> = report
            .rows
            .iter()
            .filter(|r| r.mu == mu && r.kappa == kappa)
            .map(|r| (r.eps, r.composite))
            .collect();
        if !pts.is_empty() {
            plot.add_series(&format!("mu={mu}, kappa={kappa}"), &pts);
        }
    }
    writer.write_plot(&plot)?;
    writer.write_summary(report.pass, cfg, &report)?;
    print_checks(&report.checks);
    Ok(report.pass)
}

fn exec_verify_operators(cfg: &RunConfig) -> Result<bool> {
    let report = run_operator_suite(cfg.data.seed, cfg.grid.n, cfg.grid.d)?;
    let writer = ReportWriter::new(&cfg.output.dir, "verify_operators", &cfg.output.formats)?;
    writer.write_csv(&report.table)?;
    writer.write_summary(report.pass, cfg, &report)?;
    print_checks(&report.checks);
    Ok(report.pass)
}

fn exec_example42(cfg: &RunConfig, beta: Option<f64>, eps: &[f64], t_end: Option<f64>) -> Result<bool> {
    let mut ex = Example42Config {
        n: cfg.grid.n.min(64),
        d: cfg.grid.d,
        seed: cfg.data.seed,
        band: cfg.data.band.min(4),
        ..Default::default()
    };
    if let Some(b) = beta {
        ex.beta = b;
    }
    if !eps.is_empty() {
        ex.eps_list = eps.to_vec();
    }
    if let Some(t) = t_end {
        ex.t_end = t;
    }
    let report = run_example42(&ex)?;
    let writer = ReportWriter::new(&cfg.output.dir, "example42", &cfg.output.formats)?;
    writer.write_csv(&report.table)?;
    let mut plot = LinePlot::new("example-system energies", "t", "energy");
    if let (Some(t), Some(e)) = (report.table.column("t"), report.table.column("dissipation_energy")) {
        plot.add_series("E(t)", &t.iter().copied().zip(e).collect::<Vec<_>>());
    }
    writer.write_plot(&plot)?;
    writer.write_summary(report.pass, &ex, &report)?;
    print_checks(&report.checks);
    Ok(report.pass)
}

fn exec_limit_convergence(cfg: &RunConfig) -> Result<bool> {
    let report = run_limit_convergence(cfg)?;
    let writer = ReportWriter::new(&cfg.output.dir, "limit_convergence", &cfg.output.formats)?;
    writer.write_csv(&report.table)?;
    let mut plot = LinePlot::new("pressure norm vs eps", "eps", "P(eps)").loglog();
    plot.add_series(
        "P(eps)",
        &report.rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>(),
    );
    plot.add_series(
        "D(eps)",
        &report.rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>(),
    );
    writer.write_plot(&plot)?;
    writer.write_summary(report.pass, cfg, &report)?;
    print_checks(&report.checks);
    Ok(report.pass)
}

fn exec_acoustic_decay(cfg: &RunConfig, eps: &[f64], dims: &[usize]) -> Result<bool> {
    let mut ac = AcousticDecayConfig::default();
    if !eps.is_empty() {
        ac.eps_list = eps.to_vec();
    }
    if !dims.is_empty() {
        ac.dims = dims.to_vec();
    }
    let report = run_acoustic_decay(&ac)?;
    let writer = ReportWriter::new(&cfg.output.dir, "acoustic_decay", &cfg.output.formats)?;
    writer.write_csv(&report.table)?;
    let mut plot = LinePlot::new("windowed acoustic energy", "t", "W(t)");
    for &(d, eps, _, _, _) in &report.rows {
        let pts: Vec<(f64, f64)> = report
            .table
            .rows
            .iter()
            .filter(|r| r[0] == d as f64 && r[1] == eps)
            .map(|r| (r[2], r[3]))
            .collect();
        plot.add_series(&format!("{d}d eps={eps}"), &pts);
    }
    writer.write_plot(&plot)?;
    writer.write_summary(report.pass, &ac, &report)?;
    print_checks(&report.checks);
    Ok(report.pass)
}

fn exec_validate_model(cfg: &RunConfig, preset: &str) -> Result<bool> {
    let mut model_cfg = cfg.model.clone();
    model_cfg.preset = preset.to_string();
    let coeffs = model_cfg.build()?;
    let report = validate_assumptions(&coeffs, 1.0, 100)?;
    println!("clause                                         status       margin");
    for c in &report.clauses {
        println!(
            "{:<46} {:<12} {:.3e}",
            c.name,
            format!("{:?}", c.status),
            c.margin
        );
    }
    let writer = ReportWriter::new(&cfg.output.dir, "validate_model", &cfg.output.formats)?;
    writer.write_summary(report.pass(), cfg, &report.to_json())?;
    Ok(report.pass())
}

fn exec_linearized_probe(cfg: &RunConfig, eps: &[f64]) -> Result<bool> {
    let mut pc = LinearizedProbeConfig {
        seed: cfg.data.seed,
        n: cfg.grid.n.min(64),
        d: cfg.grid.d,
        ..Default::default()
    };
    if !eps.is_empty() {
        pc.eps_list = eps.to_vec();
    }
    let report = run_linearized_probe(&pc)?;
    let writer = ReportWriter::new(&cfg.output.dir, "linearized_probe", &cfg.output.formats)?;
    writer.write_csv(&report.table)?;
    writer.write_summary(report.pass, &pc, &report)?;
    print_checks(&report.checks);
    Ok(report.pass)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run_command(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/usage text
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };

    let outcome = match &cli.command {
        Command::Simulate(common) => load_config(common, "simulate").and_then(|c| exec_simulate(&c)),
        Command::Sweep(common) => load_config(common, "sweep").and_then(|c| exec_sweep(&c)),
        Command::VerifyOperators(common) => {
            load_config(common, "verify-operators").and_then(|c| exec_verify_operators(&c))
        }
        Command::Example42 {
            common,
            beta,
            eps,
            t_end,
        } => load_config(common, "example42")
            .and_then(|c| exec_example42(&c, *beta, eps, *t_end)),
        Command::LimitConvergence(common) => {
            load_config(common, "limit-convergence").and_then(|c| exec_limit_convergence(&c))
        }
        Command::AcousticDecay { common, eps, dims } => {
            load_config(common, "acoustic-decay").and_then(|c| exec_acoustic_decay(&c, eps, dims))
        }
        Command::ValidateModel { common, preset } => {
            load_config(common, "validate-model").and_then(|c| exec_validate_model(&c, preset))
        }
        Command::LinearizedProbe { common, eps } => {
            load_config(common, "linearized-probe").and_then(|c| exec_linearized_probe(&c, eps))
        }
    };

    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                crate::error::Error::Config { .. }
                | crate::error::Error::UnknownExperiment { .. }
                | crate::error::Error::Io(_) => 2,
                crate::error::Error::InvalidParameter(_) => 2,
                _ => 1,
            }
        }
    }
}
