//! Command-line front end: `roughwave <command> --config FILE --out DIR`.
//!
//! Exit codes: 0 on success, 1 when the input is invalid (nothing is written),
//! 2 when a run fails.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{fbm_table, run_study, solve_table, StudyConfig, StudyKind, StudyResult};
use crate::flux::{check_monotone, godunov_flux, FluxSpec, NumericalFluxKind};
use crate::initial_data::RngState;

pub use config::{parse_config, parse_config_str};
pub use output::{csv_bytes, write_csv, write_manifest, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "roughwave", version, about = "Finite-volume schemes for scalar conservation laws with rough initial data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve every sample and write the fields at each snapshot.
    Solve(RunArgs),
    /// Write normalized fBm paths.
    Fbm(RunArgs),
    /// L¹ convergence rates against a fine reference solution.
    Converge(RunArgs),
    /// Growth of the initial total variation under mesh refinement.
    Tvscale(RunArgs),
    /// Growth of the initial Lip⁺ seminorm under mesh refinement.
    Lipscale(RunArgs),
    /// Total variation of the solution at the snapshot times.
    Tvdecay(RunArgs),
    /// Ratio of the Lip⁺-based TV-integral bound to its measured value.
    Sharpness(RunArgs),
    /// PRNG known answers, flux monotonicity probes and the Godunov oracle.
    Selfcheck,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override `samples` from the config file.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Override `base_seed` from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "ROUGHWAVE_WORKERS")]
    pub workers: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Fbm(_) => "fbm",
            Command::Converge(_) => "converge",
            Command::Tvscale(_) => "tvscale",
            Command::Lipscale(_) => "lipscale",
            Command::Tvdecay(_) => "tvdecay",
            Command::Sharpness(_) => "sharpness",
            Command::Selfcheck => "selfcheck",
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(&cli.command)
}

pub fn run(command: &Command) -> i32 {
    let outcome = match command {
        Command::Selfcheck => selfcheck().map(|lines| {
            for line in lines {
                println!("{line}");
            }
        }),
        Command::Solve(args)
        | Command::Fbm(args)
        | Command::Converge(args)
        | Command::Tvscale(args)
        | Command::Lipscale(args)
        | Command::Tvdecay(args)
        | Command::Sharpness(args) => run_study_command(command, args).map(|paths| {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("roughwave {}: {e}", command.name());
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_FAILURE
            }
        }
    }
}

/// Config file plus command-line overrides, validated.
pub fn resolve_config(args: &RunArgs) -> Result<StudyConfig> {
    let mut cfg = parse_config(&args.config).map_err(|e| match e {
        // An unreadable config is bad input, not a failed run.
        Error::Io { path, source } => Error::Validation(format!("{}: {source}", path.display())),
        other => other,
    })?;
    if let Some(n) = args.samples {
        cfg.n_samples = n;
    }
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn compute(command: &Command, cfg: &StudyConfig, workers: usize) -> Result<StudyResult> {
    match command {
        Command::Solve(_) => solve_table(cfg, workers),
        Command::Fbm(_) => fbm_table(cfg),
        Command::Converge(_) => run_study(StudyKind::Converge, cfg, workers),
        Command::Tvscale(_) => run_study(StudyKind::TvScale, cfg, workers),
        Command::Lipscale(_) => run_study(StudyKind::LipScale, cfg, workers),
        Command::Tvdecay(_) => run_study(StudyKind::TvDecay, cfg, workers),
        Command::Sharpness(_) => run_study(StudyKind::Sharpness, cfg, workers),
        Command::Selfcheck => Err(Error::InvalidArgument("selfcheck has no table".into())),
    }
}

/// Run a table-producing command; returns the files written.
pub fn run_study_command(command: &Command, args: &RunArgs) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let cfg = resolve_config(args)?;
    let result = compute(command, &cfg, args.workers.unwrap_or(0))?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let name = command.name();
    let csv_path = args.out.join(format!("{name}.csv"));
    let manifest_path = args.out.join(format!("{name}.manifest.json"));
    write_csv(&result, &csv_path)?;
    let manifest = RunManifest {
        command: name.to_owned(),
        config_path: Some(absolute(&args.config)),
        base_seed: Some(cfg.base_seed),
        sample_seeds: result.seeds.clone(),
        config: Some(cfg),
        cell_convention: output::CELL_CONVENTION,
        version: env!("CARGO_PKG_VERSION"),
        outputs: vec![csv_path.clone()],
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    write_manifest(&manifest, &manifest_path)?;
    Ok(vec![csv_path, manifest_path])
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

/// Known-answer values of the seed-0 splitmix64 stream.
pub const PRNG_KNOWN_ANSWERS: [u64; 2] = [0xE220_A839_7B1D_CDAF, 0x6E78_9E6A_A1B9_65F4];

/// Godunov flux by brute force: min (a ≤ b) or max (a > b) of `f` over a
/// dense sampling of the interval, endpoints and critical points included.
pub fn godunov_sampling_oracle(flux: FluxSpec, a: f64, b: f64, samples: usize) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let candidates = (0..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
        .chain(flux.critical_points().iter().copied().filter(|c| (lo..=hi).contains(c)))
        .map(|u| flux.value(u));
    if a <= b {
        candidates.fold(f64::INFINITY, f64::min)
    } else {
        candidates.fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Oracle checks an operator can run without the test harness. Returns the
/// report lines; any failed check is an error.
pub fn selfcheck() -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut failures = Vec::new();

    let mut rng = RngState::new(0);
    for (i, &expected) in PRNG_KNOWN_ANSWERS.iter().enumerate() {
        let got = rng.next_u64();
        let ok = got == expected;
        lines.push(format!(
            "prng seed=0 draw={i}: {got:#018X} (expected {expected:#018X}) {}",
            if ok { "ok" } else { "FAIL" }
        ));
        if !ok {
            failures.push(format!("prng draw {i}"));
        }
    }

    for flux in [FluxSpec::Burgers, FluxSpec::Cubic, FluxSpec::Linear] {
        let speed = flux.max_wave_speed(-1.0, 1.0)?;
        for kind in NumericalFluxKind::ALL {
            if !kind.supports(flux) {
                continue;
            }
            let report = check_monotone(kind.with_ratio(1.0 / speed), flux, (-1.0, 1.0), 64)?;
            lines.push(format!(
                "monotone {flux}/{kind}: {} pairs, {} violations {}",
                report.pairs_checked,
                report.violations,
                if report.monotone { "ok" } else { "FAIL" }
            ));
            if !report.monotone {
                failures.push(format!("monotonicity of {kind} for {flux}"));
            }
        }
    }

    let mut rng = RngState::new(0x5EED);
    for flux in [FluxSpec::Burgers, FluxSpec::Cubic] {
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let a = 2.0 * rng.next_uniform() - 1.0;
            let b = 2.0 * rng.next_uniform() - 1.0;
            let diff = (godunov_flux(flux, a, b) - godunov_sampling_oracle(flux, a, b, 1000)).abs();
            worst = worst.max(diff);
        }
        let ok = worst <= 1e-10;
        lines.push(format!(
            "godunov oracle {flux}: 1000 pairs, max deviation {worst:e} {}",
            if ok { "ok" } else { "FAIL" }
        ));
        if !ok {
            failures.push(format!("godunov oracle for {flux}"));
        }
    }

    if failures.is_empty() {
        lines.push("selfcheck passed".into());
        Ok(lines)
    } else {
        for line in &lines {
            eprintln!("{line}");
        }
        Err(Error::Check(failures.join(", ")))
    }
}

