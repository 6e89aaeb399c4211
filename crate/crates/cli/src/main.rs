//! `fcir`: simulate fractional CIR paths, estimate zero-hitting
//! probabilities and write the results as CSV.

mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fcir::experiments::{
    appendix_cases, write_comparison_csv, write_manifest_csv, write_summary_csv, Harness, APPENDIX_DT,
    APPENDIX_T_END,
};
use fcir::sde::{simulate_x, TrajectoryResult, TrajectoryWriter};
use fcir::stratonovich::{residual_study, write_residual_csv};
use fcir::SimConfig;
use rayon::prelude::*;

use config::FileConfig;
use output::{create_dir, write_atomic, write_output, CliError};

/// Paths simulated per parallel batch when streaming trajectories.
const BATCH: u64 = 256;
const DEFAULT_APPENDIX_DUMP: u64 = 50;

#[derive(Parser)]
#[command(name = "fcir", version, about = "Fractional CIR simulation and zero-hitting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write `path_id,t,y,x` trajectories.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Trajectory CSV to write.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write only the first N paths (default: all).
        #[arg(long)]
        dump_paths: Option<u64>,
    },
    /// Estimate the zero-hitting probability on [0, T].
    Hitprob {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
    },
    /// Hitting probabilities over increasing k with shared noise.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated, strictly increasing drift numerators.
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
    },
    /// Pathwise ordering check between two drift numerators k1 < k2.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k1: Option<f64>,
        #[arg(long)]
        k2: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratonovich residual of simulated paths across step sizes.
    Residual {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated step sizes, each a multiple of the smallest.
        #[arg(long, value_delimiter = ',')]
        dts: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the published zero-hitting configurations and check each against
    /// its reported outcome. Exits with status 3 if any check fails.
    ReproAppendix {
        #[command(flatten)]
        run: RunArgs,
        /// Directory for the manifest and per-case trajectory CSVs.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Trajectories dumped per case.
        #[arg(long)]
        dump_paths: Option<u64>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Mean-reversion speed.
    #[arg(long)]
    a: Option<f64>,
    /// Drift numerator.
    #[arg(long)]
    k: Option<f64>,
    /// Volatility.
    #[arg(long)]
    sigma: Option<f64>,
    /// Hurst index in (0, 1).
    #[arg(long)]
    hurst: Option<f64>,
    /// Initial value of X [default: 1].
    #[arg(long)]
    x0: Option<f64>,
    /// Horizon T [default: 10].
    #[arg(long)]
    t_end: Option<f64>,
    /// Step size [default: 0.001].
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Number of Monte Carlo paths [default: 10000].
    #[arg(long)]
    paths: Option<u64>,
    /// Experiment seed [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// fBm generator: `fft` or `reference` (dense, at most 2048 steps).
    #[arg(long)]
    fbm_backend: Option<String>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    workers: Option<usize>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ModelArgs {
    fn into_flags(self) -> FileConfig {
        FileConfig {
            a: self.a,
            k: self.k,
            sigma: self.sigma,
            hurst: self.hurst,
            x0: self.x0,
            t_end: self.t_end,
            dt: self.dt,
            ..Default::default()
        }
    }
}

impl RunArgs {
    /// Merges these flags and `extra` over the config file, if any.
    fn resolve(self, extra: FileConfig) -> Result<FileConfig, CliError> {
        let file = FileConfig::load(self.config.as_deref())?;
        let flags = FileConfig {
            paths: self.paths,
            seed: self.seed,
            fbm_backend: self.fbm_backend,
            workers: self.workers,
            ..Default::default()
        };
        Ok(file.overridden_by(extra).overridden_by(flags))
    }
}

impl Command {
    fn resolve(self) -> Result<(Action, FileConfig), CliError> {
        let (action, run, mut flags) = match self {
            Command::Simulate { model, run, out, dump_paths } => {
                let mut f = model.into_flags();
                f.out = out;
                f.dump_paths = dump_paths;
                (Action::Simulate, run, f)
            }
            Command::Hitprob { model, run, out, label } => {
                let mut f = model.into_flags();
                f.out = out;
                f.label = label;
                (Action::Hitprob, run, f)
            }
            Command::Sweep { model, run, ks, out, label } => {
                let mut f = model.into_flags();
                f.ks = ks;
                f.out = out;
                f.label = label;
                (Action::Sweep, run, f)
            }
            Command::Compare { model, run, k1, k2, out } => {
                let mut f = model.into_flags();
                f.k1 = k1;
                f.k2 = k2;
                f.out = out;
                (Action::Compare, run, f)
            }
            Command::Residual { model, run, dts, out } => {
                let mut f = model.into_flags();
                f.dts = dts;
                f.out = out;
                (Action::Residual, run, f)
            }
            Command::ReproAppendix { run, out_dir, dump_paths } => {
                let f = FileConfig { out_dir, dump_paths, ..Default::default() };
                (Action::ReproAppendix, run, f)
            }
        };
        flags = run.resolve(flags)?;
        Ok((action, flags))
    }
}

#[derive(Clone, Copy)]
enum Action {
    Simulate,
    Hitprob,
    Sweep,
    Compare,
    Residual,
    ReproAppendix,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    ToleranceFailure,
}

fn run_simulate(c: &FileConfig) -> Result<Status, CliError> {
    let config = c.sim_config(c.require(c.k, "k")?)?;
    let out = c.out.clone().ok_or_else(|| CliError::validation("--out is required for simulate"))?;
    let n_paths = c.paths()?;
    let dump = c.dump_paths.unwrap_or(n_paths).min(n_paths);
    let seed = c.seed();
    let sampler = c.backend()?.build(*config.grid(), config.hurst())?;

    let mut hits = 0u64;
    write_atomic(&out, |w| {
        let mut writer = TrajectoryWriter::new(w);
        let mut start = 0;
        while start < n_paths {
            let end = (start + BATCH).min(n_paths);
            let batch: Vec<TrajectoryResult> = (start..end)
                .into_par_iter()
                .map(|i| simulate_x(&config, &sampler.sample(seed, i)))
                .collect::<Result<_, _>>()?;
            for (i, traj) in (start..end).zip(&batch) {
                hits += u64::from(traj.is_absorbed());
                if i < dump {
                    writer.write(i, traj).map_err(|e| CliError::io(out.display(), e))?;
                }
            }
            start = end;
        }
        writer.finish().map_err(|e| CliError::io(out.display(), e))?;
        Ok(())
    })?;
    eprintln!("simulated {n_paths} paths ({hits} absorbed before T), wrote {dump} to {}", out.display());
    Ok(Status::Ok)
}

fn run_hitprob(c: &FileConfig) -> Result<Status, CliError> {
    let config = c.sim_config(c.require(c.k, "k")?)?;
    let harness = Harness::new(c.backend()?);
    let s = harness.hitting_probability(&config, c.paths()?, c.seed())?;
    let label = c.label.as_deref().unwrap_or("hitprob");
    write_output(c.out.as_deref(), |w| {
        write_summary_csv(w, [(label, &s)]).map_err(|e| CliError::io("summary", e))
    })?;
    eprintln!(
        "{label}: {} of {} paths hit zero, fraction {:.4} [{:.4}, {:.4}]",
        s.n_hits, s.n_paths, s.fraction, s.ci_low, s.ci_high
    );
    Ok(Status::Ok)
}

fn run_sweep(c: &FileConfig) -> Result<Status, CliError> {
    let ks = c.ks.clone().ok_or_else(|| CliError::validation("--ks is required for sweep"))?;
    let first = *ks.first().ok_or_else(|| CliError::validation("--ks must not be empty"))?;
    let base = c.sim_config(first)?;
    let harness = Harness::new(c.backend()?);
    let report = harness.k_sweep(&base, &ks, c.paths()?, c.seed())?;
    let prefix = c.label.as_deref().unwrap_or("sweep");
    let labels: Vec<String> = ks.iter().map(|k| format!("{prefix}_k{k}")).collect();
    write_output(c.out.as_deref(), |w| {
        write_summary_csv(w, labels.iter().map(String::as_str).zip(&report.summaries))
            .map_err(|e| CliError::io("summary", e))
    })?;
    eprintln!(
        "fractions {:?}; paths with non-monotone absorption time in k: {}",
        report.fractions(),
        report.n_monotonicity_violations
    );
    Ok(Status::Ok)
}

fn run_compare(c: &FileConfig) -> Result<Status, CliError> {
    let k1 = c.require(c.k1, "k1")?;
    let k2 = c.require(c.k2, "k2")?;
    let base = c.sim_config(k1)?;
    let harness = Harness::new(c.backend()?);
    let report = harness.comparison(&base, k1, k2, c.paths()?, c.seed())?;
    write_output(c.out.as_deref(), |w| {
        write_comparison_csv(w, std::slice::from_ref(&report)).map_err(|e| CliError::io("comparison", e))
    })?;
    eprintln!(
        "order violations {}, absorption-time violations {}, max violation {:e}",
        report.n_order_violations, report.n_tau_violations, report.max_violation
    );
    Ok(Status::Ok)
}

fn run_residual(c: &FileConfig) -> Result<Status, CliError> {
    let dts = c.dts.clone().ok_or_else(|| CliError::validation("--dts is required for residual"))?;
    let config = c.sim_config(c.require(c.k, "k")?)?;
    let levels = residual_study(&config, &dts, c.paths()?, c.seed(), c.backend()?)?;
    write_output(c.out.as_deref(), |w| {
        write_residual_csv(w, &levels).map_err(|e| CliError::io("residual", e))
    })?;
    for l in &levels {
        eprintln!("dt {}: median residual {:.3e}", l.dt, l.median_residual);
    }
    Ok(Status::Ok)
}

fn run_repro_appendix(c: &FileConfig) -> Result<Status, CliError> {
    let n_paths = c.paths()?;
    let seed = c.seed();
    let dump = c.dump_paths.unwrap_or(DEFAULT_APPENDIX_DUMP).min(n_paths);
    let harness = Harness::new(c.backend()?);
    let out_dir = c.out_dir.clone().unwrap_or_else(|| PathBuf::from("appendix"));
    let cases = appendix_cases();
    let configs = cases
        .iter()
        .map(|case| case.config(APPENDIX_T_END, APPENDIX_DT))
        .collect::<Result<Vec<SimConfig>, _>>()?;
    create_dir(&out_dir)?;

    let mut rows = Vec::with_capacity(cases.len());
    for (case, config) in cases.iter().zip(&configs) {
        let summary = harness.hitting_probability(config, n_paths, seed)?;
        let sampler = harness.backend().build(*config.grid(), config.hurst())?;
        let path = out_dir.join(format!("{}.csv", case.label));
        let trajectories: Vec<TrajectoryResult> = (0..dump)
            .into_par_iter()
            .map(|i| simulate_x(config, &sampler.sample(seed, i)))
            .collect::<Result<_, _>>()?;
        write_atomic(&path, |w| {
            let mut writer = TrajectoryWriter::new(w);
            for (i, t) in (0..).zip(&trajectories) {
                writer.write(i, t).map_err(|e| CliError::io(path.display(), e))?;
            }
            writer.finish().map_err(|e| CliError::io(path.display(), e))?;
            Ok(())
        })?;
        let pass = case.expected.is_met(&summary);
        println!(
            "{} {}: fraction {:.4} ({} of {}), expected {}",
            if pass { "PASS" } else { "FAIL" },
            case.label,
            summary.fraction,
            summary.n_hits,
            summary.n_paths,
            case.expected
        );
        rows.push((*case, summary));
    }

    let manifest = out_dir.join("manifest.csv");
    write_atomic(&manifest, |w| {
        write_manifest_csv(w, &rows).map_err(|e| CliError::io(manifest.display(), e))
    })?;
    let failed = rows.iter().filter(|(case, s)| !case.expected.is_met(s)).count();
    println!("{} of {} cases within tolerance", rows.len() - failed, rows.len());
    Ok(if failed == 0 { Status::Ok } else { Status::ToleranceFailure })
}

fn execute(command: Command) -> Result<Status, CliError> {
    let (action, config) = command.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::validation(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match action {
        Action::Simulate => run_simulate(&config),
        Action::Hitprob => run_hitprob(&config),
        Action::Sweep => run_sweep(&config),
        Action::Compare => run_compare(&config),
        Action::Residual => run_residual(&config),
        Action::ReproAppendix => run_repro_appendix(&config),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ToleranceFailure) => ExitCode::from(3),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
