//! `relex`: run replica-exchange Langevin experiments from a config file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use relex_core::acceptance;
use relex_core::diagnostics::chi2_decay_experiment;
use relex_core::harness::{
    discretization_error_experiment, kappa_sweep, run_comparison, write_bestsofar_csv,
    write_chi2decay_csv, write_discerr_csv, write_summary_csv, RunSummary,
};
use relex_core::objective::check_gradient;
use relex_core::rng::{Purpose, RngStream};
use relex_core::{Algorithm, Error, Result};

pub use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "relex",
    version,
    about = "Replica-exchange Langevin experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (TOML with sections objective, dynamics, run, sweep,
    /// diagnostics, discretization, gradcheck, output).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config value; later overrides win. KEY is section.key or
    /// a key name that is unique across sections.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Root seed (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 picks automatically.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Exit with status 4 when the experiment's expected ordering does not
    /// hold.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Low-temperature, high-temperature and replica-exchange runs on a
    /// common seed set.
    Compare,
    /// One comparison per kappa in sweep.kappas.
    Sweep,
    /// Chi-square decay of the pair law for each diagnostics.intensities.
    Chi2,
    /// Strong discretization error against a fine-step reference.
    Discerr,
    /// Analytic against central-difference gradients at random points.
    Gradcheck,
    /// The full acceptance suite.
    Check,
}

/// Parses `argv` (including the program name), runs the subcommand, and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("relex: {e}");
            if e.is_divergence() {
                EXIT_DIVERGENCE
            } else {
                EXIT_CONFIG
            }
        }
    }
}

/// Loads the config file (or defaults) and applies overrides in order.
fn resolve_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &cli.overrides {
        config.apply_override(o)?;
    }
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.to_string_lossy().into_owned();
    }
    Ok(config)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Returns whether the run passed its checks (always true without `--check`).
fn dispatch(cli: &Cli) -> Result<bool> {
    let config = resolve_config(cli)?;
    let out = PathBuf::from(&config.output.dir);
    let passed = match cli.command {
        Command::Compare => compare(&config, &out)?,
        Command::Sweep => sweep(&config, &out)?,
        Command::Chi2 => chi2(&config, &out)?,
        Command::Discerr => discerr(&config, &out)?,
        Command::Gradcheck => gradcheck(&config)?,
        Command::Check => {
            let outcomes = acceptance::run_all(config.run.seed, |o| println!("{o}"));
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!(
                "{} of {} criteria passed",
                outcomes.len() - failed,
                outcomes.len()
            );
            return Ok(failed == 0);
        }
    };
    Ok(passed || !cli.check)
}

fn report_comparison(label: &str, summaries: &[RunSummary; 3]) -> bool {
    for s in summaries {
        println!(
            "{label}{:<16} median final best {:.6}  mean swaps {:.1}  {:.2} s",
            s.algorithm.name(),
            s.median_final_best(),
            s.mean_swap_count(),
            s.wall_time.as_secs_f64()
        );
    }
    let [lt, _, re] = summaries;
    debug_assert_eq!(re.algorithm, Algorithm::ReplicaExchange);
    re.median_final_best() <= lt.median_final_best()
}

fn write_comparison(
    dir: &Path,
    suffix: &str,
    echo: &str,
    summaries: &[RunSummary; 3],
) -> Result<()> {
    write_bestsofar_csv(
        create(dir, &format!("bestsofar{suffix}.csv"))?,
        echo,
        summaries,
    )?;
    write_summary_csv(
        create(dir, &format!("summary{suffix}.csv"))?,
        echo,
        summaries,
    )?;
    Ok(())
}

fn compare(config: &Config, out: &Path) -> Result<bool> {
    let summaries = run_comparison(&config.sim_config(Algorithm::ReplicaExchange)?)?;
    write_comparison(out, "", &config.canonical(), &summaries)?;
    let ok = report_comparison("", &summaries);
    println!("compare: wrote {}", out.display());
    Ok(ok)
}

fn sweep(config: &Config, out: &Path) -> Result<bool> {
    let base = config.sim_config(Algorithm::ReplicaExchange)?;
    let mut ok = true;
    for (kappa, summaries) in kappa_sweep(&config.sweep.kappas, &base)? {
        let mut echo = config.clone();
        echo.objective.kappa = kappa;
        write_comparison(
            out,
            &format!("_kappa{kappa}"),
            &echo.canonical(),
            &summaries,
        )?;
        ok &= report_comparison(&format!("kappa {kappa:<5} "), &summaries);
    }
    println!("sweep: wrote {}", out.display());
    Ok(ok)
}

fn chi2(config: &Config, out: &Path) -> Result<bool> {
    let f = config.objective_spec()?.build()?;
    let mut fits = Vec::new();
    for &a in &config.diagnostics.intensities {
        let fit = chi2_decay_experiment(f.as_ref(), &config.decay_setup(a)?)?;
        println!(
            "a = {a:<6} rate {:.4} ± {:.4}  r² {:.3}  ({} points in fit)",
            fit.rate, fit.rate_std, fit.r2, fit.fitted_points
        );
        fits.push((a, fit));
    }
    write_chi2decay_csv(create(out, "chi2decay.csv")?, &config.canonical(), &fits)?;
    println!("chi2: wrote {}", out.join("chi2decay.csv").display());
    let mut sorted: Vec<&(f64, _)> = fits.iter().collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(sorted
        .windows(2)
        .all(|w| w[1].1.rate >= w[0].1.rate - w[0].1.rate_std.hypot(w[1].1.rate_std)))
}

fn discerr(config: &Config, out: &Path) -> Result<bool> {
    let f = config.objective_spec()?.build()?;
    let r = discretization_error_experiment(f.as_ref(), &config.discretization_setup())?;
    for p in &r.points {
        println!("eta {:<8} mse {:.4e} ± {:.1e}", p.eta, p.mse, p.stderr);
    }
    match r.slope {
        Some(s) => println!(
            "log-log slope {s:.3} (reference stepsize {})",
            r.reference_eta
        ),
        None => println!("log-log slope undefined (fewer than two nonzero errors)"),
    }
    write_discerr_csv(create(out, "discerr.csv")?, &config.canonical(), &r)?;
    println!("discerr: wrote {}", out.join("discerr.csv").display());
    Ok(r.slope.is_some_and(|s| (0.7..=1.3).contains(&s)))
}

fn gradcheck(config: &Config) -> Result<bool> {
    let f = config.objective_spec()?.build()?;
    let g = &config.gradcheck;
    if !(g.lower < g.upper) || g.points == 0 || !(g.step > 0.0) {
        return Err(Error::Config(
            "gradcheck needs lower < upper, points > 0 and step > 0".into(),
        ));
    }
    let mut rng = RngStream::for_chain(config.run.seed, Purpose::MonteCarlo, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..g.points {
        let p: Vec<f64> = (0..f.dimension())
            .map(|_| g.lower + (g.upper - g.lower) * rng.uniform())
            .collect();
        worst = worst.max(check_gradient(f.as_ref(), &p, g.step));
    }
    println!(
        "gradcheck: worst relative error {worst:.3e} over {} points (tolerance {:e})",
        g.points, g.tolerance
    );
    Ok(worst < g.tolerance)
}
