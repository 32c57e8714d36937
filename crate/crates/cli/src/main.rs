use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use weibull_bias::dataset::parse_data;
use weibull_bias::divergence::{kl_divergence, KlInput};
use weibull_bias::estimators::bias_factors_with;
use weibull_bias::simulation::{run, SimulationConfig};
use weibull_bias::{fit, CensoredBiasForm, Method, MmleOptions, PPlugin, WeibullParams};

/// Weibull shape and scale estimation with first-order bias correction.
#[derive(Debug, Parser)]
#[command(name = "weibull-bias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit estimators to a data file (`value[,delta]` per line).
    Fit {
        file: PathBuf,
        /// Comma-separated subset of ML, ROSS, MLC, MMLE. ROSS is skipped for
        /// censored data unless requested explicitly.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        #[arg(long, default_value = "model")]
        p_plugin: PPlugin,
        #[arg(long, default_value = "fixed-c")]
        bias_form: CensoredBiasForm,
        /// Also write the table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo bias, MSE and KL per (n, p, k*) cell, as CSV.
    Simulate {
        #[arg(long, value_enum, default_value_t = Grid::PaperComplete)]
        grid: Grid,
        /// Sample sizes (overrides the grid's).
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// True shape values (overrides the grid's).
        #[arg(long, value_delimiter = ',')]
        k_star: Option<Vec<f64>>,
        /// Uncensored proportions, 1 for complete data (overrides the grid's).
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        /// Samples with fewer events are redrawn.
        #[arg(long, default_value_t = 2)]
        min_uncensored: usize,
        #[arg(long, default_value = "model")]
        p_plugin: PPlugin,
        #[arg(long, default_value = "fixed-c")]
        bias_form: CensoredBiasForm,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// The censored shape-bias factor f(p) and scale factors on a p grid.
    BiasCurve {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        p_min: f64,
        #[arg(long, default_value_t = 0.999)]
        p_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value = "fixed-c")]
        bias_form: CensoredBiasForm,
    },
    /// KL divergence from Weibull(k0, lambda0) to Weibull(k1, lambda1).
    Kl {
        #[arg(long)]
        k0: f64,
        #[arg(long)]
        lambda0: f64,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        lambda1: f64,
        /// Type I censoring time; omit for complete data.
        #[arg(long)]
        censor_time: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Grid {
    PaperComplete,
    PaperCensored,
    /// Requires --n, --k-star and --p.
    Custom,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        source: weibull_bias::Error,
    },
    #[error(transparent)]
    Core(#[from] weibull_bias::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use weibull_bias::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Data { .. } => 2,
            CliError::Core(e) => match e {
                E::Convergence(_) | E::Singular(_) | E::Overflow(_) | E::CorrectionOvershoot { .. } => 3,
                _ => 2,
            },
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn cmd_fit(
    file: &Path,
    methods: Option<Vec<Method>>,
    opts: MmleOptions,
    csv: Option<&Path>,
) -> Result<(), CliError> {
    let sample = parse_data(&read(file)?).map_err(|source| CliError::Data {
        path: file.to_owned(),
        source,
    })?;
    let methods = methods.unwrap_or_else(|| {
        Method::ALL
            .into_iter()
            .filter(|&m| m != Method::Ross || !sample.is_censored())
            .collect()
    });

    println!(
        "n = {}, uncensored = {}{}",
        sample.len(),
        sample.uncensored_count(),
        sample.censor_time().map(|c| format!(", censor time = {c}")).unwrap_or_default()
    );
    println!(
        "{:<6} {:>12} {:>12} {:>8} {:>9} {:>10}",
        "method", "k", "lambda", "p_hat", "converged", "iterations"
    );
    let mut table = String::from("method,k,lambda,p_hat,converged,iterations\n");
    let mut first_error = None;
    for method in methods {
        match fit(&sample, method, opts) {
            Ok(r) => {
                let p_hat = r.p_hat.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
                println!(
                    "{:<6} {:>12.4} {:>12.4} {:>8} {:>9} {:>10}",
                    method.as_str(),
                    r.params.shape(),
                    r.params.scale(),
                    p_hat,
                    r.converged,
                    r.iterations
                );
                if !r.scale_corrected {
                    eprintln!("note: {method} scale correction overshoots; ML scale kept");
                }
                let _ = writeln!(
                    table,
                    "{method},{},{},{},{},{}",
                    r.params.shape(),
                    r.params.scale(),
                    r.p_hat.map(|p| p.to_string()).unwrap_or_default(),
                    r.converged,
                    r.iterations
                );
            }
            Err(e) => {
                eprintln!("{method}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(path) = csv {
        write(path, &table)?;
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    grid: Grid,
    n: Option<Vec<usize>>,
    k_star: Option<Vec<f64>>,
    p: Option<Vec<f64>>,
    methods: Option<Vec<Method>>,
    replicates: usize,
    seed: u64,
    threads: Option<usize>,
    min_uncensored: usize,
    opts: MmleOptions,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let mut config = match grid {
        Grid::PaperComplete | Grid::Custom => SimulationConfig::paper_complete(replicates, seed),
        Grid::PaperCensored => SimulationConfig::paper_censored(replicates, seed),
    };
    if matches!(grid, Grid::Custom) && (n.is_none() || k_star.is_none() || p.is_none()) {
        return Err(CliError::Usage("--grid custom needs --n, --k-star and --p".into()));
    }
    if let Some(v) = n {
        config.n_values = v;
    }
    if let Some(v) = k_star {
        config.k_star_values = v;
    }
    if let Some(v) = p {
        config.p_values = v;
    }
    if let Some(v) = methods {
        config.methods = v;
    }
    config.threads = threads;
    config.min_uncensored = min_uncensored;
    config.p_plugin = opts.p_plugin;
    config.bias_form = opts.bias_form;

    let report = run(&config)?;
    eprintln!(
        "replicates={} seed={} discard_policy={} min_uncensored={} p_plugin={} bias_form={}",
        report.replicates,
        report.master_seed,
        report.discard_policy,
        config.min_uncensored,
        config.p_plugin,
        config.bias_form
    );
    let csv = report.to_csv();
    match output {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_bias_curve(
    k: f64,
    n: usize,
    p_min: f64,
    p_max: f64,
    steps: usize,
    form: CensoredBiasForm,
) -> Result<(), CliError> {
    if !(0.0 < p_min && p_min < p_max && p_max < 1.0) {
        return Err(CliError::Usage(format!(
            "need 0 < p-min < p-max < 1, got {p_min} and {p_max}"
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    if !(k > 0.0 && k.is_finite()) || n == 0 {
        return Err(CliError::Usage(format!("need k > 0 and n ≥ 1, got {k} and {n}")));
    }
    let mut out = String::from("p,f,bias_k,f1,f2\n");
    for i in 0..steps {
        let p = p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64;
        let bf = bias_factors_with(p, form)?;
        let _ = writeln!(out, "{p},{},{},{},{}", bf.f, k * bf.f / n as f64, bf.f1, bf.f2);
    }
    print!("{out}");
    Ok(())
}

fn cmd_kl(k0: f64, l0: f64, k1: f64, l1: f64, c: Option<f64>) -> Result<(), CliError> {
    let input = KlInput::new(WeibullParams::new(k0, l0)?, WeibullParams::new(k1, l1)?, c)?;
    println!("{}", kl_divergence(&input)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit {
            file,
            methods,
            p_plugin,
            bias_form,
            csv,
        } => cmd_fit(&file, methods, MmleOptions { p_plugin, bias_form }, csv.as_deref()),
        Command::Simulate {
            grid,
            n,
            k_star,
            p,
            methods,
            replicates,
            seed,
            threads,
            min_uncensored,
            p_plugin,
            bias_form,
            output,
        } => cmd_simulate(
            grid,
            n,
            k_star,
            p,
            methods,
            replicates,
            seed,
            threads,
            min_uncensored,
            MmleOptions { p_plugin, bias_form },
            output.as_deref(),
        ),
        Command::BiasCurve {
            k,
            n,
            p_min,
            p_max,
            steps,
            bias_form,
        } => cmd_bias_curve(k, n, p_min, p_max, steps, bias_form),
        Command::Kl {
            k0,
            lambda0,
            k1,
            lambda1,
            censor_time,
        } => cmd_kl(k0, lambda0, k1, lambda1, censor_time),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
