//! Argument parsing and dispatch for the `lwf` binary.

use crate::experiments::{
    default_acf_specs, default_table1_grid, run_acf_check, run_regime_scan, run_table1, run_table2, run_tail_plot,
    RegimeScanConfig, Table2Config,
};
use crate::io::{fmt_num, ingest_csv, CliError, ColumnSelector, ReturnsSeries, Table};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lwf_core::igmm::{fit, IgmmConfig};
use lwf_core::sampling::{draw, DistSpec};
use lwf_core::tail_index::PathTransform;
use lwf_core::transform::{forward, inverse, InversePolicy, LwfParams, ZerosPolicy};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Debug, Parser)]
#[command(name = "lwf", version, about = "Lambert W x F transforms, IGMM fitting and tail-regime screening")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV path; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides LWF_THREADS).
    #[arg(long, global = true, env = "LWF_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample and optionally push it through the forward transform.
    Simulate {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        params: OptParamArgs,
    },
    /// Apply the forward or inverse transform to a CSV column.
    Transform {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = Direction::Inverse)]
        direction: Direction,
        #[arg(long, value_enum, default_value_t = PolicyArg::Strict)]
        policy: PolicyArg,
    },
    /// Fit the transform parameters with IGMM and emit the iteration trace.
    IgmmFit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
        gamma_min: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        gamma_max: f64,
    },
    /// Modified Hill plot series of a CSV column or a simulated sample.
    TailPlot {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 1.001)]
        beta: f64,
        /// Use the raw values instead of their absolute values.
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value = "data")]
        label: String,
    },
    /// Overlay a series on Student-t bands and classify its tail regime.
    RegimeScan {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, default_value_t = 2.0)]
        beta_bands: f64,
        #[arg(long, default_value_t = 1.001)]
        beta_overlay: f64,
        #[arg(long, requires = "k_max")]
        k_min: Option<usize>,
        #[arg(long, requires = "k_min")]
        k_max: Option<usize>,
    },
    /// Parameter recovery of IGMM across the three tail regimes.
    Table1 {
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Skewness and KS p-values after skewing and back-transforming.
    Table2 {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Skewed-t parameters; `none` is the symmetric t.
        #[arg(long, value_delimiter = ',', default_value = "none,0.2,0.4,0.75,0.9")]
        t_gammas: Vec<String>,
        #[arg(long, default_value_t = 4.0)]
        t_df: f64,
        /// Skew-normal slants; `none` is the normal.
        #[arg(long, value_delimiter = ',', default_value = "none,0.1,0.5,1,2.5,5,8")]
        sn_alphas: Vec<String>,
        /// Parametric-bootstrap KS replicates (skipped when absent).
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Let `b` range over the full grid even where the skewing map folds.
        #[arg(long)]
        allow_folding: bool,
    },
    /// ACF and Ljung-Box of IGMM back-transformed simulated series.
    AcfCheck {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        lags: usize,
        /// Analyse the draws directly, without fitting.
        #[arg(long)]
        passthrough: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Strict,
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZerosArg {
    Drop,
    Fill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Normal,
    T,
    Pareto,
    Exponential,
    Weibull,
    SkewedT,
    SkewNormal,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, value_enum, default_value_t = Family::T)]
    pub dist: Family,
    #[arg(long, default_value_t = 5.0)]
    pub df: f64,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 2.0)]
    pub shape: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Skewing parameter of the skewed t (1 is symmetric).
    #[arg(long, default_value_t = 1.0)]
    pub skew: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub location: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub slant: f64,
}

impl DistArgs {
    pub fn spec(&self) -> DistSpec {
        match self.dist {
            Family::Normal => DistSpec::Normal { mean: self.mean, sd: self.sd },
            Family::T => DistSpec::StudentT { df: self.df },
            Family::Pareto => DistSpec::Pareto { alpha: self.alpha },
            Family::Exponential => DistSpec::Exponential { rate: self.rate },
            Family::Weibull => DistSpec::Weibull { shape: self.shape, scale: self.scale },
            Family::SkewedT => DistSpec::SkewedT { df: self.df, gamma: self.skew },
            Family::SkewNormal => {
                DistSpec::SkewNormal { location: self.location, scale: self.scale, slant: self.slant }
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct OptParamArgs {
    #[arg(long, allow_negative_numbers = true, requires_all = ["sigma", "gamma"])]
    pub mu: Option<f64>,
    #[arg(long, requires_all = ["mu", "gamma"])]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["mu", "sigma"])]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file to read.
    #[arg(long)]
    pub input: PathBuf,
    /// Column name, or zero-based index.
    #[arg(long, default_value = "0")]
    pub column: String,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Optional timestamp column, name or index.
    #[arg(long)]
    pub date_column: Option<String>,
    /// Handling of exact zeros where nonzero values are required.
    #[arg(long, value_enum, default_value_t = ZerosArg::Fill)]
    pub zeros: ZerosArg,
}

impl InputArgs {
    fn load(&self, seed: u64) -> Result<ReturnsSeries, CliError> {
        let policy = match self.zeros {
            ZerosArg::Drop => ZerosPolicy::Drop,
            ZerosArg::Fill => ZerosPolicy::UniformFill { seed },
        };
        let date = self.date_column.as_deref().map(ColumnSelector::parse);
        ingest_csv(&self.input, &ColumnSelector::parse(&self.column), !self.no_header, date.as_ref(), policy)
    }
}

/// A CSV column, or a simulated sample when `--input` is absent.
#[derive(Debug, Args)]
pub struct SourceArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    pub column: String,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, value_enum, default_value_t = ZerosArg::Fill)]
    pub zeros: ZerosArg,
    #[command(flatten)]
    pub dist: DistArgs,
    /// Sample size when simulating.
    #[arg(long, default_value_t = 1421)]
    pub n: usize,
}

impl SourceArgs {
    /// Values with the zeros policy applied; simulated draws use substream 0
    /// of the master seed and zero fills a seed derived from it.
    fn values(&self, seed: u64) -> Result<Vec<f64>, CliError> {
        let fill_seed = seed.wrapping_add(1);
        let series = match &self.input {
            Some(path) => {
                let input = InputArgs {
                    input: path.clone(),
                    column: self.column.clone(),
                    no_header: self.no_header,
                    date_column: None,
                    zeros: self.zeros,
                };
                input.load(fill_seed)?
            }
            None => {
                let policy = match self.zeros {
                    ZerosArg::Drop => ZerosPolicy::Drop,
                    ZerosArg::Fill => ZerosPolicy::UniformFill { seed: fill_seed },
                };
                ReturnsSeries::new(draw(&self.dist.spec(), self.n, seed)?.values, policy)
            }
        };
        let out = series.without_zeros()?;
        if out.zeros > 0 {
            eprintln!("zeros replaced or dropped: {}", out.zeros);
        }
        Ok(out.values)
    }
}

fn parse_optional_list(items: &[String], what: &str) -> Result<Vec<Option<f64>>, CliError> {
    items
        .iter()
        .map(|s| {
            let s = s.trim();
            if s.eq_ignore_ascii_case("none") {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| CliError::Usage(format!("{what}: '{s}' is not a number or 'none'")))
            }
        })
        .collect()
}

fn index_table(name: &str, values: &[f64]) -> Table {
    let mut t = Table::new(&["index", name]);
    for (i, v) in values.iter().enumerate() {
        t.push(vec![i.to_string(), fmt_num(*v)]);
    }
    t
}

/// Runs one parsed command and returns its output table.
pub fn execute(cli: &Cli) -> Result<Table, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Simulate { dist, n, params } => {
            let u = draw(&dist.spec(), *n, seed)?.values;
            match (params.mu, params.sigma, params.gamma) {
                (Some(mu), Some(sigma), Some(gamma)) => {
                    let y = forward(&u, &LwfParams::new(mu, sigma, gamma)?)?;
                    let mut t = Table::new(&["index", "u", "y"]);
                    for (i, (a, b)) in u.iter().zip(&y).enumerate() {
                        t.push(vec![i.to_string(), fmt_num(*a), fmt_num(*b)]);
                    }
                    Ok(t)
                }
                _ => Ok(index_table("u", &u)),
            }
        }
        Command::Transform { input, mu, sigma, gamma, direction, policy } => {
            let series = input.load(seed)?;
            let params = LwfParams::new(*mu, *sigma, *gamma)?;
            match direction {
                Direction::Forward => {
                    let y = forward(&series.values, &params)?;
                    let mut t = Table::new(&["index", "input", "output"]);
                    for (i, (a, b)) in series.values.iter().zip(&y).enumerate() {
                        t.push(vec![i.to_string(), fmt_num(*a), fmt_num(*b)]);
                    }
                    Ok(t)
                }
                Direction::Inverse => {
                    let pol = match policy {
                        PolicyArg::Strict => InversePolicy::Strict,
                        PolicyArg::Clamp => InversePolicy::Clamp,
                    };
                    let r = inverse(&series.values, &params, pol)?;
                    if r.clamped_count > 0 {
                        eprintln!("clamped points: {}", r.clamped_count);
                    }
                    let mut t = Table::new(&["index", "input", "output", "clamped"]);
                    let mut clamped = r.clamped_indices.iter().peekable();
                    for (i, (a, b)) in series.values.iter().zip(&r.values).enumerate() {
                        let hit = clamped.next_if(|&&c| c == i).is_some();
                        t.push(vec![i.to_string(), fmt_num(*a), fmt_num(*b), u8::from(hit).to_string()]);
                    }
                    Ok(t)
                }
            }
        }
        Command::IgmmFit { input, tol, max_iter, gamma_min, gamma_max } => {
            let series = input.load(seed)?;
            let config = IgmmConfig {
                tol: *tol,
                max_iter: *max_iter,
                gamma_bounds: (*gamma_min, *gamma_max),
                ..Default::default()
            };
            let r = fit(&series.values, &config)?;
            eprintln!(
                "status={} iterations={} mu={} sigma={} gamma={} clamped_fraction={}",
                r.status.as_str(),
                r.iterations,
                fmt_num(r.tau_hat.mu),
                fmt_num(r.tau_hat.sigma),
                fmt_num(r.tau_hat.gamma),
                fmt_num(r.clamped_fraction)
            );
            let mut t = Table::new(&["iteration", "mu", "sigma", "gamma", "status"]);
            let last = r.trace.len().saturating_sub(1);
            for (i, p) in r.trace.iter().enumerate() {
                let status = if i == last { r.status.as_str() } else { "" };
                t.push(vec![i.to_string(), fmt_num(p.mu), fmt_num(p.sigma), fmt_num(p.gamma), status.into()]);
            }
            Ok(t)
        }
        Command::TailPlot { source, beta, raw, label } => {
            let x = source.values(seed)?;
            let tr = if *raw { PathTransform::Raw } else { PathTransform::AbsoluteValues };
            run_tail_plot(&x, *beta, tr, label)
        }
        Command::RegimeScan { source, replicates, beta_bands, beta_overlay, k_min, k_max } => {
            let x = source.values(seed)?;
            let cfg = RegimeScanConfig {
                replicates: *replicates,
                beta_bands: *beta_bands,
                beta_overlay: *beta_overlay,
                k_range: k_min.zip(*k_max),
                seed,
            };
            let (table, class) = run_regime_scan(&x, &cfg)?;
            let [f1, f2, f3] = class.fractions;
            eprintln!(
                "regime={} share_I={} share_II={} share_III={} counted={}",
                class.regime.as_str(),
                fmt_num(f1),
                fmt_num(f2),
                fmt_num(f3),
                class.counted
            );
            Ok(table)
        }
        Command::Table1 { n } => run_table1(&default_table1_grid(), *n, seed),
        Command::Table2 { n, t_gammas, t_df, sn_alphas, bootstrap, allow_folding } => {
            let cfg = Table2Config {
                t_gammas: parse_optional_list(t_gammas, "--t-gammas")?,
                t_df: *t_df,
                sn_alphas: parse_optional_list(sn_alphas, "--sn-alphas")?,
                n: *n,
                seed,
                bootstrap: *bootstrap,
                allow_folding: *allow_folding,
                ..Default::default()
            };
            run_table2(&cfg)
        }
        Command::AcfCheck { n, lags, passthrough } => {
            run_acf_check(&default_acf_specs(), *n, seed, *lags, *passthrough)
        }
    }
}

fn write_table(table: &Table, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            table.write_to(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_to(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    let result = pool.install(|| execute(&cli)).and_then(|t| write_table(&t, cli.out.as_ref()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
