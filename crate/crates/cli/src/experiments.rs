//! Reproducible experiment drivers behind the CLI subcommands. Every
//! driver returns a [`Table`]; rows are computed per cell on independent
//! RNG substreams and gathered in a fixed order.

use crate::io::{fmt_num, fmt_opt, CliError, Table};
use lwf_core::igmm::{fit, FitStatus, IgmmConfig};
use lwf_core::sampling::{draw_with, moments, stream_id, substream, DistSpec};
use lwf_core::stat_tests::{ks_bootstrap_t, ks_naive_t, ljung_box};
use lwf_core::tail_index::{
    build_regime_bands, classify_regime, default_k_range, modified_hill_path, region_at, PathTransform,
    RegimeClassification,
};
use lwf_core::transform::{forward, inverse, InversePolicy, LwfParams};
use lwf_core::Error as CoreError;
use rand::Rng;
use rayon::prelude::*;

type Result<T> = std::result::Result<T, CliError>;

/// One cell of the regime-recovery grid: latent distribution and transform parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Cell {
    pub spec: DistSpec,
    pub params: LwfParams<f64>,
}

/// Student ν ∈ {5, 1.5, 1} × γ ∈ {0.1, 0.3, 0.5} and Pareto α ∈ {5, 1.5, 1}
/// × γ ∈ {0.1, 0.2, 0.25}, all with μ = 0.2, σ = 1.5.
pub fn default_table1_grid() -> Vec<Table1Cell> {
    let mut grid = Vec::new();
    for df in [5.0, 1.5, 1.0] {
        for gamma in [0.1, 0.3, 0.5] {
            grid.push(Table1Cell { spec: DistSpec::StudentT { df }, params: LwfParams { mu: 0.2, sigma: 1.5, gamma } });
        }
    }
    for alpha in [5.0, 1.5, 1.0] {
        for gamma in [0.1, 0.2, 0.25] {
            grid.push(Table1Cell {
                spec: DistSpec::Pareto { alpha },
                params: LwfParams { mu: 0.2, sigma: 1.5, gamma },
            });
        }
    }
    grid
}

fn shape_param(spec: &DistSpec) -> Option<f64> {
    match *spec {
        DistSpec::StudentT { df } | DistSpec::SkewedT { df, .. } => Some(df),
        DistSpec::Pareto { alpha } => Some(alpha),
        _ => None,
    }
}

/// Outcome of one simulate → transform → IGMM cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Outcome {
    /// `None` when the transformed sample overflowed and no fit was run.
    pub report: Option<lwf_core::FitReport64>,
}

pub const TABLE1_HEADER: [&str; 11] = [
    "family",
    "shape",
    "mu",
    "sigma",
    "gamma",
    "mu_minus_muhat",
    "gamma_minus_gammahat",
    "sigma_over_sigmahat",
    "status",
    "iterations",
    "clamped_fraction",
];

/// Runs one recovery cell on an explicit latent-sample stream.
pub fn table1_cell(
    cell: &Table1Cell,
    n: usize,
    seed: u64,
    stream: u64,
    config: &IgmmConfig<f64>,
) -> Result<Table1Outcome> {
    let mut rng = substream(seed, stream);
    let u = draw_with(&cell.spec, n, &mut rng)?;
    let y = forward(&u, &cell.params)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Ok(Table1Outcome { report: None });
    }
    Ok(Table1Outcome { report: Some(fit(&y, config)?) })
}

/// Regime-recovery grid: for each cell simulates the latent sample, applies the forward
/// transform and fits IGMM. Cells sharing a latent distribution share the
/// latent sample, so only γ varies between them. Samples whose transform
/// overflows are reported with status `Overflow`.
pub fn run_table1(grid: &[Table1Cell], n: usize, seed: u64) -> Result<Table> {
    let config = IgmmConfig::default();
    let mut specs: Vec<DistSpec> = Vec::new();
    let streams: Vec<u64> = grid
        .iter()
        .map(|c| match specs.iter().position(|s| *s == c.spec) {
            Some(i) => i as u64,
            None => {
                specs.push(c.spec);
                (specs.len() - 1) as u64
            }
        })
        .collect();
    let outcomes: Vec<Result<Table1Outcome>> = grid
        .par_iter()
        .zip(streams.par_iter())
        .map(|(cell, &stream)| table1_cell(cell, n, seed, stream, &config))
        .collect();
    let mut table = Table::new(&TABLE1_HEADER);
    for (cell, outcome) in grid.iter().zip(outcomes) {
        let outcome = outcome?;
        let p = cell.params;
        let mut row = vec![
            cell.spec.family().to_string(),
            fmt_opt(shape_param(&cell.spec)),
            fmt_num(p.mu),
            fmt_num(p.sigma),
            fmt_num(p.gamma),
        ];
        match outcome.report {
            Some(r) => row.extend([
                fmt_num(p.mu - r.tau_hat.mu),
                fmt_num(p.gamma - r.tau_hat.gamma),
                fmt_num(p.sigma / r.tau_hat.sigma),
                r.status.as_str().to_string(),
                r.iterations.to_string(),
                fmt_num(r.clamped_fraction),
            ]),
            None => row.extend(["NaN", "NaN", "NaN", "Overflow", "0", "NaN"].map(String::from)),
        }
        table.push(row);
    }
    Ok(table)
}

/// Settings of the skewness / KS experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2Config {
    /// Fernandez–Steel skewing values; `None` is the unskewed t.
    pub t_gammas: Vec<Option<f64>>,
    pub t_df: f64,
    /// Skew-normal slants; `None` is the normal.
    pub sn_alphas: Vec<Option<f64>>,
    pub sn_location: f64,
    pub sn_scale: f64,
    pub n: usize,
    pub seed: u64,
    /// Parametric-bootstrap replicates; `None` skips the bootstrap KS.
    pub bootstrap: Option<usize>,
    /// Draw the `b` grid value without keeping the transform one-to-one.
    pub allow_folding: bool,
}

impl Default for Table2Config {
    fn default() -> Self {
        Self {
            t_gammas: vec![None, Some(0.20), Some(0.40), Some(0.75), Some(0.90)],
            t_df: 4.0,
            sn_alphas: vec![None, Some(0.10), Some(0.50), Some(1.00), Some(2.50), Some(5.00), Some(8.00)],
            sn_location: 4.0,
            sn_scale: 2.0,
            n: 1000,
            seed: 1,
            bootstrap: None,
            allow_folding: false,
        }
    }
}

impl Table2Config {
    pub fn rows(&self) -> Vec<(DistSpec, Option<f64>)> {
        let t = self.t_gammas.iter().map(|g| {
            let spec = match g {
                Some(gamma) => DistSpec::SkewedT { df: self.t_df, gamma: *gamma },
                None => DistSpec::StudentT { df: self.t_df },
            };
            (spec, *g)
        });
        let sn = self.sn_alphas.iter().map(|a| {
            let spec =
                DistSpec::SkewNormal { location: self.sn_location, scale: self.sn_scale, slant: a.unwrap_or(0.0) };
            (spec, *a)
        });
        t.chain(sn).collect()
    }
}

pub const TABLE2_HEADER: [&str; 15] = [
    "family",
    "skew_param",
    "n",
    "a",
    "b",
    "c",
    "skewness",
    "gamma_hat",
    "igmm_status",
    "clamped_fraction",
    "ks_statistic",
    "df_hat",
    "p_naive",
    "p_bootstrap",
    "bootstrap_failed",
];

/// Result of one row of the skewness / KS experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub skewness: f64,
    pub gamma_hat: f64,
    pub status: FitStatus,
    pub clamped_fraction: f64,
    pub ks_statistic: f64,
    pub df_hat: f64,
    pub p_naive: f64,
    pub p_bootstrap: Option<f64>,
    pub bootstrap_failed: Option<usize>,
}

/// Index `k` of the grid value `k/100` so that `(k/100)·u_max < 1`.
fn max_b_index(u_max: f64) -> usize {
    if u_max <= 0.0 {
        return 100;
    }
    let mut k = ((100.0 / u_max).ceil() as usize).min(101);
    while k > 0 && (k as f64 / 100.0) * u_max >= 1.0 {
        k -= 1;
    }
    k.min(100)
}

fn bootstrap_seed(seed: u64, row: u64) -> u64 {
    seed ^ (row + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One row: simulate, skew with `Y = U·exp(−bU)·c + a` on a seeded draw
/// from the grids a ∈ {0, 0.01, …, 1}, b ∈ {0, 0.01, …, 1},
/// c ∈ {0.1, 0.11, …, 1.5}, fit IGMM, back-transform and run the KS tests.
///
/// Unless `allow_folding` is set, `b` is restricted to values with
/// `b·max(U) < 1`, where the transform is one-to-one and the principal
/// branch recovers the latent sample.
pub fn table2_row(spec: &DistSpec, cfg: &Table2Config, row: u64) -> Result<Table2Row> {
    let mut rng = substream(cfg.seed, row);
    let u = draw_with(spec, cfg.n, &mut rng)?;
    let skewness = moments(&u)?.skewness;
    let u_max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b_top = if cfg.allow_folding { 100 } else { max_b_index(u_max) };
    let a = rng.random_range(0..=100usize) as f64 / 100.0;
    let b = rng.random_range(0..=b_top) as f64 / 100.0;
    let c = (10 + rng.random_range(0..=140usize)) as f64 / 100.0;
    let y: Vec<f64> = u.iter().map(|&v| v * (-b * v).exp() * c + a).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Input("skewing transform overflowed".into()).into());
    }
    let report = fit(&y, &IgmmConfig::default())?;
    let x = inverse(&y, &report.tau_hat, InversePolicy::Clamp)?.values;
    let naive = ks_naive_t(&x)?;
    let boot = match cfg.bootstrap {
        Some(r) => Some(ks_bootstrap_t(&x, r, bootstrap_seed(cfg.seed, row))?),
        None => None,
    };
    Ok(Table2Row {
        a,
        b,
        c,
        skewness,
        gamma_hat: report.tau_hat.gamma,
        status: report.status,
        clamped_fraction: report.clamped_fraction,
        ks_statistic: naive.statistic,
        df_hat: naive.extra("df").unwrap_or(f64::NAN),
        p_naive: naive.p_value,
        p_bootstrap: boot.as_ref().map(|b| b.p_value),
        bootstrap_failed: boot.as_ref().and_then(|b| b.extra("failed_replicates")).map(|v| v as usize),
    })
}

/// Skewness and KS p-values for skewed-t and skew-normal inputs passed
/// through the skewing transform and the IGMM back-transform.
pub fn run_table2(cfg: &Table2Config) -> Result<Table> {
    let rows = cfg.rows();
    let results: Vec<Result<Table2Row>> =
        rows.par_iter().enumerate().map(|(i, (spec, _))| table2_row(spec, cfg, i as u64)).collect();
    let mut table = Table::new(&TABLE2_HEADER);
    for ((spec, param), r) in rows.iter().zip(results) {
        let r = r?;
        table.push(vec![
            spec.family().to_string(),
            param.map(fmt_num).unwrap_or_else(|| "none".into()),
            cfg.n.to_string(),
            fmt_num(r.a),
            fmt_num(r.b),
            fmt_num(r.c),
            fmt_num(r.skewness),
            fmt_num(r.gamma_hat),
            r.status.as_str().into(),
            fmt_num(r.clamped_fraction),
            fmt_num(r.ks_statistic),
            fmt_num(r.df_hat),
            fmt_num(r.p_naive),
            fmt_opt(r.p_bootstrap),
            r.bootstrap_failed.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    Ok(table)
}

/// Settings of the regime screen.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeScanConfig {
    pub replicates: usize,
    pub beta_bands: f64,
    pub beta_overlay: f64,
    /// Inclusive k window for classification; defaults to 5%–50% of n.
    pub k_range: Option<(usize, usize)>,
    pub seed: u64,
}

impl Default for RegimeScanConfig {
    fn default() -> Self {
        Self { replicates: 100, beta_bands: 2.0, beta_overlay: 1.001, k_range: None, seed: 1 }
    }
}

pub const REGIME_HEADER: [&str; 7] = ["k", "band_nu5", "band_nu2", "band_nu1", "data", "region", "in_k_range"];

/// Modified Hill plot of the absolute values overlaid on the Student-t
/// bands built for the same sample size, with a regime label per k and an
/// overall classification.
pub fn run_regime_scan(values: &[f64], cfg: &RegimeScanConfig) -> Result<(Table, RegimeClassification)> {
    let n = values.len();
    if n < 100 {
        return Err(CoreError::Input(format!("regime scan needs at least 100 observations, got {n}")).into());
    }
    let bands = build_regime_bands::<f64>(n, cfg.replicates, cfg.beta_bands, cfg.seed)?;
    let data = modified_hill_path(values, cfg.beta_overlay, PathTransform::AbsoluteValues)?;
    let range = match cfg.k_range {
        Some((lo, hi)) => lo..=hi,
        None => default_k_range(n),
    };
    let class = classify_regime(&data, &bands, range.clone())?;
    let mut table = Table::new(&REGIME_HEADER);
    for k in 1..n {
        let (b5, b2, b1) = (bands.band_curves[0].at(k), bands.band_curves[1].at(k), bands.band_curves[2].at(k));
        let d = data.at(k);
        let region = match (d, b5, b2, b1) {
            (Some(a), Some(x5), Some(x2), Some(x1)) => region_at(a, x5, x2, x1).as_str(),
            _ => "",
        };
        table.push(vec![
            k.to_string(),
            fmt_opt(b5),
            fmt_opt(b2),
            fmt_opt(b1),
            fmt_opt(d),
            region.into(),
            u8::from(range.contains(&k)).to_string(),
        ]);
    }
    Ok((table, class))
}

/// Modified Hill plot as plot-ready series rows.
pub fn run_tail_plot(values: &[f64], beta: f64, transform: PathTransform, label: &str) -> Result<Table> {
    let path = modified_hill_path(values, beta, transform)?;
    let mut table = Table::new(&["k", "alpha_hat", "inv_alpha_hat", "series"]);
    for (&k, a) in path.k_values.iter().zip(&path.alpha_hat) {
        table.push(vec![k.to_string(), fmt_opt(*a), fmt_opt(a.map(f64::recip)), label.to_string()]);
    }
    Ok(table)
}

/// Standard normal, Weibull(shape 2, scale 1), Exponential(1), Student t₅.
pub fn default_acf_specs() -> Vec<DistSpec> {
    vec![
        DistSpec::Normal { mean: 0.0, sd: 1.0 },
        DistSpec::Weibull { shape: 2.0, scale: 1.0 },
        DistSpec::Exponential { rate: 1.0 },
        DistSpec::StudentT { df: 5.0 },
    ]
}

pub const ACF_HEADER: [&str; 11] = [
    "family",
    "label",
    "lag",
    "acf",
    "band",
    "flagged",
    "ljung_box_q",
    "ljung_box_p",
    "igmm_status",
    "gamma_hat",
    "clamped_fraction",
];

/// Per family: simulate, fit IGMM, back-transform with the fitted
/// parameters and report the ACF of the result with band flags and the
/// Ljung–Box p-value. With `passthrough` the series is analysed as drawn
/// (the i.i.d. control).
pub fn run_acf_check(specs: &[DistSpec], n: usize, seed: u64, max_lag: usize, passthrough: bool) -> Result<Table> {
    let lags: Vec<usize> = (1..=max_lag).collect();
    let results: Vec<Result<Vec<Vec<String>>>> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let mut rng = substream(seed, stream_id(i as u32, 0));
            let y = draw_with(spec, n, &mut rng)?;
            let (series, status, gamma_hat, clamped) = if passthrough {
                (y, "passthrough".to_string(), String::new(), String::new())
            } else {
                let r = fit(&y, &IgmmConfig::default())?;
                let inv = inverse(&y, &r.tau_hat, InversePolicy::Clamp)?;
                (inv.values, r.status.as_str().to_string(), fmt_num(r.tau_hat.gamma), fmt_num(r.clamped_fraction))
            };
            let lb = ljung_box(&series, &lags)?;
            let band = lb.extra("band").unwrap_or(f64::NAN);
            Ok(lags
                .iter()
                .map(|&k| {
                    vec![
                        spec.family().to_string(),
                        spec.label(),
                        k.to_string(),
                        fmt_num(lb.extra(&format!("acf_{k}")).unwrap_or(f64::NAN)),
                        fmt_num(band),
                        fmt_num(lb.extra(&format!("flag_{k}")).unwrap_or(f64::NAN)),
                        fmt_num(lb.statistic),
                        fmt_num(lb.p_value),
                        status.clone(),
                        gamma_hat.clone(),
                        clamped.clone(),
                    ]
                })
                .collect())
        })
        .collect();
    let mut table = Table::new(&ACF_HEADER);
    for rows in results {
        for r in rows? {
            table.push(r);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lwf_core::sampling::draw;
    use lwf_core::tail_index::Regime;
    use lwf_core::transform::{apply_zeros_policy, ZerosPolicy};

    #[test]
    fn empty_grid_gives_header_only() {
        let t = run_table1(&[], 1000, 1).unwrap();
        assert_eq!(t.to_csv_string().lines().count(), 1);
        assert_eq!(t.header.len(), TABLE1_HEADER.len());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_table1_grid();
        assert_eq!(g.len(), 18);
        assert!(g.iter().all(|c| c.params.mu == 0.2 && c.params.sigma == 1.5));
    }

    #[test]
    fn table1_regime_rows() {
        let grid = [
            Table1Cell { spec: DistSpec::StudentT { df: 5.0 }, params: LwfParams { mu: 0.2, sigma: 1.5, gamma: 0.1 } },
            Table1Cell { spec: DistSpec::StudentT { df: 1.0 }, params: LwfParams { mu: 0.2, sigma: 1.5, gamma: 0.3 } },
        ];
        let t = run_table1(&grid, 1000, 3).unwrap();
        let dg = t.column("gamma_minus_gammahat").unwrap();
        assert!(dg[0].parse::<f64>().unwrap().abs() < 0.1);
        let dm: f64 = t.column("mu_minus_muhat").unwrap()[1].parse().unwrap();
        let st = t.column("status").unwrap()[1];
        assert!(dm.is_nan() || dm.abs() > 1e3 || st == "Diverged", "{dm} {st}");
    }

    #[test]
    fn b_index_keeps_transform_one_to_one() {
        assert_eq!(max_b_index(-1.0), 100);
        assert_eq!(max_b_index(0.5), 100);
        assert_eq!(max_b_index(1.0), 99);
        assert_eq!(max_b_index(4.0), 24);
        assert_eq!(max_b_index(1e9), 0);
    }

    #[test]
    fn table2_rows_and_columns() {
        let cfg = Table2Config { t_gammas: vec![Some(0.2)], sn_alphas: vec![Some(1.0)], seed: 4, ..Default::default() };
        let t = run_table2(&cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        let p: Vec<f64> = t.column("p_naive").unwrap().iter().map(|s| s.parse().unwrap()).collect();
        assert!(p[0] < 0.01, "{p:?}");
        assert!(p[1] > 0.05, "{p:?}");
        assert_eq!(t.column("p_bootstrap").unwrap(), vec!["", ""]);
        for row in 0..2 {
            let b: f64 = t.column("b").unwrap()[row].parse().unwrap();
            assert!((0.0..=1.0).contains(&b));
        }
    }

    #[test]
    fn unskewed_t_row_is_accepted() {
        let cfg = Table2Config { t_gammas: vec![None], sn_alphas: vec![], seed: 2, ..Default::default() };
        let row = table2_row(&cfg.rows()[0].0, &cfg, 0).unwrap();
        assert!(row.p_naive > 0.05, "{row:?}");
    }

    #[test]
    fn regime_scan_classifies_synthetic_series() {
        let cfg = RegimeScanConfig { replicates: 30, ..Default::default() };
        for (df, expected) in [(1.0, Regime::RegimeIII), (5.0, Regime::RegimeI)] {
            let x = draw(&DistSpec::StudentT { df }, 1421, 12).unwrap().values;
            let (table, class) = run_regime_scan(&x, &cfg).unwrap();
            assert_eq!(table.rows.len(), 1420);
            assert_eq!(class.regime, expected, "df={df} {class:?}");
        }
    }

    #[test]
    fn zero_filled_series_has_complete_overlay() {
        let mut x = draw(&DistSpec::StudentT { df: 3.0 }, 400, 5).unwrap().values;
        for v in x.iter_mut().step_by(9) {
            *v = 0.0;
        }
        let filled = apply_zeros_policy(&x, ZerosPolicy::UniformFill { seed: 1 }).unwrap().values;
        let cfg = RegimeScanConfig { replicates: 5, ..Default::default() };
        let (table, _) = run_regime_scan(&filled, &cfg).unwrap();
        assert!(table.column("data").unwrap().iter().all(|v| !v.is_empty()));
        let (raw, _) = run_regime_scan(&x, &cfg).unwrap();
        assert!(raw.column("data").unwrap().iter().any(|v| v.is_empty()));
    }

    #[test]
    fn short_series_rejected() {
        let e = run_regime_scan(&[1.0; 50], &RegimeScanConfig::default()).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn tail_plot_rows() {
        let x = draw(&DistSpec::Pareto { alpha: 2.0 }, 50, 1).unwrap().values;
        let t = run_tail_plot(&x, 2.0, PathTransform::Raw, "pareto").unwrap();
        assert_eq!(t.rows.len(), 49);
        assert_eq!(t.rows[0][3], "pareto");
    }

    #[test]
    fn acf_check_shape() {
        let t = run_acf_check(&default_acf_specs(), 2000, 3, 30, false).unwrap();
        assert_eq!(t.rows.len(), 4 * 30);
        assert!(t.column("ljung_box_p").unwrap().iter().all(|p| {
            let p: f64 = p.parse().unwrap();
            (0.0..=1.0).contains(&p)
        }));
    }
}
