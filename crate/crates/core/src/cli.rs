//! Command-line front end. `main.rs` only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 usage or input error, 2 validity or
//! convergence failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::density::{build_table, moment, standardize, CoefficientTable, SeriesConfig};
use crate::error::{Error, Result};
use crate::model::GarchParams;
use crate::montecarlo::{
    compare_cdf, plan, simulate_summary, simulate_terminal, write_sample, StreamingSummary,
};
use crate::report::{Cell, Format, Report};
use crate::risk::{es_exact, gaussian_reference, risk_at, var_newton, RiskOptions};
use crate::stationary::{level_grid, tail_index};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

const LINTON_JSON: &str = include_str!("../params/linton.json");
const DEFAULT_P: [f64; 4] = [0.05, 0.025, 0.01, 0.005];

#[derive(Debug, Parser)]
#[command(name = "garchpd", version, about = "Exact prediction densities, VaR and ES for Gaussian (GJR-)GARCH(1,1)")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter file, or inline JSON starting with '{'. Defaults to the
    /// bundled Linton weekly S&P 500 set.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Forecast horizon.
    #[arg(long = "h", global = true, default_value_t = 2)]
    pub h: usize,
    /// Outer series truncation.
    #[arg(long, global = true, default_value_t = 100)]
    pub jmax: usize,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Evaluate beyond the trusted range without warnings.
    #[arg(long, global = true)]
    pub force_range: bool,
    /// Reuse a coefficient table written by `coeff-cache build`.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Work in the units of x_h instead of standardizing to unit variance.
    #[arg(long, global = true)]
    pub raw: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density and CDF on a grid.
    Density {
        #[arg(long, default_value_t = 601)]
        points: usize,
        #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
        to: f64,
    },
    /// CDF (and density) at given points.
    Cdf {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        at: Vec<f64>,
    },
    /// Even moments E(x_h^{2m}).
    Moments {
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        m: Vec<u32>,
    },
    /// Value-at-Risk by Newton iteration.
    Var {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P)]
        p: Vec<f64>,
    },
    /// Expected Shortfall.
    Es {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P)]
        p: Vec<f64>,
    },
    /// VaR and ES with Gaussian comparison columns.
    RiskTable {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P)]
        p: Vec<f64>,
    },
    /// Monte Carlo check of the exact CDF and moments.
    McCompare {
        #[arg(long = "R", default_value_t = 1_000_000)]
        r: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Also store the sample as a binary dump.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Replications needed for MC VaR and ES intervals of length 10^-a.
    McPlan {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.01])]
        eta: Vec<f64>,
        #[arg(long, default_value_t = 5.0)]
        a: f64,
    },
    /// Stationary tail index. Defaults to the parameter set's alpha and beta.
    TailIndex {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// (alpha, beta) on level curves of the tail index.
    LevelGrid {
        #[arg(long, value_delimiter = ',', default_values_t = (1..=20).map(f64::from).collect::<Vec<_>>())]
        ratios: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = (1..=10).collect::<Vec<u32>>())]
        kappas: Vec<u32>,
    },
    /// Build or inspect a reusable coefficient table.
    CoeffCache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    /// Compute the table and write it to --out.
    Build,
    /// Summarize a table file.
    Inspect { path: PathBuf },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } | Error::Resource(_) | Error::InvalidParams(_) => EXIT_FAILURE,
        Error::Domain(_) | Error::Format(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
    }
}

/// Parse `args` (including the program name) and run. Output goes to
/// `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            for w in &report.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let format = match cli.common.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            let text = report.render(format);
            // coeff-cache build has already written the table to --out
            let out = match cli.command {
                Command::CoeffCache { action: CacheAction::Build } => None,
                _ => cli.common.out.as_ref(),
            };
            let written = match out {
                Some(path) => std::fs::write(path, text).map_err(Error::from),
                None => stdout.write_all(text.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Context {
    params: GarchParams,
    table: CoefficientTable,
    scale: f64,
    warnings: Vec<String>,
}

fn load_params(common: &Common) -> Result<GarchParams> {
    match &common.params {
        Some(p) if p.to_string_lossy().trim_start().starts_with('{') => {
            GarchParams::from_json_str(&p.to_string_lossy())
        }
        Some(p) => GarchParams::from_json_file(p),
        None => GarchParams::from_json_str(LINTON_JSON),
    }
}

fn series_config(common: &Common) -> SeriesConfig {
    SeriesConfig {
        j_max: common.jmax,
        force_range: common.force_range,
        ..SeriesConfig::default()
    }
}

fn context(common: &Common) -> Result<Context> {
    let mut warnings = Vec::new();
    let raw_table = match &common.table {
        Some(path) => {
            let mut t = CoefficientTable::load(path)?;
            if common.params.is_some() {
                warnings.push("--table given: parameters are taken from the table, --params ignored".into());
            }
            t.config.force_range = common.force_range;
            t.x_scale = 1.0;
            t
        }
        None => build_table(&load_params(common)?, common.h, &series_config(common))?,
    };
    warnings.extend(raw_table.warnings.iter().cloned());
    let (scale, table) = if common.raw {
        (1.0, raw_table)
    } else {
        standardize(&raw_table)?
    };
    Ok(Context {
        params: table.params,
        table,
        scale,
        warnings,
    })
}

fn base_report(ctx: &Context, columns: &[&str]) -> Report {
    let mut r = Report::new(columns);
    r.meta("params", serde_json::to_value(ctx.params).expect("params serialize"));
    r.meta("h", ctx.table.h);
    r.meta("j_max", ctx.table.j_max());
    r.meta(
        "validity",
        serde_json::to_value(ctx.table.validity.status).expect("status serializes"),
    );
    r.meta("standardized", ctx.table.is_standardized());
    r.meta("scale", ctx.scale);
    for w in &ctx.warnings {
        r.warn(w.clone());
    }
    r
}

fn execute(cli: &Cli) -> Result<Report> {
    let common = &cli.common;
    match &cli.command {
        Command::Density { points, from, to } => {
            if *points < 2 || !(to > from) {
                return Err(Error::domain("need points >= 2 and to > from"));
            }
            let ctx = context(common)?;
            let mut r = base_report(&ctx, &["u", "pdf", "cdf"]);
            let mut flagged = Vec::new();
            for i in 0..*points {
                let u = from + (to - from) * i as f64 / (*points - 1) as f64;
                let f = ctx.table.pdf_x_eval(u);
                let c = ctx.table.cdf_x_eval(u);
                if f.out_of_range || f.clamped || f.is_imprecise() || c.clamped {
                    flagged.push(u);
                }
                r.push(vec![u.into(), f.value.into(), c.value.into()]);
            }
            if !flagged.is_empty() {
                let min_abs = flagged.iter().map(|u| u.abs()).fold(f64::INFINITY, f64::min);
                r.warn(format!(
                    "{} of {points} grid points are out of range, clamped or imprecise (from |u| = {min_abs})",
                    flagged.len()
                ));
            }
            Ok(r)
        }
        Command::Cdf { at } => {
            let ctx = context(common)?;
            let mut r = base_report(&ctx, &["u", "cdf", "pdf", "error_estimate"]);
            for &u in at {
                let c = ctx.table.cdf_x_eval(u);
                let f = ctx.table.pdf_x_eval(u);
                for w in c.warnings("cdf", u).into_iter().chain(f.warnings("pdf", u)) {
                    r.warn(w);
                }
                r.push(vec![u.into(), c.value.into(), f.value.into(), c.error_estimate.into()]);
            }
            Ok(r)
        }
        Command::Moments { m } => {
            let ctx = context(common)?;
            let mut r = base_report(&ctx, &["m", "moment", "standardized"]);
            for &mi in m {
                let raw = moment(&ctx.params, ctx.table.h, mi, &ctx.table.config)?;
                let std = raw / ctx.table.second_moment.powi(mi as i32);
                r.push(vec![(mi as u64).into(), raw.into(), std.into()]);
            }
            Ok(r)
        }
        Command::Var { p } => {
            let ctx = context(common)?;
            let opts = RiskOptions::default();
            let mut r = base_report(&ctx, &["p", "var", "iterations", "gaussian_var", "ratio_var", "status"]);
            for_each_p(&mut r, p, |pi| {
                let v = var_newton(&ctx.table, pi, &opts)?;
                let (gv, _) = gaussian_reference(pi)?;
                Ok(vec![
                    pi.into(),
                    v.var.into(),
                    v.iterations.into(),
                    gv.into(),
                    ratio(gv, v.var).into(),
                    "ok".into(),
                ])
            })?;
            Ok(r)
        }
        Command::Es { p } => {
            let ctx = context(common)?;
            let opts = RiskOptions::default();
            let mut r = base_report(&ctx, &["p", "es", "gaussian_es", "ratio_es", "quad_error", "status"]);
            for_each_p(&mut r, p, |pi| {
                let v = var_newton(&ctx.table, pi, &opts)?;
                let e = es_exact(&ctx.table, pi, v.var, &opts)?;
                let (_, ge) = gaussian_reference(pi)?;
                Ok(vec![
                    pi.into(),
                    e.es.into(),
                    ge.into(),
                    ratio(ge, e.es).into(),
                    e.quad_error.into(),
                    "ok".into(),
                ])
            })?;
            Ok(r)
        }
        Command::RiskTable { p } => {
            let ctx = context(common)?;
            let opts = RiskOptions::default();
            let cols = [
                "p",
                "var",
                "iterations",
                "gaussian_var",
                "ratio_var",
                "es",
                "gaussian_es",
                "ratio_es",
                "status",
            ];
            let mut r = base_report(&ctx, &cols);
            let mut extra = Vec::new();
            for_each_p(&mut r, p, |pi| {
                let x = risk_at(&ctx.table, pi, &opts)?;
                extra.extend(x.warnings.iter().cloned());
                Ok(vec![
                    pi.into(),
                    x.var.into(),
                    x.iterations.into(),
                    x.gaussian_var.into(),
                    x.ratio_var.into(),
                    x.es.into(),
                    x.gaussian_es.into(),
                    x.ratio_es.into(),
                    "ok".into(),
                ])
            })?;
            for w in extra {
                r.warn(w);
            }
            Ok(r)
        }
        Command::McCompare { r: reps, seed, points, dump } => mc_compare(common, *reps, *seed, *points, dump.as_deref()),
        Command::McPlan { p, eta, a } => {
            let ctx = context(common)?;
            let opts = RiskOptions::default();
            let mut cols = vec!["quantity".to_string(), "eta".to_string()];
            cols.extend(p.iter().map(|x| format!("p={x}")));
            let mut r = base_report(&ctx, &[] as &[&str]);
            r.columns = cols;
            r.meta("a", *a);
            let mut plans = Vec::new();
            for &e in eta {
                let row: Vec<_> = p.iter().map(|&pi| plan(&ctx.table, pi, e, *a, &opts)).collect::<Result<_>>()?;
                plans.push((e, row));
            }
            for (label, pick) in [("R_var", 0usize), ("R_es", 1)] {
                for (e, row) in &plans {
                    let mut cells: Vec<Cell> = vec![label.into(), (*e).into()];
                    cells.extend(row.iter().map(|pl| Cell::Int(if pick == 0 { pl.r_var } else { pl.r_es })));
                    r.push(cells);
                }
            }
            let detail: Vec<Value> = plans
                .iter()
                .flat_map(|(_, row)| row.iter().map(|pl| serde_json::to_value(pl).expect("plan serializes")))
                .collect();
            r.meta("plans", Value::Array(detail));
            Ok(r)
        }
        Command::TailIndex { alpha, beta, tol } => {
            let (a, b) = match (alpha, beta) {
                (Some(a), Some(b)) => (*a, *b),
                (None, None) => {
                    let p = load_params(common)?;
                    (p.alpha, p.beta)
                }
                _ => return Err(Error::domain("give both --alpha and --beta, or neither")),
            };
            let res = tail_index(a, b, *tol)?;
            let mut r = Report::new(&["alpha", "beta", "kappa", "residual", "iterations"]);
            r.meta("method", res.method);
            r.push(vec![
                res.alpha.into(),
                res.beta.into(),
                res.kappa.into(),
                res.residual.into(),
                res.iterations.into(),
            ]);
            Ok(r)
        }
        Command::LevelGrid { ratios, kappas } => {
            let mut r = Report::new(&["ratio", "kappa", "alpha", "beta"]);
            for pt in level_grid(ratios, kappas) {
                if pt.beta.is_none() {
                    r.warn(format!("no solution for ratio {} and kappa {}", pt.ratio, pt.kappa));
                }
                r.push(vec![pt.ratio.into(), (pt.kappa as u64).into(), pt.alpha.into(), pt.beta.into()]);
            }
            Ok(r)
        }
        Command::CoeffCache { action } => match action {
            CacheAction::Build => {
                let path = common
                    .out
                    .as_ref()
                    .ok_or_else(|| Error::domain("coeff-cache build needs --out PATH"))?;
                let table = build_table(&load_params(common)?, common.h, &series_config(common))?;
                table.save(path)?;
                Ok(cache_summary(&table, Some(path)))
            }
            CacheAction::Inspect { path } => {
                let table = CoefficientTable::load(path)?;
                Ok(cache_summary(&table, None))
            }
        },
    }
}

fn ratio(g: f64, x: f64) -> f64 {
    if g == 0.0 && x == 0.0 {
        1.0
    } else {
        g / x
    }
}

/// Run `f` per tail probability, turning per-row domain or convergence
/// errors into marked rows. Fails only when every row fails.
fn for_each_p<F>(r: &mut Report, ps: &[f64], mut f: F) -> Result<()>
where
    F: FnMut(f64) -> Result<Vec<Cell>>,
{
    let mut last_err = None;
    let mut ok = 0;
    for &p in ps {
        match f(p) {
            Ok(row) => {
                ok += 1;
                r.push(row);
            }
            Err(e) => {
                let mut row = vec![Cell::Num(p)];
                row.resize(r.columns.len() - 1, Cell::Missing);
                row.push(Cell::Text(format!("error: {e}")));
                r.push(row);
                r.warn(format!("p = {p}: {e}"));
                last_err = Some(e);
            }
        }
    }
    match last_err {
        Some(e) if ok == 0 => Err(e),
        _ => Ok(()),
    }
}

fn cache_summary(table: &CoefficientTable, written: Option<&Path>) -> Report {
    let mut r = Report::new(&["j", "scaled_coefficient", "error_bound"]);
    if let Some(p) = written {
        r.meta("written", p.display().to_string());
    }
    r.meta("params", serde_json::to_value(table.params).expect("params serialize"));
    r.meta("h", table.h);
    r.meta("j_max", table.j_max());
    r.meta("sign_vectors", table.per_sign.len());
    r.meta("tau", table.tau);
    r.meta("second_moment", table.second_moment);
    r.meta(
        "validity",
        serde_json::to_value(table.validity.status).expect("status serializes"),
    );
    for w in &table.warnings {
        r.warn(w.clone());
    }
    for (j, (c, e)) in table.averaged.iter().zip(&table.averaged_errors).enumerate() {
        r.push(vec![j.into(), (*c).into(), (*e).into()]);
    }
    r
}

fn mc_compare(common: &Common, reps: u64, seed: u64, points: usize, dump: Option<&Path>) -> Result<Report> {
    if reps < 2 || points < 2 {
        return Err(Error::domain("need R >= 2 and at least 2 grid points"));
    }
    let ctx = context(common)?;
    let sd = ctx.table.std_dev();
    // grid in table units; the simulation runs in units of x_h
    let grid: Vec<f64> = (0..points)
        .map(|i| sd * (-4.0 + 8.0 * i as f64 / (points - 1) as f64))
        .collect();
    let raw_grid: Vec<f64> = grid.iter().map(|u| u * ctx.table.x_scale).collect();
    let summary = match dump {
        Some(path) => {
            let xs = simulate_terminal(&ctx.params, ctx.table.h, reps as usize, seed)?;
            write_sample(path, &xs)?;
            StreamingSummary::from_sample(&xs, 2, &raw_grid)
        }
        None => simulate_summary(&ctx.params, ctx.table.h, reps, seed, 2, &raw_grid)?,
    };
    let cmp = compare_cdf(&ctx.table, &grid, &summary.ecdf(), reps);
    let mut r = base_report(&ctx, &["kind", "at", "mc", "exact", "abs_diff", "tolerance"]);
    r.meta("R", reps);
    r.meta("seed", seed);
    r.meta("sup_cdf_gap", cmp.sup_gap);
    r.meta("dkw_band_3x", cmp.band);
    r.meta("cdf_within_band", cmp.within_band());
    for i in 0..grid.len() {
        r.push(vec![
            "cdf".into(),
            grid[i].into(),
            cmp.empirical[i].into(),
            cmp.exact[i].into(),
            (cmp.empirical[i] - cmp.exact[i]).abs().into(),
            cmp.band.into(),
        ]);
    }
    let mut moments_ok = true;
    for m in 1..=2u32 {
        let (mean, se) = summary.moment(m as usize);
        let s2m = ctx.table.x_scale.powi(2 * m as i32);
        let exact = moment(&ctx.params, ctx.table.h, m, &ctx.table.config)?;
        let diff = (mean - exact).abs();
        moments_ok &= diff <= 4.0 * se;
        r.push(vec![
            format!("moment_{}", 2 * m).into(),
            (m as u64).into(),
            (mean / s2m).into(),
            (exact / s2m).into(),
            (diff / s2m).into(),
            (4.0 * se / s2m).into(),
        ]);
    }
    r.meta("moments_within_4se", moments_ok);
    if !cmp.within_band() {
        r.warn("empirical CDF leaves the 3x DKW band");
    }
    if !moments_ok {
        r.warn("a sample moment is more than 4 standard errors from the exact moment");
    }
    Ok(r)
}
