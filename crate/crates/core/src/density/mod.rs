//! Exact prediction density, CDF and moments of x_h and z_h = x_h².
//!
//! A [`CoefficientTable`] holds the coefficients c_j for one (params, h);
//! every density or CDF evaluation afterwards is a single power series in
//! u², so the table is the expensive, reusable object.

mod coeff;
mod direct;
mod mixture;
mod eval;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_assumption1, enumerate_sign_vectors, GarchParams, SignVector, Validity, ValidityReport};
use crate::specfun::{gamma, PsiCache, DEFAULT_PSI_TOL};
use crate::sum::CompensatedSum;

pub use coeff::{coeff_single, nested_binomial};
pub use eval::Evaluation;

use coeff::{moment_coeff, scaled_density_coeff, CoeffGeometry};

pub const TABLE_FORMAT: &str = "garchpd-coefficient-table";
pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    /// Outer truncation: the series runs over j = 0..=j_max.
    pub j_max: usize,
    /// Hard cap on each inner k_t sum.
    pub inner_k_max: usize,
    /// An inner sum stops once a term, past its peak, drops below
    /// term_tol times the running total.
    pub term_tol: f64,
    pub psi_tol: f64,
    pub max_h: usize,
    /// Trusted evaluation range in standard deviations of x_h.
    pub trust_range: f64,
    /// Suppress the out-of-range diagnostic.
    pub force_range: bool,
    /// Double j_max while the series tail at the trust edge is above
    /// rounding level.
    pub auto_extend: bool,
    /// Upper bound for automatic extension.
    pub j_cap: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            j_max: 100,
            inner_k_max: 400,
            term_tol: 1e-17,
            psi_tol: DEFAULT_PSI_TOL,
            max_h: crate::model::DEFAULT_MAX_HORIZON,
            trust_range: 6.0,
            force_range: false,
            auto_extend: true,
            j_cap: 800,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.j_max < 1 {
            return Err(Error::domain("j_max must be at least 1"));
        }
        if !(self.term_tol >= 0.0) {
            return Err(Error::domain("term_tol must be non-negative"));
        }
        if !(self.psi_tol > 0.0 && self.psi_tol <= 1e-6) {
            return Err(Error::domain("psi_tol must lie in (0, 1e-6]"));
        }
        if !(self.trust_range > 0.0) {
            return Err(Error::domain("trust_range must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignRow {
    pub signs: SignVector,
    /// Scaled coefficients ĉ_{j,s} = c_{j,s} τ^j.
    pub coefficients: Vec<f64>,
    /// Error bounds for `coefficients`, same scaling.
    pub errors: Vec<f64>,
}

/// Precomputed coefficients for one (params, h).
///
/// Coefficients are stored scaled: c_j = scaled[j] · tau^{−j}. The table
/// evaluates the law of x_h / x_scale, so a raw table has x_scale = 1 and
/// a standardized one has x_scale = √E(x_h²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientTable {
    pub params: GarchParams,
    pub h: usize,
    pub config: SeriesConfig,
    pub validity: ValidityReport,
    pub tau: f64,
    pub x_scale: f64,
    /// E(x_h²) of the unscaled law.
    pub second_moment: f64,
    pub per_sign: Vec<SignRow>,
    pub averaged: Vec<f64>,
    pub averaged_errors: Vec<f64>,
    /// First j whose coefficient (in some sign row) came from direct
    /// quadrature instead of the nested sums. Only h = 3 uses this.
    #[serde(default)]
    pub quadrature_from: Option<usize>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(skip)]
    mixture: mixture::MixtureCache,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDocument {
    format: String,
    version: u32,
    table: CoefficientTable,
}

/// Relative error bound above which an h = 3 coefficient is recomputed by
/// direct quadrature.
const REFINE_TOL: f64 = 1e-9;

/// Scaled coefficients and their error bounds for one sign vector, j in
/// `range`. For h = 3, entries the nested sums cannot deliver to REFINE_TOL
/// come from direct quadrature; the second value is the first such j.
fn scaled_row(
    params: &GarchParams,
    signs: &SignVector,
    geo: &CoeffGeometry,
    cache: &PsiCache,
    config: &SeriesConfig,
    range: std::ops::Range<usize>,
) -> Result<(Vec<f64>, Vec<f64>, Option<usize>)> {
    let h = geo.h;
    let nested: Vec<Result<(f64, f64)>> = range
        .clone()
        .into_par_iter()
        .map(|j| {
            scaled_density_coeff(geo, cache, config, j as u32).map(|s| (s.value, s.error_bound(config.psi_tol, h)))
        })
        .collect();
    let needs_direct = |r: &Result<(f64, f64)>| match r {
        Ok((v, e)) => *e > REFINE_TOL * v.abs(),
        Err(_) => true,
    };
    if h != 3 || !nested.iter().any(needs_direct) {
        let out: Vec<(f64, f64)> = nested.into_iter().collect::<Result<_>>()?;
        let (v, e) = out.into_iter().unzip();
        return Ok((v, e, None));
    }
    let direct = direct::h3_scaled_row(params, signs, geo.tau, range.clone());
    let mut first = None;
    let (mut values, mut errors) = (Vec::with_capacity(direct.len()), Vec::with_capacity(direct.len()));
    for ((j, r), d) in range.zip(nested).zip(direct) {
        if needs_direct(&r) {
            first.get_or_insert(j);
            values.push(d);
            errors.push(direct::DIRECT_REL_ERROR * d);
        } else {
            let (v, e) = r.expect("checked above");
            values.push(v);
            errors.push(e);
        }
    }
    Ok((values, errors, first))
}

fn average_rows(rows: &[SignRow], len: usize) -> (Vec<f64>, Vec<f64>) {
    let weight = 1.0 / rows.len() as f64;
    (0..len)
        .map(|j| {
            let mut acc = CompensatedSum::new();
            let mut err = 0.0;
            for row in rows {
                acc.add(row.coefficients[j]);
                err += row.errors[j];
            }
            (acc.value() * weight, err * weight)
        })
        .unzip()
}

/// Build the coefficient table for horizon h.
///
/// h = 1 yields the degenerate Gaussian table, which evaluates through the
/// closed-form normal law.
pub fn build_table(params: &GarchParams, h: usize, config: &SeriesConfig) -> Result<CoefficientTable> {
    params.validate()?;
    config.validate()?;
    if h == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    let signs = enumerate_sign_vectors(h, config.max_h)?;
    let validity = check_assumption1(params, h);
    let mut warnings = Vec::new();
    if validity.status == Validity::Invalid {
        warnings.push(format!(
            "validity condition fails for h = {h}: beta = {} below bound {:.6}; coefficients may be unreliable",
            params.beta,
            validity.beta_lower.max(if h > 3 { 0.5 } else { 0.0 })
        ));
    }

    let cache = PsiCache::new(config.psi_tol);
    let geos: Vec<CoeffGeometry> = signs.iter().map(|s| CoeffGeometry::new(params, h, s)).collect();
    let tau = geos[0].tau;
    let second_moment = moment_with(params, h, 1, config, &signs, &geos, &cache)?;

    let mut cfg = *config;
    let mut rows: Vec<SignRow> = Vec::with_capacity(signs.len());
    let mut quadrature_from: Option<usize> = None;
    let mut note = |first: Option<usize>| {
        if let Some(j) = first {
            quadrature_from = Some(quadrature_from.map_or(j, |q| q.min(j)));
        }
    };
    for (s, geo) in signs.iter().zip(&geos) {
        let (coefficients, errors, first) = scaled_row(params, s, geo, &cache, &cfg, 0..cfg.j_max + 1)?;
        note(first);
        rows.push(SignRow {
            signs: s.clone(),
            coefficients,
            errors,
        });
    }
    let (mut averaged, mut averaged_errors) = average_rows(&rows, cfg.j_max + 1);

    if cfg.auto_extend && h > 1 {
        let edge = cfg.trust_range * second_moment.sqrt();
        let rho = edge * edge / (2.0 * tau);
        while eval::tail_is_significant(&averaged, rho) {
            if averaged_errors[cfg.j_max] >= averaged[cfg.j_max].abs() {
                warnings.push(format!(
                    "coefficients near j = {} are below their error bound; not extending the series",
                    cfg.j_max
                ));
                break;
            }
            if cfg.j_max >= cfg.j_cap {
                warnings.push(format!(
                    "series tail at the trust edge still above rounding level with j_max = {}",
                    cfg.j_max
                ));
                break;
            }
            let new_max = (2 * cfg.j_max).min(cfg.j_cap);
            for (row, geo) in rows.iter_mut().zip(&geos) {
                let (extra, extra_err, first) =
                    scaled_row(params, &row.signs, geo, &cache, &cfg, cfg.j_max + 1..new_max + 1)?;
                note(first);
                row.coefficients.extend(extra);
                row.errors.extend(extra_err);
            }
            cfg.j_max = new_max;
            (averaged, averaged_errors) = average_rows(&rows, cfg.j_max + 1);
        }
    }

    // Coefficients are integrals of positive functions. A negative value
    // inside its error bound is cancellation noise; outside it is a bug.
    for row in &rows {
        let bad = row
            .coefficients
            .iter()
            .zip(&row.errors)
            .position(|(c, e)| !c.is_finite() || *c < -2.0 * e);
        if let Some(j) = bad {
            return Err(Error::convergence(
                "build_table",
                format!("coefficient j = {j} for signs {:?} is {}", row.signs.0, row.coefficients[j]),
                row.coefficients[j],
            ));
        }
    }
    if let Some(j) = averaged.iter().zip(&averaged_errors).position(|(c, e)| *e > 0.01 * c.abs()) {
        warnings.push(format!(
            "coefficients from j = {j} on carry relative error above 1% from cancellation in the nested sums; far-tail values are approximate"
        ));
    }

    Ok(CoefficientTable {
        params: *params,
        h,
        config: cfg,
        validity,
        tau,
        x_scale: 1.0,
        second_moment,
        per_sign: rows,
        averaged,
        averaged_errors,
        quadrature_from,
        warnings,
        mixture: Default::default(),
    })
}

fn moment_with(
    params: &GarchParams,
    h: usize,
    m: u32,
    config: &SeriesConfig,
    signs: &[SignVector],
    geos: &[CoeffGeometry],
    cache: &PsiCache,
) -> Result<f64> {
    if h == 1 {
        let s1 = params.sigma1_sq();
        let double_fact: f64 = (1..=m).map(|i| (2 * i - 1) as f64).product();
        return Ok(s1.powi(m as i32) * double_fact);
    }
    let mut acc = CompensatedSum::new();
    for geo in geos.iter().take(signs.len()) {
        acc.add(moment_coeff(geo, cache, config, m)?);
    }
    let hf = h as f64;
    let mf = m as f64;
    let lead = 2f64.powf(mf + 1.5 - 1.5 * hf) * std::f64::consts::PI.powf(-hf / 2.0) * gamma(mf + 0.5);
    let value = lead * acc.value();
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::convergence("moment", format!("E(x_h^{}) evaluated to {value}", 2 * m), value));
    }
    Ok(value)
}

/// E(x_h^{2m}) = E(z_h^m) for m ≥ 1.
pub fn moment(params: &GarchParams, h: usize, m: u32, config: &SeriesConfig) -> Result<f64> {
    params.validate()?;
    if m == 0 {
        return Err(Error::domain("moment order must be at least 1"));
    }
    if h == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    let signs = enumerate_sign_vectors(h, config.max_h)?;
    let geos: Vec<CoeffGeometry> = signs.iter().map(|s| CoeffGeometry::new(params, h, s)).collect();
    let cache = PsiCache::new(config.psi_tol);
    moment_with(params, h, m, config, &signs, &geos, &cache)
}

/// Rescale a table to unit variance. Returns √E(x_h²) and the new table.
pub fn standardize(table: &CoefficientTable) -> Result<(f64, CoefficientTable)> {
    let scale = table.second_moment.sqrt();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain("second moment is not positive"));
    }
    let mut out = table.clone();
    out.x_scale = scale;
    Ok((scale, out))
}

impl CoefficientTable {
    pub fn j_max(&self) -> usize {
        self.averaged.len() - 1
    }

    pub fn is_standardized(&self) -> bool {
        self.x_scale != 1.0
    }

    /// Unscaled c_j for the averaged table.
    pub fn coefficient(&self, j: usize) -> f64 {
        self.averaged[j] * self.tau.powi(-(j as i32))
    }

    /// Unscaled c_{j,s} for the given row.
    pub fn sign_coefficient(&self, row: usize, j: usize) -> f64 {
        self.per_sign[row].coefficients[j] * self.tau.powi(-(j as i32))
    }

    /// E(x^{2m}) of the law this table evaluates (standardized if scaled).
    pub fn moment(&self, m: u32) -> Result<f64> {
        let raw = moment(&self.params, self.h, m, &self.config)?;
        Ok(raw / self.x_scale.powi(2 * m as i32))
    }

    /// Standard deviation of the law this table evaluates.
    pub fn std_dev(&self) -> f64 {
        self.second_moment.sqrt() / self.x_scale
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TableDocument {
            format: TABLE_FORMAT.to_string(),
            version: TABLE_VERSION,
            table: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TableDocument = serde_json::from_str(s)?;
        if doc.format != TABLE_FORMAT {
            return Err(Error::Format(format!("not a coefficient table: format '{}'", doc.format)));
        }
        if doc.version != TABLE_VERSION {
            return Err(Error::Format(format!(
                "table version {} is not supported (expected {TABLE_VERSION})",
                doc.version
            )));
        }
        let t = doc.table;
        t.params.validate()?;
        let n = t.averaged.len();
        if n == 0
            || t.averaged_errors.len() != n
            || t.per_sign.iter().any(|r| r.coefficients.len() != n || r.errors.len() != n)
        {
            return Err(Error::Format("coefficient arrays have inconsistent lengths".into()));
        }
        if t.per_sign.len() != 1usize << (t.h - 1) {
            return Err(Error::Format("per-sign rows do not match the horizon".into()));
        }
        if !(t.tau > 0.0 && t.x_scale > 0.0 && t.second_moment > 0.0) {
            return Err(Error::Format("table scales must be positive".into()));
        }
        Ok(t)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests;
