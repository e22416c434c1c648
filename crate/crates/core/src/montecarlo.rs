//! Monte Carlo reference for the prediction law, and the replication
//! counts a Monte Carlo study would need to pin VaR and ES down to 10^{−a}.
//!
//! Paths are simulated in fixed-size shards; shard k draws from stream k
//! of the seeded generator, so results are bit-identical for any number of
//! worker threads.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::CoefficientTable;
use crate::error::{Error, Result};
use crate::model::{simulate_step, GarchParams};
use crate::quad::{integrate, QuadOptions};
use crate::risk::{es_exact, var_newton, RiskOptions};
use crate::rng::NormalStream;
use crate::specfun::gaussian_quantile;
use crate::sum::CompensatedSum;

pub const SHARD_SIZE: usize = 1 << 16;
/// Largest sample kept in memory (8 bytes each).
pub const DEFAULT_SAMPLE_BUDGET: usize = 200_000_000;

const DUMP_MAGIC: &[u8; 4] = b"GPDS";
const DUMP_VERSION: u32 = 1;

fn simulate_shard(params: &GarchParams, h: usize, seed: u64, shard: usize, len: usize, out: &mut [f64]) {
    let mut stream = NormalStream::new(seed, shard as u64);
    let s1 = params.sigma1_sq();
    for slot in out.iter_mut().take(len) {
        let mut sigma_sq = s1;
        let mut x = 0.0;
        for t in 1..=h {
            let eps = stream.normal();
            if t < h {
                (x, sigma_sq) = simulate_step(sigma_sq, eps, params);
            } else {
                x = sigma_sq.sqrt() * eps;
            }
        }
        *slot = x;
    }
}

/// R terminal values x_h from independent paths started at (σ₀², x₀²).
pub fn simulate_terminal(params: &GarchParams, h: usize, r: usize, seed: u64) -> Result<Vec<f64>> {
    simulate_terminal_with_budget(params, h, r, seed, DEFAULT_SAMPLE_BUDGET)
}

pub fn simulate_terminal_with_budget(
    params: &GarchParams,
    h: usize,
    r: usize,
    seed: u64,
    budget: usize,
) -> Result<Vec<f64>> {
    params.validate()?;
    if h == 0 || r == 0 {
        return Err(Error::domain("need h >= 1 and R >= 1"));
    }
    if r > budget {
        return Err(Error::Resource(format!(
            "R = {r} exceeds the in-memory sample budget of {budget}; use the streaming summary"
        )));
    }
    let mut out = vec![0.0; r];
    out.par_chunks_mut(SHARD_SIZE).enumerate().for_each(|(k, chunk)| {
        let len = chunk.len();
        simulate_shard(params, h, seed, k, len, chunk);
    });
    Ok(out)
}

/// Aggregates of a simulation that never stores the sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamingSummary {
    pub count: u64,
    /// Sums of x^{2m} for m = 1..=power_sums.len().
    pub power_sums: Vec<f64>,
    pub power_sq_sums: Vec<f64>,
    /// Thresholds and the number of draws at or below each.
    pub grid: Vec<f64>,
    pub below: Vec<u64>,
}

impl StreamingSummary {
    fn empty(max_m: usize, grid: &[f64]) -> Self {
        Self {
            count: 0,
            power_sums: vec![0.0; max_m],
            power_sq_sums: vec![0.0; max_m],
            grid: grid.to_vec(),
            below: vec![0; grid.len()],
        }
    }

    fn absorb(&mut self, xs: &[f64]) {
        let m = self.power_sums.len();
        let mut sums = vec![CompensatedSum::new(); m];
        let mut sq = vec![CompensatedSum::new(); m];
        for &x in xs {
            let z = x * x;
            let mut zp = 1.0;
            for i in 0..m {
                zp *= z;
                sums[i].add(zp);
                sq[i].add(zp * zp);
            }
            for (b, &g) in self.below.iter_mut().zip(&self.grid) {
                if x <= g {
                    *b += 1;
                }
            }
        }
        for i in 0..m {
            self.power_sums[i] += sums[i].value();
            self.power_sq_sums[i] += sq[i].value();
        }
        self.count += xs.len() as u64;
    }

    /// Summary of a stored sample, absorbed shard by shard so it matches
    /// [`simulate_summary`] on the same draws bit for bit.
    pub fn from_sample(xs: &[f64], max_m: usize, grid: &[f64]) -> Self {
        let mut total = Self::empty(max_m, grid);
        for chunk in xs.chunks(SHARD_SIZE) {
            let mut s = Self::empty(max_m, grid);
            s.absorb(chunk);
            total.merge(&s);
        }
        total
    }

    /// Merge in shard order.
    pub fn merge(&mut self, other: &StreamingSummary) {
        self.count += other.count;
        for (a, b) in self.power_sums.iter_mut().zip(&other.power_sums) {
            *a += b;
        }
        for (a, b) in self.power_sq_sums.iter_mut().zip(&other.power_sq_sums) {
            *a += b;
        }
        for (a, b) in self.below.iter_mut().zip(&other.below) {
            *a += b;
        }
    }

    /// Sample mean of x^{2m} and its standard error.
    pub fn moment(&self, m: usize) -> (f64, f64) {
        let n = self.count as f64;
        let mean = self.power_sums[m - 1] / n;
        let var = (self.power_sq_sums[m - 1] / n - mean * mean).max(0.0) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    pub fn ecdf(&self) -> Vec<f64> {
        self.below.iter().map(|&b| b as f64 / self.count as f64).collect()
    }
}

/// Simulate R paths in shards, keeping only moments of x² up to `max_m`
/// and counts below `grid`.
pub fn simulate_summary(
    params: &GarchParams,
    h: usize,
    r: u64,
    seed: u64,
    max_m: usize,
    grid: &[f64],
) -> Result<StreamingSummary> {
    params.validate()?;
    if h == 0 || r == 0 {
        return Err(Error::domain("need h >= 1 and R >= 1"));
    }
    let shards = r.div_ceil(SHARD_SIZE as u64) as usize;
    let parts: Vec<StreamingSummary> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let len = (r - (k as u64) * SHARD_SIZE as u64).min(SHARD_SIZE as u64) as usize;
            let mut buf = vec![0.0; len];
            simulate_shard(params, h, seed, k, len, &mut buf);
            let mut s = StreamingSummary::empty(max_m, grid);
            s.absorb(&buf);
            s
        })
        .collect();
    let mut total = StreamingSummary::empty(max_m, grid);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McQuantile {
    /// Order statistic q_{⌊Rp⌋+1}, an estimate of −Q.
    pub value: f64,
    /// 1-based rank used.
    pub rank: usize,
    /// R < 1/p: the rank had to be clamped.
    pub unreliable: bool,
}

/// The ⌊Rp⌋+1-th smallest draw.
pub fn mc_quantile(sample: &[f64], p: f64) -> Result<McQuantile> {
    if sample.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let r = sample.len();
    let wanted = (r as f64 * p).floor() as usize + 1;
    let rank = wanted.min(r);
    let mut work = sample.to_vec();
    let (_, v, _) = work.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(McQuantile {
        value: *v,
        rank,
        unreliable: (r as f64) * p < 1.0 || wanted > r,
    })
}

/// (1/(pR)) Σ −x·1[x ≤ −var].
pub fn mc_es(sample: &[f64], p: f64, var: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut acc = CompensatedSum::new();
    let mut hits = 0usize;
    for &x in sample {
        if x <= -var {
            acc.add(-x);
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(Error::domain(format!("no draws at or below -{var}; sample too small for p = {p}")));
    }
    Ok(acc.value() / (p * sample.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McPlan {
    pub p: f64,
    pub eta: f64,
    pub a: f64,
    pub var: f64,
    pub es: f64,
    pub r_var: u64,
    pub r_es: u64,
    pub f_at_q: f64,
    pub v_sq: f64,
    /// Confidence interval lengths at the planned R.
    pub ci_len_var: f64,
    pub ci_len_es: f64,
}

fn ceil_count(x: f64) -> u64 {
    if !(x > 1.0) {
        1
    } else {
        x.ceil() as u64
    }
}

/// z_{1−η/2}
fn two_sided_z(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    gaussian_quantile(1.0 - eta / 2.0)
}

/// R such that the CLT interval for the MC quantile has length ≤ 10^{−a}.
pub fn plan_var(table: &CoefficientTable, p: f64, eta: f64, a: f64, opts: &RiskOptions) -> Result<McPlan> {
    let z = two_sided_z(eta)?;
    let v = var_newton(table, p, opts)?;
    let f = table.pdf_x(-v.var);
    if !(f > 0.0) {
        return Err(Error::domain("density vanishes at the quantile"));
    }
    let spread = (p * (1.0 - p)).sqrt() / f;
    let r = ceil_count(4.0 * z * z * spread * spread * 10f64.powf(2.0 * a));
    Ok(McPlan {
        p,
        eta,
        a,
        var: v.var,
        es: f64::NAN,
        r_var: r,
        r_es: 0,
        f_at_q: f,
        v_sq: f64::NAN,
        ci_len_var: 2.0 * z * spread / (r as f64).sqrt(),
        ci_len_es: f64::NAN,
    })
}

/// V² = E(v²) − E(v)² for v = −x·1[x ≤ −Q], with E(v) = p·ES and
/// E(v²) = ∫_{cut}^{−Q} u² f(u) du taken by parts through the CDF.
pub fn es_variance(table: &CoefficientTable, p: f64, var: f64, es: f64, opts: &RiskOptions) -> Result<f64> {
    let cut = opts.lower_cut * table.std_dev();
    let upper = -var;
    let q = QuadOptions::absolute(opts.quad_tol);
    let inner = integrate(|u| u * table.cdf_x(u), cut, upper, q)
        .map_err(|f| Error::convergence("es_variance", "quadrature did not converge", f.estimate.value))?;
    let ev2 = upper * upper * table.cdf_x(upper) - cut * cut * table.cdf_x(cut) - 2.0 * inner.value;
    let ev = p * es;
    Ok(ev2 - ev * ev)
}

/// R such that the CLT interval for the MC expected shortfall has length
/// ≤ 10^{−a}.
pub fn plan_es(table: &CoefficientTable, p: f64, eta: f64, a: f64, opts: &RiskOptions) -> Result<McPlan> {
    let z = two_sided_z(eta)?;
    let v = var_newton(table, p, opts)?;
    let e = es_exact(table, p, v.var, opts)?;
    let v_sq = es_variance(table, p, v.var, e.es, opts)?;
    let spread = v_sq.max(0.0).sqrt() / p;
    let r = ceil_count(4.0 * z * z * spread * spread * 10f64.powf(2.0 * a));
    Ok(McPlan {
        p,
        eta,
        a,
        var: v.var,
        es: e.es,
        r_var: 0,
        r_es: r,
        f_at_q: f64::NAN,
        v_sq,
        ci_len_var: f64::NAN,
        ci_len_es: 2.0 * z * spread / (r as f64).sqrt(),
    })
}

/// Both replication counts at one (p, η).
pub fn plan(table: &CoefficientTable, p: f64, eta: f64, a: f64, opts: &RiskOptions) -> Result<McPlan> {
    let pv = plan_var(table, p, eta, a, opts)?;
    let pe = plan_es(table, p, eta, a, opts)?;
    Ok(McPlan {
        es: pe.es,
        r_es: pe.r_es,
        v_sq: pe.v_sq,
        ci_len_es: pe.ci_len_es,
        ..pv
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfComparison {
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub exact: Vec<f64>,
    pub sup_gap: f64,
    /// 3 · 1.36 / √R
    pub band: f64,
}

impl CdfComparison {
    pub fn within_band(&self) -> bool {
        self.sup_gap <= self.band
    }
}

/// Compare empirical and exact CDFs on a grid, given counts at or below
/// each grid point (in the table's units).
pub fn compare_cdf(table: &CoefficientTable, grid: &[f64], empirical: &[f64], r: u64) -> CdfComparison {
    let exact: Vec<f64> = grid.iter().map(|&u| table.cdf_x(u)).collect();
    let sup_gap = exact
        .iter()
        .zip(empirical)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    CdfComparison {
        grid: grid.to_vec(),
        empirical: empirical.to_vec(),
        exact,
        sup_gap,
        band: 3.0 * 1.36 / (r as f64).sqrt(),
    }
}

pub fn write_sample(path: &Path, sample: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(DUMP_MAGIC)?;
    f.write_all(&DUMP_VERSION.to_le_bytes())?;
    f.write_all(&(sample.len() as u64).to_le_bytes())?;
    for x in sample {
        f.write_all(&x.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != DUMP_MAGIC {
        return Err(Error::Format("not a sample dump".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(Error::Format(format!("sample dump version {version} is not supported")));
    }
    let r = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != r * 8 {
        return Err(Error::Format(format!("sample dump declares {r} values but holds {}", body.len() / 8)));
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
