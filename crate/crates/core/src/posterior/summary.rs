use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::lattice::{EvalMode, Lattice, LatticeSpec, ModelEvaluator};
use crate::posterior::standardize::Standardization;
use crate::sampler::config::ChainOutput;

/// Quantile of sorted data with linear interpolation between order
/// statistics: `h = (n - 1) p`, `q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        return sorted[lo.min(sorted.len() - 1)];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Mean computed from the sample minimum so that identical inputs return
/// their common value exactly.
fn shifted_mean(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
    m + values.iter().map(|v| v - m).sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RatioDirection {
    FOverG,
    #[default]
    GOverF,
}

impl RatioDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            RatioDirection::FOverG => "f_over_g",
            RatioDirection::GOverF => "g_over_f",
        }
    }
}

impl std::str::FromStr for RatioDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f_over_g" => Ok(RatioDirection::FOverG),
            "g_over_f" => Ok(RatioDirection::GOverF),
            _ => Err(Error::Config(format!("ratio direction must be f_over_g or g_over_f, got {s:?}"))),
        }
    }
}

/// Evaluation grid on the original scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { min: None, max: None, points: 201 }
    }
}

impl GridSpec {
    /// Equally spaced points; unset ends default to the data range widened by
    /// one pooled sd.
    pub fn resolve(&self, data: &[f64], s: &Standardization) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {}", self.points)));
        }
        let dmin = data.iter().cloned().fold(f64::INFINITY, f64::min);
        let dmax = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let a = self.min.unwrap_or(dmin - s.pooled_sd);
        let b = self.max.unwrap_or(dmax + s.pooled_sd);
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Config(format!("grid range [{a}, {b}] is empty or not finite")));
        }
        let k = self.points - 1;
        Ok((0..self.points).map(|i| if i == k { b } else { a + (b - a) * i as f64 / k as f64 }).collect())
    }
}

/// Options for [`summarize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub direction: RatioDirection,
    /// Lower and upper pointwise quantile levels.
    pub band: (f64, f64),
    pub lattice: LatticeSpec,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { direction: RatioDirection::default(), band: (0.025, 0.975), lattice: LatticeSpec { cells: 1024, upper_pad: 6.0 } }
    }
}

/// Per-draw checks of the shape constraint and normalization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DrawChecks {
    pub draws: usize,
    /// Largest relative increase of `f / g` between consecutive grid points.
    pub max_ratio_increase: f64,
    pub monotone_violations: usize,
    /// Largest `|int f - 1|`.
    pub max_mass_error: f64,
    pub mass_violations: usize,
}

pub const MONOTONE_TOL: f64 = 1e-9;
pub const MASS_TOL: f64 = 1e-4;

/// One pointwise band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    /// Original-scale grid.
    pub grid: Vec<f64>,
    pub f: Band,
    pub g: Band,
    pub ratio: Band,
    pub direction: RatioDirection,
    pub band_levels: (f64, f64),
    pub p_h0: f64,
    pub checks: DrawChecks,
    /// Per-draw original-scale `f` and `g` and the ratio `f / g`.
    pub draws_f: Vec<Vec<f64>>,
    pub draws_g: Vec<Vec<f64>>,
    pub draws_ratio_fg: Vec<Vec<f64>>,
}

fn band(draws: &[Vec<f64>], levels: (f64, f64), f: impl Fn(f64) -> f64) -> Band {
    let k = draws[0].len();
    let mut b = Band { mean: Vec::with_capacity(k), lo: Vec::with_capacity(k), hi: Vec::with_capacity(k) };
    let mut col = vec![0.0; draws.len()];
    for j in 0..k {
        for (c, d) in col.iter_mut().zip(draws) {
            *c = f(d[j]);
        }
        b.mean.push(shifted_mean(&col));
        col.sort_by(f64::total_cmp);
        b.lo.push(quantile_sorted(&col, levels.0));
        b.hi.push(quantile_sorted(&col, levels.1));
    }
    b
}

fn ratio_band(s: &PosteriorSummary, direction: RatioDirection) -> Band {
    match direction {
        RatioDirection::FOverG => band(&s.draws_ratio_fg, s.band_levels, |r| r),
        RatioDirection::GOverF => band(&s.draws_ratio_fg, s.band_levels, |r| 1.0 / r),
    }
}

/// Evaluates every retained draw on `grid` (original scale), then forms
/// pointwise means and quantile bands. The model runs on the standardized
/// scale; densities are mapped back with the Jacobian `1 / sd`, and the
/// ratio is scale free.
pub fn summarize(chain: &ChainOutput, s: &Standardization, grid: &[f64], opts: &SummaryOptions) -> Result<PosteriorSummary> {
    if chain.draws.is_empty() {
        return Err(Error::EmptyChain);
    }
    if chain.draws.len() < 100 {
        warn!("summarizing only {} draws", chain.draws.len());
    }
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("grid must be strictly increasing with at least 2 points".into()));
    }
    let (a, b) = opts.band;
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(Error::Config(format!("band levels {:?} must satisfy 0 <= lo <= hi <= 1", opts.band)));
    }
    let z: Vec<f64> = grid.iter().map(|&x| s.to_std(x)).collect();
    let lattice = Lattice::new(&z, &[], &opts.lattice)?;
    let mut ev = ModelEvaluator::with_mode(lattice, &chain.draws[0], EvalMode::Full)?;
    let mut checks = DrawChecks::default();
    let n = chain.draws.len();
    let (mut draws_f, mut draws_g, mut draws_r) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for state in &chain.draws {
        ev.load(state);
        ev.compute_tail();
        let theta = state.theta();
        let mut fs = Vec::with_capacity(z.len());
        let mut gs = Vec::with_capacity(z.len());
        let mut rs = Vec::with_capacity(z.len());
        for (i, &x) in grid.iter().enumerate() {
            let g = ev.g_at_marked(i);
            if !(g > 0.0) {
                return Err(Error::GridRange { point: x });
            }
            let r = theta + (1.0 - theta) * ev.tail_at_marked(i);
            gs.push(g / s.pooled_sd);
            fs.push(g * r / s.pooled_sd);
            rs.push(r);
        }
        checks.draws += 1;
        let mut worst: f64 = 0.0;
        for w in fs.iter().zip(&gs).map(|(f, g)| f / g).collect::<Vec<_>>().windows(2) {
            worst = worst.max((w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE));
        }
        if worst > MONOTONE_TOL {
            checks.monotone_violations += 1;
        }
        checks.max_ratio_increase = checks.max_ratio_increase.max(worst);
        let mass_err = (ev.total_mass(state)? - 1.0).abs();
        if !(mass_err <= MASS_TOL) {
            checks.mass_violations += 1;
        }
        checks.max_mass_error = checks.max_mass_error.max(mass_err);
        draws_f.push(fs);
        draws_g.push(gs);
        draws_r.push(rs);
    }
    let levels = opts.band;
    let mut out = PosteriorSummary {
        grid: grid.to_vec(),
        f: band(&draws_f, levels, |v| v),
        g: band(&draws_g, levels, |v| v),
        ratio: Band { mean: vec![], lo: vec![], hi: vec![] },
        direction: opts.direction,
        band_levels: levels,
        p_h0: chain.gamma_trace.iter().filter(|&&g| g == 1).count() as f64 / chain.gamma_trace.len().max(1) as f64,
        checks,
        draws_f,
        draws_g,
        draws_ratio_fg: draws_r,
    };
    out.ratio = ratio_band(&out, opts.direction);
    Ok(out)
}

/// Recomputes the ratio band in the requested direction from the per-draw
/// curves.
pub fn ratio_direction(summary: &PosteriorSummary, which: RatioDirection) -> Result<PosteriorSummary> {
    for (d, r) in summary.draws_ratio_fg.iter().enumerate() {
        if let Some(j) = r.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            warn!("draw {d} has ratio {} at grid point {}", r[j], summary.grid[j]);
            return Err(Error::GridRange { point: summary.grid[j] });
        }
    }
    let mut out = summary.clone();
    out.direction = which;
    out.ratio = ratio_band(summary, which);
    Ok(out)
}
