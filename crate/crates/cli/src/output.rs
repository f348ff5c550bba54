use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lrorder_core::posterior::Band;
use lrorder_core::{ChainOutput, PosteriorSummary, Standardization};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const DRAWS_FILE: &str = "draws.json";
pub const META_FILE: &str = "meta.txt";

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::write(path, e))
}

/// Everything `summarize` needs from a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawsFile {
    pub group_f: String,
    pub group_g: String,
    /// Original-scale samples.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub standardization: Standardization,
    pub chain: ChainOutput,
}

impl DrawsFile {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let json = serde_json::to_string(self).map_err(|e| CliError::write(path, e))?;
        write_file(path, &json)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        if !path.exists() {
            return Err(CliError::input(path, "no fit output found; run `fit` or `test` first"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
    }
}

pub fn format_band(grid: &[f64], b: &Band) -> String {
    let mut s = String::from("x,mean,lo,hi\n");
    for (i, x) in grid.iter().enumerate() {
        writeln!(s, "{x},{},{},{}", b.mean[i], b.lo[i], b.hi[i]).expect("writing to a String");
    }
    s
}

/// Writes `f.csv`, `g.csv` and `ratio.csv` into `dir` and returns their paths.
pub fn write_outputs(summary: &PosteriorSummary, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let files = [("f.csv", &summary.f), ("g.csv", &summary.g), ("ratio.csv", &summary.ratio)];
    let mut out = vec![];
    for (name, band) in files {
        let p = dir.join(name);
        write_file(&p, &format_band(&summary.grid, band))?;
        out.push(p);
    }
    Ok(out)
}

/// The meta file: the fully resolved configuration followed by results.
pub fn format_meta(command: &str, cfg: &RunConfig, draws: &DrawsFile, summary: &PosteriorSummary) -> String {
    let mut s = format!("command={command}\n");
    s.push_str(&cfg.to_key_values());
    let d = &draws.chain.diagnostics;
    let c = &summary.checks;
    let mut kv = |k: &str, v: String| writeln!(s, "{k}={v}").expect("writing to a String");
    kv("n_f", draws.x.len().to_string());
    kv("n_g", draws.y.len().to_string());
    kv("pooled_mean", draws.standardization.pooled_mean.to_string());
    kv("pooled_sd", draws.standardization.pooled_sd.to_string());
    kv("retained_draws", draws.chain.draws.len().to_string());
    kv("p_h0", summary.p_h0.to_string());
    kv("sweeps", d.sweeps.to_string());
    kv("slice_evaluations", d.slice_evaluations.to_string());
    kv("f_evaluations", d.f_evaluations.to_string());
    kv("gamma_flips", d.gamma_flips.to_string());
    kv("r_fallbacks", d.r_fallbacks.to_string());
    kv("gamma_underflows", d.gamma_underflows.to_string());
    kv("checked_draws", c.draws.to_string());
    kv("monotone_violations", c.monotone_violations.to_string());
    kv("max_ratio_increase", c.max_ratio_increase.to_string());
    kv("mass_violations", c.mass_violations.to_string());
    kv("max_mass_error", c.max_mass_error.to_string());
    s
}

/// Looks up `key` in a meta file's text.
pub fn meta_value<'a>(meta: &'a str, key: &str) -> Option<&'a str> {
    meta.lines().find_map(|l| l.split_once('=').filter(|(k, _)| k.trim() == key).map(|(_, v)| v.trim()))
}
