use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lrorder_core::model::LatticeSpec;
use lrorder_core::{ChainConfig, GammaRule, GridSpec, PriorConfig, SummaryOptions, UStickPrior};

use crate::error::{CliError, CliResult};

/// Everything one `fit`, `test` or `summarize` run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub group_f: Option<String>,
    pub group_g: Option<String>,
    pub prior: PriorConfig,
    pub chain: ChainConfig,
    pub chains: usize,
    pub grid: GridSpec,
    pub summary: SummaryOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            out: PathBuf::from("lrorder-out"),
            group_f: None,
            group_g: None,
            prior: PriorConfig::default(),
            chain: ChainConfig::default(),
            chains: 1,
            grid: GridSpec::default(),
            summary: SummaryOptions::default(),
        }
    }
}

/// Keys written to meta files that describe results rather than settings.
/// The parser skips them so a meta file can be fed back as `--config`.
pub const RESULT_KEYS: &[&str] = &[
    "command",
    "n_f",
    "n_g",
    "pooled_mean",
    "pooled_sd",
    "retained_draws",
    "p_h0",
    "sweeps",
    "slice_evaluations",
    "f_evaluations",
    "gamma_flips",
    "r_fallbacks",
    "gamma_underflows",
    "checked_draws",
    "monotone_violations",
    "max_ratio_increase",
    "mass_violations",
    "max_mass_error",
];

fn opt_str(v: &Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "auto".into())
}

fn gamma_rule_str(r: GammaRule) -> &'static str {
    match r {
        GammaRule::Literal => "literal",
        GammaRule::CarlinChib => "carlin_chib",
    }
}

fn u_prior_str(p: UStickPrior) -> &'static str {
    match p {
        UStickPrior::Alpha => "alpha",
        UStickPrior::AlphaBreve => "alpha_breve",
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Usage(format!("invalid value {value:?} for `{key}`")))
}

fn non_empty(v: &str) -> Option<&str> {
    (!v.is_empty()).then_some(v)
}

fn opt_num(key: &str, value: &str) -> CliResult<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let p = &mut self.prior;
        let c = &mut self.chain;
        match key {
            "data" => self.data = non_empty(value).map(PathBuf::from),
            "out" => self.out = PathBuf::from(value),
            "group_f" => self.group_f = non_empty(value).map(String::from),
            "group_g" => self.group_g = non_empty(value).map(String::from),
            "n_components" => p.n_components = num(key, value)?,
            "alpha" => p.alpha = num(key, value)?,
            "nig_m" => p.nig.m = num(key, value)?,
            "nig_c" => p.nig.c = num(key, value)?,
            "nig_a1" => p.nig.a1 = num(key, value)?,
            "nig_a2" => p.nig.a2 = num(key, value)?,
            "slab_a" => p.slab.0 = num(key, value)?,
            "slab_b" => p.slab.1 = num(key, value)?,
            "p0" => p.p0 = num(key, value)?,
            "iterations" => c.iterations = num(key, value)?,
            "burn_in" => c.burn_in = num(key, value)?,
            "thin" => c.thin = num(key, value)?,
            "seed" => c.seed = num(key, value)?,
            "pseudo_iters" => c.pseudo_iters = num(key, value)?,
            "slice_width" => c.slice.width = num(key, value)?,
            "slice_max_doublings" => c.slice.max_doublings = num(key, value)?,
            "lattice_cells" => c.lattice.cells = num(key, value)?,
            "lattice_pad" => c.lattice.upper_pad = num(key, value)?,
            "gamma_rule" => {
                c.gamma_rule = match value {
                    "literal" => GammaRule::Literal,
                    "carlin_chib" => GammaRule::CarlinChib,
                    _ => return Err(CliError::Usage(format!("gamma_rule must be literal or carlin_chib, got {value:?}"))),
                }
            }
            "u_stick_prior" => {
                c.u_stick_prior = match value {
                    "alpha" => UStickPrior::Alpha,
                    "alpha_breve" => UStickPrior::AlphaBreve,
                    _ => return Err(CliError::Usage(format!("u_stick_prior must be alpha or alpha_breve, got {value:?}"))),
                }
            }
            "chains" => self.chains = num(key, value)?,
            "grid_min" => self.grid.min = opt_num(key, value)?,
            "grid_max" => self.grid.max = opt_num(key, value)?,
            "grid_points" => self.grid.points = num(key, value)?,
            "ratio" => self.summary.direction = value.parse()?,
            "band_lo" => self.summary.band.0 = num(key, value)?,
            "band_hi" => self.summary.band.1 = num(key, value)?,
            "summary_cells" => self.summary.lattice.cells = num(key, value)?,
            "summary_pad" => self.summary.lattice.upper_pad = num(key, value)?,
            _ if RESULT_KEYS.contains(&key) => {}
            _ => return Err(CliError::Usage(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and lines starting
    /// with `#` are skipped; later keys override earlier ones.
    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        self.apply_str(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply_str(&mut self, text: &str) -> CliResult<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                CliError::Usage(m) => CliError::Usage(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.prior.validate()?;
        self.chain.validate()?;
        if self.chains == 0 {
            return Err(CliError::Usage("chains must be at least 1".into()));
        }
        if self.grid.points < 2 {
            return Err(CliError::Usage(format!("grid_points must be at least 2, got {}", self.grid.points)));
        }
        let (a, b) = self.summary.band;
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(CliError::Usage(format!("band levels ({a}, {b}) must satisfy 0 <= band_lo <= band_hi <= 1")));
        }
        let LatticeSpec { cells, upper_pad } = self.summary.lattice;
        if cells < 2 || !(upper_pad > 0.0) {
            return Err(CliError::Usage("summary lattice needs at least 2 cells and a positive pad".into()));
        }
        Ok(())
    }

    /// Every setting, defaults included, as `key=value` lines in a fixed order.
    pub fn to_key_values(&self) -> String {
        let p = &self.prior;
        let c = &self.chain;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k}={v}").expect("writing to a String");
        kv("data", self.data.as_ref().map(|d| d.display().to_string()).unwrap_or_default());
        kv("out", self.out.display().to_string());
        kv("group_f", self.group_f.clone().unwrap_or_default());
        kv("group_g", self.group_g.clone().unwrap_or_default());
        kv("n_components", p.n_components.to_string());
        kv("alpha", p.alpha.to_string());
        kv("nig_m", p.nig.m.to_string());
        kv("nig_c", p.nig.c.to_string());
        kv("nig_a1", p.nig.a1.to_string());
        kv("nig_a2", p.nig.a2.to_string());
        kv("slab_a", p.slab.0.to_string());
        kv("slab_b", p.slab.1.to_string());
        kv("p0", p.p0.to_string());
        kv("iterations", c.iterations.to_string());
        kv("burn_in", c.burn_in.to_string());
        kv("thin", c.thin.to_string());
        kv("seed", c.seed.to_string());
        kv("pseudo_iters", c.pseudo_iters.to_string());
        kv("slice_width", c.slice.width.to_string());
        kv("slice_max_doublings", c.slice.max_doublings.to_string());
        kv("lattice_cells", c.lattice.cells.to_string());
        kv("lattice_pad", c.lattice.upper_pad.to_string());
        kv("gamma_rule", gamma_rule_str(c.gamma_rule).into());
        kv("u_stick_prior", u_prior_str(c.u_stick_prior).into());
        kv("chains", self.chains.to_string());
        kv("grid_min", opt_str(&self.grid.min));
        kv("grid_max", opt_str(&self.grid.max));
        kv("grid_points", self.grid.points.to_string());
        kv("ratio", self.summary.direction.as_str().into());
        kv("band_lo", self.summary.band.0.to_string());
        kv("band_hi", self.summary.band.1.to_string());
        kv("summary_cells", self.summary.lattice.cells.to_string());
        kv("summary_pad", self.summary.lattice.upper_pad.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_round_trip() {
        let mut c = RunConfig::default();
        c.apply_str("seed = 7\np0=0.25\n# comment\n\ngrid_min=-3\nratio=f_over_g\ngroup_f=a\n").unwrap();
        let text = c.to_key_values();
        let mut d = RunConfig::default();
        d.apply_str(&text).unwrap();
        assert_eq!(c, d);
        assert_eq!(d.chain.seed, 7);
        assert_eq!(d.grid.min, Some(-3.0));
        assert_eq!(d.grid.max, None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_str("sede=3"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_str("seed"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_str("seed=x"), Err(CliError::Usage(_))));
        assert!(c.apply_str("p_h0=0.3\ncommand=test").is_ok());
    }

    #[test]
    fn empty_group_keys_are_unset() {
        let c = RunConfig::default();
        let mut d = RunConfig::default();
        d.apply_str(&c.to_key_values()).unwrap();
        assert_eq!(d.group_f, None);
        assert_eq!(d, c);
    }
}
