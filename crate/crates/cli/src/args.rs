use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::{CliResult, EXIT_CODES_HELP};

#[derive(Debug, Parser)]
#[command(
    name = "lrorder",
    version,
    about = "Decompose likelihood-ratio-ordered pairs, and estimate and test two densities under the likelihood ratio order",
    after_help = EXIT_CODES_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split an ordered pair of mass functions (`x,f,g` CSV) into a weight and a mixing distribution.
    Decompose(DecomposeArgs),
    /// Rebuild the pair from the output directory of `decompose`.
    Compose(ComposeArgs),
    /// Fit both densities under the order constraint (p0 = 0).
    Fit(RunArgs),
    /// Test F = G against the likelihood ratio order and print P(H0).
    Test(RunArgs),
    /// Recompute the grid summaries from the draws written by `fit` or `test`.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    /// f = theta g + (1 - theta) int g^s dU(s)
    F,
    /// g = omega f + (1 - omega) int f_s dV(s)
    G,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Pair file with columns x,f,g.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Side::F)]
    pub side: Side,
    /// Output directory.
    #[arg(long, default_value = "lrorder-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Output directory of a previous `decompose`.
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write composed.csv; defaults to the input directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Grid and ratio flags shared by the density commands.
#[derive(Debug, Args, Default)]
pub struct SummaryFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub grid_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Direction of the reported ratio: f_over_g or g_over_f.
    #[arg(long)]
    pub ratio: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Data file with columns value,group.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Flat key=value configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prior probability of F = G (ignored by `fit`).
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Independent chains run in parallel and pooled.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Group label of the sample from F (default: first group in the file).
    #[arg(long)]
    pub group_f: Option<String>,
    /// Group label of the sample from G (default: the other group).
    #[arg(long)]
    pub group_g: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub summary: SummaryFlags,
}

#[derive(Debug, Args, Default)]
pub struct SummarizeArgs {
    /// Output directory of a previous `fit` or `test`; summaries are written there too.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub summary: SummaryFlags,
}

fn apply_summary_flags(cfg: &mut RunConfig, s: &SummaryFlags) -> CliResult<()> {
    if let Some(v) = s.grid_min {
        cfg.grid.min = Some(v);
    }
    if let Some(v) = s.grid_max {
        cfg.grid.max = Some(v);
    }
    if let Some(v) = s.grid_points {
        cfg.grid.points = v;
    }
    if let Some(v) = &s.ratio {
        cfg.set("ratio", v)?;
    }
    Ok(())
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        if let Some(v) = &self.data {
            cfg.data = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.chain.seed = v;
        }
        if let Some(v) = self.p0 {
            cfg.prior.p0 = v;
        }
        if let Some(v) = self.iters {
            cfg.chain.iterations = v;
        }
        if let Some(v) = self.burnin {
            cfg.chain.burn_in = v;
        }
        if let Some(v) = self.thin {
            cfg.chain.thin = v;
        }
        if let Some(v) = self.chains {
            cfg.chains = v;
        }
        if let Some(v) = &self.group_f {
            cfg.group_f = Some(v.clone());
        }
        if let Some(v) = &self.group_g {
            cfg.group_g = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        apply_summary_flags(&mut cfg, &self.summary)?;
        Ok(cfg)
    }
}

impl SummarizeArgs {
    /// Starts from the meta file of the run unless `--config` is given.
    pub fn resolve(&self, run_meta: Option<&str>) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        match (&self.config, run_meta) {
            (Some(p), _) => cfg.apply_file(p)?,
            (None, Some(text)) => cfg.apply_str(text)?,
            (None, None) => {}
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        apply_summary_flags(&mut cfg, &self.summary)?;
        Ok(cfg)
    }
}
