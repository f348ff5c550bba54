use std::path::{Path, PathBuf};

use lrorder_core::lr::{compose_f_discrete, compose_g_discrete, decompose_f_discrete, decompose_g_discrete};
use lrorder_core::posterior::{standardize, summarize};
use lrorder_core::sampler::run_chains;
use lrorder_core::{MixtureDecomposition, PosteriorSummary};

use crate::args::{Cli, Command, ComposeArgs, DecomposeArgs, Side, SummarizeArgs};
use crate::config::RunConfig;
use crate::dataset::{load_dataset, DataFormat};
use crate::error::{CliError, CliResult};
use crate::massfile::{read_mass, read_pair, write_mass, write_pair};
use crate::output::{format_meta, meta_value, write_file, write_outputs, DrawsFile, DRAWS_FILE, META_FILE};

pub const BASE_FILE: &str = "base.csv";
pub const MIXING_FILE: &str = "mixing.csv";
pub const DECOMPOSITION_FILE: &str = "decomposition.txt";
pub const COMPOSED_FILE: &str = "composed.csv";

/// Runs a parsed command and returns the text meant for stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Decompose(a) => decompose(&a),
        Command::Compose(a) => compose(&a),
        Command::Fit(a) => fit(&mut a.resolve()?).map(|r| format!("wrote {}\n", r.out.display())),
        Command::Test(a) => test(&mut a.resolve()?).map(|r| format!("P(H0) = {}\n", r.summary.p_h0)),
        Command::Summarize(a) => summarize_command(&a).map(|r| format!("wrote {}\n", r.display())),
    }
}

pub fn decompose(args: &DecomposeArgs) -> CliResult<String> {
    let (f, g) = read_pair(&args.data)?;
    let (dec, base, name, side) = match args.side {
        Side::F => (decompose_f_discrete(&f, &g)?, &g, "theta", "f"),
        Side::G => (decompose_g_discrete(&f, &g)?, &f, "omega", "g"),
    };
    write_mass(&args.out.join(BASE_FILE), base)?;
    if let Some(m) = dec.discrete_mixing() {
        write_mass(&args.out.join(MIXING_FILE), m)?;
    }
    let meta = format!(
        "side={side}\nweight={}\ndegenerate={}\nsource={}\n",
        dec.weight,
        dec.degenerate,
        args.data.display()
    );
    write_file(&args.out.join(DECOMPOSITION_FILE), &meta)?;
    Ok(format!("{name} = {}\n", dec.weight))
}

pub fn compose(args: &ComposeArgs) -> CliResult<String> {
    let meta_path = args.data.join(DECOMPOSITION_FILE);
    let meta = std::fs::read_to_string(&meta_path).map_err(|e| CliError::input(&meta_path, e))?;
    let field = |k: &str| meta_value(&meta, k).ok_or_else(|| CliError::parse(&meta_path, format!("missing `{k}`")));
    let side = field("side")?;
    let weight: f64 = field("weight")?.parse().map_err(|e| CliError::parse(&meta_path, e))?;
    let degenerate: bool = field("degenerate")?.parse().map_err(|e| CliError::parse(&meta_path, e))?;
    let base = read_mass(&args.data.join(BASE_FILE))?;
    let dec = if degenerate {
        MixtureDecomposition::degenerate()
    } else {
        MixtureDecomposition::finite(weight, read_mass(&args.data.join(MIXING_FILE))?)?
    };
    let out = args.out.clone().unwrap_or_else(|| args.data.clone()).join(COMPOSED_FILE);
    match side {
        "f" => write_pair(&out, &compose_f_discrete(&base, &dec)?, &base)?,
        "g" => write_pair(&out, &base, &compose_g_discrete(&base, &dec)?)?,
        other => return Err(CliError::parse(&meta_path, format!("side must be f or g, got {other:?}"))),
    }
    Ok(format!("wrote {}\n", out.display()))
}

/// Result of a `fit` or `test` run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out: PathBuf,
    pub draws: DrawsFile,
    pub summary: PosteriorSummary,
}

pub fn summarize_draws(draws: &DrawsFile, cfg: &RunConfig) -> CliResult<PosteriorSummary> {
    let data: Vec<f64> = draws.x.iter().chain(&draws.y).copied().collect();
    let grid = cfg.grid.resolve(&data, &draws.standardization)?;
    Ok(summarize(&draws.chain, &draws.standardization, &grid, &cfg.summary)?)
}

fn write_run(command: &str, cfg: &RunConfig, draws: &DrawsFile, summary: &PosteriorSummary) -> CliResult<()> {
    write_outputs(summary, &cfg.out)?;
    write_file(&cfg.out.join(META_FILE), &format_meta(command, cfg, draws, summary))
}

fn run_model(command: &str, cfg: &mut RunConfig) -> CliResult<RunReport> {
    cfg.validate()?;
    let path = cfg.data.clone().ok_or_else(|| CliError::Usage("no data file given; use --data or `data=` in the config".into()))?;
    let ds = load_dataset(&path, DataFormat::from_path(&path))?;
    let (xs, ys, lf, lg) = ds.split(cfg.group_f.as_deref(), cfg.group_g.as_deref())?;
    cfg.group_f = Some(lf.clone());
    cfg.group_g = Some(lg.clone());
    log::info!("{command}: n = {} ({lf}), m = {} ({lg})", xs.len(), ys.len());
    let (zx, zy, s) = standardize(&xs, &ys)?;
    let chain = run_chains(&zx, &zy, &cfg.prior, &cfg.chain, cfg.chains)?;
    let draws = DrawsFile { group_f: lf, group_g: lg, x: xs, y: ys, standardization: s, chain };
    let summary = summarize_draws(&draws, cfg)?;
    draws.write(&cfg.out.join(DRAWS_FILE))?;
    write_run(command, cfg, &draws, &summary)?;
    Ok(RunReport { out: cfg.out.clone(), draws, summary })
}

/// Density estimation only: the spike is switched off.
pub fn fit(cfg: &mut RunConfig) -> CliResult<RunReport> {
    cfg.prior.p0 = 0.0;
    run_model("fit", cfg)
}

pub fn test(cfg: &mut RunConfig) -> CliResult<RunReport> {
    run_model("test", cfg)
}

/// Reads `draws.json` and the meta file from the run directory and rewrites
/// the summaries there.
pub fn summarize_command(args: &SummarizeArgs) -> CliResult<PathBuf> {
    let dir = args.out.clone().unwrap_or_else(|| RunConfig::default().out);
    let draws = DrawsFile::read(&dir.join(DRAWS_FILE))?;
    let meta_path = dir.join(META_FILE);
    let meta = if meta_path.exists() {
        Some(std::fs::read_to_string(&meta_path).map_err(|e| CliError::input(&meta_path, e))?)
    } else {
        None
    };
    let mut cfg = args.resolve(meta.as_deref())?;
    cfg.out = dir.clone();
    cfg.validate()?;
    let command = meta.as_deref().and_then(|m| meta_value(m, "command")).unwrap_or("fit").to_string();
    let summary = summarize_draws(&draws, &cfg)?;
    write_run(&command, &cfg, &draws, &summary)?;
    Ok(dir)
}

/// Convenience for library callers: `test` on a data file with defaults, written to `out`.
pub fn test_file(data: &Path, out: &Path, seed: u64) -> CliResult<RunReport> {
    let mut cfg = RunConfig { data: Some(data.to_path_buf()), out: out.to_path_buf(), ..RunConfig::default() };
    cfg.chain.seed = seed;
    test(&mut cfg)
}
