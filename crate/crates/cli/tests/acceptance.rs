use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use lrorder_cli::DrawsFile;
use lrorder_core::lr::{
    check_lr_discrete, compose_f_continuous_with, compose_f_discrete, compose_g_discrete, decompose_f_continuous, decompose_f_count,
    decompose_f_discrete, decompose_g_count, decompose_g_discrete, ContinuousDensityPair, DEFAULT_LR_TOL,
};
use lrorder_core::model::eval_model_f;
use lrorder_core::numerics::{adaptive_quadrature, std_normal_cdf, std_normal_pdf, stick_alpha_mle, SeededRng};
use lrorder_core::posterior::{standardize, summarize};
use lrorder_core::sampler::run_chain;
use lrorder_core::{
    ChainConfig, ChainOutput, CountMassFunction, FiniteMassFunction, GridSpec, ModelState, PriorConfig, Standardization, SummaryOptions,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const BINOMIAL_THETA_TOL: f64 = 1e-15;
const RECOMPOSE_TOL: f64 = 1e-12;
const BETA_THETA_MAX: f64 = 1e-10;
const BETA_CDF_TOL: f64 = 1e-8;
const BETA_COMPOSE_TOL: f64 = 1e-6;
const SHIFT_REL_TOL: f64 = 1e-12;
const ROUND_TRIP_PAIRS: usize = 1000;
const ROUND_TRIP_TOL: f64 = 1e-12;
const REPLICATES: u64 = 10;
const SAMPLE_SIZE: usize = 100;
const NULL_MIN_HITS: usize = 8;
const NULL_THRESHOLD: f64 = 0.5;
const ALT_THRESHOLD: f64 = 0.05;
const HOEL_THRESHOLD: f64 = 0.05;
const HOEL_BUDGET: Duration = Duration::from_secs(15 * 60);
const MONOTONE_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-4;
const CROSS_CHECK_REL_TOL: f64 = 1e-5;
const PRIOR_DRAWS: usize = 5000;
const KS_MIN_P: f64 = 0.01;
const ALPHA_REL_TOL: f64 = 0.15;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn report(id: &str, name: &str, started: Instant, outcome: Outcome) -> bool {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id}: {name} ({}; {:.1} s)", outcome.detail, started.elapsed().as_secs_f64());
    outcome.pass
}

fn binom(n: u64, p: f64) -> Vec<f64> {
    let mut c = 1.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                c = c * (n - k + 1) as f64 / k as f64;
            }
            c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        })
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ks_pvalue(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100).map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lambda * lambda).exp()).sum();
    p.clamp(0.0, 1.0)
}

fn criterion_1() -> Outcome {
    let f = FiniteMassFunction::on_integers(binom(10, 1.0 / 3.0)).unwrap();
    let g = FiniteMassFunction::on_integers(binom(10, 2.0 / 3.0)).unwrap();
    let dec = decompose_f_discrete(&f, &g).unwrap();
    let err = (dec.weight - 2f64.powi(-10)).abs();
    let back = compose_f_discrete(&g, &dec).unwrap();
    let sup = sup_diff(back.masses(), f.masses());
    Outcome::new(err <= BINOMIAL_THETA_TOL && sup <= RECOMPOSE_TOL, format!("theta = {:e}, |err| = {err:e}, recompose sup = {sup:e}", dec.weight))
}

fn criterion_2() -> Outcome {
    let grid: Vec<f64> = (0..1001).map(|i| 1e-7 + (1.0 - 2e-7) * i as f64 / 1000.0).collect();
    let pair = ContinuousDensityPair::new(|x: f64| 3.0 * (1.0 - x).powi(2), |_| 1.0, (0.0, 1.0));
    let dec = decompose_f_continuous(&pair, &grid).unwrap();
    let u = dec.tabulated_mixing().unwrap();
    let cdf_err = u.grid.iter().zip(&u.values).map(|(x, v)| (v - x * x * (3.0 - 2.0 * x)).abs()).fold(0.0, f64::max);
    let u22 = |s: f64| if (0.0..=1.0).contains(&s) { 6.0 * s * (1.0 - s) } else { 0.0 };
    let mut compose_err: f64 = 0.0;
    for i in 1..100 {
        let x = i as f64 / 100.0;
        let v = compose_f_continuous_with(|_| 1.0, |s: f64| s.clamp(0.0, 1.0), u22, 0.0, x, 1.0, 1e-12).unwrap();
        compose_err = compose_err.max((v - 3.0 * (1.0 - x).powi(2)).abs());
    }
    Outcome::new(
        dec.weight <= BETA_THETA_MAX && cdf_err <= BETA_CDF_TOL && compose_err <= BETA_COMPOSE_TOL,
        format!("theta = {:e}, mixing cdf err = {cdf_err:e}, compose err = {compose_err:e}", dec.weight),
    )
}

fn criterion_3() -> Outcome {
    let pair = ContinuousDensityPair::new(|x| std_normal_pdf(x + 1.0), |x| std_normal_pdf(x - 1.0), (f64::NEG_INFINITY, f64::INFINITY))
        .with_cdfs(|x| std_normal_cdf(x + 1.0), |x| std_normal_cdf(x - 1.0));
    let grid: Vec<f64> = (0..=150).map(|i| -5.0 + 0.1 * i as f64).collect();
    let dec = decompose_f_continuous(&pair, &grid).unwrap();
    let e = (-20f64).exp();
    let rel = ((dec.weight - e) / e).abs();
    Outcome::new(rel <= SHIFT_REL_TOL, format!("theta = {:e}, rel err = {rel:e}", dec.weight))
}

fn random_lr_pair(rng: &mut SeededRng) -> (Vec<f64>, Vec<f64>) {
    let d = rng.random_range(2..=50);
    let g: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..1.0)).collect();
    let mut ratio = vec![1.0];
    for _ in 1..d {
        let last: f64 = *ratio.last().unwrap();
        ratio.push(last * rng.random_range(0.2..1.0));
    }
    let sg: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|v| v / sg).collect();
    let f: Vec<f64> = g.iter().zip(&ratio).map(|(a, b)| a * b).collect();
    let sf: f64 = f.iter().sum();
    (f.iter().map(|v| v / sf).collect(), g)
}

fn criterion_4() -> Outcome {
    let mut rng = SeededRng::new(2024, 0);
    let (mut worst, mut lr_failures, mut path_mismatches) = (0.0f64, 0usize, 0usize);
    for _ in 0..ROUND_TRIP_PAIRS {
        let (f, g) = random_lr_pair(&mut rng);
        let fm = FiniteMassFunction::on_integers(f.clone()).unwrap();
        let gm = FiniteMassFunction::on_integers(g.clone()).unwrap();

        let df = decompose_f_discrete(&fm, &gm).unwrap();
        let back_f = compose_f_discrete(&gm, &df).unwrap();
        worst = worst.max(sup_diff(back_f.masses(), &f));
        let dg = decompose_g_discrete(&fm, &gm).unwrap();
        let back_g = compose_g_discrete(&fm, &dg).unwrap();
        worst = worst.max(sup_diff(back_g.masses(), &g));
        if !check_lr_discrete(&back_f, &gm, DEFAULT_LR_TOL).unwrap().is_lr_ordered
            || !check_lr_discrete(&fm, &back_g, DEFAULT_LR_TOL).unwrap().is_lr_ordered
        {
            lr_failures += 1;
        }

        let fc = CountMassFunction::new(f, 0.0).unwrap();
        let gc = CountMassFunction::new(g, 0.0).unwrap();
        let cf = decompose_f_count(&fc, &gc).unwrap();
        let cg = decompose_g_count(&fc, &gc).unwrap();
        let same_mixing = match (df.discrete_mixing(), cf.count_mixing()) {
            (Some(a), Some(b)) => a.masses() == b.masses(),
            (None, None) => true,
            _ => false,
        };
        if cf.weight.to_bits() != df.weight.to_bits() || cg.weight.to_bits() != dg.weight.to_bits() || cf.degenerate != df.degenerate || !same_mixing {
            path_mismatches += 1;
        }
    }
    Outcome::new(
        worst <= ROUND_TRIP_TOL && lr_failures == 0 && path_mismatches == 0,
        format!("{ROUND_TRIP_PAIRS} pairs, max round-trip err = {worst:e}, check_lr failures = {lr_failures}, count/discrete mismatches = {path_mismatches}"),
    )
}

fn normals(n: usize, shift: f64, rng: &mut SeededRng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            shift + z
        })
        .collect()
}

/// Invariant tallies for criterion 7, accumulated over every fitted run.
#[derive(Default)]
struct InvariantTally {
    runs: usize,
    draws: usize,
    monotone_violations: usize,
    mass_violations: usize,
    max_ratio_increase: f64,
    max_mass_error: f64,
    cross_checks: usize,
    cross_check_failures: usize,
    max_cross_check_err: f64,
}

impl InvariantTally {
    /// Summarizes the chain on the default grid, then re-evaluates one slab
    /// draw by direct quadrature and compares it with the lattice values.
    fn add(&mut self, chain: &ChainOutput, x: &[f64], y: &[f64], s: &Standardization) {
        let data: Vec<f64> = x.iter().chain(y).copied().collect();
        let grid = GridSpec::default().resolve(&data, s).unwrap();
        let sm = summarize(chain, s, &grid, &SummaryOptions::default()).unwrap();
        let c = &sm.checks;
        self.runs += 1;
        self.draws += c.draws;
        self.monotone_violations += c.monotone_violations;
        self.mass_violations += c.mass_violations;
        self.max_ratio_increase = self.max_ratio_increase.max(c.max_ratio_increase);
        self.max_mass_error = self.max_mass_error.max(c.max_mass_error);

        // own recount of the lattice output
        for (r, f) in sm.draws_ratio_fg.iter().zip(&sm.draws_f) {
            if r.windows(2).any(|w| w[1] > w[0] * (1.0 + MONOTONE_TOL)) {
                self.monotone_violations += 1;
            }
            if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
                self.mass_violations += 1;
            }
        }

        let Some(d) = chain.draws.iter().position(|st| !st.gamma) else { return };
        let state = &chain.draws[d];
        self.cross_checks += 1;
        let ok = match cross_check(state, &grid, &sm.draws_f[d], s) {
            Ok(err) => {
                self.max_cross_check_err = self.max_cross_check_err.max(err.0).max(err.1);
                err.0 <= CROSS_CHECK_REL_TOL && err.1 <= MASS_TOL
            }
            Err(e) => {
                eprintln!("  quadrature cross-check failed: {e}");
                false
            }
        };
        if !ok {
            self.cross_check_failures += 1;
        }
    }
}

/// Largest relative pointwise error against the lattice values, and the
/// mass error, of the directly integrated density of one draw.
fn cross_check(state: &ModelState, grid: &[f64], lattice_f: &[f64], s: &Standardization) -> lrorder_core::Result<(f64, f64)> {
    let mut worst: f64 = 0.0;
    for j in (0..grid.len()).step_by(grid.len() / 8) {
        let direct = eval_model_f(state, s.to_std(grid[j]), 1e-11)? / s.pooled_sd;
        worst = worst.max((direct - lattice_f[j]).abs() / direct.max(1e-300));
    }
    let reach = state
        .mix_g
        .means
        .iter()
        .zip(&state.mix_g.variances)
        .chain(state.mix_u.means.iter().zip(&state.mix_u.variances))
        .map(|(m, v)| m.abs() + 14.0 * v.sqrt())
        .fold(0.0, f64::max);
    let mut failure = None;
    let mass = adaptive_quadrature(
        |z| {
            eval_model_f(state, z, 1e-11).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        },
        -reach,
        reach,
        1e-9,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((worst, (mass?.value - 1.0).abs()))
}

fn criterion_5(tally: &mut InvariantTally) -> (Outcome, Outcome) {
    let prior = PriorConfig::default();
    let mut run = |seed: u64, shift_x: f64, shift_y: f64| -> f64 {
        let mut rng = SeededRng::new(seed, 7);
        let x = normals(SAMPLE_SIZE, shift_x, &mut rng);
        let y = normals(SAMPLE_SIZE, shift_y, &mut rng);
        let (zx, zy, s) = standardize(&x, &y).unwrap();
        let chain = run_chain(&zx, &zy, &prior, &ChainConfig { seed, ..ChainConfig::default() }).unwrap();
        tally.add(&chain, &x, &y, &s);
        chain.gamma_trace.iter().filter(|&&g| g == 1).count() as f64 / chain.gamma_trace.len() as f64
    };

    let null: Vec<f64> = (1..=REPLICATES)
        .map(|seed| {
            let p = run(seed, 0.0, 0.0);
            eprintln!("  5a replicate {seed}: P(H0) = {p}");
            p
        })
        .collect();
    let alt: Vec<f64> = (1..=REPLICATES)
        .map(|seed| {
            let p = run(100 + seed, -1.0, 1.0);
            eprintln!("  5b replicate {seed}: P(H0) = {p}");
            p
        })
        .collect();
    let hits = null.iter().filter(|&&p| p > NULL_THRESHOLD).count();
    let below = alt.iter().filter(|&&p| p < ALT_THRESHOLD).count();
    (
        Outcome::new(hits >= NULL_MIN_HITS, format!("{hits}/{REPLICATES} replicates with P(H0) > {NULL_THRESHOLD}: {null:?}")),
        Outcome::new(below == REPLICATES as usize, format!("{below}/{REPLICATES} replicates with P(H0) < {ALT_THRESHOLD}: {alt:?}")),
    )
}

fn hoel_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/hoel1972.csv")
}

fn run_hoel_test(out: &Path) -> (Option<f64>, Duration) {
    let started = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_lrorder"))
        .arg("test")
        .arg("--data")
        .arg(hoel_data())
        .arg("--out")
        .arg(out)
        .output()
        .expect("failed to launch lrorder");
    let elapsed = started.elapsed();
    if !output.status.success() {
        eprintln!("  lrorder test failed: {}", String::from_utf8_lossy(&output.stderr));
        return (None, elapsed);
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    let p = stdout.lines().find_map(|l| l.strip_prefix("P(H0) = ")).and_then(|v| v.trim().parse().ok());
    (p, elapsed)
}

fn criterion_6(out: &Path, tally: &mut InvariantTally) -> Outcome {
    let (p, elapsed) = run_hoel_test(out);
    let Some(p) = p else { return Outcome::new(false, "test command did not report P(H0)".into()) };
    let draws = DrawsFile::read(&out.join("draws.json")).unwrap();
    tally.add(&draws.chain, &draws.x, &draws.y, &draws.standardization);
    Outcome::new(
        p <= HOEL_THRESHOLD && elapsed <= HOEL_BUDGET,
        format!("P(H0) = {p}, n_f = {}, n_g = {}, run time {:.1} s", draws.x.len(), draws.y.len(), elapsed.as_secs_f64()),
    )
}

fn criterion_7(t: &InvariantTally) -> Outcome {
    Outcome::new(
        t.monotone_violations == 0 && t.mass_violations == 0 && t.max_mass_error <= MASS_TOL && t.cross_check_failures == 0 && t.cross_checks > 0,
        format!(
            "{} runs, {} draws, monotone violations = {}, mass violations = {}, max ratio increase = {:e}, max mass err = {:e}, quadrature cross-checks {}/{} ok (max err {:e})",
            t.runs,
            t.draws,
            t.monotone_violations,
            t.mass_violations,
            t.max_ratio_increase,
            t.max_mass_error,
            t.cross_checks - t.cross_check_failures,
            t.cross_checks,
            t.max_cross_check_err
        ),
    )
}

fn criterion_8() -> Outcome {
    let prior = PriorConfig { p0: 0.0, ..PriorConfig::default() };
    let (burn_in, thin) = (200, 2);
    let cfg = ChainConfig { iterations: burn_in + thin * PRIOR_DRAWS, burn_in, thin, seed: 31, pseudo_iters: 100, ..ChainConfig::default() };
    let out = run_chain(&[], &[], &prior, &cfg).unwrap();
    let pinned = out.gamma_trace.iter().all(|&g| g == 0);
    let theta: Vec<f64> = out.draws.iter().map(|s| s.theta_tilde).collect();
    let p = ks_pvalue(theta, |t| t.clamp(0.0, 1.0));
    let v2: Vec<Vec<f64>> = out.draws.iter().map(|s| s.mix_u.sticks.v().to_vec()).collect();
    let alpha = stick_alpha_mle(&v2).unwrap();
    let rel = (alpha - prior.alpha).abs() / prior.alpha;
    Outcome::new(
        pinned && out.draws.len() == PRIOR_DRAWS && p > KS_MIN_P && rel <= ALPHA_REL_TOL,
        format!("{} draws, gamma pinned = {pinned}, theta KS p = {p:.4}, alpha = {alpha:.4} (rel err {rel:.4})", out.draws.len()),
    )
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Reruns the Hoel test into the same output path so the recorded
/// configuration is identical too.
fn criterion_9(out: &Path, moved: &Path) -> Outcome {
    std::fs::rename(out, moved).unwrap();
    let (first, second) = (moved, out);
    let (p, _) = run_hoel_test(second);
    if p.is_none() {
        return Outcome::new(false, "second test run failed".into());
    }
    let (a, b) = (dir_files(first), dir_files(second));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let same = a.len() == b.len() && differing.is_empty();
    let bytes: usize = a.iter().map(|(_, c)| c.len()).sum();
    Outcome::new(same, format!("files {names:?}, {bytes} bytes, differing {differing:?}"))
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let (hoel, hoel_first) = (scratch.path().join("hoel"), scratch.path().join("hoel-first"));
    let mut all = true;
    let mut tally = InvariantTally::default();

    for (id, name, check) in [
        ("1", "binomial decomposition", criterion_1 as fn() -> Outcome),
        ("2", "beta/uniform analytic case", criterion_2),
        ("3", "normal shift endpoint weight", criterion_3),
        ("4", "randomized round trips", criterion_4),
    ] {
        let t = Instant::now();
        all &= report(id, name, t, check());
    }

    let t = Instant::now();
    let (a, b) = criterion_5(&mut tally);
    all &= report("5a", "equal normal samples favour H0", t, a);
    all &= report("5b", "shifted normal samples reject H0", t, b);

    let t = Instant::now();
    all &= report("6", "Hoel application", t, criterion_6(&hoel, &mut tally));

    let t = Instant::now();
    all &= report("7", "order and normalization over retained draws", t, criterion_7(&tally));

    let t = Instant::now();
    all &= report("8", "prior reproduction", t, criterion_8());

    let t = Instant::now();
    all &= report("9", "byte-identical repeated run", t, criterion_9(&hoel, &hoel_first));

    if all {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: some criteria failed");
        std::process::exit(1);
    }
}
