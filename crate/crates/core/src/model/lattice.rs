//! Tabulated evaluation of the model density on a fixed lattice.
//!
//! The tail integral `T(x) = int_x^inf u(s)/G(s) ds` is accumulated from the
//! right over lattice cells with Simpson's rule. Every cell contribution is
//! nonnegative, so `T` and hence `f/g = theta + (1 - theta) T` are
//! non-increasing across the lattice exactly, not just approximately. Beyond
//! the last node the tail is closed with `(1 - U(hi)) / G(hi)`.
//!
//! Per-component densities and distribution functions are cached so that a
//! change to one atom or one stick costs one pass over the lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::mixture::GaussianDPMixture;
use crate::model::state::ModelState;
use crate::numerics::quadrature::CDF_FLOOR;
use crate::numerics::special::{log_std_normal_cdf, log_sum_exp, std_normal_cdf, std_normal_sf, LN_SQRT_2PI};

/// Resolution and extent of the tail lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Number of uniform cells before the required points are merged in.
    pub cells: usize,
    /// Distance from the largest required point to the last node.
    pub upper_pad: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec { cells: 512, upper_pad: 6.0 }
    }
}

/// Sorted lattice nodes, their cell midpoints and extra pdf-only points.
#[derive(Debug, Clone)]
pub struct Lattice {
    nodes: Vec<f64>,
    points: Vec<f64>,
    marked: Vec<usize>,
    n_extra: usize,
}

impl Lattice {
    /// Builds the lattice over `[min(required), max(required ∪ extra) + pad]`,
    /// with every required point as a node. With no required points the
    /// lattice starts at the smallest extra point.
    pub fn new(required: &[f64], extra: &[f64], spec: &LatticeSpec) -> Result<Lattice> {
        if required.is_empty() && extra.is_empty() {
            return Err(Error::Domain("lattice needs at least one point".into()));
        }
        if spec.cells < 2 {
            return Err(Error::Config(format!("lattice needs at least 2 cells, got {}", spec.cells)));
        }
        if required.iter().chain(extra).any(|x| !x.is_finite()) {
            return Err(Error::Domain("lattice points must be finite".into()));
        }
        let anchor = if required.is_empty() { extra } else { required };
        let lo = anchor.iter().cloned().fold(f64::INFINITY, f64::min);
        let top = required.iter().chain(extra).cloned().fold(f64::NEG_INFINITY, f64::max);
        let hi = top + spec.upper_pad.max(1e-3);
        let eps = 1e-12 * (hi - lo).max(1.0);

        let mut tagged: Vec<(f64, bool)> = required.iter().map(|&x| (x, true)).collect();
        for i in 0..=spec.cells {
            tagged.push((lo + (hi - lo) * i as f64 / spec.cells as f64, false));
        }
        tagged.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let mut nodes: Vec<f64> = Vec::with_capacity(tagged.len());
        let mut is_req: Vec<bool> = Vec::with_capacity(tagged.len());
        for (x, req) in tagged {
            match nodes.last() {
                Some(&last) if x - last <= eps => {
                    let k = nodes.len() - 1;
                    if req && !is_req[k] {
                        nodes[k] = x;
                        is_req[k] = true;
                    }
                }
                _ => {
                    nodes.push(x);
                    is_req.push(req);
                }
            }
        }
        let marked = required
            .iter()
            .map(|&x| {
                let i = nodes.partition_point(|&n| n < x - eps);
                i.min(nodes.len() - 1)
            })
            .collect();
        let mut points = nodes.clone();
        points.extend(nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        points.extend_from_slice(extra);
        Ok(Lattice { nodes, points, marked, n_extra: extra.len() })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes plus midpoints: the points where distribution functions are needed.
    fn n_cdf_points(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pending {
    None,
    Atom(usize),
    Stick(usize),
}

/// Per-component values of one mixture at fixed evaluation points.
#[derive(Debug, Clone)]
struct ComponentCache {
    pdf_x: Vec<f64>,
    cdf_x: Vec<f64>,
    hi: f64,
    sticks: Vec<f64>,
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
    sf_hi: Vec<f64>,
    comb_pdf: Vec<f64>,
    comb_cdf: Vec<f64>,
    base_pdf: Vec<f64>,
    base_cdf: Vec<f64>,
    rest_pdf: Vec<f64>,
    rest_cdf: Vec<f64>,
    rem: f64,
    pending: Pending,
}

const PDF_CUTOFF: f64 = 38.6;
const CDF_LOW: f64 = -38.5;
const CDF_HIGH: f64 = 8.5;

fn add_scaled(out: &mut [f64], row: &[f64], w: f64) {
    for (o, r) in out.iter_mut().zip(row) {
        *o += w * r;
    }
}

impl ComponentCache {
    fn new(mix: &GaussianDPMixture, pdf_x: Vec<f64>, cdf_x: Vec<f64>, hi: f64) -> Self {
        let n = mix.n();
        let (np, nc) = (pdf_x.len(), cdf_x.len());
        let mut c = ComponentCache {
            pdf_x,
            cdf_x,
            hi,
            sticks: vec![],
            weights: vec![],
            means: vec![0.0; n],
            variances: vec![1.0; n],
            pdf: vec![0.0; n * np],
            cdf: vec![0.0; n * nc],
            sf_hi: vec![0.0; n],
            comb_pdf: vec![0.0; np],
            comb_cdf: vec![0.0; nc],
            base_pdf: vec![0.0; np],
            base_cdf: vec![0.0; nc],
            rest_pdf: vec![0.0; np],
            rest_cdf: vec![0.0; nc],
            rem: 1.0,
            pending: Pending::None,
        };
        c.load(mix);
        c
    }

    fn load(&mut self, mix: &GaussianDPMixture) {
        self.sticks = mix.sticks.v().to_vec();
        self.weights = mix.weights();
        for k in 0..mix.n() {
            self.fill(k, mix.means[k], mix.variances[k]);
        }
        self.recombine();
    }

    fn n_pdf(&self) -> usize {
        self.pdf_x.len()
    }

    fn n_cdf(&self) -> usize {
        self.cdf_x.len()
    }

    fn pdf_row(&self, k: usize) -> &[f64] {
        let n = self.n_pdf();
        &self.pdf[k * n..(k + 1) * n]
    }

    fn cdf_row(&self, k: usize) -> &[f64] {
        let n = self.n_cdf();
        &self.cdf[k * n..(k + 1) * n]
    }

    fn fill(&mut self, k: usize, mu: f64, var: f64) {
        self.means[k] = mu;
        self.variances[k] = var;
        let sd = var.sqrt();
        let inv_sd = 1.0 / sd;
        let log_norm = -LN_SQRT_2PI - sd.ln();
        let (np, nc) = (self.n_pdf(), self.n_cdf());
        for (out, &x) in self.pdf[k * np..(k + 1) * np].iter_mut().zip(&self.pdf_x) {
            let z = (x - mu) * inv_sd;
            *out = if z.abs() > PDF_CUTOFF { 0.0 } else { (log_norm - 0.5 * z * z).exp() };
        }
        for (out, &x) in self.cdf[k * nc..(k + 1) * nc].iter_mut().zip(&self.cdf_x) {
            let z = (x - mu) * inv_sd;
            *out = if z < CDF_LOW {
                0.0
            } else if z > CDF_HIGH {
                1.0
            } else {
                std_normal_cdf(z)
            };
        }
        self.sf_hi[k] = std_normal_sf((self.hi - mu) * inv_sd);
    }

    /// Weighted sum of rows into the two output buffers.
    fn sum_rows(&self, coefs: impl Iterator<Item = (usize, f64)>, pdf_out: &mut Vec<f64>, cdf_out: &mut Vec<f64>) {
        pdf_out.iter_mut().for_each(|v| *v = 0.0);
        cdf_out.iter_mut().for_each(|v| *v = 0.0);
        for (k, w) in coefs {
            if w == 0.0 {
                continue;
            }
            add_scaled(pdf_out, self.pdf_row(k), w);
            add_scaled(cdf_out, self.cdf_row(k), w);
        }
    }

    fn recombine(&mut self) {
        let (mut p, mut c) = (std::mem::take(&mut self.comb_pdf), std::mem::take(&mut self.comb_cdf));
        self.sum_rows(self.weights.iter().cloned().enumerate(), &mut p, &mut c);
        self.comb_pdf = p;
        self.comb_cdf = c;
        self.pending = Pending::None;
    }

    fn begin_atom(&mut self, k: usize) {
        let (mut p, mut c) = (std::mem::take(&mut self.base_pdf), std::mem::take(&mut self.base_cdf));
        self.sum_rows(self.weights.iter().cloned().enumerate().filter(|&(j, _)| j != k), &mut p, &mut c);
        self.base_pdf = p;
        self.base_cdf = c;
        self.pending = Pending::Atom(k);
    }

    fn set_atom(&mut self, k: usize, mu: f64, var: f64) {
        self.fill(k, mu, var);
        if self.pending != Pending::Atom(k) {
            self.recombine();
            return;
        }
        let w = self.weights[k];
        let (np, nc) = (self.n_pdf(), self.n_cdf());
        let row = &self.pdf[k * np..(k + 1) * np];
        for ((o, b), r) in self.comb_pdf.iter_mut().zip(&self.base_pdf).zip(row) {
            *o = b + w * r;
        }
        let row = &self.cdf[k * nc..(k + 1) * nc];
        for ((o, b), r) in self.comb_cdf.iter_mut().zip(&self.base_cdf).zip(row) {
            *o = b + w * r;
        }
    }

    /// Splits the mixture around stick `j`: components before `j` keep their
    /// weights, those after share the factor `(1 - v_j)`.
    fn begin_stick(&mut self, j: usize) {
        let n = self.weights.len();
        self.rem = self.sticks[..j].iter().map(|v| 1.0 - v).product();
        let (mut p, mut c) = (std::mem::take(&mut self.base_pdf), std::mem::take(&mut self.base_cdf));
        self.sum_rows(self.weights[..j].iter().cloned().enumerate(), &mut p, &mut c);
        self.base_pdf = p;
        self.base_cdf = c;
        let mut rel = Vec::with_capacity(n - j - 1);
        let mut r = 1.0;
        for i in j + 1..n {
            let v = if i < n - 1 { self.sticks[i] } else { 1.0 };
            rel.push((i, v * r));
            r *= 1.0 - v;
        }
        let (mut p, mut c) = (std::mem::take(&mut self.rest_pdf), std::mem::take(&mut self.rest_cdf));
        self.sum_rows(rel.into_iter(), &mut p, &mut c);
        self.rest_pdf = p;
        self.rest_cdf = c;
        self.pending = Pending::Stick(j);
    }

    fn set_stick(&mut self, j: usize, v: f64) {
        self.sticks[j] = v;
        self.weights = weights_from_v(&self.sticks);
        if self.pending != Pending::Stick(j) {
            self.recombine();
            return;
        }
        let (a, b) = (self.rem * v, self.rem * (1.0 - v));
        let (np, nc) = (self.n_pdf(), self.n_cdf());
        let row = &self.pdf[j * np..(j + 1) * np];
        for (((o, base), r), rest) in self.comb_pdf.iter_mut().zip(&self.base_pdf).zip(row).zip(&self.rest_pdf) {
            *o = base + a * r + b * rest;
        }
        let row = &self.cdf[j * nc..(j + 1) * nc];
        for (((o, base), r), rest) in self.comb_cdf.iter_mut().zip(&self.base_cdf).zip(row).zip(&self.rest_cdf) {
            *o = base + a * r + b * rest;
        }
    }

    fn set_sticks(&mut self, v: &[f64]) {
        self.sticks = v.to_vec();
        self.weights = weights_from_v(&self.sticks);
        self.recombine();
    }

    fn sf_hi(&self) -> f64 {
        self.weights.iter().zip(&self.sf_hi).map(|(w, s)| w * s).sum()
    }

    fn log_pdf_at(&self, x: f64) -> f64 {
        let terms: Vec<f64> = (0..self.weights.len())
            .map(|k| {
                let v = self.variances[k];
                self.weights[k].ln() - LN_SQRT_2PI - 0.5 * v.ln() - 0.5 * (x - self.means[k]).powi(2) / v
            })
            .collect();
        log_sum_exp(&terms)
    }

    fn log_cdf_at(&self, x: f64) -> f64 {
        let terms: Vec<f64> = (0..self.weights.len())
            .map(|k| self.weights[k].ln() + log_std_normal_cdf((x - self.means[k]) / self.variances[k].sqrt()))
            .collect();
        log_sum_exp(&terms)
    }
}

fn weights_from_v(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut rem = 1.0;
    for &x in v {
        out.push(x * rem);
        rem *= 1.0 - x;
    }
    out.push(rem);
    out
}

/// Running sum of logarithms that folds factors into a product and takes a
/// logarithm only when the product leaves a safe range.
struct LogAcc {
    log: f64,
    prod: f64,
}

impl LogAcc {
    fn new() -> Self {
        LogAcc { log: 0.0, prod: 1.0 }
    }

    #[inline]
    fn push(&mut self, v: f64) {
        if v > 1e-100 && v < 1e100 {
            self.prod *= v;
            if !(self.prod > 1e-150 && self.prod < 1e150) {
                self.log += self.prod.ln();
                self.prod = 1.0;
            }
        } else {
            self.log += v.ln();
        }
    }

    fn push_ln(&mut self, lv: f64) {
        self.log += lv;
    }

    fn value(&self) -> f64 {
        let v = self.log + self.prod.ln();
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Which mixture an update refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    G,
    U,
}

/// Points at which `g` is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Only the required and extra points, enough for likelihoods.
    Data,
    /// Every lattice point, needed for [`ModelEvaluator::total_mass`].
    Full,
}

/// Cached evaluator of `g`, `u` and the tail integral on a [`Lattice`].
#[derive(Debug, Clone)]
pub struct ModelEvaluator {
    lattice: Lattice,
    mode: EvalMode,
    g: ComponentCache,
    u: ComponentCache,
    marked_pdf: Vec<usize>,
    extra_start: usize,
    hcoef: Vec<f64>,
    q: Vec<f64>,
    t: Vec<f64>,
    tail_evaluations: u64,
}

impl ModelEvaluator {
    /// Evaluator tabulating `g` only where likelihoods need it.
    pub fn new(lattice: Lattice, state: &ModelState) -> Result<Self> {
        Self::with_mode(lattice, state, EvalMode::Data)
    }

    pub fn with_mode(lattice: Lattice, state: &ModelState, mode: EvalMode) -> Result<Self> {
        state.mix_g.validate()?;
        state.mix_u.validate()?;
        if state.mix_g.n() != state.mix_u.n() {
            return Err(Error::State("g and u mixtures must share the truncation level".into()));
        }
        let n_cdf = lattice.n_cdf_points();
        let nn = lattice.n_nodes();
        let cdf_x: Vec<f64> = lattice.points[..n_cdf].to_vec();
        let extras = &lattice.points[n_cdf..];
        let (g_pdf_x, marked_pdf, extra_start) = match mode {
            EvalMode::Data => {
                let mut x: Vec<f64> = lattice.marked.iter().map(|&i| lattice.nodes[i]).collect();
                x.extend_from_slice(extras);
                (x, (0..lattice.marked.len()).collect(), lattice.marked.len())
            }
            EvalMode::Full => (lattice.points.clone(), lattice.marked.clone(), n_cdf),
        };
        let hi = lattice.hi();
        let hcoef = lattice.nodes.windows(2).map(|w| (w[1] - w[0]) / 6.0).collect();
        Ok(ModelEvaluator {
            g: ComponentCache::new(&state.mix_g, g_pdf_x, cdf_x.clone(), hi),
            u: ComponentCache::new(&state.mix_u, cdf_x, vec![], hi),
            marked_pdf,
            extra_start,
            hcoef,
            q: vec![0.0; n_cdf],
            t: vec![0.0; nn],
            lattice,
            mode,
            tail_evaluations: 0,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    /// Number of tail-integral tabulations performed so far.
    pub fn tail_evaluations(&self) -> u64 {
        self.tail_evaluations
    }

    /// Refreshes every cached value from `state`.
    pub fn load(&mut self, state: &ModelState) {
        self.g.load(&state.mix_g);
        self.u.load(&state.mix_u);
    }

    pub fn load_block(&mut self, block: Block, mix: &GaussianDPMixture) {
        self.cache_mut(block).load(mix);
    }

    fn cache_mut(&mut self, block: Block) -> &mut ComponentCache {
        match block {
            Block::G => &mut self.g,
            Block::U => &mut self.u,
        }
    }

    /// Prepares fast repeated updates of atom `k`.
    pub fn begin_atom(&mut self, block: Block, k: usize) {
        self.cache_mut(block).begin_atom(k)
    }

    pub fn set_atom(&mut self, block: Block, k: usize, mu: f64, var: f64) {
        self.cache_mut(block).set_atom(k, mu, var)
    }

    /// Prepares fast repeated updates of stick `j`.
    pub fn begin_stick(&mut self, block: Block, j: usize) {
        self.cache_mut(block).begin_stick(j)
    }

    pub fn set_stick(&mut self, block: Block, j: usize, v: f64) {
        self.cache_mut(block).set_stick(j, v)
    }

    pub fn set_sticks(&mut self, block: Block, v: &[f64]) {
        self.cache_mut(block).set_sticks(v)
    }

    /// Recomputes the tail integral at every node; false if it is not finite.
    pub fn compute_tail(&mut self) -> bool {
        self.tail_evaluations += 1;
        let nn = self.lattice.n_nodes();
        let mut deep = false;
        for ((q, &up), &gc) in self.q.iter_mut().zip(&self.u.comb_pdf).zip(&self.g.comb_cdf) {
            *q = up / gc;
            deep |= gc < CDF_FLOOR;
        }
        if deep {
            for p in 0..self.q.len() {
                if self.g.comb_cdf[p] < CDF_FLOOR {
                    let x = self.lattice.points[p];
                    self.q[p] = if self.u.comb_pdf[p] == 0.0 && self.g.comb_cdf[p] > 0.0 {
                        0.0
                    } else {
                        (self.u.log_pdf_at(x) - self.g.log_cdf_at(x)).exp()
                    };
                }
            }
        }
        let g_hi = self.g.comb_cdf[nn - 1];
        let mut acc = if g_hi > 0.0 { self.u.sf_hi() / g_hi } else { f64::INFINITY };
        let (qn, qm) = self.q.split_at(nn);
        assert!(qm.len() == nn - 1 && self.hcoef.len() == nn - 1 && self.t.len() == nn);
        self.t[nn - 1] = acc;
        for c in (0..nn - 1).rev() {
            acc += self.hcoef[c] * (qn[c] + 4.0 * qm[c] + qn[c + 1]);
            self.t[c] = acc;
        }
        acc.is_finite()
    }

    /// Tail integral at the `i`-th required point (valid after [`compute_tail`]).
    ///
    /// [`compute_tail`]: ModelEvaluator::compute_tail
    pub fn tail_at_marked(&self, i: usize) -> f64 {
        self.t[self.lattice.marked[i]]
    }

    fn g_pdf_value(&self, idx: usize) -> f64 {
        self.g.comb_pdf[idx]
    }

    fn log_g_value(&self, idx: usize) -> f64 {
        let v = self.g.comb_pdf[idx];
        if v >= CDF_FLOOR {
            v.ln()
        } else {
            self.g.log_pdf_at(self.g.pdf_x[idx])
        }
    }

    /// `g` at the `i`-th required point.
    pub fn g_at_marked(&self, i: usize) -> f64 {
        self.g_pdf_value(self.marked_pdf[i])
    }

    /// `ln g` at the `i`-th required point.
    pub fn log_g_at_marked(&self, i: usize) -> f64 {
        self.log_g_value(self.marked_pdf[i])
    }

    /// `ln f` at the `i`-th required point for weight `theta` (valid after
    /// [`ModelEvaluator::compute_tail`]).
    pub fn log_f_at_marked(&self, i: usize, theta: f64) -> f64 {
        let node = self.lattice.marked[i];
        self.log_g_at_marked(i) + (theta + (1.0 - theta) * self.t[node]).ln()
    }

    /// `sum ln f` over required points, tabulating the tail first; `-inf`
    /// when anything is not finite.
    pub fn loglik_f(&mut self, theta: f64) -> f64 {
        if !self.compute_tail() {
            return f64::NEG_INFINITY;
        }
        let mut acc = LogAcc::new();
        for (i, &node) in self.lattice.marked.iter().enumerate() {
            let idx = self.marked_pdf[i];
            let g = self.g.comb_pdf[idx];
            let ratio = theta + (1.0 - theta) * self.t[node];
            if g >= CDF_FLOOR {
                acc.push(g * ratio);
            } else {
                acc.push_ln(self.log_g_value(idx));
                acc.push(ratio);
            }
        }
        acc.value()
    }

    fn loglik_g_range(&self, idx: impl Iterator<Item = usize>) -> f64 {
        let mut acc = LogAcc::new();
        for i in idx {
            let g = self.g.comb_pdf[i];
            if g >= CDF_FLOOR {
                acc.push(g);
            } else {
                acc.push_ln(self.log_g_value(i));
            }
        }
        acc.value()
    }

    /// `sum ln g` over required points.
    pub fn loglik_g_marked(&self) -> f64 {
        self.loglik_g_range(self.marked_pdf.iter().cloned())
    }

    /// `sum ln g` over the extra points.
    pub fn loglik_g_extra(&self) -> f64 {
        self.loglik_g_range(self.extra_start..self.extra_start + self.lattice.n_extra)
    }

    /// Numerical mass of the tabulated `f`: Simpson over the lattice plus the
    /// analytic mass outside it. Uses the tail from the last
    /// [`ModelEvaluator::compute_tail`]; requires [`EvalMode::Full`].
    pub fn total_mass(&self, state: &ModelState) -> Result<f64> {
        if self.mode != EvalMode::Full {
            return Err(Error::Config("total mass needs an evaluator in full mode".into()));
        }
        let theta = state.theta();
        let nn = self.lattice.n_nodes();
        let nodes = &self.lattice.nodes;
        let gp = &self.g.comb_pdf;
        let f_node = |c: usize| gp[c] * (theta + (1.0 - theta) * self.t[c]);
        let mut inner = 0.0;
        for c in 0..nn - 1 {
            let h = nodes[c + 1] - nodes[c];
            // tail at the midpoint from the quadratic through the cell's three values
            let t_mid = self.t[c + 1] + h * (-self.q[c] + 8.0 * self.q[nn + c] + 5.0 * self.q[c + 1]) / 24.0;
            let f_mid = gp[nn + c] * (theta + (1.0 - theta) * t_mid);
            inner += h / 6.0 * (f_node(c) + 4.0 * f_mid + f_node(c + 1));
        }
        let lo = self.lattice.lo();
        let g_lo = state.mix_g.cdf(lo);
        let u_lo = state.mix_u.cdf(lo);
        let left = theta * g_lo + (1.0 - theta) * (u_lo + g_lo * self.t[0]);
        let right = theta * state.mix_g.sf(self.lattice.hi());
        Ok(left + inner + right)
    }

    /// `g` and `f / g` at every node (full mode) for the current tail.
    pub fn node_values(&self, theta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.mode != EvalMode::Full {
            return Err(Error::Config("node values need an evaluator in full mode".into()));
        }
        let nn = self.lattice.n_nodes();
        let g = self.g.comb_pdf[..nn].to_vec();
        let r = self.t.iter().map(|t| theta + (1.0 - theta) * t).collect();
        Ok((g, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::density::log_model_f;
    use crate::model::mixture::StickBreaking;
    use crate::model::prior::{sample_prior_state, PriorConfig};
    use crate::numerics::rng::SeededRng;

    fn mixed_state() -> ModelState {
        ModelState {
            gamma: false,
            theta_tilde: 0.3,
            mix_g: GaussianDPMixture::new(StickBreaking::new(vec![0.6, 0.5]).unwrap(), vec![-0.5, 1.0, 2.0], vec![0.4, 1.0, 0.2])
                .unwrap(),
            mix_u: GaussianDPMixture::new(StickBreaking::new(vec![0.3, 0.7]).unwrap(), vec![-1.0, 0.0, 1.5], vec![0.3, 0.5, 2.0])
                .unwrap(),
            r: vec![],
        }
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn lattice_contains_required_points() {
        let req = vec![0.3, -1.0, 2.5, 0.3];
        let lat = Lattice::new(&req, &[4.0], &LatticeSpec { cells: 10, upper_pad: 1.0 }).unwrap();
        for (i, &x) in req.iter().enumerate() {
            assert_eq!(lat.nodes()[lat.marked()[i]], x);
        }
        assert_eq!(lat.lo(), -1.0);
        assert_eq!(lat.hi(), 5.0);
        assert!(lat.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn matches_quadrature_reference() {
        let s = mixed_state();
        let xs = grid(-3.0, 4.0, 15);
        let lat = Lattice::new(&xs, &[], &LatticeSpec::default()).unwrap();
        let mut ev = ModelEvaluator::new(lat, &s).unwrap();
        assert!(ev.compute_tail());
        for (i, &x) in xs.iter().enumerate() {
            let exact = log_model_f(&s, x, 1e-12).unwrap();
            assert!((ev.log_f_at_marked(i, s.theta()) - exact).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn ratio_exactly_monotone() {
        let s = mixed_state();
        let xs = grid(-4.0, 6.0, 201);
        let lat = Lattice::new(&xs, &[], &LatticeSpec::default()).unwrap();
        let mut ev = ModelEvaluator::new(lat, &s).unwrap();
        ev.compute_tail();
        let r: Vec<f64> = (0..xs.len()).map(|i| (ev.log_f_at_marked(i, 0.3) - ev.log_g_at_marked(i)).exp()).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn total_mass_is_one() {
        let s = mixed_state();
        let lat = Lattice::new(&grid(-4.0, 5.0, 50), &[], &LatticeSpec::default()).unwrap();
        let mut ev = ModelEvaluator::with_mode(lat, &s, EvalMode::Full).unwrap();
        ev.compute_tail();
        let m = ev.total_mass(&s).unwrap();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
    }

    #[test]
    fn incremental_updates_match_reload() {
        let mut rng = SeededRng::new(5, 0);
        let cfg = PriorConfig { p0: 0.0, ..Default::default() };
        let mut s = sample_prior_state(&cfg, 0, &mut rng).unwrap();
        let xs = grid(-2.0, 2.0, 30);
        let ys = grid(-1.0, 3.0, 20);
        let lat = Lattice::new(&xs, &ys, &LatticeSpec::default()).unwrap();
        let mut ev = ModelEvaluator::new(lat.clone(), &s).unwrap();
        ev.begin_atom(Block::G, 3);
        ev.set_atom(Block::G, 3, 0.7, 0.2);
        ev.set_atom(Block::G, 3, -0.1, 0.9);
        s.mix_g.means[3] = -0.1;
        s.mix_g.variances[3] = 0.9;
        ev.begin_atom(Block::U, 4);
        ev.set_atom(Block::U, 4, 1.1, 0.3);
        s.mix_u.means[4] = 1.1;
        s.mix_u.variances[4] = 0.3;
        s.mix_g.sticks.v_mut()[2] = 0.4;
        ev.set_sticks(Block::G, s.mix_g.sticks.v());
        let a = ev.loglik_f(0.4) + ev.loglik_g_extra();
        let mut fresh = ModelEvaluator::new(lat, &s).unwrap();
        let b = fresh.loglik_f(0.4) + fresh.loglik_g_extra();
        assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        assert_eq!(ev.tail_evaluations(), 1);
    }

    #[test]
    fn deep_tail_point_is_finite() {
        let s = mixed_state();
        let lat = Lattice::new(&[-40.0, 0.0], &[], &LatticeSpec::default()).unwrap();
        let mut ev = ModelEvaluator::new(lat, &s).unwrap();
        assert!(ev.compute_tail());
        assert!(ev.log_f_at_marked(0, 0.3).is_finite());
    }
}
