//! Finite discrete representations and the shared splitting kernel used by
//! the count path.

use crate::error::{Error, Result};
use crate::lr::types::{FiniteMassFunction, LrCheckReport, MixtureDecomposition, Mixing};

/// Default relative tolerance for likelihood-ratio checks.
pub const DEFAULT_LR_TOL: f64 = 1e-10;

/// A weight this close to one is treated as exactly one.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Checks that `ratios` never move in the wrong direction by more than
/// `tol * max(ratios)`.
pub(crate) fn check_monotone(ratios: &[f64], tol: f64, increasing: bool) -> LrCheckReport {
    let scale = ratios.iter().cloned().fold(0.0f64, f64::max);
    let mut first_violation = None;
    let mut max_violation = 0.0f64;
    for (i, w) in ratios.windows(2).enumerate() {
        let step = if increasing { w[0] - w[1] } else { w[1] - w[0] };
        let rel = if scale > 0.0 { step / scale } else { step };
        if rel > max_violation {
            max_violation = rel;
        }
        if rel > tol && first_violation.is_none() {
            first_violation = Some(i + 1);
        }
    }
    LrCheckReport { is_lr_ordered: max_violation <= tol, first_violation, max_violation }
}

/// Output of [`split`]: the weight and the raw (renormalised) mixing masses.
pub(crate) struct Split {
    pub weight: f64,
    pub mixing: Option<Vec<f64>>,
    pub deficit: f64,
}

/// Splits `num` against `den` whose ratio is non-increasing in index order.
///
/// The weight is the last ratio; mixing mass `k` is
/// `C_k (r_k - r_{k+1}) / (1 - weight)` with `C_k = cum_start + sum_{i<=k} den_i`.
pub(crate) fn split(num: &[f64], den: &[f64], cum_start: f64) -> Result<Split> {
    let d = num.len();
    let r: Vec<f64> = num.iter().zip(den).map(|(a, b)| a / b).collect();
    let weight = r[d - 1].clamp(0.0, 1.0);
    if 1.0 - weight <= DEGENERATE_TOL || d == 1 {
        return Ok(Split { weight: 1.0, mixing: None, deficit: 0.0 });
    }
    let mut cum = cum_start;
    let mut raw = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        cum += den[k];
        raw.push((cum * (r[k] - r[k + 1]) / (1.0 - weight)).max(0.0));
    }
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::MixingSupport(format!("mixing masses sum to {total}")));
    }
    for m in raw.iter_mut() {
        *m /= total;
    }
    Ok(Split { weight, mixing: Some(raw), deficit: 1.0 - total })
}

fn same_support(f: &FiniteMassFunction, g: &FiniteMassFunction) -> Result<()> {
    if f.support() != g.support() {
        return Err(Error::SupportMismatch(format!(
            "supports differ (lengths {} and {})",
            f.len(),
            g.len()
        )));
    }
    Ok(())
}

fn require_positive(masses: &[f64]) -> Result<()> {
    match masses.iter().position(|&m| !(m > 0.0)) {
        Some(index) => Err(Error::Positivity { index }),
        None => Ok(()),
    }
}

fn ratios(num: &[f64], den: &[f64]) -> Vec<f64> {
    num.iter().zip(den).map(|(a, b)| a / b).collect()
}

fn violation(report: &LrCheckReport) -> Error {
    Error::OrderViolation { index: report.first_violation.unwrap_or(0), magnitude: report.max_violation }
}

/// Checks that `f/g` is non-increasing on the common support.
pub fn check_lr_discrete(f: &FiniteMassFunction, g: &FiniteMassFunction, tol: f64) -> Result<LrCheckReport> {
    same_support(f, g)?;
    require_positive(g.masses())?;
    Ok(check_monotone(&ratios(f.masses(), g.masses()), tol, false))
}

/// Checks that `g/f` is non-decreasing on the common support (requires `f > 0`).
pub fn check_lr_discrete_reverse(f: &FiniteMassFunction, g: &FiniteMassFunction, tol: f64) -> Result<LrCheckReport> {
    same_support(f, g)?;
    require_positive(f.masses())?;
    Ok(check_monotone(&ratios(g.masses(), f.masses()), tol, true))
}

/// Writes `f = theta g + (1 - theta) sum_j g^{x_j} u(x_j)` and returns `theta`
/// and `u` (on `x_1..x_{d-1}`).
pub fn decompose_f_discrete(f: &FiniteMassFunction, g: &FiniteMassFunction) -> Result<MixtureDecomposition> {
    let report = check_lr_discrete(f, g, DEFAULT_LR_TOL)?;
    if !report.is_lr_ordered {
        return Err(violation(&report));
    }
    let s = split(f.masses(), g.masses(), 0.0)?;
    match s.mixing {
        None => Ok(MixtureDecomposition::degenerate()),
        Some(u) => {
            let support = f.support()[..f.len() - 1].to_vec();
            let mut dec = MixtureDecomposition::finite(s.weight, FiniteMassFunction::new(support, u)?)?;
            dec.mass_deficit = s.deficit;
            Ok(dec)
        }
    }
}

/// Writes `g = omega f + (1 - omega) sum_j f_{x_j} v(x_j)` and returns `omega`
/// and `v` (on `x_2..x_d`).
pub fn decompose_g_discrete(f: &FiniteMassFunction, g: &FiniteMassFunction) -> Result<MixtureDecomposition> {
    let report = check_lr_discrete_reverse(f, g, DEFAULT_LR_TOL)?;
    if !report.is_lr_ordered {
        return Err(violation(&report));
    }
    let num: Vec<f64> = g.masses().iter().rev().cloned().collect();
    let den: Vec<f64> = f.masses().iter().rev().cloned().collect();
    let s = split(&num, &den, 0.0)?;
    match s.mixing {
        None => Ok(MixtureDecomposition::degenerate()),
        Some(mut v) => {
            v.reverse();
            let support = f.support()[1..].to_vec();
            let mut dec = MixtureDecomposition::finite(s.weight, FiniteMassFunction::new(support, v)?)?;
            dec.mass_deficit = s.deficit;
            Ok(dec)
        }
    }
}

/// Maps the mixing distribution onto indices of `base`, rejecting points off
/// the support and mass at the excluded index.
fn mixing_on_base(base: &FiniteMassFunction, dec: &MixtureDecomposition, excluded: usize) -> Result<Vec<f64>> {
    let mixing = match &dec.mixing {
        Some(Mixing::Discrete(m)) => m,
        Some(_) => return Err(Error::MixingSupport("expected a finite mixing distribution".into())),
        None => return Err(Error::MixingSupport("non-degenerate decomposition without mixing".into())),
    };
    let mut out = vec![0.0; base.len()];
    for (&x, &m) in mixing.support().iter().zip(mixing.masses()) {
        let idx = base
            .support()
            .binary_search_by(|p| p.total_cmp(&x))
            .map_err(|_| Error::SupportMismatch(format!("mixing point {x} is not a support point")))?;
        if idx == excluded && m > 0.0 {
            return Err(Error::MixingSupport(format!("mixing mass {m} at excluded support point {x}")));
        }
        out[idx] = m;
    }
    Ok(out)
}

fn check_weight(dec: &MixtureDecomposition) -> Result<Option<f64>> {
    if dec.degenerate || dec.weight == 1.0 {
        return Ok(None);
    }
    if !(0.0..=1.0).contains(&dec.weight) {
        return Err(Error::Domain(format!("weight {} outside [0, 1]", dec.weight)));
    }
    Ok(Some(dec.weight))
}

/// Recomposes `f` from `g`, `theta` and `u`.
pub fn compose_f_discrete(g: &FiniteMassFunction, dec: &MixtureDecomposition) -> Result<FiniteMassFunction> {
    require_positive(g.masses())?;
    let theta = match check_weight(dec)? {
        None => return Ok(g.clone()),
        Some(t) => t,
    };
    let d = g.len();
    let u = mixing_on_base(g, dec, d - 1)?;
    let gm = g.masses();
    let mut cdf = Vec::with_capacity(d);
    let mut acc = 0.0;
    for &m in gm {
        acc += m;
        cdf.push(acc);
    }
    let mut tail = 0.0;
    let mut f = vec![0.0; d];
    for i in (0..d).rev() {
        if i < d - 1 {
            tail += u[i] / cdf[i];
        }
        f[i] = gm[i] * (theta + (1.0 - theta) * tail);
    }
    FiniteMassFunction::new(g.support().to_vec(), f)
}

/// Recomposes `g` from `f`, `omega` and `v`.
pub fn compose_g_discrete(f: &FiniteMassFunction, dec: &MixtureDecomposition) -> Result<FiniteMassFunction> {
    require_positive(f.masses())?;
    let omega = match check_weight(dec)? {
        None => return Ok(f.clone()),
        Some(w) => w,
    };
    let d = f.len();
    let v = mixing_on_base(f, dec, 0)?;
    let fm = f.masses();
    let mut surv = vec![0.0; d];
    let mut acc = 0.0;
    for i in (0..d).rev() {
        acc += fm[i];
        surv[i] = acc;
    }
    let mut head = 0.0;
    let mut g = vec![0.0; d];
    for i in 0..d {
        if i > 0 {
            head += v[i] / surv[i];
        }
        g[i] = fm[i] * (omega + (1.0 - omega) * head);
    }
    FiniteMassFunction::new(f.support().to_vec(), g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, p: f64) -> FiniteMassFunction {
        let mut c = 1.0f64;
        let mut m = Vec::new();
        for k in 0..=n {
            if k > 0 {
                c *= (n - k + 1) as f64 / k as f64;
            }
            m.push(c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32));
        }
        FiniteMassFunction::on_integers(m).unwrap()
    }

    fn fmf(m: &[f64]) -> FiniteMassFunction {
        FiniteMassFunction::on_integers(m.to_vec()).unwrap()
    }

    #[test]
    fn equal_pair_is_ordered() {
        let f = fmf(&[0.5, 0.5]);
        assert!(check_lr_discrete(&f, &f, DEFAULT_LR_TOL).unwrap().is_lr_ordered);
    }

    #[test]
    fn binomial_pair_is_ordered() {
        let r = check_lr_discrete(&binom(10, 1.0 / 3.0), &binom(10, 2.0 / 3.0), DEFAULT_LR_TOL).unwrap();
        assert!(r.is_lr_ordered);
        assert_eq!(r.first_violation, None);
    }

    #[test]
    fn reversed_pair_violates_at_index_one() {
        let r = check_lr_discrete(&fmf(&[0.1, 0.9]), &fmf(&[0.9, 0.1]), DEFAULT_LR_TOL).unwrap();
        assert!(!r.is_lr_ordered);
        assert_eq!(r.first_violation, Some(1));
    }

    #[test]
    fn mismatched_support_and_zero_g() {
        let f = fmf(&[0.5, 0.5]);
        let g = FiniteMassFunction::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(check_lr_discrete(&f, &g, 1e-10), Err(Error::SupportMismatch(_))));
        let g0 = fmf(&[1.0, 0.0]);
        assert!(matches!(check_lr_discrete(&f, &g0, 1e-10), Err(Error::Positivity { index: 1 })));
    }

    #[test]
    fn theta_for_binomials() {
        let dec = decompose_f_discrete(&binom(10, 1.0 / 3.0), &binom(10, 2.0 / 3.0)).unwrap();
        assert!((dec.weight - 2f64.powi(-10)).abs() < 1e-15);
        assert!(!dec.degenerate);
    }

    #[test]
    fn equal_pair_is_degenerate() {
        let g = fmf(&[0.2, 0.3, 0.5]);
        let dec = decompose_f_discrete(&g, &g).unwrap();
        assert!(dec.degenerate && dec.mixing.is_none() && dec.weight == 1.0);
        let dec = decompose_g_discrete(&g, &g).unwrap();
        assert!(dec.degenerate && dec.weight == 1.0);
    }

    #[test]
    fn simplex_vertex() {
        let g = fmf(&[0.2, 0.2, 0.6]);
        let f = fmf(&[0.5, 0.5, 0.0]);
        let dec = decompose_f_discrete(&f, &g).unwrap();
        assert_eq!(dec.weight, 0.0);
        let u = dec.discrete_mixing().unwrap();
        assert_eq!(u.support(), &[0.0, 1.0]);
        assert!(u.masses()[0].abs() < 1e-15 && (u.masses()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compose_collapse_cases() {
        let g = fmf(&[0.2, 0.2, 0.6]);
        assert_eq!(compose_f_discrete(&g, &MixtureDecomposition::degenerate()).unwrap(), g);
        let point = FiniteMassFunction::new(vec![1.0], vec![1.0]).unwrap();
        let f = compose_f_discrete(&g, &MixtureDecomposition::finite(0.0, point).unwrap()).unwrap();
        // truncation of g above x_2
        assert!((f.masses()[0] - 0.5).abs() < 1e-15 && (f.masses()[1] - 0.5).abs() < 1e-15 && f.masses()[2] == 0.0);
    }

    #[test]
    fn compose_term_by_term_oracle() {
        let g = fmf(&[0.2, 0.2, 0.6]);
        let u = FiniteMassFunction::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let f = compose_f_discrete(&g, &MixtureDecomposition::finite(0.3, u).unwrap()).unwrap();
        // f = 0.3 g + 0.7 (0.5 g^{x1} + 0.5 g^{x2}); g^{x1} = (1,0,0), g^{x2} = (0.5,0.5,0)
        let expected = [0.3 * 0.2 + 0.7 * (0.5 + 0.25), 0.3 * 0.2 + 0.7 * 0.25, 0.3 * 0.6];
        for (a, b) in f.masses().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn compose_rejects_mass_at_last_point() {
        let g = fmf(&[0.2, 0.2, 0.6]);
        let u = FiniteMassFunction::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let r = compose_f_discrete(&g, &MixtureDecomposition::finite(0.3, u).unwrap());
        assert!(matches!(r, Err(Error::MixingSupport(_))));
        let off = FiniteMassFunction::new(vec![0.5], vec![1.0]).unwrap();
        let r = compose_f_discrete(&g, &MixtureDecomposition::finite(0.3, off).unwrap());
        assert!(matches!(r, Err(Error::SupportMismatch(_))));
    }

    #[test]
    fn omega_for_binomials() {
        let dec = decompose_g_discrete(&binom(10, 1.0 / 3.0), &binom(10, 2.0 / 3.0)).unwrap();
        assert!((dec.weight - 2f64.powi(-10)).abs() < 1e-15);
        let v = dec.discrete_mixing().unwrap();
        assert_eq!(v.support()[0], 1.0);
    }

    #[test]
    fn g_side_requires_positive_f() {
        let r = decompose_g_discrete(&fmf(&[0.5, 0.5, 0.0]), &fmf(&[0.2, 0.2, 0.6]));
        assert!(matches!(r, Err(Error::Positivity { index: 2 })));
    }

    #[test]
    fn g_side_collapse_cases() {
        let f = fmf(&[0.2, 0.3, 0.5]);
        let point = FiniteMassFunction::new(vec![1.0], vec![1.0]).unwrap();
        let g = compose_g_discrete(&f, &MixtureDecomposition::finite(0.0, point).unwrap()).unwrap();
        // truncation of f below x_2
        assert_eq!(g.masses()[0], 0.0);
        assert!((g.masses()[1] - 0.375).abs() < 1e-15 && (g.masses()[2] - 0.625).abs() < 1e-15);
    }

    #[test]
    fn round_trip_binomial() {
        let f = binom(10, 1.0 / 3.0);
        let g = binom(10, 2.0 / 3.0);
        let dec = decompose_f_discrete(&f, &g).unwrap();
        let back = compose_f_discrete(&g, &dec).unwrap();
        for (a, b) in back.masses().iter().zip(f.masses()) {
            assert!((a - b).abs() < 1e-12);
        }
        let dec = decompose_g_discrete(&f, &g).unwrap();
        let back = compose_g_discrete(&f, &dec).unwrap();
        for (a, b) in back.masses().iter().zip(g.masses()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_rejects_unordered() {
        let r = decompose_f_discrete(&fmf(&[0.1, 0.9]), &fmf(&[0.9, 0.1]));
        assert!(matches!(r, Err(Error::OrderViolation { index: 1, .. })));
    }
}
