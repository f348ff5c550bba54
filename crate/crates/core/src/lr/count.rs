//! Representations for mass functions on the nonnegative integers, computed
//! on a truncated range `0..=T`.

use crate::error::{Error, Result};
use crate::lr::discrete::{check_monotone, split, DEFAULT_LR_TOL};
use crate::lr::types::{CountMassFunction, MixtureDecomposition, Mixing, MAX_COUNT_TAIL};

fn validate(f: &CountMassFunction, g: &CountMassFunction) -> Result<()> {
    if f.masses().len() != g.masses().len() {
        return Err(Error::SupportMismatch(format!(
            "truncation indices differ ({} and {})",
            f.truncation(),
            g.truncation()
        )));
    }
    let tail = f.tail_bound().max(g.tail_bound());
    if tail > MAX_COUNT_TAIL {
        return Err(Error::InsufficientTruncation { tail, limit: MAX_COUNT_TAIL });
    }
    Ok(())
}

fn positive(m: &[f64]) -> Result<()> {
    match m.iter().position(|&x| !(x > 0.0)) {
        Some(index) => Err(Error::Positivity { index }),
        None => Ok(()),
    }
}

fn finish(weight: f64, mixing: Option<Vec<f64>>, deficit: f64, uncertainty: f64) -> Result<MixtureDecomposition> {
    match mixing {
        None => Ok(MixtureDecomposition { weight_uncertainty: uncertainty, ..MixtureDecomposition::degenerate() }),
        Some(m) => Ok(MixtureDecomposition {
            weight,
            mixing: Some(Mixing::Count(CountMassFunction::new(m, 0.0)?)),
            degenerate: false,
            weight_uncertainty: uncertainty,
            mass_deficit: deficit,
        }),
    }
}

/// f-representation on `0..=T`: `theta` is approximated by `r(T)` and `u` is
/// supported on `0..T-1`. The larger of the two tail bounds is reported as
/// the weight's uncertainty.
pub fn decompose_f_count(f: &CountMassFunction, g: &CountMassFunction) -> Result<MixtureDecomposition> {
    validate(f, g)?;
    positive(g.masses())?;
    let r: Vec<f64> = f.masses().iter().zip(g.masses()).map(|(a, b)| a / b).collect();
    let report = check_monotone(&r, DEFAULT_LR_TOL, false);
    if !report.is_lr_ordered {
        return Err(Error::OrderViolation { index: report.first_violation.unwrap_or(0), magnitude: report.max_violation });
    }
    let s = split(f.masses(), g.masses(), 0.0)?;
    finish(s.weight, s.mixing, s.deficit, f.tail_bound().max(g.tail_bound()))
}

/// g-representation on `0..=T`: `omega = g(0)/f(0)` and `v` lives on the
/// positive integers, so the returned masses always start with a zero.
pub fn decompose_g_count(f: &CountMassFunction, g: &CountMassFunction) -> Result<MixtureDecomposition> {
    validate(f, g)?;
    positive(f.masses())?;
    let rho: Vec<f64> = g.masses().iter().zip(f.masses()).map(|(a, b)| a / b).collect();
    let report = check_monotone(&rho, DEFAULT_LR_TOL, true);
    if !report.is_lr_ordered {
        return Err(Error::OrderViolation { index: report.first_violation.unwrap_or(0), magnitude: report.max_violation });
    }
    let num: Vec<f64> = g.masses().iter().rev().cloned().collect();
    let den: Vec<f64> = f.masses().iter().rev().cloned().collect();
    // survival sums start from the mass beyond T
    let s = split(&num, &den, f.tail_bound())?;
    let mixing = s.mixing.map(|mut v| {
        v.reverse();
        v.insert(0, 0.0);
        v
    });
    finish(s.weight, mixing, s.deficit, f.tail_bound().max(g.tail_bound()))
}
