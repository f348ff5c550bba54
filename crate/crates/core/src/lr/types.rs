use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability mass function on a finite, strictly increasing support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMassFunction {
    support: Vec<f64>,
    masses: Vec<f64>,
}

/// Allowed deviation of the total mass from one.
pub const MASS_SUM_TOL: f64 = 1e-12;

impl FiniteMassFunction {
    pub fn new(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMassFunction("support must be nonempty".into()));
        }
        if support.len() != masses.len() {
            return Err(Error::InvalidMassFunction(format!(
                "support has {} points but {} masses were given",
                support.len(),
                masses.len()
            )));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMassFunction("support points must be finite".into()));
        }
        if let Some(i) = support.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMassFunction(format!("support not strictly increasing at index {}", i + 1)));
        }
        if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidMassFunction(format!("mass at index {i} is {}", masses[i])));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidMassFunction(format!("masses sum to {total}, not 1")));
        }
        Ok(FiniteMassFunction { support, masses })
    }

    /// Support `0, 1, ..., masses.len() - 1`.
    pub fn on_integers(masses: Vec<f64>) -> Result<Self> {
        let support = (0..masses.len()).map(|i| i as f64).collect();
        Self::new(support, masses)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Mass at support point `x`, zero off the support.
    pub fn mass_at(&self, x: f64) -> f64 {
        match self.support.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }
}

/// Largest tail mass a count decomposition accepts.
pub const MAX_COUNT_TAIL: f64 = 1e-2;

/// Mass function on `0..=T` together with a bound on the mass beyond `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMassFunction {
    masses: Vec<f64>,
    tail_bound: f64,
}

impl CountMassFunction {
    pub fn new(masses: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMassFunction("count masses must be nonempty".into()));
        }
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(Error::InvalidMassFunction(format!("tail bound {tail_bound} must be a finite nonnegative number")));
        }
        if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidMassFunction(format!("mass at {i} is {}", masses[i])));
        }
        let total: f64 = masses.iter().sum::<f64>() + tail_bound;
        if !(total >= 1.0 - 1e-10 && total <= 1.0 + 1e-10) {
            return Err(Error::InvalidMassFunction(format!(
                "masses plus tail bound total {total}, outside [1 - 1e-10, 1]"
            )));
        }
        Ok(CountMassFunction { masses, tail_bound })
    }

    /// Tabulates `pmf` on `0..=t`, using the untabulated remainder as the tail bound.
    pub fn truncate<P: Fn(u64) -> f64>(pmf: P, t: u64) -> Result<Self> {
        let masses: Vec<f64> = (0..=t).map(pmf).collect();
        let tail = (1.0 - masses.iter().sum::<f64>()).max(0.0);
        Self::new(masses, tail)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Truncation index `T`.
    pub fn truncation(&self) -> usize {
        self.masses.len() - 1
    }
}

/// Distribution function tabulated on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDistribution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedDistribution {
    /// Linear interpolation, constant beyond the grid ends.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return self.values[0];
        }
        if x >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let j = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let t = (x - x0) / (x1 - x0);
        self.values[j - 1] + t * (self.values[j] - self.values[j - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mixing {
    Discrete(FiniteMassFunction),
    Count(CountMassFunction),
    Tabulated(TabulatedDistribution),
}

/// Weight on the untruncated component plus the mixing distribution over
/// truncation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDecomposition {
    /// `theta` for f-representations, `omega` for g-representations.
    pub weight: f64,
    /// Absent exactly when `degenerate` is set.
    pub mixing: Option<Mixing>,
    pub degenerate: bool,
    /// Uncertainty in `weight` from truncating a count distribution.
    pub weight_uncertainty: f64,
    /// One minus the mixing mass before renormalisation.
    pub mass_deficit: f64,
}

impl MixtureDecomposition {
    pub fn degenerate() -> Self {
        MixtureDecomposition { weight: 1.0, mixing: None, degenerate: true, weight_uncertainty: 0.0, mass_deficit: 0.0 }
    }

    /// Builds a non-degenerate finite decomposition, validating the weight.
    pub fn finite(weight: f64, mixing: FiniteMassFunction) -> Result<Self> {
        if !(0.0..1.0).contains(&weight) {
            return Err(Error::Domain(format!("non-degenerate weight must lie in [0, 1), got {weight}")));
        }
        Ok(MixtureDecomposition {
            weight,
            mixing: Some(Mixing::Discrete(mixing)),
            degenerate: false,
            weight_uncertainty: 0.0,
            mass_deficit: 0.0,
        })
    }

    pub fn discrete_mixing(&self) -> Option<&FiniteMassFunction> {
        match &self.mixing {
            Some(Mixing::Discrete(m)) => Some(m),
            _ => None,
        }
    }

    pub fn count_mixing(&self) -> Option<&CountMassFunction> {
        match &self.mixing {
            Some(Mixing::Count(m)) => Some(m),
            _ => None,
        }
    }

    pub fn tabulated_mixing(&self) -> Option<&TabulatedDistribution> {
        match &self.mixing {
            Some(Mixing::Tabulated(m)) => Some(m),
            _ => None,
        }
    }
}

/// Outcome of a likelihood-ratio order check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrCheckReport {
    pub is_lr_ordered: bool,
    /// First index at which the ratio moves the wrong way by more than the tolerance.
    pub first_violation: Option<usize>,
    /// Largest wrong-direction step, relative to the largest ratio value.
    pub max_violation: f64,
}
