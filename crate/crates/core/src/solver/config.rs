use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Formulation;

/// Newton and stepping controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub formulation: Formulation,
    /// Threshold on the weighted update norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Penalty parameter `η` (N/mm²).
    pub eta: f64,
    /// `S_u` (mm).
    pub scale_u: f64,
    pub scale_phi: f64,
    pub scale_theta: f64,
    /// `S_Λ` (N/mm²); `G_c/l` when absent.
    pub scale_lambda: Option<f64>,
    /// How many times a failing increment may be halved.
    pub max_halvings: usize,
    /// Lower bound for the slack variable at the start of a step.
    pub theta_seed: f64,
    /// Dual-feasibility restarts allowed per step.
    pub max_restarts: usize,
    /// Multiplier violation, relative to `S_Λ`, still accepted once the
    /// restarts are used up; a worse state fails the step.
    pub dual_tolerance: f64,
    /// Reset `θ` to `√max(h, 0)` after every Newton update.
    pub project_slack: bool,
    /// Times per step a node held at `θ = 0` by `Λ < 0` may be released
    /// during the iteration.
    pub max_releases: u32,
    /// Stop after this many accepted steps (counted from the start of the history).
    pub max_steps: Option<usize>,
    /// Stop once the applied displacement magnitude reaches this value (mm).
    pub end_displacement: Option<f64>,
    /// Stop after the peak once the load falls below this fraction of it.
    pub stop_load_fraction: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            formulation: Formulation::Lmm,
            tol: 1e-4,
            max_iters: 25,
            eta: 1e6,
            scale_u: 1e-3,
            scale_phi: 1.0,
            scale_theta: 1.0,
            scale_lambda: None,
            max_halvings: 4,
            theta_seed: 1e-3,
            max_restarts: 3,
            dual_tolerance: 0.05,
            project_slack: true,
            max_releases: 1,
            max_steps: None,
            end_displacement: None,
            stop_load_fraction: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        pos("tol", self.tol)?;
        pos("eta", self.eta)?;
        pos("scale_u", self.scale_u)?;
        pos("scale_phi", self.scale_phi)?;
        pos("scale_theta", self.scale_theta)?;
        if let Some(s) = self.scale_lambda {
            pos("scale_lambda", s)?;
        }
        pos("theta_seed", self.theta_seed)?;
        if !(self.dual_tolerance >= 0.0 && self.dual_tolerance.is_finite()) {
            return Err(Error::param(
                "dual_tolerance",
                format!("must be non-negative, got {}", self.dual_tolerance),
            ));
        }
        if let Some(e) = self.end_displacement {
            pos("end_displacement", e)?;
        }
        if let Some(f) = self.stop_load_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::param("stop_load_fraction", format!("must lie in (0, 1), got {f}")));
            }
        }
        Ok(())
    }

    pub fn lambda_scale(&self, gc: f64, length_scale: f64) -> f64 {
        self.scale_lambda.unwrap_or(gc / length_scale)
    }
}

/// One phase of constant displacement increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phase {
    pub count: usize,
    /// Signed increment (mm).
    pub du: f64,
}

/// Piecewise-constant displacement increments, written as `"450*1e-5, 2000*1e-6"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StepSchedule {
    pub phases: Vec<Phase>,
}

impl StepSchedule {
    pub fn new(phases: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let phases: Vec<Phase> = phases.into_iter().map(|(count, du)| Phase { count, du }).collect();
        for p in &phases {
            if p.count == 0 {
                return Err(Error::param("schedule", "phase counts must be positive"));
            }
            if !(p.du.is_finite() && p.du != 0.0) {
                return Err(Error::param(
                    "schedule",
                    format!("increment must be finite and nonzero, got {}", p.du),
                ));
            }
        }
        Ok(Self { phases })
    }

    pub fn total_steps(&self) -> usize {
        self.phases.iter().map(|p| p.count).sum()
    }

    /// Applied displacement after all phases.
    pub fn end_displacement(&self) -> f64 {
        self.phases.iter().map(|p| p.count as f64 * p.du).sum()
    }

    /// Increment of step `k` (0-based).
    pub fn increment(&self, mut k: usize) -> Option<f64> {
        for p in &self.phases {
            if k < p.count {
                return Some(p.du);
            }
            k -= p.count;
        }
        None
    }

    /// Scales every increment by `factor`, keeping the counts.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            phases: self
                .phases
                .iter()
                .map(|p| Phase {
                    count: p.count,
                    du: p.du * factor,
                })
                .collect(),
        }
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut phases = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (count, du) = part
                .split_once('*')
                .ok_or_else(|| Error::param("schedule", format!("expected `count*increment`, got `{part}`")))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::param("schedule", format!("invalid step count `{}`", count.trim())))?;
            let du: f64 = du
                .trim()
                .parse()
                .map_err(|_| Error::param("schedule", format!("invalid increment `{}`", du.trim())))?;
            phases.push((count, du));
        }
        Self::new(phases)
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.phases.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}*{:e}", p.count, p.du)?;
        }
        Ok(())
    }
}

impl TryFrom<String> for StepSchedule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StepSchedule> for String {
    fn from(s: StepSchedule) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_round_trip_and_lookup() {
        let s: StepSchedule = "450*1e-5, 2000*1e-6".parse().unwrap();
        assert_eq!(s.total_steps(), 2450);
        assert_eq!(s.increment(449), Some(1e-5));
        assert_eq!(s.increment(450), Some(1e-6));
        assert_eq!(s.increment(2450), None);
        assert!((s.end_displacement() - 6.5e-3).abs() < 1e-15);
        assert_eq!(s.to_string().parse::<StepSchedule>().unwrap(), s);
        assert!(StepSchedule::default().increment(0).is_none());
    }

    #[test]
    fn bad_schedules_rejected() {
        assert!("0*1e-3".parse::<StepSchedule>().is_err());
        assert!("3*0".parse::<StepSchedule>().is_err());
        assert!("3x1e-3".parse::<StepSchedule>().is_err());
    }

    #[test]
    fn config_validation_names_field() {
        let cfg = SolverConfig {
            eta: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("eta"));
    }
}
