//! Measured guarantee records shared by the randomized stages.

use crate::defect::{EvalMode, MomentResult};
use crate::real::ext_real;
use serde::{Deserialize, Serialize};

/// Sampled upper bounds pass only if `estimate + SAFETY_SIGMAS * std_error <= bound`.
pub const SAFETY_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
}

/// One evaluated inequality: `measured (>= | <=) bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "ext_real")]
    pub measured: f64,
    #[serde(with = "ext_real")]
    pub bound: f64,
    pub relation: Relation,
    pub mode: EvalMode,
    #[serde(with = "ext_real")]
    pub std_error: f64,
    pub samples: usize,
    /// Sampling seed, so a sampled check can be recomputed exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub passed: bool,
}

impl Check {
    fn exact(name: impl Into<String>, measured: f64, bound: f64, relation: Relation) -> Check {
        let passed = match relation {
            Relation::AtLeast => measured >= bound,
            Relation::AtMost => measured <= bound,
        };
        Check {
            name: name.into(),
            measured,
            bound,
            relation,
            mode: EvalMode::Exact,
            std_error: 0.0,
            samples: 0,
            seed: None,
            passed,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Check {
        Self::exact(name, measured, bound, Relation::AtLeast)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Check {
        Self::exact(name, measured, bound, Relation::AtMost)
    }

    /// Upper bound on a moment; sampled values get the safety margin.
    pub fn moment_at_most(name: impl Into<String>, m: &MomentResult, bound: f64, seed: u64) -> Check {
        let passed = match m.mode {
            EvalMode::Exact => m.value <= bound,
            EvalMode::Sampled => m.value + SAFETY_SIGMAS * m.std_error <= bound,
        };
        Check {
            name: name.into(),
            measured: m.value,
            bound,
            relation: Relation::AtMost,
            mode: m.mode,
            std_error: m.std_error,
            samples: m.sample_count,
            seed: (m.mode == EvalMode::Sampled).then_some(seed),
            passed,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Name of the first failing check, if any.
pub fn first_failure(checks: &[Check]) -> Option<&str> {
    checks.iter().find(|c| !c.passed).map(|c| c.name.as_str())
}
