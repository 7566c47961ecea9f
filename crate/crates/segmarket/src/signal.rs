//! Noisy screening technology of high-tech firms.
//!
//! A matched firm observes a signal theta in [0,1] drawn from `f_q` if the
//! worker is qualified and `f_u` otherwise, with a strictly increasing
//! likelihood ratio. The optimal hiring rule is then a signal threshold
//! `s(pi)` depending on the prior `pi`, and the hire probabilities
//! `A_q = 1 - F_q(s)`, `A_u = 1 - F_u(s)` are what the equilibrium analysis
//! consumes.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::roots::bisect;

/// Number of grid points used to validate generic density families.
const VALIDATION_GRID: usize = 1_000;
/// Slack allowed in the monotone-likelihood-ratio and CDF checks.
const VALIDATION_TOL: f64 = 1e-12;
/// Bisection tolerance for interior thresholds.
const THRESHOLD_TOL: f64 = 1e-12;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Family {
    /// f_q = 2 theta, f_u = 2 (1 - theta); closed forms throughout.
    Triangular,
    Generic {
        density_q: EvalFn,
        density_u: EvalFn,
        cdf_q: EvalFn,
        cdf_u: EvalFn,
    },
}

/// A validated signal technology.
#[derive(Clone)]
pub struct SignalModel {
    family: Family,
}

impl fmt::Debug for SignalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Triangular => write!(f, "SignalModel::Triangular"),
            Family::Generic { .. } => write!(f, "SignalModel::Generic"),
        }
    }
}

/// Where a hiring threshold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdCorner {
    /// Interior solution of the likelihood-ratio equation.
    Interior,
    /// Even the worst signal justifies hiring; threshold 0.
    AlwaysHire,
    /// Even the best signal does not justify hiring; threshold 1.
    NeverHire,
    /// W_q <= 0: a qualified hire is unprofitable, so never hire.
    ValuationNeverProfitable,
    /// W_u >= 0: even unqualified hires pay, so hire everyone.
    ValuationAlwaysProfitable,
}

/// Threshold plus the corner flag; corners are values, not errors, because
/// the equilibrium taxonomy composes over them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HiringRule {
    pub threshold: f64,
    pub corner: ThresholdCorner,
}

/// Hire probabilities implied by a hiring rule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HireRates {
    pub a_q: f64,
    pub a_u: f64,
    pub rule: HiringRule,
}

impl SignalModel {
    /// The triangular family used by all the numerical examples.
    pub fn triangular() -> Self {
        SignalModel {
            family: Family::Triangular,
        }
    }

    /// A user-supplied density/CDF family. Validation checks CDF endpoints,
    /// a strictly increasing likelihood ratio, and first-order dominance on
    /// a 1000-point grid.
    pub fn generic(
        density_q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        density_u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf_q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf_u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let model = SignalModel {
            family: Family::Generic {
                density_q: Arc::new(density_q),
                density_u: Arc::new(density_u),
                cdf_q: Arc::new(cdf_q),
                cdf_u: Arc::new(cdf_u),
            },
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ModelError::DegenerateSignal(msg));
        for (name, value, want) in [
            ("F_q(0)", self.cdf_q(0.0), 0.0),
            ("F_u(0)", self.cdf_u(0.0), 0.0),
            ("F_q(1)", self.cdf_q(1.0), 1.0),
            ("F_u(1)", self.cdf_u(1.0), 1.0),
        ] {
            if (value - want).abs() > 1e-9 {
                return bad(format!("{name} = {value}, expected {want}"));
            }
        }
        // Likelihood ratio must be strictly increasing where defined; points
        // with f_u = 0 count as +infinity and must stay at the top end.
        let mut last_ratio: Option<f64> = None;
        let mut saw_increase = false;
        let mut saw_infinite = false;
        for i in 0..=VALIDATION_GRID {
            let theta = i as f64 / VALIDATION_GRID as f64;
            let fq = self.density_q(theta);
            let fu = self.density_u(theta);
            if fq < 0.0 || fu < 0.0 {
                return bad(format!("negative density at theta={theta}"));
            }
            if self.cdf_q(theta) > self.cdf_u(theta) + 1e-9 {
                return bad(format!("F_q > F_u at theta={theta}: dominance violated"));
            }
            if fq == 0.0 && fu == 0.0 {
                continue;
            }
            if fu == 0.0 {
                saw_infinite = true;
                continue;
            }
            if saw_infinite {
                return bad(format!(
                    "likelihood ratio drops from +inf back to finite at theta={theta}"
                ));
            }
            let ratio = fq / fu;
            if let Some(last) = last_ratio {
                if ratio < last - VALIDATION_TOL {
                    return bad(format!(
                        "likelihood ratio not increasing at theta={theta}: {ratio} < {last}"
                    ));
                }
                if ratio > last + VALIDATION_TOL {
                    saw_increase = true;
                }
            }
            last_ratio = Some(last_ratio.map_or(ratio, |last| last.max(ratio)));
        }
        if !saw_increase && !saw_infinite {
            return bad("likelihood ratio is constant on the whole grid".into());
        }
        Ok(())
    }

    pub fn density_q(&self, theta: f64) -> f64 {
        match &self.family {
            Family::Triangular => 2.0 * theta,
            Family::Generic { density_q, .. } => density_q(theta),
        }
    }

    pub fn density_u(&self, theta: f64) -> f64 {
        match &self.family {
            Family::Triangular => 2.0 * (1.0 - theta),
            Family::Generic { density_u, .. } => density_u(theta),
        }
    }

    pub fn cdf_q(&self, theta: f64) -> f64 {
        match &self.family {
            Family::Triangular => theta * theta,
            Family::Generic { cdf_q, .. } => cdf_q(theta),
        }
    }

    pub fn cdf_u(&self, theta: f64) -> f64 {
        match &self.family {
            Family::Triangular => theta * (2.0 - theta),
            Family::Generic { cdf_u, .. } => cdf_u(theta),
        }
    }

    /// Inverse CDF for qualified draws, used by the agent simulator.
    pub fn sample_q(&self, u: f64) -> f64 {
        match &self.family {
            Family::Triangular => u.sqrt(),
            Family::Generic { cdf_q, .. } => invert_cdf(cdf_q, u),
        }
    }

    /// Inverse CDF for unqualified draws.
    pub fn sample_u(&self, u: f64) -> f64 {
        match &self.family {
            Family::Triangular => 1.0 - (1.0 - u).sqrt(),
            Family::Generic { cdf_u, .. } => invert_cdf(cdf_u, u),
        }
    }

    /// Bayesian posterior that the worker is qualified after observing
    /// `theta` under prior `pi`.
    pub fn posterior(&self, theta: f64, pi: f64) -> Result<f64> {
        if pi <= 0.0 {
            return Ok(0.0);
        }
        if pi >= 1.0 {
            return Ok(1.0);
        }
        let num = pi * self.density_q(theta);
        let den = num + (1.0 - pi) * self.density_u(theta);
        if den == 0.0 {
            return Err(ModelError::DegenerateSignal(format!(
                "both densities vanish at theta={theta}; posterior undefined"
            )));
        }
        Ok(num / den)
    }

    /// Optimal hiring threshold given prior `pi` and match values
    /// (`w_q` > 0 > `w_u` in the interesting region). Corner cases come back
    /// flagged instead of failing.
    pub fn hiring_threshold(&self, pi: f64, w_q: f64, w_u: f64) -> HiringRule {
        self.threshold_for_margin(pi, w_q, w_u, 0.0)
    }

    /// Threshold for the generalized rule "hire iff the posterior hire value
    /// P(theta,pi) w_q + (1-P) w_u clears `margin`". `margin = 0` is the
    /// unconstrained optimum; the quota solver shifts it per group.
    pub fn threshold_for_margin(&self, pi: f64, w_q: f64, w_u: f64, margin: f64) -> HiringRule {
        let rule = |threshold, corner| HiringRule { threshold, corner };
        if w_q <= margin {
            // Even a surely-qualified hire fails the bar.
            return rule(1.0, ThresholdCorner::ValuationNeverProfitable);
        }
        if w_u >= margin {
            return rule(0.0, ThresholdCorner::ValuationAlwaysProfitable);
        }
        if pi <= 0.0 {
            return rule(1.0, ThresholdCorner::NeverHire);
        }
        if pi >= 1.0 {
            return rule(0.0, ThresholdCorner::AlwaysHire);
        }
        // P w_q + (1-P) w_u >= margin  <=>  pi f_q (w_q - margin) >= (1-pi) f_u (margin - w_u).
        let gain = w_q - margin;
        let loss = margin - w_u;
        let excess = |theta: f64| {
            pi * self.density_q(theta) * gain - (1.0 - pi) * self.density_u(theta) * loss
        };
        if let Family::Triangular = self.family {
            // pi 2s gain = (1-pi) 2(1-s) loss  =>  s = (1-pi)loss / (pi gain + (1-pi)loss)
            let num = (1.0 - pi) * loss;
            let den = pi * gain + num;
            return rule(num / den, ThresholdCorner::Interior);
        }
        if excess(0.0) >= 0.0 {
            return rule(0.0, ThresholdCorner::AlwaysHire);
        }
        if excess(1.0) <= 0.0 {
            return rule(1.0, ThresholdCorner::NeverHire);
        }
        let s = bisect(excess, 0.0, 1.0, THRESHOLD_TOL);
        rule(s, ThresholdCorner::Interior)
    }

    /// Hire probabilities for qualified and unqualified workers under the
    /// optimal threshold.
    pub fn hire_rates(&self, pi: f64, w_q: f64, w_u: f64) -> HireRates {
        self.rates_for_rule(self.hiring_threshold(pi, w_q, w_u))
    }

    pub fn rates_for_rule(&self, rule: HiringRule) -> HireRates {
        HireRates {
            a_q: 1.0 - self.cdf_q(rule.threshold),
            a_u: 1.0 - self.cdf_u(rule.threshold),
            rule,
        }
    }

    /// Ex ante expected profit of a high-tech firm per match under the
    /// optimal threshold: `pi A_q w_q + (1-pi) A_u w_u`.
    pub fn expected_hire_profit(&self, pi: f64, w_q: f64, w_u: f64) -> f64 {
        let rates = self.hire_rates(pi, w_q, w_u);
        pi * rates.a_q * w_q + (1.0 - pi) * rates.a_u * w_u
    }
}

fn invert_cdf(cdf: &EvalFn, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    bisect(|theta| cdf(theta) - u, 0.0, 1.0, 1e-12)
}
