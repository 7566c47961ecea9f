//! Independent verification oracle: deterministic flow iteration of the
//! population balance equations, a finite-agent Monte Carlo of the matching
//! market, and the two-group fragility experiment.
//!
//! Timing convention, every period: separations and revelation-firing apply
//! to the employment stocks as of the start of the period, while the
//! unemployed (also as of the start of the period) match, get screened, and
//! accept or reject; both updates post synchronously. Under this order the
//! fixed point of `flow_step` coincides exactly with the analytic stationary
//! pools, i.e. inflow U*rate equals outflow E*separation stock by stock.

use serde::Serialize;

use crate::baseline::Market;
use crate::error::{ModelError, Result};
use crate::groups::GroupEquilibrium;
use crate::rng::Rng;

/// Population pools for one worker group. Masses, not shares: the qualified
/// identities sum to psi (scaled by the group weight), the unqualified to
/// 1 - psi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowState {
    /// Unemployed qualified / unqualified.
    pub u_q: f64,
    pub u_u: f64,
    /// Employed by type x sector.
    pub e_qh: f64,
    pub e_ql: f64,
    pub e_uh: f64,
    pub e_ul: f64,
}

impl FlowState {
    /// Everyone unemployed; group weight scales both type masses.
    pub fn all_unemployed(psi: f64, weight: f64) -> Self {
        FlowState {
            u_q: weight * psi,
            u_u: weight * (1.0 - psi),
            e_qh: 0.0,
            e_ql: 0.0,
            e_uh: 0.0,
            e_ul: 0.0,
        }
    }

    /// Pool quality among the unemployed. Falls back to `fallback` when the
    /// pool is empty.
    pub fn pi_or(&self, fallback: f64) -> f64 {
        let total = self.u_q + self.u_u;
        if total <= 0.0 {
            fallback
        } else {
            self.u_q / total
        }
    }

    pub fn qualified_mass(&self) -> f64 {
        self.u_q + self.e_qh + self.e_ql
    }

    pub fn unqualified_mass(&self) -> f64 {
        self.u_u + self.e_uh + self.e_ul
    }

    pub fn min_mass(&self) -> f64 {
        self.u_q
            .min(self.u_u)
            .min(self.e_qh)
            .min(self.e_ql)
            .min(self.e_uh)
            .min(self.e_ul)
    }
}

/// How the hiring threshold evolves during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThresholdMode {
    /// Screen at a fixed signal cutoff (oracle mode: the equilibrium cutoff).
    Fixed(f64),
    /// Recompute s(pi_hat) from the current pool each period. Used by the
    /// fragility and discovery experiments, never by the oracle.
    Adaptive,
}

/// The behavior the simulator holds fixed: meeting probability, qualified
/// acceptance of low-tech offers, and the screening rule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Policy {
    pub p: f64,
    pub alpha: f64,
    pub threshold: ThresholdMode,
}

impl Policy {
    /// The oracle policy for a candidate equilibrium: its (p, alpha) with
    /// the screening threshold frozen at s(pi).
    pub fn frozen(market: &Market, pi: f64, alpha: f64, p: f64) -> Self {
        Policy {
            p,
            alpha,
            threshold: ThresholdMode::Fixed(market.threshold(pi)),
        }
    }

    fn rates(&self, market: &Market, pi_hat: f64) -> (f64, f64) {
        match self.threshold {
            ThresholdMode::Fixed(s) => {
                let signal = market.signal();
                (1.0 - signal.cdf_q(s), 1.0 - signal.cdf_u(s))
            }
            ThresholdMode::Adaptive => {
                let rates = market.hire_rates(pi_hat);
                (rates.a_q, rates.a_u)
            }
        }
    }
}

/// One synchronous period of the population balance dynamics.
pub fn flow_step(state: &FlowState, policy: &Policy, market: &Market) -> FlowState {
    let params = market.params();
    let phi = params.phi;
    let sep_u = params.sep_unqualified_high();
    let pi_hat = state.pi_or(params.psi);
    let (a_q, a_u) = policy.rates(market, pi_hat);
    let p = policy.p;

    let hire_qh = state.u_q * p * a_q;
    let hire_ql = state.u_q * (1.0 - p) * policy.alpha;
    let hire_uh = state.u_u * p * a_u;
    let hire_ul = state.u_u * (1.0 - p);

    let sep_qh = state.e_qh * phi;
    let sep_ql = state.e_ql * phi;
    let sep_uh = state.e_uh * sep_u;
    let sep_ul = state.e_ul * phi;

    FlowState {
        u_q: state.u_q - hire_qh - hire_ql + sep_qh + sep_ql,
        u_u: state.u_u - hire_uh - hire_ul + sep_uh + sep_ul,
        e_qh: state.e_qh + hire_qh - sep_qh,
        e_ql: state.e_ql + hire_ql - sep_ql,
        e_uh: state.e_uh + hire_uh - sep_uh,
        e_ul: state.e_ul + hire_ul - sep_ul,
    }
}

/// Analytic stationary pools implied by (pi, alpha, p). Each type's mass is
/// computed from its own stock identity, so type totals are conserved
/// exactly even slightly off the G = 0 manifold.
pub fn steady_state_pools(market: &Market, pi: f64, alpha: f64, p: f64) -> FlowState {
    let params = market.params();
    let phi = params.phi;
    let sep_u = params.sep_unqualified_high();
    let rates = market.hire_rates(pi);
    let load_q = 1.0 + p * rates.a_q / phi + (1.0 - p) * alpha / phi;
    let load_u = 1.0 + p * rates.a_u / sep_u + (1.0 - p) / phi;
    let u_q = params.psi / load_q;
    let u_u = (1.0 - params.psi) / load_u;
    FlowState {
        u_q,
        u_u,
        e_qh: u_q * p * rates.a_q / phi,
        e_ql: u_q * (1.0 - p) * alpha / phi,
        e_uh: u_u * p * rates.a_u / sep_u,
        e_ul: u_u * (1.0 - p) / phi,
    }
}

/// Flow-oracle outcome.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowLimit {
    pub pi: f64,
    pub iterations: usize,
    pub state: FlowState,
}

/// Iterates `flow_step` from the all-unemployed state until consecutive pool
/// qualities differ by less than `tol` and the balance residual (with the
/// policy's own hire rates) is below 10*tol.
pub fn flow_oracle(
    policy: &Policy,
    market: &Market,
    tol: f64,
    max_iter: usize,
) -> Result<FlowLimit> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(ModelError::Precondition(
            "flow oracle tolerance must be positive".into(),
        ));
    }
    let params = market.params();
    let mut state = FlowState::all_unemployed(params.psi, 1.0);
    let mut pi_prev = state.pi_or(params.psi);
    let mut window: Vec<f64> = Vec::with_capacity(64);
    for iteration in 1..=max_iter {
        state = flow_step(&state, policy, market);
        let pi = state.pi_or(pi_prev);
        let delta = (pi - pi_prev).abs();
        pi_prev = pi;
        if window.len() == 50 {
            window.remove(0);
        }
        window.push(pi);
        if delta < tol {
            let (a_q, a_u) = policy.rates(market, pi);
            let residual =
                crate::baseline::g_with_rates(params, pi, policy.alpha, policy.p, a_q, a_u);
            if residual.abs() < 10.0 * tol || delta == 0.0 {
                return Ok(FlowLimit {
                    pi,
                    iterations: iteration,
                    state,
                });
            }
        }
    }
    let window_min = window.iter().copied().fold(f64::INFINITY, f64::min);
    let window_max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Err(ModelError::NonConvergence {
        iterations: max_iter,
        last_delta: (window_max - window_min).abs(),
        window_min,
        window_max,
    })
}

/// Runs the oracle against a solved equilibrium: frozen threshold at its pi,
/// its (alpha, p). Returns the limit pool quality to compare with pi.
pub fn verify_equilibrium(market: &Market, pi: f64, alpha: f64, p: f64) -> Result<f64> {
    let policy = Policy::frozen(market, pi, alpha, p);
    Ok(flow_oracle(&policy, market, 1e-12, 400_000)?.pi)
}

/// Two-group population state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroupFlowState {
    pub f: FlowState,
    pub m: FlowState,
}

/// Verifies a two-group equilibrium by iterating both groups' balances under
/// the shared meeting probability. Returns the limit pair (pi_f, pi_m).
pub fn verify_group_equilibrium(market: &Market, eq: &GroupEquilibrium) -> Result<(f64, f64)> {
    let params = market.params();
    let policy_f = Policy::frozen(market, eq.pi_f, eq.alpha_f, eq.p);
    let policy_m = Policy::frozen(market, eq.pi_m, eq.alpha_m, eq.p);
    let mut state = GroupFlowState {
        f: FlowState::all_unemployed(params.psi, params.lambda_f),
        m: FlowState::all_unemployed(params.psi, params.lambda_m),
    };
    let mut prev = (params.psi, params.psi);
    for _ in 0..400_000 {
        state = GroupFlowState {
            f: flow_step(&state.f, &policy_f, market),
            m: flow_step(&state.m, &policy_m, market),
        };
        let pair = (state.f.pi_or(prev.0), state.m.pi_or(prev.1));
        let delta = (pair.0 - prev.0).abs().max((pair.1 - prev.1).abs());
        prev = pair;
        if delta < 1e-13 {
            return Ok(pair);
        }
    }
    Err(ModelError::NonConvergence {
        iterations: 400_000,
        last_delta: f64::NAN,
        window_min: prev.0,
        window_max: prev.1,
    })
}

/// Monte Carlo record.
#[derive(Debug, Clone, Serialize)]
pub struct McRun {
    /// Pool quality among unemployed agents at the start of each period.
    pub pi_series: Vec<f64>,
    /// Start-of-period agent counts: [u_q, u_u, e_qh, e_ql, e_uh, e_ul].
    pub pool_series: Vec<[usize; 6]>,
    /// Mean and standard deviation over the final 20% of periods.
    pub pi_final_mean: f64,
    pub pi_final_sd: f64,
    pub n_agents: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum AgentState {
    Unemployed,
    HighTech,
    LowTech,
}

/// Finite-agent simulation of the matching market: types drawn once from
/// psi, per-period meetings, signal draws, threshold screening, acceptance,
/// separations, and revelation-firing of unqualified high-tech workers.
/// Bit-reproducible for a given seed.
pub fn monte_carlo_run(
    market: &Market,
    policy: &Policy,
    n_agents: usize,
    periods: usize,
    seed: u64,
) -> Result<McRun> {
    if n_agents < 100 {
        return Err(ModelError::Precondition(format!(
            "monte carlo needs at least 100 agents, got {n_agents}"
        )));
    }
    if periods == 0 {
        return Err(ModelError::Precondition("periods must be positive".into()));
    }
    let params = market.params();
    let signal = market.signal();
    let phi = params.phi;
    let r = params.r;
    let mut rng = Rng::seed_from(seed);
    let qualified: Vec<bool> = (0..n_agents).map(|_| rng.bernoulli(params.psi)).collect();
    let mut states = vec![AgentState::Unemployed; n_agents];
    let mut pi_series = Vec::with_capacity(periods);
    let mut pool_series = Vec::with_capacity(periods);
    let mut pi_hat = params.psi;
    for _ in 0..periods {
        let mut pools = [0usize; 6];
        for (state, &q) in states.iter().zip(&qualified) {
            let idx = match (state, q) {
                (AgentState::Unemployed, true) => 0,
                (AgentState::Unemployed, false) => 1,
                (AgentState::HighTech, true) => 2,
                (AgentState::LowTech, true) => 3,
                (AgentState::HighTech, false) => 4,
                (AgentState::LowTech, false) => 5,
            };
            pools[idx] += 1;
        }
        let unemployed_total = pools[0] + pools[1];
        if unemployed_total > 0 {
            pi_hat = pools[0] as f64 / unemployed_total as f64;
        }
        pi_series.push(pi_hat);
        pool_series.push(pools);
        let s = match policy.threshold {
            ThresholdMode::Fixed(s) => s,
            ThresholdMode::Adaptive => market.threshold(pi_hat),
        };
        for i in 0..n_agents {
            match states[i] {
                AgentState::Unemployed => {
                    if rng.bernoulli(policy.p) {
                        // High-tech meeting: screened on a signal draw.
                        let theta = if qualified[i] {
                            signal.sample_q(rng.next_f64())
                        } else {
                            signal.sample_u(rng.next_f64())
                        };
                        if theta >= s {
                            states[i] = AgentState::HighTech;
                        }
                    } else {
                        // Low-tech meeting: unqualified always accept,
                        // qualified accept with probability alpha.
                        if !qualified[i] || rng.bernoulli(policy.alpha) {
                            states[i] = AgentState::LowTech;
                        }
                    }
                }
                AgentState::HighTech => {
                    let sep = if qualified[i] {
                        phi
                    } else {
                        // Separation or revelation-firing.
                        phi + (1.0 - phi) * r
                    };
                    if rng.bernoulli(sep) {
                        states[i] = AgentState::Unemployed;
                    }
                }
                AgentState::LowTech => {
                    if rng.bernoulli(phi) {
                        states[i] = AgentState::Unemployed;
                    }
                }
            }
        }
    }
    let tail = (periods / 5).max(1);
    let window = &pi_series[periods - tail..];
    let mean = window.iter().sum::<f64>() / tail as f64;
    let var = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / tail as f64;
    Ok(McRun {
        pi_series,
        pool_series,
        pi_final_mean: mean,
        pi_final_sd: var.sqrt(),
        n_agents,
        seed,
    })
}

/// One period of the fragility trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FragilityPoint {
    pub period: usize,
    pub pi_f: f64,
    pub pi_m: f64,
    pub alpha_f: f64,
    pub alpha_m: f64,
    pub p: f64,
}

/// Descriptive output of the fragility experiment.
#[derive(Debug, Clone, Serialize)]
pub struct FragilityReport {
    /// The symmetric mixed equilibrium used as the starting point.
    pub pi_star: f64,
    pub p_star: f64,
    pub epsilon: f64,
    pub series: Vec<FragilityPoint>,
    pub initial_gap: f64,
    pub final_gap: f64,
    pub max_abs_gap: f64,
    /// Peak |pi_m - pi_f| relative to |epsilon|.
    pub amplification: f64,
    /// Where the trajectories ended up.
    pub final_pi_f: f64,
    pub final_pi_m: f64,
    /// The perturbation was amplified by more than a factor of ten: the
    /// trajectories separated instead of damping back. Descriptive, not an
    /// assertion.
    pub diverged: bool,
    /// The run's endpoint sits within 10 |epsilon| of the starting
    /// equilibrium in both pools.
    pub returned_to_start: bool,
}

/// Perturbs the m group's pool quality by epsilon at a symmetric fully mixed
/// equilibrium and iterates both groups with per-period best responses:
/// acceptance follows the q-gap sign (with the previous choice kept inside a
/// small indifference band), screening is adaptive, and entry shifts p
/// toward the more profitable sector.
pub fn fragility_experiment(
    market: &Market,
    epsilon: f64,
    periods: usize,
) -> Result<FragilityReport> {
    use crate::baseline::EqKind;
    let set = market.find_all_equilibria()?;
    let mixed = set
        .of_kind(EqKind::TwoSectorMixed)
        .next()
        .ok_or(ModelError::NoSymmetricMixed)?;
    let params = market.params();
    let q_star = market.valuations().q_star;
    let w_l = market.valuations().w_l;
    let pi_star = mixed.pi;
    let p_star = mixed.p;

    let base = steady_state_pools(market, pi_star, mixed.alpha, p_star);
    let scale = |state: FlowState, weight: f64| FlowState {
        u_q: state.u_q * weight,
        u_u: state.u_u * weight,
        e_qh: state.e_qh * weight,
        e_ql: state.e_ql * weight,
        e_uh: state.e_uh * weight,
        e_ul: state.e_ul * weight,
    };
    let mut state = GroupFlowState {
        f: scale(base, params.lambda_f),
        m: scale(base, params.lambda_m),
    };
    // Shift pool quality of the m group by epsilon holding the unemployment
    // mass and both type totals fixed: swap a sliver of employed qualified
    // for unemployed unqualified (or the reverse for negative epsilon).
    let n_m = state.m.u_q + state.m.u_u;
    if epsilon >= 0.0 {
        let delta = (epsilon * n_m)
            .min(state.m.e_ql + state.m.e_qh)
            .min(state.m.u_u);
        let from_ql = delta.min(state.m.e_ql);
        let from_qh = delta - from_ql;
        state.m.u_q += delta;
        state.m.e_ql -= from_ql;
        state.m.e_qh -= from_qh;
        state.m.u_u -= delta;
        state.m.e_ul += delta;
    } else {
        let delta = (-epsilon * n_m).min(state.m.u_q).min(state.m.e_ul);
        state.m.u_q -= delta;
        state.m.e_ql += delta;
        state.m.u_u += delta;
        state.m.e_ul -= delta;
    }

    let mut p = p_star;
    let mut alpha_f = mixed.alpha;
    let mut alpha_m = mixed.alpha;
    // Proportional entry response, scaled so a profit gap of one low-tech
    // job value moves p by one half.
    let gain = 0.5 / w_l;
    let band = 1e-9;
    let mut series = Vec::with_capacity(periods + 1);
    let mut max_abs_gap: f64 = 0.0;
    let initial_gap = state.m.pi_or(pi_star) - state.f.pi_or(pi_star);
    for period in 0..=periods {
        let pi_f = state.f.pi_or(pi_star);
        let pi_m = state.m.pi_or(pi_star);
        let gap = pi_m - pi_f;
        max_abs_gap = max_abs_gap.max(gap.abs());
        series.push(FragilityPoint {
            period,
            pi_f,
            pi_m,
            alpha_f,
            alpha_m,
            p,
        });
        if period == periods {
            break;
        }
        // Worker best responses to the current market.
        let gap_f = p * market.a_q(pi_f) - q_star;
        let gap_m = p * market.a_q(pi_m) - q_star;
        alpha_f = if gap_f > band {
            0.0
        } else if gap_f < -band {
            1.0
        } else {
            alpha_f
        };
        alpha_m = if gap_m > band {
            0.0
        } else if gap_m < -band {
            1.0
        } else {
            alpha_m
        };
        // Entry drifts toward the more profitable sector.
        let high =
            params.lambda_f * market.hire_profit(pi_f) + params.lambda_m * market.hire_profit(pi_m);
        let low = params.lambda_f * (pi_f * alpha_f + (1.0 - pi_f)) * w_l
            + params.lambda_m * (pi_m * alpha_m + (1.0 - pi_m)) * w_l;
        p = (p + gain * (high - low)).clamp(0.0, 1.0);
        let policy_f = Policy {
            p,
            alpha: alpha_f,
            threshold: ThresholdMode::Adaptive,
        };
        let policy_m = Policy {
            p,
            alpha: alpha_m,
            threshold: ThresholdMode::Adaptive,
        };
        state = GroupFlowState {
            f: flow_step(&state.f, &policy_f, market),
            m: flow_step(&state.m, &policy_m, market),
        };
    }
    let last = series.last().copied().expect("series is non-empty");
    let final_gap = last.pi_m - last.pi_f;
    let tol = 10.0 * epsilon.abs();
    Ok(FragilityReport {
        pi_star,
        p_star,
        epsilon,
        initial_gap,
        final_gap,
        max_abs_gap,
        amplification: if epsilon == 0.0 {
            0.0
        } else {
            max_abs_gap / epsilon.abs()
        },
        final_pi_f: last.pi_f,
        final_pi_m: last.pi_m,
        diverged: epsilon != 0.0 && max_abs_gap > tol,
        returned_to_start: epsilon != 0.0
            && (last.pi_f - pi_star).abs() < tol
            && (last.pi_m - pi_star).abs() < tol,
        series,
    })
}
