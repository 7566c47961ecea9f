//! Two-group solvers: symmetric lifts, the three asymmetric configurations,
//! the constructive population-share sweep, and the hiring-quota check.
//!
//! Both groups search the same market, so they face one common high-tech
//! meeting probability `p`. Each group's pool satisfies the one-group steady
//! state G = 0 with its own (pi, alpha); entry indifference aggregates over
//! groups with population weights. Worker optimality compares p*A_q(pi_j)
//! with the common Q*, which is why at most one group can mix strictly
//! unless the pools coincide.
//!
//! Label convention: solvers search the pi_m > pi_f orientation only. The
//! mirror-image equilibrium is the same object with group labels swapped and
//! is not reported separately.

use serde::Serialize;

use crate::baseline::{g_with_rates, EqKind, Market, RESIDUAL_TOL};
use crate::error::{ModelError, Result};
use crate::roots::{affine_root, bisect, newton_system, scan_roots};
use crate::signal::HireRates;

/// Strictness margin for the inclusion filters.
const FILTER_TOL: f64 = 1e-9;
/// Two candidates closer than this in (pi_f, pi_m) are the same root.
const DEDUP_TOL: f64 = 1e-7;
/// Outer scan resolution for the nested one-dimensional searches.
const OUTER_POINTS: usize = 400;
/// Inner scan resolution when hunting a root of G in pi.
const INNER_SUBINTERVALS: usize = 4_000;
/// Scans stay this far inside (0,1).
const EDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GroupKind {
    /// Baseline equilibrium applied to both groups (two-sector kinds).
    Symmetric(EqKind),
    /// Both groups at pi = psi with only low-tech firms active.
    GroupLowTechOnly,
    /// Only high-tech firms active, common pool solution.
    GroupHighTechOnly,
    /// alpha_m = 0, alpha_f strictly interior.
    AsymFemMixed,
    /// alpha_f = 1, alpha_m strictly interior.
    AsymMaleMixed,
    /// alpha_f = 1, alpha_m = 0, neither group indifferent.
    AsymPure,
}

impl GroupKind {
    pub fn label(&self) -> String {
        match self {
            GroupKind::Symmetric(kind) => format!("symmetric-{}", kind.label()),
            GroupKind::GroupLowTechOnly => "group-low-tech-only".into(),
            GroupKind::GroupHighTechOnly => "group-high-tech-only".into(),
            GroupKind::AsymFemMixed => "asym-fem-mixed".into(),
            GroupKind::AsymMaleMixed => "asym-male-mixed".into(),
            GroupKind::AsymPure => "asym-pure".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroupDiagnostics {
    /// |G| at the female and male pool solutions.
    pub residual_f: f64,
    pub residual_m: f64,
    /// Aggregate entry-indifference residual.
    pub entry_residual: f64,
    /// p * A_q(pi_j) - Q* per group.
    pub q_gap_f: f64,
    pub q_gap_m: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroupEquilibrium {
    pub kind: GroupKind,
    pub pi_f: f64,
    pub pi_m: f64,
    pub alpha_f: f64,
    pub alpha_m: f64,
    pub p: f64,
    pub lambda_f: f64,
    pub lambda_m: f64,
    pub diagnostics: GroupDiagnostics,
}

/// Why an asymmetric system solution is not an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AsymReject {
    /// The groups' pools coincide (or invert); the configuration degenerates.
    OrderingViolated,
    /// The implied mixing probability is not in (0,1).
    AlphaOutOfRange,
    /// The meeting probability left [0,1].
    POutOfRange,
    /// A group's q-gap has the wrong sign for its acceptance rule.
    WorkerOptimalityViolated,
    /// The refined solution did not meet the residual tolerance.
    ResidualTooLarge,
}

impl AsymReject {
    pub fn describe(&self) -> &'static str {
        match self {
            AsymReject::OrderingViolated => "pi_m does not exceed pi_f",
            AsymReject::AlphaOutOfRange => "implied acceptance probability outside (0,1)",
            AsymReject::POutOfRange => "meeting probability outside [0,1]",
            AsymReject::WorkerOptimalityViolated => "q-gap sign contradicts acceptance rule",
            AsymReject::ResidualTooLarge => "solver residual above tolerance",
        }
    }
}

/// A solution of an asymmetric steady-state system, admissible or not.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymCandidate {
    pub equilibrium: GroupEquilibrium,
    /// None when the candidate passed every filter.
    pub verdict: Option<AsymReject>,
}

/// Output of one asymmetric class solver.
#[derive(Debug, Clone, Serialize)]
pub struct AsymOutcome {
    /// Candidates passing all admissibility filters.
    pub equilibria: Vec<GroupEquilibrium>,
    /// Every system solution found, with its verdict.
    pub candidates: Vec<AsymCandidate>,
    /// min over candidates of p * A_q(pi_f) - Q*; the existence check used
    /// by the mixed-male construction.
    pub min_q_gap_f: Option<f64>,
}

/// One row of the constructive sweep around a fully mixed symmetric
/// equilibrium.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShareSweepRow {
    pub p: f64,
    pub pi_f: Option<f64>,
    pub pi_m: Option<f64>,
    pub lambda_f: Option<f64>,
    pub lambda_m: Option<f64>,
    pub q_gap_f: Option<f64>,
    pub q_gap_m: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShareSweep {
    /// The symmetric mixed equilibrium the sweep is anchored at.
    pub pi_star: f64,
    pub p_star: f64,
    pub rows: Vec<ShareSweepRow>,
    /// Whether lambda_m is strictly increasing across the valid rows
    /// (None with fewer than two valid rows).
    pub lambda_m_increasing: Option<bool>,
}

fn q_gap(market: &Market, p: f64, pi: f64) -> f64 {
    p * market.a_q(pi) - market.valuations().q_star
}

/// Asymmetric configurations need two groups with mass.
fn degenerate_groups(market: &Market) -> bool {
    market.params().lambda_f < 1e-9 || market.params().lambda_m < 1e-9
}

/// Aggregate entry-indifference residual (low-tech value minus high-tech
/// value per meeting, population-weighted).
fn entry_gap(market: &Market, pi_f: f64, pi_m: f64, alpha_f: f64, alpha_m: f64) -> f64 {
    let params = market.params();
    let w_l = market.valuations().w_l;
    let low = params.lambda_f * (pi_f * alpha_f + (1.0 - pi_f)) * w_l
        + params.lambda_m * (pi_m * alpha_m + (1.0 - pi_m)) * w_l;
    let high =
        params.lambda_f * market.hire_profit(pi_f) + params.lambda_m * market.hire_profit(pi_m);
    low - high
}

/// Acceptance probability for the f group that keeps firms indifferent when
/// the m group rejects low-tech offers.
pub fn alpha_female(market: &Market, pi_f: f64, pi_m: f64) -> f64 {
    let params = market.params();
    let w_l = market.valuations().w_l;
    let num = params.lambda_f * (market.hire_profit(pi_f) - (1.0 - pi_f) * w_l)
        + params.lambda_m * (market.hire_profit(pi_m) - (1.0 - pi_m) * w_l);
    num / (params.lambda_f * pi_f * w_l)
}

/// Mirror case: acceptance probability for the m group when the f group
/// accepts every low-tech offer.
fn alpha_male(market: &Market, pi_f: f64, pi_m: f64) -> f64 {
    let params = market.params();
    let w_l = market.valuations().w_l;
    let num = params.lambda_f * (market.hire_profit(pi_f) - w_l)
        + params.lambda_m * (market.hire_profit(pi_m) - (1.0 - pi_m) * w_l);
    num / (params.lambda_m * pi_m * w_l)
}

/// First root of G(., alpha, p) on (lo, hi), if any.
fn first_g_root(market: &Market, alpha: f64, p: f64, lo: f64, hi: f64) -> Option<f64> {
    if hi <= lo {
        return None;
    }
    scan_roots(
        |pi| market.g(pi, alpha, p),
        lo,
        hi,
        INNER_SUBINTERVALS,
        1e-12,
    )
    .into_iter()
    .next()
}

/// Lifts every baseline equilibrium to the two-group model. Single-sector
/// kinds get their dedicated group labels.
pub fn lift_symmetric(market: &Market) -> Result<Vec<GroupEquilibrium>> {
    let params = market.params();
    let set = market.find_all_equilibria()?;
    let mut out = Vec::with_capacity(set.equilibria.len());
    for eq in &set.equilibria {
        let kind = match eq.kind {
            EqKind::LowTechOnly => GroupKind::GroupLowTechOnly,
            EqKind::HighTechOnly => GroupKind::GroupHighTechOnly,
            other => GroupKind::Symmetric(other),
        };
        let residual = market.g(eq.pi, eq.alpha, eq.p).abs();
        let entry_residual = match eq.kind {
            // Entry indifference only binds when both sectors are active.
            EqKind::LowTechOnly | EqKind::HighTechOnly => 0.0,
            _ => entry_gap(market, eq.pi, eq.pi, eq.alpha, eq.alpha).abs(),
        };
        out.push(GroupEquilibrium {
            kind,
            pi_f: eq.pi,
            pi_m: eq.pi,
            alpha_f: eq.alpha,
            alpha_m: eq.alpha,
            p: eq.p,
            lambda_f: params.lambda_f,
            lambda_m: params.lambda_m,
            diagnostics: GroupDiagnostics {
                residual_f: residual,
                residual_m: residual,
                entry_residual,
                q_gap_f: eq.q_gap,
                q_gap_m: eq.q_gap,
            },
        });
    }
    Ok(out)
}

/// Shared driver for the two one-group-mixing configurations. `outer` is the
/// pool whose hire probability pins p via worker indifference.
struct MixedScan {
    /// Candidate tuples (pi_f, pi_m, p, alpha_f, alpha_m).
    solutions: Vec<(f64, f64, f64, f64, f64)>,
}

fn scan_mixed<FEval>(market: &Market, eval: FEval) -> MixedScan
where
    FEval: Fn(f64) -> Option<(f64, f64, f64, f64, f64, f64)>,
{
    // eval maps the outer variable to
    // (residual, pi_f, pi_m, p, alpha_f, alpha_m).
    let q_star = market.valuations().q_star;
    let a_q_ceiling = market.a_q(1.0 - EDGE);
    let mut solutions = Vec::new();
    if a_q_ceiling <= q_star {
        return MixedScan { solutions };
    }
    // Worker indifference needs A_q(outer pool) >= Q*.
    let outer_lo = if market.a_q(EDGE) >= q_star {
        EDGE
    } else {
        bisect(|pi| market.a_q(pi) - q_star, EDGE, 1.0 - EDGE, 1e-12) + 1e-9
    };
    let outer_hi = 0.98;
    if outer_lo >= outer_hi {
        return MixedScan { solutions };
    }
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=OUTER_POINTS {
        let x = outer_lo + (outer_hi - outer_lo) * i as f64 / OUTER_POINTS as f64;
        let point = eval(x);
        let resid = point.as_ref().map(|p| p.0);
        if let (Some((x0, r0)), Some(r1)) = (prev, resid) {
            if r0.is_finite() && r1.is_finite() && (r0 > 0.0) != (r1 > 0.0) {
                let root = bisect(|x| eval(x).map(|p| p.0).unwrap_or(f64::NAN), x0, x, 1e-12);
                if let Some((_, pi_f, pi_m, p, alpha_f, alpha_m)) = eval(root) {
                    solutions.push((pi_f, pi_m, p, alpha_f, alpha_m));
                }
            }
        }
        prev = resid.map(|r| (x, r));
    }
    solutions.dedup_by(|a, b| (a.0 - b.0).abs() < DEDUP_TOL && (a.1 - b.1).abs() < DEDUP_TOL);
    MixedScan { solutions }
}

fn package_candidates(
    market: &Market,
    solutions: Vec<(f64, f64, f64, f64, f64)>,
    kind: GroupKind,
) -> AsymOutcome {
    let params = market.params();
    let mut candidates = Vec::new();
    let mut equilibria = Vec::new();
    let mut min_q_gap_f: Option<f64> = None;
    for (pi_f, pi_m, p, alpha_f, alpha_m) in solutions {
        let gap_f = q_gap(market, p, pi_f);
        let gap_m = q_gap(market, p, pi_m);
        min_q_gap_f = Some(min_q_gap_f.map_or(gap_f, |m: f64| m.min(gap_f)));
        let diagnostics = GroupDiagnostics {
            residual_f: market.g(pi_f, alpha_f, p).abs(),
            residual_m: market.g(pi_m, alpha_m, p).abs(),
            entry_residual: entry_gap(market, pi_f, pi_m, alpha_f, alpha_m).abs(),
            q_gap_f: gap_f,
            q_gap_m: gap_m,
        };
        let equilibrium = GroupEquilibrium {
            kind,
            pi_f,
            pi_m,
            alpha_f,
            alpha_m,
            p,
            lambda_f: params.lambda_f,
            lambda_m: params.lambda_m,
            diagnostics,
        };
        let verdict = if pi_m <= pi_f + DEDUP_TOL {
            Some(AsymReject::OrderingViolated)
        } else if !(-FILTER_TOL..=1.0 + FILTER_TOL).contains(&p) {
            Some(AsymReject::POutOfRange)
        } else {
            match kind {
                GroupKind::AsymFemMixed => {
                    if !(FILTER_TOL..=1.0 - FILTER_TOL).contains(&alpha_f) {
                        Some(AsymReject::AlphaOutOfRange)
                    } else if gap_m <= FILTER_TOL {
                        Some(AsymReject::WorkerOptimalityViolated)
                    } else {
                        None
                    }
                }
                GroupKind::AsymMaleMixed => {
                    if !(FILTER_TOL..=1.0 - FILTER_TOL).contains(&alpha_m) {
                        Some(AsymReject::AlphaOutOfRange)
                    } else if gap_f >= -FILTER_TOL {
                        Some(AsymReject::WorkerOptimalityViolated)
                    } else {
                        None
                    }
                }
                GroupKind::AsymPure => {
                    if gap_f > FILTER_TOL || gap_m < -FILTER_TOL {
                        Some(AsymReject::WorkerOptimalityViolated)
                    } else {
                        None
                    }
                }
                _ => unreachable!("package_candidates only sees asymmetric kinds"),
            }
        };
        let verdict = verdict.or_else(|| {
            (diagnostics.residual_f.max(diagnostics.residual_m) > RESIDUAL_TOL
                || diagnostics.entry_residual > RESIDUAL_TOL)
                .then_some(AsymReject::ResidualTooLarge)
        });
        if verdict.is_none() {
            equilibria.push(equilibrium);
        }
        candidates.push(AsymCandidate {
            equilibrium,
            verdict,
        });
    }
    AsymOutcome {
        equilibria,
        candidates,
        min_q_gap_f,
    }
}

/// Asymmetric configuration with the f group mixing: alpha_m = 0,
/// alpha_f in (0,1), p = Q*/A_q(pi_f).
///
/// Nested scan: the outer variable is pi_f (which pins p through the f
/// group's indifference), the inner solve finds the m pool from its steady
/// state, and the f steady state is the scanned residual. A two-dimensional
/// damped Newton polishes each bracketed solution.
pub fn solve_asym_fem_mixed(market: &Market) -> Result<AsymOutcome> {
    if degenerate_groups(market) {
        return Ok(package_candidates(
            market,
            Vec::new(),
            GroupKind::AsymFemMixed,
        ));
    }
    let q_star = market.valuations().q_star;
    let scan = scan_mixed(market, |pi_f| {
        let a_q_f = market.a_q(pi_f);
        if a_q_f < q_star {
            return None;
        }
        let p = q_star / a_q_f;
        let pi_m = first_g_root(market, 0.0, p, pi_f + EDGE, 1.0 - EDGE)?;
        let alpha_f = alpha_female(market, pi_f, pi_m);
        let resid = market.g(pi_f, alpha_f, p);
        Some((resid, pi_f, pi_m, p, alpha_f, 0.0))
    });
    let polished = scan
        .solutions
        .into_iter()
        .map(|(pi_f, pi_m, _, _, _)| {
            let out = newton_system(
                |x: &[f64; 2]| {
                    let (pi_f, pi_m) = (x[0], x[1]);
                    let p = q_star / market.a_q(pi_f);
                    [
                        market.g(pi_m, 0.0, p),
                        market.g(pi_f, alpha_female(market, pi_f, pi_m), p),
                    ]
                },
                [pi_f, pi_m],
                [(EDGE, 1.0 - EDGE), (EDGE, 1.0 - EDGE)],
                1e-12,
            );
            // Bisection already met tolerance; Newton is a polish and its
            // failure (singular Jacobian) keeps the bracketed solution.
            let (pi_f, pi_m) = if out.converged {
                (out.x[0], out.x[1])
            } else {
                (pi_f, pi_m)
            };
            let p = q_star / market.a_q(pi_f);
            (pi_f, pi_m, p, alpha_female(market, pi_f, pi_m), 0.0)
        })
        .collect();
    Ok(package_candidates(
        market,
        polished,
        GroupKind::AsymFemMixed,
    ))
}

/// Mirror configuration with the m group mixing: alpha_f = 1,
/// alpha_m in (0,1), p = Q*/A_q(pi_m).
pub fn solve_asym_male_mixed(market: &Market) -> Result<AsymOutcome> {
    if degenerate_groups(market) {
        return Ok(package_candidates(
            market,
            Vec::new(),
            GroupKind::AsymMaleMixed,
        ));
    }
    let q_star = market.valuations().q_star;
    let scan = scan_mixed(market, |pi_m| {
        let a_q_m = market.a_q(pi_m);
        if a_q_m < q_star {
            return None;
        }
        let p = q_star / a_q_m;
        let pi_f = first_g_root(market, 1.0, p, EDGE, pi_m - EDGE)?;
        let alpha_m = alpha_male(market, pi_f, pi_m);
        let resid = market.g(pi_m, alpha_m, p);
        Some((resid, pi_f, pi_m, p, 1.0, alpha_m))
    });
    let polished = scan
        .solutions
        .into_iter()
        .map(|(pi_f, pi_m, _, _, _)| {
            let out = newton_system(
                |x: &[f64; 2]| {
                    let (pi_f, pi_m) = (x[0], x[1]);
                    let p = q_star / market.a_q(pi_m);
                    [
                        market.g(pi_f, 1.0, p),
                        market.g(pi_m, alpha_male(market, pi_f, pi_m), p),
                    ]
                },
                [pi_f, pi_m],
                [(EDGE, 1.0 - EDGE), (EDGE, 1.0 - EDGE)],
                1e-12,
            );
            let (pi_f, pi_m) = if out.converged {
                (out.x[0], out.x[1])
            } else {
                (pi_f, pi_m)
            };
            let p = q_star / market.a_q(pi_m);
            (pi_f, pi_m, p, 1.0, alpha_male(market, pi_f, pi_m))
        })
        .collect();
    Ok(package_candidates(
        market,
        polished,
        GroupKind::AsymMaleMixed,
    ))
}

/// Pure asymmetric configuration: alpha_f = 1, alpha_m = 0, and
/// (pi_f, pi_m, p) solve both steady states plus entry indifference.
pub fn solve_asym_pure(market: &Market) -> Result<AsymOutcome> {
    let params = market.params();
    let w_l = market.valuations().w_l;
    if degenerate_groups(market) {
        return Ok(package_candidates(market, Vec::new(), GroupKind::AsymPure));
    }
    // Entry indifference pins pi_f given pi_m:
    //   hire_profit(pi_f) = W_l - (lambda_m/lambda_f)(hire_profit(pi_m) - (1-pi_m) W_l)
    let pi_f_from_entry = |pi_m: f64| -> Option<f64> {
        let target = w_l
            - params.lambda_m / params.lambda_f * (market.hire_profit(pi_m) - (1.0 - pi_m) * w_l);
        if target <= market.hire_profit(EDGE) || target >= market.hire_profit(pi_m) {
            return None;
        }
        Some(bisect(
            |pi| market.hire_profit(pi) - target,
            EDGE,
            pi_m,
            1e-12,
        ))
    };
    let eval = |pi_m: f64| -> Option<(f64, f64, f64, f64)> {
        let pi_f = pi_f_from_entry(pi_m)?;
        let p_f = affine_root(market.g(pi_f, 1.0, 0.0), market.g(pi_f, 1.0, 1.0))?;
        let p_m = affine_root(market.g(pi_m, 0.0, 0.0), market.g(pi_m, 0.0, 1.0))?;
        Some((p_f - p_m, pi_f, p_f, p_m))
    };
    let mut solutions = Vec::new();
    let lo = 1e-4;
    let hi = 0.98;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=2 * OUTER_POINTS {
        let pi_m = lo + (hi - lo) * i as f64 / (2 * OUTER_POINTS) as f64;
        let point = eval(pi_m);
        let resid = point.as_ref().map(|p| p.0);
        if let (Some((x0, r0)), Some(r1)) = (prev, resid) {
            if r0.is_finite() && r1.is_finite() && (r0 > 0.0) != (r1 > 0.0) {
                let root = bisect(
                    |x| eval(x).map(|p| p.0).unwrap_or(f64::NAN),
                    x0,
                    pi_m,
                    1e-12,
                );
                if let Some((_, pi_f, p_f, p_m)) = eval(root) {
                    // Newton polish on the full three-variable system.
                    let seed = [pi_f, root, 0.5 * (p_f + p_m)];
                    let out = newton_system(
                        |x: &[f64; 3]| {
                            [
                                market.g(x[0], 1.0, x[2]),
                                market.g(x[1], 0.0, x[2]),
                                entry_gap(market, x[0], x[1], 1.0, 0.0),
                            ]
                        },
                        seed,
                        [(EDGE, 1.0 - EDGE), (EDGE, 1.0 - EDGE), (-0.5, 1.5)],
                        1e-12,
                    );
                    let (pi_f, pi_m, p) = if out.converged {
                        (out.x[0], out.x[1], out.x[2])
                    } else {
                        (seed[0], seed[1], seed[2])
                    };
                    solutions.push((pi_f, pi_m, p, 1.0, 0.0));
                }
            }
        }
        prev = resid.map(|r| (pi_m, r));
    }
    solutions.dedup_by(|a, b| (a.0 - b.0).abs() < DEDUP_TOL && (a.1 - b.1).abs() < DEDUP_TOL);
    Ok(package_candidates(market, solutions, GroupKind::AsymPure))
}

/// Constructive sweep around a fully mixed symmetric equilibrium: for each
/// candidate meeting probability, solve the two pure-group pools and back
/// out the unique population split that keeps firms indifferent.
pub fn population_share_sweep(market: &Market, p_grid: &[f64]) -> Result<ShareSweep> {
    let set = market.find_all_equilibria()?;
    let mixed = set
        .of_kind(EqKind::TwoSectorMixed)
        .next()
        .ok_or(ModelError::NoSymmetricMixed)?;
    let pi_star = mixed.pi;
    let p_star = mixed.p;
    let w_l = market.valuations().w_l;
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        if !(0.0..=1.0).contains(&p) {
            rows.push(ShareSweepRow {
                p,
                pi_f: None,
                pi_m: None,
                lambda_f: None,
                lambda_m: None,
                q_gap_f: None,
                q_gap_m: None,
                valid: false,
            });
            continue;
        }
        let pi_f = first_g_root(market, 1.0, p, EDGE, pi_star - 1e-12);
        let pi_m = first_g_root(market, 0.0, p, pi_star + 1e-12, 1.0 - EDGE);
        let (Some(pi_f), Some(pi_m)) = (pi_f, pi_m) else {
            rows.push(ShareSweepRow {
                p,
                pi_f,
                pi_m,
                lambda_f: None,
                lambda_m: None,
                q_gap_f: None,
                q_gap_m: None,
                valid: false,
            });
            continue;
        };
        // lambda_f (W_l - prof_f) = lambda_m (prof_m - (1-pi_m) W_l)
        let short_f = w_l - market.hire_profit(pi_f);
        let short_m = market.hire_profit(pi_m) - (1.0 - pi_m) * w_l;
        let denom = short_f + short_m;
        let (lambda_f, lambda_m) = if denom.abs() < 1e-15 {
            (f64::NAN, f64::NAN)
        } else {
            (short_m / denom, short_f / denom)
        };
        let gap_f = q_gap(market, p, pi_f);
        let gap_m = q_gap(market, p, pi_m);
        let valid = lambda_f.is_finite()
            && lambda_f > 0.0
            && lambda_f < 1.0
            && gap_f < -FILTER_TOL
            && gap_m > FILTER_TOL;
        rows.push(ShareSweepRow {
            p,
            pi_f: Some(pi_f),
            pi_m: Some(pi_m),
            lambda_f: Some(lambda_f),
            lambda_m: Some(lambda_m),
            q_gap_f: Some(gap_f),
            q_gap_m: Some(gap_m),
            valid,
        });
    }
    let valid_lambdas: Vec<f64> = rows
        .iter()
        .filter(|r| r.valid)
        .filter_map(|r| r.lambda_m)
        .collect();
    let lambda_m_increasing = if valid_lambdas.len() >= 2 {
        Some(valid_lambdas.windows(2).all(|w| w[1] > w[0]))
    } else {
        None
    };
    Ok(ShareSweep {
        pi_star,
        p_star,
        rows,
        lambda_m_increasing,
    })
}

// ---------------------------------------------------------------------------
// Affirmative-action quota check
// ---------------------------------------------------------------------------

/// How hiring proportionality is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuotaMode {
    /// Group inflows into high-tech employment proportional to group sizes.
    FlowProportional,
    /// High-tech employment stocks proportional to group sizes.
    StockProportional,
}

/// A quota-constrained candidate with its screening diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuotaCandidate {
    pub equilibrium: GroupEquilibrium,
    /// Shadow price of the quota constraint (0 recovers unconstrained hiring).
    pub mu: f64,
    pub threshold_f: f64,
    pub threshold_m: f64,
    pub quota_residual: f64,
    pub verdict: Option<AsymReject>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotaReport {
    pub mode: QuotaMode,
    /// Asymmetric equilibria that survive the quota (expected: none).
    pub asymmetric_survivors: Vec<GroupEquilibrium>,
    /// Every constrained system solution examined.
    pub candidates: Vec<QuotaCandidate>,
    /// The symmetric set, which the quota leaves untouched.
    pub symmetric_set: Vec<GroupEquilibrium>,
    /// Largest quota residual across the symmetric set (should be ~0).
    pub max_symmetric_quota_residual: f64,
    /// Outer grid cells whose inner solve was feasible, per class.
    pub cells_feasible: usize,
}

/// Hire rates for a group screened at a shadow-price-shifted threshold.
fn quota_rates(market: &Market, pi: f64, margin: f64) -> HireRates {
    let vals = market.valuations();
    let rule = market
        .signal()
        .threshold_for_margin(pi, vals.w_q, vals.w_u, margin);
    market.signal().rates_for_rule(rule)
}

/// Steady-state unemployed mass of a group, from the qualified stock
/// balance.
fn unemployed_mass(market: &Market, lambda: f64, pi: f64, alpha: f64, p: f64, a_q: f64) -> f64 {
    let phi = market.params().phi;
    lambda * market.params().psi / (pi * (1.0 + p * a_q / phi + (1.0 - p) * alpha / phi))
}

struct QuotaPoint {
    p: f64,
    mu: f64,
    rates_f: HireRates,
    rates_m: HireRates,
    alpha_f: f64,
    alpha_m: f64,
}

impl QuotaPoint {
    fn quota_residual(&self, market: &Market, mode: QuotaMode, pi_f: f64, pi_m: f64) -> f64 {
        let params = market.params();
        let n_f = unemployed_mass(
            market,
            params.lambda_f,
            pi_f,
            self.alpha_f,
            self.p,
            self.rates_f.a_q,
        );
        let n_m = unemployed_mass(
            market,
            params.lambda_m,
            pi_m,
            self.alpha_m,
            self.p,
            self.rates_m.a_q,
        );
        match mode {
            QuotaMode::FlowProportional => {
                // Per-period inflow into high-tech employment; the common
                // factor p cancels from both sides.
                let h_f = pi_f * self.rates_f.a_q + (1.0 - pi_f) * self.rates_f.a_u;
                let h_m = pi_m * self.rates_m.a_q + (1.0 - pi_m) * self.rates_m.a_u;
                n_f * h_f * params.lambda_m - n_m * h_m * params.lambda_f
            }
            QuotaMode::StockProportional => {
                let phi = params.phi;
                let sep_u = params.sep_unqualified_high();
                let e_f = n_f * pi_f * self.rates_f.a_q / phi
                    + n_f * (1.0 - pi_f) * self.rates_f.a_u / sep_u;
                let e_m = n_m * pi_m * self.rates_m.a_q / phi
                    + n_m * (1.0 - pi_m) * self.rates_m.a_u / sep_u;
                e_f * params.lambda_m - e_m * params.lambda_f
            }
        }
    }
}

/// Entry residual with quota-distorted screening.
fn quota_entry_gap(market: &Market, pi_f: f64, pi_m: f64, point: &QuotaPoint) -> f64 {
    let params = market.params();
    let vals = market.valuations();
    let prof =
        |pi: f64, rates: &HireRates| pi * rates.a_q * vals.w_q + (1.0 - pi) * rates.a_u * vals.w_u;
    let low = params.lambda_f * (pi_f * point.alpha_f + (1.0 - pi_f)) * vals.w_l
        + params.lambda_m * (pi_m * point.alpha_m + (1.0 - pi_m)) * vals.w_l;
    let high =
        params.lambda_f * prof(pi_f, &point.rates_f) + params.lambda_m * prof(pi_m, &point.rates_m);
    low - high
}

fn mu_range(market: &Market) -> (f64, f64) {
    let params = market.params();
    let vals = market.valuations();
    let lo = (vals.w_u / params.lambda_m).max(-vals.w_q / params.lambda_f);
    let hi = (vals.w_q / params.lambda_m).min(-vals.w_u / params.lambda_f);
    (lo + 1e-9, hi - 1e-9)
}

/// Re-runs the three asymmetric solvers under the quota constraint.
///
/// Screening under the quota keeps one degree of freedom: a shadow price mu
/// shifts the posterior-value bar to mu*lambda_m for the f group and
/// -mu*lambda_f for the m group (profit maximization subject to the
/// proportionality constraint). Each class then solves its steady states,
/// entry condition, and the quota equation jointly; survivors must still
/// pass the worker-optimality filters.
pub fn quota_check(market: &Market, mode: QuotaMode) -> Result<QuotaReport> {
    let params = market.params();
    let symmetric_set = lift_symmetric(market)?;
    let mut max_symmetric_quota_residual = 0.0_f64;
    for eq in &symmetric_set {
        let rates = market.hire_rates(eq.pi_f);
        let point = QuotaPoint {
            p: eq.p,
            mu: 0.0,
            rates_f: rates,
            rates_m: rates,
            alpha_f: eq.alpha_f,
            alpha_m: eq.alpha_m,
        };
        let resid = point.quota_residual(market, mode, eq.pi_f, eq.pi_m).abs();
        max_symmetric_quota_residual = max_symmetric_quota_residual.max(resid);
    }
    let mut candidates = Vec::new();
    let mut cells_feasible = 0usize;
    if params.lambda_f >= 1e-9 && params.lambda_m >= 1e-9 {
        for kind in [
            GroupKind::AsymPure,
            GroupKind::AsymFemMixed,
            GroupKind::AsymMaleMixed,
        ] {
            quota_scan_class(market, mode, kind, &mut candidates, &mut cells_feasible);
        }
    }
    let asymmetric_survivors = candidates
        .iter()
        .filter(|c| c.verdict.is_none())
        .map(|c| c.equilibrium)
        .collect();
    Ok(QuotaReport {
        mode,
        asymmetric_survivors,
        candidates,
        symmetric_set,
        max_symmetric_quota_residual,
        cells_feasible,
    })
}

/// Builds the quota point for one class at (pi_f, pi_m, mu), solving the
/// class's p. Returns None when the configuration is infeasible.
fn quota_point(
    market: &Market,
    kind: GroupKind,
    pi_f: f64,
    pi_m: f64,
    mu: f64,
) -> Option<QuotaPoint> {
    let params = market.params();
    let vals = market.valuations();
    let rates_f = quota_rates(market, pi_f, mu * params.lambda_m);
    let rates_m = quota_rates(market, pi_m, -mu * params.lambda_f);
    let g_f = |alpha: f64, p: f64| g_with_rates(params, pi_f, alpha, p, rates_f.a_q, rates_f.a_u);
    let prof =
        |pi: f64, rates: &HireRates| pi * rates.a_q * vals.w_q + (1.0 - pi) * rates.a_u * vals.w_u;
    match kind {
        GroupKind::AsymPure => {
            let p = affine_root(g_f(1.0, 0.0), g_f(1.0, 1.0))?;
            Some(QuotaPoint {
                p,
                mu,
                rates_f,
                rates_m,
                alpha_f: 1.0,
                alpha_m: 0.0,
            })
        }
        GroupKind::AsymFemMixed => {
            if rates_f.a_q < vals.q_star {
                return None;
            }
            let p = vals.q_star / rates_f.a_q;
            // Entry indifference defines alpha_f under distorted profits.
            let num = params.lambda_f * (prof(pi_f, &rates_f) - (1.0 - pi_f) * vals.w_l)
                + params.lambda_m * (prof(pi_m, &rates_m) - (1.0 - pi_m) * vals.w_l);
            let alpha_f = num / (params.lambda_f * pi_f * vals.w_l);
            Some(QuotaPoint {
                p,
                mu,
                rates_f,
                rates_m,
                alpha_f,
                alpha_m: 0.0,
            })
        }
        GroupKind::AsymMaleMixed => {
            if rates_m.a_q < vals.q_star {
                return None;
            }
            let p = vals.q_star / rates_m.a_q;
            let num = params.lambda_f * (prof(pi_f, &rates_f) - vals.w_l)
                + params.lambda_m * (prof(pi_m, &rates_m) - (1.0 - pi_m) * vals.w_l);
            let alpha_m = num / (params.lambda_m * pi_m * vals.w_l);
            Some(QuotaPoint {
                p,
                mu,
                rates_f,
                rates_m,
                alpha_f: 1.0,
                alpha_m,
            })
        }
        _ => None,
    }
}

/// Inner solve: find mu such that the m-pool steady state holds (pure and
/// fem-mixed classes) or the f-pool steady state holds (male-mixed class).
fn quota_inner(market: &Market, kind: GroupKind, pi_f: f64, pi_m: f64) -> Option<QuotaPoint> {
    let params = market.params();
    let inner_residual = |mu: f64| -> Option<f64> {
        let point = quota_point(market, kind, pi_f, pi_m, mu)?;
        let value = match kind {
            GroupKind::AsymPure | GroupKind::AsymFemMixed => g_with_rates(
                params,
                pi_m,
                point.alpha_m,
                point.p,
                point.rates_m.a_q,
                point.rates_m.a_u,
            ),
            GroupKind::AsymMaleMixed => g_with_rates(
                params,
                pi_f,
                point.alpha_f,
                point.p,
                point.rates_f.a_q,
                point.rates_f.a_u,
            ),
            _ => return None,
        };
        value.is_finite().then_some(value)
    };
    let (mu_lo, mu_hi) = mu_range(market);
    const MU_POINTS: usize = 64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=MU_POINTS {
        let mu = mu_lo + (mu_hi - mu_lo) * i as f64 / MU_POINTS as f64;
        let Some(r) = inner_residual(mu) else {
            prev = None;
            continue;
        };
        if let Some((mu0, r0)) = prev {
            if (r0 > 0.0) != (r > 0.0) {
                let root = bisect(|mu| inner_residual(mu).unwrap_or(f64::NAN), mu0, mu, 1e-13);
                return quota_point(market, kind, pi_f, pi_m, root);
            }
        }
        prev = Some((mu, r));
    }
    None
}

#[allow(clippy::needless_range_loop)]
fn quota_scan_class(
    market: &Market,
    mode: QuotaMode,
    kind: GroupKind,
    candidates: &mut Vec<QuotaCandidate>,
    cells_feasible: &mut usize,
) {
    const GRID: usize = 72;
    let lo = 5e-3;
    let hi = 0.97;
    // Outer residuals on the (pi_f, pi_m) grid: entry (or the mixing pool's
    // steady state) and the quota equation.
    let outer = |pi_f: f64, pi_m: f64| -> Option<(f64, f64, QuotaPoint)> {
        if pi_m <= pi_f + 1e-6 {
            return None;
        }
        let point = quota_inner(market, kind, pi_f, pi_m)?;
        let params = market.params();
        let first = match kind {
            GroupKind::AsymPure => quota_entry_gap(market, pi_f, pi_m, &point),
            GroupKind::AsymFemMixed => g_with_rates(
                params,
                pi_f,
                point.alpha_f,
                point.p,
                point.rates_f.a_q,
                point.rates_f.a_u,
            ),
            GroupKind::AsymMaleMixed => g_with_rates(
                params,
                pi_m,
                point.alpha_m,
                point.p,
                point.rates_m.a_q,
                point.rates_m.a_u,
            ),
            _ => return None,
        };
        let second = point.quota_residual(market, mode, pi_f, pi_m);
        (first.is_finite() && second.is_finite()).then_some((first, second, point))
    };
    let coord = |i: usize| lo + (hi - lo) * i as f64 / GRID as f64;
    let mut grid: Vec<Vec<Option<(f64, f64)>>> = vec![vec![None; GRID + 1]; GRID + 1];
    for i in 0..=GRID {
        for j in 0..=GRID {
            if let Some((a, b, _)) = outer(coord(i), coord(j)) {
                grid[i][j] = Some((a, b));
                *cells_feasible += 1;
            }
        }
    }
    // A candidate square has both residuals changing sign among its corners.
    for i in 0..GRID {
        for j in 0..GRID {
            let corners = [
                grid[i][j],
                grid[i + 1][j],
                grid[i][j + 1],
                grid[i + 1][j + 1],
            ];
            if corners.iter().any(|c| c.is_none()) {
                continue;
            }
            let vals: Vec<(f64, f64)> = corners.iter().map(|c| c.unwrap()).collect();
            let sign_change = |pick: fn(&(f64, f64)) -> f64| {
                let first = pick(&vals[0]);
                vals.iter().any(|v| (pick(v) > 0.0) != (first > 0.0))
            };
            if !(sign_change(|v| v.0) && sign_change(|v| v.1)) {
                continue;
            }
            let seed = [
                0.5 * (coord(i) + coord(i + 1)),
                0.5 * (coord(j) + coord(j + 1)),
            ];
            let out = newton_system(
                |x: &[f64; 2]| match outer(x[0], x[1]) {
                    Some((a, b, _)) => [a, b],
                    None => [f64::NAN, f64::NAN],
                },
                seed,
                [(lo, hi), (lo, hi)],
                1e-11,
            );
            if !out.converged {
                continue;
            }
            let (pi_f, pi_m) = (out.x[0], out.x[1]);
            let Some((first, second, point)) = outer(pi_f, pi_m) else {
                continue;
            };
            let params = market.params();
            let vals_ = market.valuations();
            let gap_f = point.p * point.rates_f.a_q - vals_.q_star;
            let gap_m = point.p * point.rates_m.a_q - vals_.q_star;
            let residual_f = g_with_rates(
                params,
                pi_f,
                point.alpha_f,
                point.p,
                point.rates_f.a_q,
                point.rates_f.a_u,
            )
            .abs();
            let residual_m = g_with_rates(
                params,
                pi_m,
                point.alpha_m,
                point.p,
                point.rates_m.a_q,
                point.rates_m.a_u,
            )
            .abs();
            let equilibrium = GroupEquilibrium {
                kind,
                pi_f,
                pi_m,
                alpha_f: point.alpha_f,
                alpha_m: point.alpha_m,
                p: point.p,
                lambda_f: params.lambda_f,
                lambda_m: params.lambda_m,
                diagnostics: GroupDiagnostics {
                    residual_f,
                    residual_m,
                    entry_residual: quota_entry_gap(market, pi_f, pi_m, &point).abs(),
                    q_gap_f: gap_f,
                    q_gap_m: gap_m,
                },
            };
            let verdict = if pi_m <= pi_f + DEDUP_TOL {
                Some(AsymReject::OrderingViolated)
            } else if !(-FILTER_TOL..=1.0 + FILTER_TOL).contains(&point.p) {
                Some(AsymReject::POutOfRange)
            } else if residual_f
                .max(residual_m)
                .max(first.abs())
                .max(second.abs())
                > RESIDUAL_TOL
            {
                Some(AsymReject::ResidualTooLarge)
            } else {
                match kind {
                    GroupKind::AsymPure => (gap_f > FILTER_TOL || gap_m < -FILTER_TOL)
                        .then_some(AsymReject::WorkerOptimalityViolated),
                    GroupKind::AsymFemMixed => {
                        if !(FILTER_TOL..=1.0 - FILTER_TOL).contains(&point.alpha_f) {
                            Some(AsymReject::AlphaOutOfRange)
                        } else {
                            (gap_m <= FILTER_TOL).then_some(AsymReject::WorkerOptimalityViolated)
                        }
                    }
                    GroupKind::AsymMaleMixed => {
                        if !(FILTER_TOL..=1.0 - FILTER_TOL).contains(&point.alpha_m) {
                            Some(AsymReject::AlphaOutOfRange)
                        } else {
                            (gap_f >= -FILTER_TOL).then_some(AsymReject::WorkerOptimalityViolated)
                        }
                    }
                    _ => None,
                }
            };
            let dup = candidates.iter().any(|c| {
                c.equilibrium.kind == kind
                    && (c.equilibrium.pi_f - pi_f).abs() < DEDUP_TOL
                    && (c.equilibrium.pi_m - pi_m).abs() < DEDUP_TOL
            });
            if !dup {
                candidates.push(QuotaCandidate {
                    equilibrium,
                    mu: point.mu,
                    threshold_f: point.rates_f.rule.threshold,
                    threshold_m: point.rates_m.rule.threshold,
                    quota_residual: second,
                    verdict,
                });
            }
        }
    }
}
