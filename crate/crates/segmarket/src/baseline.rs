//! One-group steady-state equilibrium solver.
//!
//! The steady state collapses to a single scalar residual
//! `G(pi, alpha, p)`; its zeros, combined with firm entry indifference and
//! worker optimality, classify every equilibrium into one of five kinds:
//! only low tech, only high tech, two sectors with rejection (at the lower
//! bound), two sectors with acceptance (at the upper bound), and two sectors
//! with workers mixing strictly between the bounds.

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::params::{derive_valuations, ModelParams, Valuations};
use crate::roots::{affine_root, bisect, scan_roots};
use crate::signal::{HireRates, SignalModel};

/// Subintervals used by one-dimensional sign-change scans.
pub const SCAN_SUBINTERVALS: usize = 10_000;
/// Bisection refinement tolerance for scanned roots. Tight enough that the
/// G-residual at a refined root stays well under the reporting tolerance.
pub const ROOT_TOL: f64 = 1e-12;
/// Tolerance for inclusion tests at classification boundaries; candidates
/// inside the band are kept and flagged knife-edge.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Residual bound every reported equilibrium must satisfy.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Scans stop this far short of pi = 1, where G diverges.
const PI_CEILING: f64 = 1.0 - 1e-9;

/// Parameters, signal technology, and derived valuations bundled for the
/// solvers. Construction validates everything once.
#[derive(Debug, Clone)]
pub struct Market {
    params: ModelParams,
    signal: SignalModel,
    vals: Valuations,
}

/// Entry-indifference bounds on the unemployed-pool quality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bounds {
    /// pi below which only low-tech firms enter even if qualified workers
    /// reject low-tech jobs.
    pub pi_low: f64,
    /// pi above which only high-tech firms enter even if qualified workers
    /// accept low-tech jobs.
    pub pi_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EqKind {
    LowTechOnly,
    HighTechOnly,
    TwoSectorReject,
    TwoSectorAccept,
    TwoSectorMixed,
}

impl EqKind {
    pub fn label(&self) -> &'static str {
        match self {
            EqKind::LowTechOnly => "low-tech-only",
            EqKind::HighTechOnly => "high-tech-only",
            EqKind::TwoSectorReject => "two-sector-reject",
            EqKind::TwoSectorAccept => "two-sector-accept",
            EqKind::TwoSectorMixed => "two-sector-mixed",
        }
    }
}

/// A classified steady-state equilibrium.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Equilibrium {
    pub kind: EqKind,
    /// Share of qualified workers among the unemployed.
    pub pi: f64,
    /// Probability a qualified worker accepts a low-tech offer.
    pub alpha: f64,
    /// Probability an unemployed worker meets a high-tech firm.
    pub p: f64,
    /// p * A_q(pi) - Q*: sign certifies the worker-optimality condition.
    pub q_gap: f64,
    /// |G| at the reported solution.
    pub residual: f64,
    /// True when an inclusion test held only within the boundary tolerance.
    pub knife_edge: bool,
}

/// Why a candidate was excluded, with enough data to reproduce the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    /// High-tech-only root below pi_low: a low-tech entrant would deviate.
    PiBelowLowerBound,
    /// High-tech-only root inside the band with A_q < Q*: workers would
    /// accept a low-tech deviation.
    HireProbBelowQstar,
    /// The entry-balancing p of a bound candidate falls outside [0,1].
    POutOfRange,
    /// The q-gap has the wrong sign for the candidate's acceptance rule.
    WorkerOptimalityViolated,
    /// Two-sector acceptance requires psi > pi_high.
    PsiBelowPiBar,
}

impl RejectReason {
    pub fn describe(&self) -> &'static str {
        match self {
            RejectReason::PiBelowLowerBound => "pi below the low-entry bound",
            RejectReason::HireProbBelowQstar => "A_q(pi) below Q*",
            RejectReason::POutOfRange => "entry share p outside [0,1]",
            RejectReason::WorkerOptimalityViolated => "q-gap sign contradicts acceptance rule",
            RejectReason::PsiBelowPiBar => "psi not above pi_high",
        }
    }
}

/// A candidate that solved its steady-state equation but failed an
/// equilibrium condition. Reported for diagnostics; the out-of-range `p`
/// values come from extending the affine steady-state condition beyond [0,1].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RejectedCandidate {
    pub kind: EqKind,
    pub pi: f64,
    pub alpha: f64,
    pub p: f64,
    pub q_gap: f64,
    pub reason: RejectReason,
}

/// Complete classification output.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
    pub rejected: Vec<RejectedCandidate>,
    pub bounds: Bounds,
    pub warnings: Vec<String>,
}

impl EquilibriumSet {
    pub fn of_kind(&self, kind: EqKind) -> impl Iterator<Item = &Equilibrium> {
        self.equilibria.iter().filter(move |e| e.kind == kind)
    }
}

/// Result of scanning the separation rate for high-tech-only existence.
#[derive(Debug, Clone, Serialize)]
pub struct PhiScan {
    /// Largest grid phi such that no high-tech-only equilibrium exists at any
    /// valid grid point up to and including it. None when high-tech-only
    /// exists already at the smallest valid grid point.
    pub threshold_phi: Option<f64>,
    /// (phi, exists) per usable grid point.
    pub existence: Vec<(f64, bool)>,
    /// Grid points skipped because the parameters left the admissible domain.
    pub skipped: Vec<f64>,
    /// True when existence is monotone along the grid (absent then present).
    pub pattern_monotone: bool,
}

/// Steady-state residual with explicit hire rates, shared by the baseline
/// and the quota-constrained group solver.
pub fn g_with_rates(params: &ModelParams, pi: f64, alpha: f64, p: f64, a_q: f64, a_u: f64) -> f64 {
    if pi >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let phi = params.phi;
    let sep_u = params.sep_unqualified_high();
    1.0 + p * a_u / sep_u + (1.0 - p) / phi
        - (1.0 - params.psi) / (1.0 - pi)
            * (pi / params.psi)
            * (1.0 + p * a_q / phi + (1.0 - p) * alpha / phi)
}

impl Market {
    pub fn new(params: ModelParams, signal: SignalModel) -> Result<Self> {
        let vals = derive_valuations(&params)?;
        Ok(Market {
            params,
            signal,
            vals,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn signal(&self) -> &SignalModel {
        &self.signal
    }

    pub fn valuations(&self) -> &Valuations {
        &self.vals
    }

    pub fn hire_rates(&self, pi: f64) -> HireRates {
        self.signal.hire_rates(pi, self.vals.w_q, self.vals.w_u)
    }

    pub fn a_q(&self, pi: f64) -> f64 {
        self.hire_rates(pi).a_q
    }

    /// Optimal signal threshold at pool quality `pi`.
    pub fn threshold(&self, pi: f64) -> f64 {
        self.signal
            .hiring_threshold(pi, self.vals.w_q, self.vals.w_u)
            .threshold
    }

    /// High-tech expected profit per match; strictly increasing in pi.
    pub fn hire_profit(&self, pi: f64) -> f64 {
        self.signal
            .expected_hire_profit(pi, self.vals.w_q, self.vals.w_u)
    }

    /// The steady-state residual G(pi, alpha, p). Returns -inf at pi = 1.
    pub fn g(&self, pi: f64, alpha: f64, p: f64) -> f64 {
        let rates = self.hire_rates(pi);
        g_with_rates(&self.params, pi, alpha, p, rates.a_q, rates.a_u)
    }

    /// G with only high-tech firms active; alpha drops out at p = 1.
    pub fn g_high(&self, pi: f64) -> f64 {
        self.g(pi, 0.0, 1.0)
    }

    /// Entry-indifference bounds, located by bracketed bisection on the
    /// strictly increasing profit gap.
    pub fn bounds(&self) -> Result<Bounds> {
        let w_l = self.vals.w_l;
        // pi_high: hire_profit(pi) = W_l
        let upper_gap = |pi: f64| self.hire_profit(pi) - w_l;
        let (g0, g1) = (upper_gap(0.0), upper_gap(1.0));
        if !(g0 < 0.0 && g1 > 0.0) {
            return Err(ModelError::NoBound {
                bound: "pi_high",
                f_lo: g0,
                f_hi: g1,
            });
        }
        let pi_high = bisect(upper_gap, 0.0, 1.0, ROOT_TOL);
        // pi_low: hire_profit(pi) = (1 - pi) W_l
        let lower_gap = |pi: f64| self.hire_profit(pi) - (1.0 - pi) * w_l;
        let (h0, h1) = (lower_gap(0.0), lower_gap(1.0));
        if !(h0 < 0.0 && h1 > 0.0) {
            return Err(ModelError::NoBound {
                bound: "pi_low",
                f_lo: h0,
                f_hi: h1,
            });
        }
        let pi_low = bisect(lower_gap, 0.0, 1.0, ROOT_TOL);
        Ok(Bounds { pi_low, pi_high })
    }

    /// The unique low-tech acceptance probability that keeps firms
    /// indifferent between sectors at pool quality `pi` in [pi_low, pi_high].
    pub fn alpha_indifference(&self, pi: f64) -> Result<f64> {
        let bounds = self.bounds()?;
        if pi < bounds.pi_low - BOUNDARY_TOL || pi > bounds.pi_high + BOUNDARY_TOL {
            return Err(ModelError::OutOfRegion {
                pi,
                lo: bounds.pi_low,
                hi: bounds.pi_high,
            });
        }
        Ok(self.alpha_indifference_unchecked(pi))
    }

    fn alpha_indifference_unchecked(&self, pi: f64) -> f64 {
        let w_l = self.vals.w_l;
        (self.hire_profit(pi) - (1.0 - pi) * w_l) / (pi * w_l)
    }

    /// Enumerates the complete equilibrium set per the five-kind taxonomy.
    pub fn find_all_equilibria(&self) -> Result<EquilibriumSet> {
        let bounds = self.bounds()?;
        let q_star = self.vals.q_star;
        let psi = self.params.psi;
        let mut equilibria = Vec::new();
        let mut rejected = Vec::new();
        let mut warnings = Vec::new();

        // Low tech only: pi = psi, alpha = 1, p = 0; exists iff psi <= pi_high.
        if psi <= bounds.pi_high + BOUNDARY_TOL {
            let knife = psi > bounds.pi_high - BOUNDARY_TOL;
            if knife {
                warnings.push(format!(
                    "low-tech-only inclusion is knife-edge: psi - pi_high = {:.3e}",
                    psi - bounds.pi_high
                ));
            }
            equilibria.push(Equilibrium {
                kind: EqKind::LowTechOnly,
                pi: psi,
                alpha: 1.0,
                p: 0.0,
                q_gap: -q_star,
                residual: self.g(psi, 1.0, 0.0).abs(),
                knife_edge: knife,
            });
        }

        // High tech only: roots of G(pi, ., 1).
        for pi_star in scan_roots(
            |pi| self.g_high(pi),
            BOUNDARY_TOL,
            PI_CEILING,
            SCAN_SUBINTERVALS,
            ROOT_TOL,
        ) {
            let a_q = self.a_q(pi_star);
            let residual = self.g_high(pi_star).abs();
            let q_gap = a_q - q_star;
            if pi_star < bounds.pi_low - BOUNDARY_TOL {
                rejected.push(RejectedCandidate {
                    kind: EqKind::HighTechOnly,
                    pi: pi_star,
                    alpha: 0.0,
                    p: 1.0,
                    q_gap,
                    reason: RejectReason::PiBelowLowerBound,
                });
            } else if pi_star <= bounds.pi_high + BOUNDARY_TOL {
                if a_q >= q_star - BOUNDARY_TOL {
                    let knife = a_q < q_star + BOUNDARY_TOL
                        || pi_star < bounds.pi_low + BOUNDARY_TOL
                        || pi_star > bounds.pi_high - BOUNDARY_TOL;
                    equilibria.push(Equilibrium {
                        kind: EqKind::HighTechOnly,
                        pi: pi_star,
                        alpha: 0.0,
                        p: 1.0,
                        q_gap,
                        residual,
                        knife_edge: knife,
                    });
                } else {
                    rejected.push(RejectedCandidate {
                        kind: EqKind::HighTechOnly,
                        pi: pi_star,
                        alpha: 0.0,
                        p: 1.0,
                        q_gap,
                        reason: RejectReason::HireProbBelowQstar,
                    });
                }
            } else {
                equilibria.push(Equilibrium {
                    kind: EqKind::HighTechOnly,
                    pi: pi_star,
                    alpha: 1.0,
                    p: 1.0,
                    q_gap,
                    residual,
                    knife_edge: false,
                });
            }
        }

        // Two sectors, low-tech jobs rejected: pi = pi_low, alpha = 0, and p
        // solves the affine steady-state condition.
        self.bound_candidate(
            &mut equilibria,
            &mut rejected,
            &mut warnings,
            bounds.pi_low,
            0.0,
            EqKind::TwoSectorReject,
            q_star,
            psi,
            bounds,
        );

        // Two sectors, low-tech jobs accepted: pi = pi_high, alpha = 1.
        self.bound_candidate(
            &mut equilibria,
            &mut rejected,
            &mut warnings,
            bounds.pi_high,
            1.0,
            EqKind::TwoSectorAccept,
            q_star,
            psi,
            bounds,
        );

        // Two sectors, workers mixing: pi strictly inside the band with
        // p = Q*/A_q(pi) and alpha the firm-indifference value.
        let mut mix_lo = bounds.pi_low + 1e-12;
        if self.a_q(mix_lo) < q_star {
            // p <= 1 requires A_q(pi) >= Q*; shrink the scan window.
            if self.a_q(bounds.pi_high) > q_star {
                mix_lo =
                    bisect(|pi| self.a_q(pi) - q_star, mix_lo, bounds.pi_high, ROOT_TOL) + ROOT_TOL;
            } else {
                mix_lo = bounds.pi_high; // empty window
            }
        }
        let mix_hi = bounds.pi_high - 1e-12;
        if mix_lo < mix_hi {
            let mixed_residual = |pi: f64| {
                let alpha = self.alpha_indifference_unchecked(pi);
                self.g(pi, alpha, q_star / self.a_q(pi))
            };
            for pi_star in scan_roots(mixed_residual, mix_lo, mix_hi, SCAN_SUBINTERVALS, ROOT_TOL) {
                let alpha = self.alpha_indifference_unchecked(pi_star);
                let p = q_star / self.a_q(pi_star);
                if !(0.0..=1.0 + BOUNDARY_TOL).contains(&p) {
                    continue;
                }
                if !(-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&alpha) {
                    warnings.push(format!(
                        "mixing root at pi={pi_star:.9} discarded: alpha={alpha:.6} outside [0,1]"
                    ));
                    continue;
                }
                equilibria.push(Equilibrium {
                    kind: EqKind::TwoSectorMixed,
                    pi: pi_star,
                    alpha: alpha.clamp(0.0, 1.0),
                    p: p.min(1.0),
                    q_gap: p * self.a_q(pi_star) - q_star,
                    residual: mixed_residual(pi_star).abs(),
                    knife_edge: false,
                });
            }
        }

        // Deterministic order, then drop exact duplicates across classes.
        equilibria.sort_by(|a, b| {
            a.kind
                .cmp(&b.kind)
                .then(a.pi.partial_cmp(&b.pi).expect("finite pi"))
        });
        let mut deduped: Vec<Equilibrium> = Vec::with_capacity(equilibria.len());
        for eq in equilibria {
            let dup = deduped.iter().any(|other| {
                (other.pi - eq.pi).abs() < 1e-7
                    && (other.alpha - eq.alpha).abs() < 1e-7
                    && (other.p - eq.p).abs() < 1e-7
            });
            if dup {
                warnings.push(format!(
                    "duplicate candidate at (pi={:.9}, alpha={:.6}, p={:.6}) kind {} dropped",
                    eq.pi,
                    eq.alpha,
                    eq.p,
                    eq.kind.label()
                ));
            } else {
                deduped.push(eq);
            }
        }

        if deduped.is_empty() {
            return Err(ModelError::InternalInconsistency(format!(
                "empty equilibrium set (existence is guaranteed); bounds=({:.6},{:.6}), \
                 {} rejected candidates",
                bounds.pi_low,
                bounds.pi_high,
                rejected.len()
            )));
        }
        for eq in &deduped {
            if eq.residual > RESIDUAL_TOL {
                return Err(ModelError::InternalInconsistency(format!(
                    "{} equilibrium at pi={:.9} has residual {:.3e}",
                    eq.kind.label(),
                    eq.pi,
                    eq.residual
                )));
            }
        }
        Ok(EquilibriumSet {
            equilibria: deduped,
            rejected,
            bounds,
            warnings,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn bound_candidate(
        &self,
        equilibria: &mut Vec<Equilibrium>,
        rejected: &mut Vec<RejectedCandidate>,
        warnings: &mut Vec<String>,
        pi: f64,
        alpha: f64,
        kind: EqKind,
        q_star: f64,
        psi: f64,
        bounds: Bounds,
    ) {
        let g0 = self.g(pi, alpha, 0.0);
        let g1 = self.g(pi, alpha, 1.0);
        let Some(p) = affine_root(g0, g1) else {
            warnings.push(format!(
                "{} candidate: steady-state condition flat in p (G(0)={g0:.3e})",
                kind.label()
            ));
            return;
        };
        let q_gap = p * self.a_q(pi) - q_star;
        let p_in_range = (-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&p);
        let structural_ok = match kind {
            // G(pi_low,0,0) > 0 and G(pi_low,0,1) < 0 are exactly p in (0,1)
            // for the decreasing affine case, so the p-range check covers them.
            EqKind::TwoSectorReject => true,
            EqKind::TwoSectorAccept => psi > bounds.pi_high + BOUNDARY_TOL,
            _ => unreachable!("bound_candidate only handles the two bound kinds"),
        };
        let worker_ok = match kind {
            EqKind::TwoSectorReject => q_gap >= -BOUNDARY_TOL,
            EqKind::TwoSectorAccept => q_gap <= BOUNDARY_TOL,
            _ => unreachable!(),
        };
        let reason = if !p_in_range {
            Some(RejectReason::POutOfRange)
        } else if !structural_ok {
            Some(RejectReason::PsiBelowPiBar)
        } else if !worker_ok {
            Some(RejectReason::WorkerOptimalityViolated)
        } else {
            None
        };
        match reason {
            Some(reason) => rejected.push(RejectedCandidate {
                kind,
                pi,
                alpha,
                p,
                q_gap,
                reason,
            }),
            None => {
                let knife =
                    q_gap.abs() < BOUNDARY_TOL || !(BOUNDARY_TOL..=1.0 - BOUNDARY_TOL).contains(&p);
                if knife {
                    warnings.push(format!(
                        "{} inclusion is knife-edge (q_gap={q_gap:.3e}, p={p:.9})",
                        kind.label()
                    ));
                }
                equilibria.push(Equilibrium {
                    kind,
                    pi,
                    alpha,
                    p: p.clamp(0.0, 1.0),
                    q_gap,
                    residual: self.g(pi, alpha, p).abs(),
                    knife_edge: knife,
                });
            }
        }
    }

    /// Scans a separation-rate grid for existence of high-tech-only
    /// equilibria. Requires `r > 0` (with r = 0 unqualified workers are never
    /// fired, and the limit argument behind the scan fails).
    pub fn phi_existence_scan(&self, phi_grid: &[f64]) -> Result<PhiScan> {
        if self.params.r <= 0.0 {
            return Err(ModelError::Precondition(
                "phi scan requires a positive revelation rate r".into(),
            ));
        }
        let mut grid: Vec<f64> = phi_grid.to_vec();
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite phi grid"));
        let mut existence = Vec::new();
        let mut skipped = Vec::new();
        for &phi in &grid {
            let mut params = self.params;
            params.phi = phi;
            let market = match Market::new(params, self.signal.clone()) {
                Ok(m) => m,
                Err(_) => {
                    skipped.push(phi);
                    continue;
                }
            };
            let exists = match market.find_all_equilibria() {
                Ok(set) => set.of_kind(EqKind::HighTechOnly).next().is_some(),
                Err(_) => {
                    skipped.push(phi);
                    continue;
                }
            };
            existence.push((phi, exists));
        }
        let mut threshold_phi = None;
        for &(phi, exists) in &existence {
            if exists {
                break;
            }
            threshold_phi = Some(phi);
        }
        let first_true = existence.iter().position(|&(_, e)| e);
        let pattern_monotone = match first_true {
            Some(idx) => existence[idx..].iter().all(|&(_, e)| e),
            None => true,
        };
        Ok(PhiScan {
            threshold_phi,
            existence,
            skipped,
            pattern_monotone,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Calibration;
    use crate::rng::Rng;

    pub(crate) fn market(beta: f64, phi: f64, r: f64, psi: f64, b: f64) -> Market {
        let params = Calibration::new(beta, phi, r, psi, b)
            .into_params()
            .unwrap();
        Market::new(params, SignalModel::triangular()).unwrap()
    }

    fn example1() -> Market {
        market(0.9, 0.06, 0.75, 0.25, 0.2)
    }

    fn example2() -> Market {
        market(0.99, 0.08, 0.75, 0.25, 0.2)
    }

    /// Independent oracle for the bounds in the unit-value triangular case:
    /// hire profit reduces to pi^2, so pi_high = sqrt(W_l) and pi_low solves
    /// the quadratic pi^2 + W_l pi - W_l = 0.
    fn closed_form_bounds(w_l: f64) -> (f64, f64) {
        let pi_high = w_l.sqrt();
        let pi_low = (-w_l + (w_l * w_l + 4.0 * w_l).sqrt()) / 2.0;
        (pi_low, pi_high)
    }

    #[test]
    fn bounds_match_closed_form_oracle() {
        let m = example1();
        let b = m.bounds().unwrap();
        let (lo, hi) = closed_form_bounds(m.valuations().w_l);
        assert!((b.pi_low - lo).abs() < 1e-9);
        assert!((b.pi_high - hi).abs() < 1e-9);
        assert!((b.pi_low - 0.1647).abs() < 5e-4);
        assert!((b.pi_high - 0.1802).abs() < 5e-4);

        let m2 = example2();
        let b2 = m2.bounds().unwrap();
        assert!((b2.pi_low - 0.2104).abs() < 5e-4);
        assert!((b2.pi_high - 0.2368).abs() < 5e-4);
    }

    #[test]
    fn bounds_shrink_with_low_tech_value() {
        // W_l -> 0 pushes both bounds to 0.
        let mut cal = Calibration::new(0.9, 0.06, 0.75, 0.25, 0.2);
        cal.y_l = cal.w_l + 1e-9;
        let m = Market::new(cal.into_params().unwrap(), SignalModel::triangular()).unwrap();
        let b = m.bounds().unwrap();
        assert!(b.pi_low < 1e-3 && b.pi_high < 1e-3);
    }

    #[test]
    fn missing_upper_bound_is_reported() {
        // Low-tech value above the best high-tech profit: no pi_high.
        let mut cal = Calibration::new(0.9, 0.06, 0.75, 0.25, 0.2);
        cal.y_l = 2.0;
        let m = Market::new(cal.into_params().unwrap(), SignalModel::triangular()).unwrap();
        match m.bounds() {
            Err(ModelError::NoBound { bound, f_lo, f_hi }) => {
                assert_eq!(bound, "pi_high");
                assert!(f_lo < 0.0 && f_hi < 0.0);
            }
            other => panic!("expected NoBound, got {other:?}"),
        }
    }

    #[test]
    fn g_trivial_points() {
        let m = example1();
        let psi = m.params().psi;
        assert!(m.g(psi, 1.0, 0.0).abs() < 1e-12);
        // At pi = 0 nobody is hired (A_u(0) = 0) and the pool term vanishes,
        // so G = 1 + (1-p)/phi.
        let g0 = m.g(0.0, 0.3, 0.6);
        assert!((g0 - (1.0 + 0.4 / 0.06)).abs() < 1e-12);
        assert_eq!(m.g(1.0, 0.5, 0.5), f64::NEG_INFINITY);
    }

    #[test]
    fn g_at_example1_reject_solution() {
        let m = example1();
        let b = m.bounds().unwrap();
        assert!(m.g(b.pi_low, 0.0, 0.8707).abs() < 1e-3);
    }

    #[test]
    fn g_affine_in_p_at_bounds() {
        let mut rng = Rng::seed_from(0xfeed);
        for _ in 0..50 {
            let m = market(
                0.85 + 0.1 * rng.next_f64(),
                0.03 + 0.1 * rng.next_f64(),
                0.5 + 0.5 * rng.next_f64(),
                0.1 + 0.5 * rng.next_f64(),
                0.2,
            );
            let b = m.bounds().unwrap();
            for (pi, alpha) in [(b.pi_low, 0.0), (b.pi_high, 1.0)] {
                let g0 = m.g(pi, alpha, 0.0);
                let g5 = m.g(pi, alpha, 0.5);
                let g1 = m.g(pi, alpha, 1.0);
                assert!(
                    (g5 - 0.5 * (g0 + g1)).abs() < 1e-12,
                    "midpoint collinearity failed"
                );
            }
        }
    }

    #[test]
    fn alpha_indifference_endpoints_and_interior() {
        let m = example2();
        let b = m.bounds().unwrap();
        assert!(m.alpha_indifference(b.pi_low).unwrap().abs() < 1e-8);
        assert!((m.alpha_indifference(b.pi_high).unwrap() - 1.0).abs() < 1e-8);
        let alpha = m.alpha_indifference(0.2355).unwrap();
        assert!(alpha > 0.0 && alpha < 1.0);
        // Strictly increasing on the band.
        let mut last = -1.0;
        for i in 0..=50 {
            let pi = b.pi_low + (b.pi_high - b.pi_low) * i as f64 / 50.0;
            let a = m.alpha_indifference(pi).unwrap();
            assert!(a > last);
            last = a;
        }
        assert!(matches!(
            m.alpha_indifference(0.5),
            Err(ModelError::OutOfRegion { .. })
        ));
    }

    #[test]
    fn example1_unique_reject_equilibrium() {
        let set = example1().find_all_equilibria().unwrap();
        assert_eq!(set.equilibria.len(), 1);
        let eq = &set.equilibria[0];
        assert_eq!(eq.kind, EqKind::TwoSectorReject);
        assert!((eq.pi - 0.1647).abs() < 5e-4);
        assert!((eq.p - 0.8707).abs() < 5e-4);
        assert!(eq.q_gap > 0.0);
        assert!(eq.residual < 1e-10);
        // The acceptance candidate is rejected with p = 0.6514 and a
        // positive q-gap; the high-tech root 0.0838 dies below pi_low.
        let accept = set
            .rejected
            .iter()
            .find(|c| c.kind == EqKind::TwoSectorAccept)
            .unwrap();
        assert!((accept.p - 0.6514).abs() < 5e-4);
        assert!(accept.q_gap > 0.0);
        assert_eq!(accept.reason, RejectReason::WorkerOptimalityViolated);
        let high = set
            .rejected
            .iter()
            .find(|c| c.kind == EqKind::HighTechOnly)
            .unwrap();
        assert!((high.pi - 0.0838).abs() < 1e-3);
        assert_eq!(high.reason, RejectReason::PiBelowLowerBound);
    }

    #[test]
    fn example2_three_equilibria() {
        let set = example2().find_all_equilibria().unwrap();
        assert_eq!(set.equilibria.len(), 3);
        let mixed = set.of_kind(EqKind::TwoSectorMixed).next().unwrap();
        assert!((mixed.pi - 0.2355).abs() < 5e-4);
        assert!(mixed.q_gap.abs() < 1e-9);
        let reject = set.of_kind(EqKind::TwoSectorReject).next().unwrap();
        assert!((reject.pi - 0.2104).abs() < 5e-4);
        assert!((reject.p - 0.7838).abs() < 5e-4);
        let accept = set.of_kind(EqKind::TwoSectorAccept).next().unwrap();
        assert!((accept.pi - 0.2368).abs() < 5e-4);
        assert!((accept.p - 0.1658).abs() < 5e-4);
        assert!(accept.q_gap < 0.0);
    }

    #[test]
    fn high_tech_only_solutions_sit_below_psi() {
        // Negative selection: any high-tech-only equilibrium has pi* < psi.
        let m = market(0.99, 0.15, 0.75, 0.75, 0.2);
        let set = m.find_all_equilibria().unwrap();
        let eqs: Vec<_> = set.of_kind(EqKind::HighTechOnly).collect();
        assert_eq!(eqs.len(), 1);
        assert!(eqs[0].pi < m.params().psi);
        assert_eq!(set.equilibria.len(), 1);
    }

    #[test]
    fn sufficient_condition_for_positive_g_at_zero_entry() {
        // G(pi_low, 0, 0) > 0 whenever psi >= pi_low.
        let mut rng = Rng::seed_from(0xc0de);
        let mut checked = 0;
        while checked < 100 {
            let beta = 0.6 + 0.39 * rng.next_f64();
            let phi = 0.02 + 0.3 * rng.next_f64();
            let r = 0.1 + 0.9 * rng.next_f64();
            let psi = 0.05 + 0.9 * rng.next_f64();
            let Ok(params) = Calibration::new(beta, phi, r, psi, 0.2).into_params() else {
                continue;
            };
            let m = Market::new(params, SignalModel::triangular()).unwrap();
            let Ok(b) = m.bounds() else { continue };
            if psi < b.pi_low {
                continue;
            }
            checked += 1;
            assert!(m.g(b.pi_low, 0.0, 0.0) > 0.0);
        }
    }

    #[test]
    fn existence_on_random_admissible_draws() {
        // Existence: every admissible draw yields a non-empty set.
        let mut rng = Rng::seed_from(0x9e37);
        let mut checked = 0;
        while checked < 500 {
            let beta = 0.55 + 0.44 * rng.next_f64();
            let phi = 0.02 + 0.45 * rng.next_f64();
            let r = 0.05 + 0.95 * rng.next_f64();
            let psi = 0.03 + 0.94 * rng.next_f64();
            let Ok(params) = Calibration::new(beta, phi, r, psi, 0.2).into_params() else {
                continue;
            };
            let m = Market::new(params, SignalModel::triangular()).unwrap();
            if m.bounds().is_err() {
                continue;
            }
            checked += 1;
            let set = m.find_all_equilibria().unwrap_or_else(|e| {
                panic!("existence failed at beta={beta}, phi={phi}, r={r}, psi={psi}: {e}")
            });
            assert!(!set.equilibria.is_empty());
        }
    }

    #[test]
    fn phi_scan_finds_high_tech_cutoff() {
        let m = market(0.99, 0.15, 0.75, 0.75, 0.2);
        let grid: Vec<f64> = (1..=30).map(|i| i as f64 * 0.005).collect();
        let scan = m.phi_existence_scan(&grid).unwrap();
        let at_15 = scan
            .existence
            .iter()
            .find(|(phi, _)| (phi - 0.15).abs() < 1e-12)
            .unwrap();
        assert!(at_15.1, "high-tech-only should exist at phi = 0.15");
        let threshold = scan.threshold_phi.expect("cutoff inside the grid");
        assert!(threshold < 0.15);
        assert!(scan.pattern_monotone);
        // Tiny phi kills high-tech-only equilibria.
        let small = m.phi_existence_scan(&[1e-4]).unwrap();
        assert_eq!(small.existence, vec![(1e-4, false)]);
    }

    #[test]
    fn phi_scan_requires_positive_revelation() {
        // r = 0 calibrates to a small w_h, so wages must come down with it.
        let mut cal = Calibration::new(0.99, 0.15, 0.0, 0.75, 0.05);
        cal.w_l = 0.12;
        cal.y_l = 0.13;
        let m = Market::new(cal.into_params().unwrap(), SignalModel::triangular()).unwrap();
        assert!(matches!(
            m.phi_existence_scan(&[0.1]),
            Err(ModelError::Precondition(_))
        ));
    }
}
