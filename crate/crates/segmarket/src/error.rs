use thiserror::Error;

/// Errors surfaced by the solver and simulator layers.
#[derive(Debug, Error)]
pub enum ModelError {
    /// Parameters violate a domain restriction (signs, orderings, the
    /// worker-indifference precondition 0 <= w_l - b <= beta(1-phi)(w_h - b)).
    #[error("parameter domain violation: {0}")]
    ParamDomain(String),

    /// Both signal densities vanish at the evaluation point, or a supplied
    /// density family fails validation (CDF endpoints, monotone likelihood
    /// ratio, first-order dominance).
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Bracketing failed while solving for one of the entry-indifference
    /// bounds. Endpoint values are reported to show which side failed.
    #[error("no bracket for {bound}: f(lo)={f_lo:.6e}, f(hi)={f_hi:.6e}")]
    NoBound {
        bound: &'static str,
        f_lo: f64,
        f_hi: f64,
    },

    /// A quantity defined only on the two-sector band [pi_low, pi_high]
    /// was requested outside it.
    #[error("pi={pi:.6} outside the two-sector band [{lo:.6}, {hi:.6}]")]
    OutOfRegion { pi: f64, lo: f64, hi: f64 },

    /// The equilibrium set came back empty. Existence is guaranteed for
    /// admissible parameters, so this signals a solver bug.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    /// Flow iteration failed to settle within the iteration budget.
    #[error(
        "flow iteration did not converge after {iterations} steps \
         (last |delta pi|={last_delta:.3e}, pi range over final window [{window_min:.6}, {window_max:.6}])"
    )]
    NonConvergence {
        iterations: usize,
        last_delta: f64,
        window_min: f64,
        window_max: f64,
    },

    /// The sweep around a fully mixed symmetric equilibrium requires one
    /// to exist.
    #[error("no symmetric fully mixed equilibrium at these parameters")]
    NoSymmetricMixed,

    /// A caller-supplied argument violates an operation precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
