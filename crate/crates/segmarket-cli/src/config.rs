//! JSON run configuration: parameter or calibration block, signal family,
//! solver knobs, and the simulation section. Unknown keys are rejected.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use segmarket::simulator::ThresholdMode;
use segmarket::{Calibration, Market, ModelParams, SignalModel};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn default_lambda() -> f64 {
    0.5
}

fn default_vacancy_cost() -> f64 {
    0.01
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub beta: f64,
    pub phi: f64,
    pub r: f64,
    pub psi: f64,
    pub b: f64,
    pub y_l: f64,
    pub w_l: f64,
    pub y_h: f64,
    pub w_h: f64,
    #[serde(default = "default_vacancy_cost")]
    pub k: f64,
    #[serde(default = "default_lambda")]
    pub lambda_f: f64,
    #[serde(default = "default_lambda")]
    pub lambda_m: f64,
}

/// Calibration block: w_h and y_h are derived so the high-tech match values
/// are exactly +1 / -1.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSpec {
    pub beta: f64,
    pub phi: f64,
    pub r: f64,
    pub psi: f64,
    pub b: f64,
    pub y_l: f64,
    pub w_l: f64,
    #[serde(default = "default_vacancy_cost")]
    pub k: f64,
    #[serde(default = "default_lambda")]
    pub lambda_f: f64,
    #[serde(default = "default_lambda")]
    pub lambda_m: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(default)]
    pub kind: SignalKindSpec,
    /// Grid abscissae and density values for the generic family.
    pub grid: Option<Vec<f64>>,
    pub density_q: Option<Vec<f64>>,
    pub density_u: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "lowercase")]
pub enum SignalKindSpec {
    #[default]
    Triangular,
    Generic,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Convergence tolerance for oracle verification (default 1e-10).
    pub oracle_tol: Option<f64>,
    /// Number of grid points for the prop6 sweep (default 21).
    pub prop6_points: Option<usize>,
    /// Relative half-width of the prop6 sweep around the anchor p (default 0.3).
    pub prop6_span: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    MonteCarlo,
    Flow,
    Fragility,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSpec {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    /// Use the k-th solved equilibrium's policy.
    pub equilibrium: Option<usize>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub threshold: Option<ThresholdSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub mode: SimMode,
    #[serde(default = "default_agents")]
    pub n_agents: usize,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub policy: Option<PolicySpec>,
}

fn default_agents() -> usize {
    10_000
}

fn default_periods() -> usize {
    400
}

fn default_epsilon() -> f64 {
    1e-3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ParamsSpec>,
    pub calibrate: Option<CalibrateSpec>,
    #[serde(default)]
    pub signal: SignalSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    pub sim: Option<SimSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if config.params.is_some() == config.calibrate.is_some() {
            return Err(ConfigError(
                "exactly one of `params` or `calibrate` must be present".into(),
            ));
        }
        Ok(config)
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let params = if let Some(spec) = &self.params {
            let params = ModelParams {
                beta: spec.beta,
                phi: spec.phi,
                r: spec.r,
                psi: spec.psi,
                b: spec.b,
                y_l: spec.y_l,
                w_l: spec.w_l,
                y_h: spec.y_h,
                w_h: spec.w_h,
                vacancy_cost: spec.k,
                lambda_f: spec.lambda_f,
                lambda_m: spec.lambda_m,
            };
            params.validate().map_err(|e| ConfigError(e.to_string()))?;
            params
        } else {
            let spec = self.calibrate.as_ref().expect("validated in load");
            let mut cal = Calibration::new(spec.beta, spec.phi, spec.r, spec.psi, spec.b)
                .with_groups(spec.lambda_f, spec.lambda_m);
            cal.y_l = spec.y_l;
            cal.w_l = spec.w_l;
            cal.vacancy_cost = spec.k;
            cal.into_params().map_err(|e| ConfigError(e.to_string()))?
        };
        Ok(params)
    }

    pub fn signal_model(&self) -> Result<SignalModel, ConfigError> {
        match self.signal.kind {
            SignalKindSpec::Triangular => Ok(SignalModel::triangular()),
            SignalKindSpec::Generic => {
                let grid = self
                    .signal
                    .grid
                    .as_ref()
                    .ok_or_else(|| ConfigError("generic signal requires `grid`".into()))?;
                let fq = self
                    .signal
                    .density_q
                    .as_ref()
                    .ok_or_else(|| ConfigError("generic signal requires `density_q`".into()))?;
                let fu = self
                    .signal
                    .density_u
                    .as_ref()
                    .ok_or_else(|| ConfigError("generic signal requires `density_u`".into()))?;
                build_grid_signal(grid, fq, fu).map_err(ConfigError)
            }
        }
    }

    pub fn market(&self) -> Result<Market, ConfigError> {
        Market::new(self.model_params()?, self.signal_model()?)
            .map_err(|e| ConfigError(e.to_string()))
    }
}

/// Tabulated densities: linear interpolation between grid points, CDFs from
/// the exact integral of the interpolant, each density normalized to total
/// mass one before use.
fn build_grid_signal(grid: &[f64], fq: &[f64], fu: &[f64]) -> Result<SignalModel, String> {
    if grid.len() < 2 || grid.len() != fq.len() || grid.len() != fu.len() {
        return Err("grid, density_q, density_u must share a length of at least 2".into());
    }
    if (grid[0] != 0.0) || (*grid.last().unwrap() != 1.0) {
        return Err("signal grid must start at 0 and end at 1".into());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err("signal grid must be strictly increasing".into());
    }
    if fq
        .iter()
        .chain(fu.iter())
        .any(|v| !v.is_finite() || *v < 0.0)
    {
        return Err("density values must be finite and non-negative".into());
    }
    type Table = (Arc<Vec<f64>>, Arc<Vec<f64>>, Arc<Vec<f64>>);
    let table = |values: &[f64]| -> Table {
        // Cumulative trapezoid integral, then normalize to mass one.
        let mut cum = vec![0.0_f64];
        for i in 1..grid.len() {
            let area = 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
            cum.push(cum[i - 1] + area);
        }
        let total = *cum.last().unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| v / total).collect();
        let cum: Vec<f64> = cum.iter().map(|v| v / total).collect();
        (Arc::new(grid.to_vec()), Arc::new(scaled), Arc::new(cum))
    };
    let total_q: f64 = (1..grid.len())
        .map(|i| 0.5 * (fq[i] + fq[i - 1]) * (grid[i] - grid[i - 1]))
        .sum();
    let total_u: f64 = (1..grid.len())
        .map(|i| 0.5 * (fu[i] + fu[i - 1]) * (grid[i] - grid[i - 1]))
        .sum();
    if (total_q - 1.0).abs() > 1e-3 || (total_u - 1.0).abs() > 1e-3 {
        return Err(format!(
            "density masses must be within 1e-3 of one (got {total_q:.6} and {total_u:.6}); \
             values are renormalized after this check"
        ));
    }
    let (gx_q, gv_q, gc_q) = table(fq);
    let (gx_u, gv_u, gc_u) = table(fu);
    let density = move |gx: Arc<Vec<f64>>, gv: Arc<Vec<f64>>| {
        move |theta: f64| -> f64 {
            let theta = theta.clamp(0.0, 1.0);
            let idx = match gx.binary_search_by(|x| x.partial_cmp(&theta).unwrap()) {
                Ok(i) => return gv[i],
                Err(i) => i,
            };
            let (x0, x1) = (gx[idx - 1], gx[idx]);
            let t = (theta - x0) / (x1 - x0);
            gv[idx - 1] * (1.0 - t) + gv[idx] * t
        }
    };
    let cdf = move |gx: Arc<Vec<f64>>, gv: Arc<Vec<f64>>, gc: Arc<Vec<f64>>| {
        move |theta: f64| -> f64 {
            let theta = theta.clamp(0.0, 1.0);
            let idx = match gx.binary_search_by(|x| x.partial_cmp(&theta).unwrap()) {
                Ok(i) => return gc[i],
                Err(i) => i,
            };
            let (x0, x1) = (gx[idx - 1], gx[idx]);
            let t = theta - x0;
            let slope = (gv[idx] - gv[idx - 1]) / (x1 - x0);
            gc[idx - 1] + gv[idx - 1] * t + 0.5 * slope * t * t
        }
    };
    SignalModel::generic(
        density(gx_q.clone(), gv_q.clone()),
        density(gx_u.clone(), gv_u.clone()),
        cdf(gx_q, gv_q, gc_q),
        cdf(gx_u, gv_u, gc_u),
    )
    .map_err(|e| e.to_string())
}

/// Resolves the sim policy to concrete numbers, solving the market when the
/// policy points at an equilibrium.
pub fn resolve_policy(
    market: &Market,
    spec: Option<&PolicySpec>,
) -> Result<segmarket::simulator::Policy, String> {
    use segmarket::simulator::Policy;
    let default_index = 0usize;
    let (index, explicit) =
        match spec {
            None => (Some(default_index), None),
            Some(PolicySpec {
                equilibrium: Some(k),
                p: None,
                alpha: None,
                threshold: None,
            }) => (Some(*k), None),
            Some(PolicySpec {
                equilibrium: None,
                p: Some(p),
                alpha: Some(alpha),
                threshold,
            }) => (None, Some((*p, *alpha, threshold))),
            _ => return Err(
                "policy must be either {\"equilibrium\": k} or {\"p\", \"alpha\"[, \"threshold\"]}"
                    .into(),
            ),
        };
    if let Some((p, alpha, threshold)) = explicit {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&alpha) {
            return Err("policy p and alpha must lie in [0,1]".into());
        }
        let mode = match threshold {
            None => ThresholdMode::Adaptive,
            Some(ThresholdSpec::Named(name)) if name == "adaptive" => ThresholdMode::Adaptive,
            Some(ThresholdSpec::Named(name)) => {
                return Err(format!("unknown threshold mode `{name}`"))
            }
            Some(ThresholdSpec::Fixed(s)) => {
                if !(0.0..=1.0).contains(s) {
                    return Err("fixed threshold must lie in [0,1]".into());
                }
                ThresholdMode::Fixed(*s)
            }
        };
        return Ok(Policy {
            p,
            alpha,
            threshold: mode,
        });
    }
    let index = index.expect("index set when not explicit");
    let set = market
        .find_all_equilibria()
        .map_err(|e| format!("cannot derive policy from equilibria: {e}"))?;
    let eq = set.equilibria.get(index).ok_or_else(|| {
        format!(
            "policy equilibrium index {index} out of range ({} found)",
            set.equilibria.len()
        )
    })?;
    Ok(Policy::frozen(market, eq.pi, eq.alpha, eq.p))
}
