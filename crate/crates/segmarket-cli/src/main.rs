//! Command-line front end: config ingestion, equilibrium reports, two-group
//! analysis, figure-data emission, simulator runs, and parameter sweeps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical precondition
//! failure, 4 internal solver inconsistency.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{resolve_policy, RunConfig, SimMode};
use output::{csv_row, num, render_table, Format, Sink};
use segmarket::groups::{self, QuotaMode};
use segmarket::roots::scan_roots;
use segmarket::simulator::{
    flow_oracle, flow_step, fragility_experiment, monte_carlo_run, FlowState, Policy,
};
use segmarket::{Market, ModelError};

#[derive(Parser)]
#[command(
    name = "segmarket",
    version,
    about = "Steady-state equilibrium solver for a two-sector search labor market with screening"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the entry-indifference bounds and derived valuations.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate and classify all one-group equilibria.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verify each equilibrium against the flow oracle.
        #[arg(long)]
        oracle: bool,
        /// Oracle convergence tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Two-group analysis: symmetric lifts plus asymmetric solvers.
    Groups {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verify solutions against the two-group flow oracle.
        #[arg(long)]
        oracle: bool,
        /// Run the population-share sweep around the mixed equilibrium.
        #[arg(long)]
        prop6: bool,
        /// Re-run the asymmetric solvers under the hiring quota.
        #[arg(long)]
        quota: bool,
        /// Quota reading: proportional hiring flows or employment stocks.
        #[arg(long, default_value = "flow")]
        quota_mode: String,
    },
    /// Emit x/y series for a named figure as CSV.
    Figure {
        #[arg(long)]
        config: PathBuf,
        /// One of: G0, G1-low, G1-high, disc.
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Run the simulator (flow iteration, Monte Carlo, or fragility).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the config's sim section.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep one scalar parameter and report the equilibrium set per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// One of: beta, phi, r, psi, b, w_l, y_l.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of grid points (at least 2).
        #[arg(long)]
        steps: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn from_model(err: ModelError) -> Self {
        let code = match err {
            ModelError::InternalInconsistency(_) => 4,
            _ => 3,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(err: config::ConfigError) -> Self {
        Failure::config(err.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure {
            code: 3,
            message: format!("io error: {err}"),
        }
    }
}

fn verbose() -> bool {
    std::env::var("SEGMARKET_LOG").is_ok_and(|v| !v.is_empty() && v != "0")
}

fn log(message: impl AsRef<str>) {
    if verbose() {
        eprintln!("[segmarket] {}", message.as_ref());
    }
}

fn load_market(path: &Path) -> Result<(RunConfig, Market), Failure> {
    let cfg = RunConfig::load(path)?;
    let market = cfg.market()?;
    log(format!(
        "loaded {} (psi={}, lambda=({}, {}))",
        path.display(),
        market.params().psi,
        market.params().lambda_f,
        market.params().lambda_m
    ));
    Ok((cfg, market))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds {
            config,
            format,
            out,
        } => cmd_bounds(&config, format, out),
        Command::Solve {
            config,
            format,
            out,
            oracle,
            tol,
        } => cmd_solve(&config, format, out, oracle, tol),
        Command::Groups {
            config,
            format,
            out,
            oracle,
            prop6,
            quota,
            quota_mode,
        } => cmd_groups(&config, format, out, oracle, prop6, quota, &quota_mode),
        Command::Figure {
            config,
            id,
            out,
            points,
        } => cmd_figure(&config, &id, out, points),
        Command::Simulate { config, out, seed } => cmd_simulate(&config, out, seed),
        Command::Sweep {
            config,
            format,
            out,
            param,
            from,
            to,
            steps,
        } => cmd_sweep(&config, format, out, &param, from, to, steps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn cmd_bounds(path: &Path, format: Format, out: Option<PathBuf>) -> Result<(), Failure> {
    let (_, market) = load_market(path)?;
    let bounds = market.bounds().map_err(Failure::from_model)?;
    let vals = market.valuations();
    let mut sink = Sink::new(out);
    match format {
        Format::Json => {
            let doc = json!({
                "pi_low": bounds.pi_low,
                "pi_high": bounds.pi_high,
                "w_q": vals.w_q,
                "w_u": vals.w_u,
                "w_l": vals.w_l,
                "v_star": vals.v_star,
                "q_star": vals.q_star,
                "entry_viable": vals.entry_viable,
            });
            sink.line(serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Format::Csv => {
            sink.line("pi_low,pi_high,w_q,w_u,w_l,v_star,q_star,entry_viable");
            sink.line(csv_row(&[
                num(bounds.pi_low),
                num(bounds.pi_high),
                num(vals.w_q),
                num(vals.w_u),
                num(vals.w_l),
                num(vals.v_star),
                num(vals.q_star),
                vals.entry_viable.to_string(),
            ]));
        }
        Format::Table => {
            let rows = vec![
                vec!["pi_low".into(), num(bounds.pi_low)],
                vec!["pi_high".into(), num(bounds.pi_high)],
                vec!["W_q".into(), num(vals.w_q)],
                vec!["W_u".into(), num(vals.w_u)],
                vec!["W_l".into(), num(vals.w_l)],
                vec!["V*".into(), num(vals.v_star)],
                vec!["Q*".into(), num(vals.q_star)],
                vec!["entry_viable".into(), vals.entry_viable.to_string()],
            ];
            render_table(&mut sink, &["quantity", "value"], &rows);
        }
    }
    sink.finish()?;
    Ok(())
}

fn oracle_drift(market: &Market, pi: f64, alpha: f64, p: f64, tol: f64) -> Result<f64, Failure> {
    let policy = Policy::frozen(market, pi, alpha, p);
    let limit = flow_oracle(&policy, market, tol, 400_000).map_err(Failure::from_model)?;
    Ok(limit.pi - pi)
}

fn cmd_solve(
    path: &Path,
    format: Format,
    out: Option<PathBuf>,
    oracle: bool,
    tol: Option<f64>,
) -> Result<(), Failure> {
    let (cfg, market) = load_market(path)?;
    let set = market.find_all_equilibria().map_err(Failure::from_model)?;
    let tol = tol.or(cfg.solver.oracle_tol).unwrap_or(1e-12);
    let mut oracle_results = Vec::new();
    if oracle {
        for eq in &set.equilibria {
            oracle_results.push(oracle_drift(&market, eq.pi, eq.alpha, eq.p, tol)?);
        }
    }
    let mut sink = Sink::new(out);
    match format {
        Format::Json => {
            let oracle_json: Vec<_> = set
                .equilibria
                .iter()
                .zip(&oracle_results)
                .map(|(eq, drift)| {
                    json!({
                        "kind": eq.kind.label(),
                        "pi": eq.pi,
                        "oracle_pi": eq.pi + drift,
                        "drift": drift,
                    })
                })
                .collect();
            let doc = json!({
                "params": market.params(),
                "valuations": market.valuations(),
                "bounds": set.bounds,
                "equilibria": set.equilibria,
                "rejected": set.rejected,
                "warnings": set.warnings,
                "oracle": oracle_json,
            });
            sink.line(serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Format::Csv => {
            let mut header = "status,kind,pi,alpha,p,q_gap,residual,knife_edge,reason".to_string();
            if oracle {
                header.push_str(",oracle_drift");
            }
            sink.line(header);
            for (i, eq) in set.equilibria.iter().enumerate() {
                let mut fields = vec![
                    "equilibrium".to_string(),
                    eq.kind.label().to_string(),
                    num(eq.pi),
                    num(eq.alpha),
                    num(eq.p),
                    num(eq.q_gap),
                    format!("{:.3e}", eq.residual),
                    eq.knife_edge.to_string(),
                    String::new(),
                ];
                if oracle {
                    fields.push(format!("{:.3e}", oracle_results[i]));
                }
                sink.line(csv_row(&fields));
            }
            for cand in &set.rejected {
                let mut fields = vec![
                    "rejected".to_string(),
                    cand.kind.label().to_string(),
                    num(cand.pi),
                    num(cand.alpha),
                    num(cand.p),
                    num(cand.q_gap),
                    String::new(),
                    String::new(),
                    cand.reason.describe().to_string(),
                ];
                if oracle {
                    fields.push(String::new());
                }
                sink.line(csv_row(&fields));
            }
        }
        Format::Table => {
            let mut rows = Vec::new();
            for (i, eq) in set.equilibria.iter().enumerate() {
                let mut row = vec![
                    eq.kind.label().to_string(),
                    num(eq.pi),
                    num(eq.alpha),
                    num(eq.p),
                    num(eq.q_gap),
                    format!("{:.1e}", eq.residual),
                    if eq.knife_edge {
                        "yes".into()
                    } else {
                        "".into()
                    },
                ];
                if oracle {
                    row.push(format!("{:.1e}", oracle_results[i]));
                }
                rows.push(row);
            }
            let mut header = vec!["kind", "pi", "alpha", "p", "q_gap", "residual", "knife"];
            if oracle {
                header.push("oracle_drift");
            }
            render_table(&mut sink, &header, &rows);
            if !set.rejected.is_empty() {
                sink.line("");
                sink.line("rejected candidates:");
                let rows: Vec<Vec<String>> = set
                    .rejected
                    .iter()
                    .map(|c| {
                        vec![
                            c.kind.label().to_string(),
                            num(c.pi),
                            num(c.p),
                            num(c.q_gap),
                            c.reason.describe().to_string(),
                        ]
                    })
                    .collect();
                render_table(&mut sink, &["kind", "pi", "p", "q_gap", "reason"], &rows);
            }
            for warning in &set.warnings {
                sink.line(format!("note: {warning}"));
            }
        }
    }
    sink.finish()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_groups(
    path: &Path,
    format: Format,
    out: Option<PathBuf>,
    oracle: bool,
    prop6: bool,
    quota: bool,
    quota_mode: &str,
) -> Result<(), Failure> {
    if prop6 && quota {
        return Err(Failure::config("choose at most one of --prop6/--quota"));
    }
    let (cfg, market) = load_market(path)?;
    let mut sink = Sink::new(out);
    if prop6 {
        let anchor = groups::population_share_sweep(&market, &[]).map_err(Failure::from_model)?;
        let points = cfg.solver.prop6_points.unwrap_or(21).max(2);
        let span = cfg.solver.prop6_span.unwrap_or(0.3);
        let grid: Vec<f64> = (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                anchor.p_star * (1.0 + span * (2.0 * t - 1.0))
            })
            .collect();
        let sweep = groups::population_share_sweep(&market, &grid).map_err(Failure::from_model)?;
        if format == Format::Json {
            sink.line(serde_json::to_string_pretty(&sweep).expect("serializable"));
        } else {
            sink.line("p,pi_f,pi_m,lambda_f,lambda_m,q_gap_f,q_gap_m,valid");
            for row in &sweep.rows {
                let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
                sink.line(csv_row(&[
                    num(row.p),
                    opt(row.pi_f),
                    opt(row.pi_m),
                    opt(row.lambda_f),
                    opt(row.lambda_m),
                    opt(row.q_gap_f),
                    opt(row.q_gap_m),
                    row.valid.to_string(),
                ]));
            }
            eprintln!(
                "prop6: anchor pi*={} p*={} lambda_m_increasing={:?}",
                num(sweep.pi_star),
                num(sweep.p_star),
                sweep.lambda_m_increasing
            );
        }
        sink.finish()?;
        return Ok(());
    }
    if quota {
        let mode = match quota_mode {
            "flow" => QuotaMode::FlowProportional,
            "stock" => QuotaMode::StockProportional,
            other => {
                return Err(Failure::config(format!(
                    "unknown quota mode `{other}` (flow|stock)"
                )))
            }
        };
        let report = groups::quota_check(&market, mode).map_err(Failure::from_model)?;
        if format == Format::Json {
            sink.line(serde_json::to_string_pretty(&report).expect("serializable"));
        } else {
            sink.line(format!(
                "asymmetric_survivors,{}",
                report.asymmetric_survivors.len()
            ));
            sink.line(format!(
                "symmetric_equilibria,{}",
                report.symmetric_set.len()
            ));
            sink.line(format!(
                "max_symmetric_quota_residual,{:.3e}",
                report.max_symmetric_quota_residual
            ));
            sink.line(format!("candidates_examined,{}", report.candidates.len()));
            for cand in &report.candidates {
                sink.line(format!(
                    "candidate,{},{},{},{},{},{}",
                    cand.equilibrium.kind.label(),
                    num(cand.equilibrium.pi_f),
                    num(cand.equilibrium.pi_m),
                    num(cand.equilibrium.p),
                    num(cand.mu),
                    cand.verdict.map(|v| v.describe()).unwrap_or("equilibrium"),
                ));
            }
        }
        sink.finish()?;
        return Ok(());
    }

    let symmetric = groups::lift_symmetric(&market).map_err(Failure::from_model)?;
    let fem = groups::solve_asym_fem_mixed(&market).map_err(Failure::from_model)?;
    let male = groups::solve_asym_male_mixed(&market).map_err(Failure::from_model)?;
    let pure = groups::solve_asym_pure(&market).map_err(Failure::from_model)?;

    let verify = |eq: &groups::GroupEquilibrium| -> Result<(f64, f64), Failure> {
        segmarket::simulator::verify_group_equilibrium(&market, eq).map_err(Failure::from_model)
    };

    if format == Format::Json {
        let doc = json!({
            "params": market.params(),
            "symmetric": symmetric,
            "asym_fem_mixed": fem,
            "asym_male_mixed": male,
            "asym_pure": pure,
        });
        sink.line(serde_json::to_string_pretty(&doc).expect("serializable"));
        sink.finish()?;
        return Ok(());
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let drift_cell = |eq: &groups::GroupEquilibrium| -> Result<String, Failure> {
        let (pi_f, pi_m) = verify(eq)?;
        Ok(format!(
            "{:.1e}",
            (pi_f - eq.pi_f).abs().max((pi_m - eq.pi_m).abs())
        ))
    };
    for eq in &symmetric {
        let mut row = vec![
            eq.kind.label(),
            num(eq.pi_f),
            num(eq.pi_m),
            num(eq.alpha_f),
            num(eq.alpha_m),
            num(eq.p),
            num(eq.diagnostics.q_gap_f),
            num(eq.diagnostics.q_gap_m),
            "equilibrium".to_string(),
        ];
        if oracle {
            row.push(drift_cell(eq)?);
        }
        rows.push(row);
    }
    for outcome in [&fem, &male, &pure] {
        for cand in &outcome.candidates {
            let eq = &cand.equilibrium;
            let status = match cand.verdict {
                None => "equilibrium".to_string(),
                Some(v) => format!("rejected: {}", v.describe()),
            };
            let mut row = vec![
                eq.kind.label(),
                num(eq.pi_f),
                num(eq.pi_m),
                num(eq.alpha_f),
                num(eq.alpha_m),
                num(eq.p),
                num(eq.diagnostics.q_gap_f),
                num(eq.diagnostics.q_gap_m),
                status,
            ];
            if oracle {
                if cand.verdict.is_none() {
                    row.push(drift_cell(eq)?);
                } else {
                    row.push(String::new());
                }
            }
            rows.push(row);
        }
    }
    let mut header = vec![
        "class", "pi_f", "pi_m", "alpha_f", "alpha_m", "p", "q_gap_f", "q_gap_m", "status",
    ];
    if oracle {
        header.push("oracle_drift");
    }
    match format {
        Format::Csv => {
            sink.line(header.join(","));
            for row in &rows {
                sink.line(csv_row(row));
            }
        }
        _ => {
            render_table(&mut sink, &header, &rows);
            if let Some(min_gap) = male.min_q_gap_f {
                sink.line(format!(
                    "male-mixed existence check: min q_gap_f = {}",
                    num(min_gap)
                ));
            }
        }
    }
    sink.finish()?;
    Ok(())
}

fn cmd_figure(path: &Path, id: &str, out: Option<PathBuf>, points: usize) -> Result<(), Failure> {
    let (_, market) = load_market(path)?;
    let points = points.max(16);
    let mut sink = Sink::new(out);
    let bounds = market.bounds().map_err(Failure::from_model)?;
    let q_star = market.valuations().q_star;
    match id {
        // Piecewise one-dimensional steady-state curve: low-tech branch
        // below pi_low, worker-indifference branch inside the band,
        // high-tech branch above pi_high.
        "G0" => {
            sink.line("pi,branch,p,g");
            for i in 1..points {
                let pi = i as f64 / points as f64;
                if (pi - bounds.pi_low).abs() < 1e-12 || (pi - bounds.pi_high).abs() < 1e-12 {
                    continue;
                }
                let (branch, alpha, p) = if pi < bounds.pi_low {
                    ("low", 1.0, 0.0)
                } else if pi < bounds.pi_high {
                    let alpha = match market.alpha_indifference(pi) {
                        Ok(alpha) => alpha,
                        Err(_) => continue,
                    };
                    ("mixed", alpha, q_star / market.a_q(pi))
                } else {
                    ("high", 0.0, 1.0)
                };
                sink.line(csv_row(&[
                    num(pi),
                    branch.to_string(),
                    num(p),
                    num(market.g(pi, alpha, p)),
                ]));
            }
        }
        // The affine steady-state condition in p at the two bounds.
        "G1-low" | "G1-high" => {
            let (pi, alpha) = if id == "G1-low" {
                (bounds.pi_low, 0.0)
            } else {
                (bounds.pi_high, 1.0)
            };
            sink.line("p,g");
            for i in 0..=points {
                let p = i as f64 / points as f64;
                sink.line(csv_row(&[num(p), num(market.g(pi, alpha, p))]));
            }
        }
        // Two-group steady-state loci in the (pi_f, pi_m) plane for the
        // configuration where the f group mixes; their crossing is the
        // discrimination candidate.
        "disc" => {
            sink.line("pi_f,pi_m_male,pi_m_female");
            let a_top = market.a_q(1.0 - 1e-9);
            if a_top <= q_star {
                return Err(Failure::from_model(ModelError::Precondition(
                    "no feasible pi_f with A_q(pi_f) >= Q*".into(),
                )));
            }
            let lo = {
                let mut lo = 1e-6;
                if market.a_q(lo) < q_star {
                    lo = segmarket::roots::bisect(
                        |pi| market.a_q(pi) - q_star,
                        lo,
                        1.0 - 1e-9,
                        1e-12,
                    ) + 1e-9;
                }
                lo
            };
            for i in 0..=points {
                let pi_f = lo + (0.9 - lo) * i as f64 / points as f64;
                let p = q_star / market.a_q(pi_f);
                let male = scan_roots(|x| market.g(x, 0.0, p), 1e-6, 1.0 - 1e-6, 2000, 1e-10)
                    .into_iter()
                    .next();
                let female = scan_roots(
                    |x| market.g(pi_f, groups::alpha_female(&market, pi_f, x), p),
                    1e-6,
                    1.0 - 1e-6,
                    2000,
                    1e-10,
                )
                .into_iter()
                .next();
                let (Some(male), Some(female)) = (male, female) else {
                    continue;
                };
                sink.line(csv_row(&[num(pi_f), num(male), num(female)]));
            }
        }
        other => {
            return Err(Failure::config(format!(
                "unknown figure id `{other}` (G0|G1-low|G1-high|disc)"
            )))
        }
    }
    sink.finish()?;
    Ok(())
}

fn cmd_simulate(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), Failure> {
    let (cfg, market) = load_market(path)?;
    let sim = cfg
        .sim
        .as_ref()
        .ok_or_else(|| Failure::config("simulate requires a `sim` section"))?;
    let seed = seed.unwrap_or(sim.seed);
    let mut sink = Sink::new(out);
    match sim.mode {
        SimMode::MonteCarlo => {
            let policy = resolve_policy(&market, sim.policy.as_ref()).map_err(Failure::config)?;
            let run = monte_carlo_run(&market, &policy, sim.n_agents, sim.periods, seed)
                .map_err(Failure::from_model)?;
            sink.line("period,pi,u_q,u_u,e_qh,e_ql,e_uh,e_ul");
            for (period, (pi, pools)) in run.pi_series.iter().zip(&run.pool_series).enumerate() {
                sink.line(csv_row(&[
                    period.to_string(),
                    num(*pi),
                    pools[0].to_string(),
                    pools[1].to_string(),
                    pools[2].to_string(),
                    pools[3].to_string(),
                    pools[4].to_string(),
                    pools[5].to_string(),
                ]));
            }
            eprintln!(
                "monte-carlo: n={} periods={} seed={} pi_final_mean={} pi_final_sd={}",
                run.n_agents,
                sim.periods,
                run.seed,
                num(run.pi_final_mean),
                num(run.pi_final_sd)
            );
        }
        SimMode::Flow => {
            let policy = resolve_policy(&market, sim.policy.as_ref()).map_err(Failure::config)?;
            let psi = market.params().psi;
            let mut state = FlowState::all_unemployed(psi, 1.0);
            sink.line("period,pi,u_q,u_u,e_qh,e_ql,e_uh,e_ul");
            for period in 0..=sim.periods {
                sink.line(csv_row(&[
                    period.to_string(),
                    num(state.pi_or(psi)),
                    num(state.u_q),
                    num(state.u_u),
                    num(state.e_qh),
                    num(state.e_ql),
                    num(state.e_uh),
                    num(state.e_ul),
                ]));
                state = flow_step(&state, &policy, &market);
            }
            eprintln!(
                "flow: periods={} final_pi={}",
                sim.periods,
                num(state.pi_or(psi))
            );
        }
        SimMode::Fragility => {
            let report = fragility_experiment(&market, sim.epsilon, sim.periods)
                .map_err(Failure::from_model)?;
            sink.line("period,pi_f,pi_m,alpha_f,alpha_m,p");
            for pt in &report.series {
                sink.line(csv_row(&[
                    pt.period.to_string(),
                    num(pt.pi_f),
                    num(pt.pi_m),
                    num(pt.alpha_f),
                    num(pt.alpha_m),
                    num(pt.p),
                ]));
            }
            eprintln!(
                "fragility: epsilon={:e} diverged={} amplification={:.1} final=({}, {}) pi*={}",
                report.epsilon,
                report.diverged,
                report.amplification,
                num(report.final_pi_f),
                num(report.final_pi_m),
                num(report.pi_star)
            );
        }
    }
    sink.finish()?;
    Ok(())
}

fn cmd_sweep(
    path: &Path,
    format: Format,
    out: Option<PathBuf>,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<(), Failure> {
    const PARAMS: [&str; 7] = ["beta", "phi", "r", "psi", "b", "w_l", "y_l"];
    if !PARAMS.contains(&param) {
        return Err(Failure::config(format!(
            "unknown sweep parameter `{param}` ({})",
            PARAMS.join("|")
        )));
    }
    if steps < 2 || to <= from {
        return Err(Failure::config("sweep needs steps >= 2 and to > from"));
    }
    if format == Format::Json {
        return Err(Failure::config("sweep emits csv or table only"));
    }
    let (cfg, base_market) = load_market(path)?;
    let recalibrate = cfg.calibrate.is_some();
    let signal = cfg.signal_model()?;
    let mut sink = Sink::new(out);
    sink.line("value,n_equilibria,kinds");
    let grid: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    for &value in &grid {
        let mut params = *base_market.params();
        match param {
            "beta" => params.beta = value,
            "phi" => params.phi = value,
            "r" => params.r = value,
            "psi" => params.psi = value,
            "b" => params.b = value,
            "w_l" => params.w_l = value,
            "y_l" => params.y_l = value,
            _ => unreachable!(),
        }
        if recalibrate && matches!(param, "beta" | "phi" | "r") {
            // Keep the unit-value normalization while the primitive moves.
            params.w_h = 1.0 - params.beta * (1.0 - params.phi) * (1.0 - params.r);
            params.y_h = params.w_h + (1.0 - params.beta * (1.0 - params.phi));
        }
        let row = match Market::new(params, signal.clone()) {
            Err(e) => vec![num(value), "0".into(), format!("invalid: {e}")],
            Ok(market) => match market.find_all_equilibria() {
                Err(e) => vec![num(value), "0".into(), format!("unsolved: {e}")],
                Ok(set) => {
                    let kinds: Vec<String> = set
                        .equilibria
                        .iter()
                        .map(|eq| format!("{}:{}:{}", eq.kind.label(), num(eq.pi), num(eq.p)))
                        .collect();
                    vec![
                        num(value),
                        set.equilibria.len().to_string(),
                        kinds.join(";"),
                    ]
                }
            },
        };
        sink.line(csv_row(&row));
    }
    if param == "phi" {
        let scan = base_market
            .phi_existence_scan(&grid)
            .map_err(Failure::from_model)?;
        eprintln!(
            "phi scan (raw primitives held fixed): no high-tech-only up to phi={:?}; monotone={}; skipped={:?}",
            scan.threshold_phi, scan.pattern_monotone, scan.skipped
        );
    }
    sink.finish()?;
    Ok(())
}
