//! Command-line front end of the `wpcn` binary.
//!
//! Every solving command writes into `--out-dir`:
//! `placement.json`, `nodes.csv`, `metrics.csv`, `history.csv` and
//! `run.json`. Outputs depend only on the arguments, the scenario and the
//! seed; wall time goes to stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{cluster_center_placement, simulated_annealing, Layout, SaConfig};
use crate::clustering::kmeans;
use crate::error::{Error, Result};
use crate::hap::greedy_hap_placement;
use crate::io::{
    generate_scenario, parse_scenario, scenario_digest, scenario_to_json, write_history_csv, write_metrics_csv,
    write_nodes_csv, DEFAULT_BOX, DEFAULT_DEVICES,
};
use crate::model::{db_to_linear, evaluate, Metrics, Placement, Scenario};
use crate::montecarlo::{simulate_harvest, simulate_uplink_power, FadingModel, UplinkPolicy};
use crate::planner::{min_cost_hap, min_cost_separated, Candidate, DeploymentPlan, SearchOptions, SearchOutcome};
use crate::separated::{
    alternating_joint_with, greedy_en_placement, trial_and_error_ap, trial_and_error_from, AlternatingOptions,
    HistoryEntry, Phase, SolveReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_CYCLING: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wpcn", version, about = "Energy node and access point placement for wireless powered networks")]
pub struct Cli {
    /// Random seed for clustering, annealing and sampling.
    #[arg(long, global = true, env = "WPCN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Separated,
    Hap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseArg {
    En,
    Ap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingArg {
    Rayleigh,
    Deterministic,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Greedy EN placement under fixed APs.
    PlaceEn {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: usize,
        /// AP count; APs sit at cluster centers.
        #[arg(long, conflicts_with = "aps")]
        n: Option<usize>,
        /// Placement file whose APs are kept fixed.
        #[arg(long)]
        aps: Option<PathBuf>,
    },
    /// Trial-and-error AP placement under fixed ENs.
    PlaceAp {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        n: usize,
        /// EN count; ENs sit at cluster centers.
        #[arg(long, conflicts_with = "ens")]
        m: Option<usize>,
        /// Placement file whose ENs are kept fixed.
        #[arg(long)]
        ens: Option<PathBuf>,
    },
    /// Alternating joint EN and AP placement.
    PlaceJoint {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Alternating iterations.
        #[arg(long, default_value_t = 10)]
        l: usize,
        #[arg(long, value_enum, default_value_t = PhaseArg::En)]
        first_phase: PhaseArg,
    },
    /// Greedy HAP placement.
    PlaceHap {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: usize,
    },
    /// Nodes at k-means cluster centers.
    BaselineCc {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, required_unless_present = "hap")]
        n: Option<usize>,
        /// Co-located HAPs instead of separate ENs and APs.
        #[arg(long)]
        hap: bool,
    },
    /// Simulated-annealing local search started from cluster centers.
    BaselineLs {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, required_unless_present = "hap")]
        n: Option<usize>,
        #[arg(long)]
        hap: bool,
        #[arg(long)]
        steps: Option<usize>,
        /// Move budget, square meters.
        #[arg(long)]
        sigma3: Option<f64>,
        /// Initial temperature, watts.
        #[arg(long)]
        temp: Option<f64>,
        #[arg(long)]
        cooling: Option<f64>,
    },
    /// Cheapest deployment meeting the target net rate.
    MinCost {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Target net rate in watts; overrides the scenario.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = crate::planner::DEFAULT_CAP)]
        max_m: usize,
        #[arg(long, default_value_t = crate::planner::DEFAULT_CAP)]
        max_n: usize,
        #[arg(long, default_value_t = crate::planner::DEFAULT_ITERATIONS)]
        l: usize,
        /// Concurrent candidate evaluations.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Monte Carlo check of the average harvesting and uplink models.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        placement: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        blocks: usize,
        #[arg(long, value_enum, default_value_t = FadingArg::Rayleigh)]
        fading: FadingArg,
        /// Uplink outage probability.
        #[arg(long, default_value_t = 0.05)]
        outage: f64,
        /// Uplink antenna gain, dB.
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        gain_ul_db: f64,
        /// Uplink carrier frequency, Hz.
        #[arg(long, default_value_t = 915e6)]
        freq_ul_hz: f64,
    },
    /// Uniform random scenario with default parameters.
    GenScenario {
        #[arg(long, default_value_t = DEFAULT_DEVICES)]
        k: usize,
        /// Side of the square region, meters.
        #[arg(long = "box", default_value_t = DEFAULT_BOX)]
        side: f64,
        /// Output file; defaults to `scenario.json` in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::PlaceEn { .. } => "place-en",
            Command::PlaceAp { .. } => "place-ap",
            Command::PlaceJoint { .. } => "place-joint",
            Command::PlaceHap { .. } => "place-hap",
            Command::BaselineCc { .. } => "baseline-cc",
            Command::BaselineLs { .. } => "baseline-ls",
            Command::MinCost { .. } => "min-cost",
            Command::Validate { .. } => "validate",
            Command::GenScenario { .. } => "gen-scenario",
        }
    }
}

/// Everything needed to replay a run, plus its results.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub invocation: &'a Command,
    pub scenario_digest: String,
    pub seed: u64,
    pub placement: &'a Placement,
    pub metrics: &'a Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<&'a DeploymentPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<&'a SolveReport>,
    #[serde(skip_serializing_if = "<[Candidate]>::is_empty")]
    pub candidates: &'a [Candidate],
}

/// Parses arguments and runs; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    eprintln!("{} finished in {:.3} s", cli.command.name(), start.elapsed().as_secs_f64());
    code
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidParameter(_) => EXIT_PARSE,
        Error::AssociationCycling { .. } | Error::AssumptionCycling { .. } => EXIT_CYCLING,
        Error::Domain(_) | Error::Io(_) => EXIT_FAILURE,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

fn load_placement(path: &Path, scenario: &Scenario) -> Result<Placement> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let p: Placement = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}: line {}, column {}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    // Associations are always rederived from the AP sites.
    if p.colocated {
        Placement::hap(p.en_locations, &scenario.devices)
    } else {
        Placement::separated(p.en_locations, p.ap_locations, &scenario.devices)
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_err(&path, e))
}

struct Outcome<'a> {
    placement: Placement,
    report: Option<SolveReport>,
    plan: Option<DeploymentPlan>,
    candidates: Vec<Candidate>,
    history: Vec<HistoryEntry>,
    scenario: &'a Scenario,
}

fn emit(cli: &Cli, out: &Outcome) -> Result<Metrics> {
    let dir = &cli.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let metrics = evaluate(&out.placement, out.scenario)?;
    let mut placement_json = serde_json::to_string_pretty(&out.placement).expect("placement serializes");
    placement_json.push('\n');
    write_file(dir, "placement.json", placement_json.as_bytes())?;

    let mut buf = Vec::new();
    write_nodes_csv(&mut buf, &out.placement)?;
    write_file(dir, "nodes.csv", &buf)?;

    let mut buf = Vec::new();
    let t_star = out.report.as_ref().map(|r| r.t_star).or(out.plan.as_ref().map(|p| p.t_star));
    write_metrics_csv(&mut buf, out.scenario, &metrics, t_star, out.plan.as_ref().map(|p| p.cost))?;
    write_file(dir, "metrics.csv", &buf)?;

    let mut buf = Vec::new();
    write_history_csv(&mut buf, &out.history)?;
    write_file(dir, "history.csv", &buf)?;

    if !out.candidates.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["m", "n", "cost", "t_star_w", "feasible", "error"]).map_err(io)?;
        for c in &out.candidates {
            w.write_record([
                c.m.to_string(),
                c.n.map(|n| n.to_string()).unwrap_or_default(),
                format!("{:e}", c.cost),
                c.t_star.map(|t| format!("{t:e}")).unwrap_or_default(),
                c.t_star.map(|t| (t >= out.scenario.gamma).to_string()).unwrap_or_default(),
                c.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        write_file(dir, "candidates.csv", &bytes)?;
    }

    let record = RunRecord {
        invocation: &cli.command,
        scenario_digest: scenario_digest(out.scenario),
        seed: cli.seed,
        placement: &out.placement,
        metrics: &metrics,
        plan: out.plan.as_ref(),
        report: out.report.as_ref(),
        candidates: &out.candidates,
    };
    let mut json = serde_json::to_string_pretty(&record).expect("run record serializes");
    json.push('\n');
    write_file(dir, "run.json", json.as_bytes())?;
    Ok(metrics)
}

fn steps_history(values: &[f64], phase: Phase) -> Vec<HistoryEntry> {
    values
        .iter()
        .enumerate()
        .map(|(i, &z)| HistoryEntry { iter: i + 1, phase, z })
        .collect()
}

fn print_summary(name: &str, placement: &Placement, metrics: &Metrics) {
    let nodes = if placement.colocated {
        format!("{} HAPs", placement.en_locations.len())
    } else {
        format!("{} ENs, {} APs", placement.en_locations.len(), placement.ap_locations.len())
    };
    println!("{name}: {nodes}, minimum net rate {:e} W", metrics.p_r);
}

fn execute(cli: &Cli) -> Result<i32> {
    let seed = cli.seed;
    let name = cli.command.name();
    let (outcome_code, outcome) = match &cli.command {
        Command::GenScenario { k, side, out } => {
            let s = generate_scenario(*k, *side, seed)?;
            let path = out.clone().unwrap_or_else(|| cli.out_dir.join("scenario.json"));
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
            }
            fs::write(&path, scenario_to_json(&s)).map_err(|e| io_err(&path, e))?;
            println!("{name}: {k} devices written to {}", path.display());
            return Ok(EXIT_OK);
        }
        Command::Validate {
            scenario,
            placement,
            blocks,
            fading,
            outage,
            gain_ul_db,
            freq_ul_hz,
        } => {
            let s = load_scenario(scenario)?;
            let p = load_placement(placement, &s)?;
            return validate(cli, &s, &p, *blocks, *fading, *outage, *gain_ul_db, *freq_ul_hz);
        }
        Command::PlaceEn { scenario, m, n, aps } => {
            let s = load_scenario(scenario)?;
            let ap_sites = match (n, aps) {
                (_, Some(path)) => load_placement(path, &s)?.ap_locations,
                (Some(n), None) => kmeans(&s.device_points(), *n, seed)?.centers,
                (None, None) => return Err(Error::invalid("place-en needs --n or --aps")),
            };
            let (ens, report) = greedy_en_placement(&s, &ap_sites, *m, seed)?;
            let history = steps_history(&report.round_values, Phase::En);
            (EXIT_OK, (Placement::separated(ens, ap_sites, &s.devices)?, Some(report), None, vec![], history, s))
        }
        Command::PlaceAp { scenario, n, m, ens } => {
            let s = load_scenario(scenario)?;
            let (en_sites, result) = match (m, ens) {
                (_, Some(path)) => {
                    let en_sites = load_placement(path, &s)?.en_locations;
                    let r = trial_and_error_ap(&s, &en_sites, *n, seed)?;
                    (en_sites, r)
                }
                (Some(m), None) => {
                    let en_sites = kmeans(&s.device_points(), *m, seed)?.centers;
                    let initial = kmeans(&s.device_points(), *n, seed)?.centers;
                    let r = trial_and_error_from(&s, &en_sites, &initial)?;
                    (en_sites, r)
                }
                (None, None) => return Err(Error::invalid("place-ap needs --m or --ens")),
            };
            let (aps, report) = result;
            let history = steps_history(&report.round_values, Phase::Ap);
            (EXIT_OK, (Placement::separated(en_sites, aps, &s.devices)?, Some(report), None, vec![], history, s))
        }
        Command::PlaceJoint { scenario, m, n, l, first_phase } => {
            let s = load_scenario(scenario)?;
            let opts = AlternatingOptions {
                iterations: *l,
                seed,
                first_phase: match first_phase {
                    PhaseArg::En => Phase::En,
                    PhaseArg::Ap => Phase::Ap,
                },
            };
            let (p, report) = alternating_joint_with(&s, *m, *n, &opts)?;
            let history = report.history.clone();
            (EXIT_OK, (p, Some(report), None, vec![], history, s))
        }
        Command::PlaceHap { scenario, m } => {
            let s = load_scenario(scenario)?;
            let (haps, report) = greedy_hap_placement(&s, *m, seed)?;
            let history = steps_history(&report.round_values, Phase::Hap);
            (EXIT_OK, (Placement::hap(haps, &s.devices)?, Some(report), None, vec![], history, s))
        }
        Command::BaselineCc { scenario, m, n, hap } => {
            let s = load_scenario(scenario)?;
            let p = cluster_center_placement(&s, layout(*m, *n, *hap)?, seed)?;
            (EXIT_OK, (p, None, None, vec![], vec![], s))
        }
        Command::BaselineLs {
            scenario,
            m,
            n,
            hap,
            steps,
            sigma3,
            temp,
            cooling,
        } => {
            let s = load_scenario(scenario)?;
            let layout = layout(*m, *n, *hap)?;
            let init = cluster_center_placement(&s, layout, seed)?;
            let mut cfg = SaConfig::for_scenario(&s, layout, seed);
            cfg.steps = steps.unwrap_or(cfg.steps);
            cfg.sigma3 = sigma3.unwrap_or(cfg.sigma3);
            cfg.initial_temp = temp.unwrap_or(cfg.initial_temp);
            cfg.cooling = cooling.unwrap_or(cfg.cooling);
            let (p, _) = simulated_annealing(&s, &init, &cfg)?;
            (EXIT_OK, (p, None, None, vec![], vec![], s))
        }
        Command::MinCost {
            scenario,
            mode,
            gamma,
            max_m,
            max_n,
            l,
            workers,
        } => {
            let mut s = load_scenario(scenario)?;
            if let Some(g) = gamma {
                if !g.is_finite() {
                    return Err(Error::invalid(format!("target rate must be finite, got {g}")));
                }
                s.gamma = *g;
            }
            let search: SearchOutcome = match mode {
                ModeArg::Separated => min_cost_separated(
                    &s,
                    &SearchOptions {
                        max_m: *max_m,
                        max_n: *max_n,
                        iterations: *l,
                        seed,
                        workers: *workers,
                    },
                )?,
                ModeArg::Hap => min_cost_hap(&s, *max_m, seed)?,
            };
            let (code, plan) = match (search.plan.clone(), search.best_infeasible.clone()) {
                (Some(p), _) => (EXIT_OK, p),
                (None, Some(p)) => {
                    eprintln!("no feasible deployment within the caps; reporting the best infeasible plan");
                    (EXIT_INFEASIBLE, p)
                }
                (None, None) => {
                    if search.cycled() {
                        return Err(Error::AssociationCycling {
                            rounds: crate::separated::MAX_ASSOCIATION_ROUNDS,
                        });
                    }
                    return Err(Error::Domain("no candidate could be evaluated".into()));
                }
            };
            println!(
                "{name}: M = {}{}, cost {}, t* = {:e} W, feasible = {}",
                plan.m,
                plan.n.map(|n| format!(", N = {n}")).unwrap_or_default(),
                plan.cost,
                plan.t_star,
                plan.feasible
            );
            (code, (plan.placement.clone(), None, Some(plan), search.evaluated, vec![], s))
        }
    };
    let (placement, report, plan, candidates, history, scenario) = outcome;
    let out = Outcome {
        placement,
        report,
        plan,
        candidates,
        history,
        scenario: &scenario,
    };
    let metrics = emit(cli, &out)?;
    print_summary(name, &out.placement, &metrics);
    Ok(outcome_code)
}

fn layout(m: usize, n: Option<usize>, hap: bool) -> Result<Layout> {
    match (hap, n) {
        (true, _) => Ok(Layout::Hap { m }),
        (false, Some(n)) => Ok(Layout::Separated { m, n }),
        (false, None) => Err(Error::invalid("--n is required without --hap")),
    }
}

#[allow(clippy::too_many_arguments)]
fn validate(
    cli: &Cli,
    s: &Scenario,
    p: &Placement,
    blocks: usize,
    fading: FadingArg,
    outage: f64,
    gain_ul_db: f64,
    freq_ul_hz: f64,
) -> Result<i32> {
    let model = match fading {
        FadingArg::Rayleigh => FadingModel::Rayleigh,
        FadingArg::Deterministic => FadingModel::Deterministic,
    };
    let metrics = evaluate(p, s)?;
    let est = simulate_harvest(p, s, blocks, cli.seed, model)?;
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["device", "lambda_w", "lambda_hat_w", "std_err_w", "z", "within_3sigma"]).map_err(io)?;
    let mut harvest_ok = 0;
    for k in 0..s.num_devices() {
        let diff = est.mean[k] - metrics.lambda[k];
        let z = if est.std_err[k] > 0.0 { diff / est.std_err[k] } else { 0.0 };
        let ok = diff.abs() <= 3.0 * est.std_err[k] + 1e-12 * metrics.lambda[k];
        harvest_ok += ok as usize;
        w.write_record([
            k.to_string(),
            format!("{:e}", metrics.lambda[k]),
            format!("{:e}", est.mean[k]),
            format!("{:e}", est.std_err[k]),
            format!("{z:e}"),
            ok.to_string(),
        ])
        .map_err(io)?;
    }
    fs::create_dir_all(&cli.out_dir).map_err(|e| io_err(&cli.out_dir, e))?;
    write_file(&cli.out_dir, "validate.csv", &w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;

    // Uplink: choose the receive target that reproduces each device's a2.
    let du = s.channel.ul_exponent();
    let gain_ul = db_to_linear(gain_ul_db);
    let unit = UplinkPolicy {
        rx_power_target: 1.0,
        outage,
        antenna_gain_ul: gain_ul,
        carrier_freq_ul: freq_ul_hz,
    };
    let a2_per_watt = unit.tx_coeff(du)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "device",
        "distance_m",
        "rx_target_w",
        "expected_w",
        "mean_power_w",
        "rel_err",
        "outage_fraction",
        "within_2pct",
    ])
    .map_err(io)?;
    let mut uplink_ok = 0;
    for (k, dev) in s.devices.iter().enumerate() {
        let d = p.ap_locations[metrics.associations[k]].dist(&dev.location).max(1e-3);
        let policy = UplinkPolicy {
            rx_power_target: dev.tx_coeff / a2_per_watt,
            ..unit
        };
        let expected = dev.tx_coeff * d.powf(du);
        let u = simulate_uplink_power(d, &policy, du, blocks, cli.seed.wrapping_add(1 + k as u64))?;
        let rel = u.mean_power / expected - 1.0;
        let ok = rel.abs() <= 0.02;
        uplink_ok += ok as usize;
        w.write_record([
            k.to_string(),
            format!("{d:e}"),
            format!("{:e}", policy.rx_power_target),
            format!("{expected:e}"),
            format!("{:e}", u.mean_power),
            format!("{rel:e}"),
            format!("{:e}", u.outage_fraction),
            ok.to_string(),
        ])
        .map_err(io)?;
    }
    write_file(&cli.out_dir, "uplink.csv", &w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
    let k = s.num_devices();
    println!("validate: harvest within 3 sigma on {harvest_ok}/{k} devices, uplink within 2% on {uplink_ok}/{k}");
    Ok(EXIT_OK)
}
