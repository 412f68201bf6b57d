//! One function per subcommand. Each reads its upstream artifacts from the
//! output directory and writes exactly its own artifact there.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tunnelnav::geometry::TunnelTopology;
use tunnelnav::inverse::{grid_search, pwl_propagate, solve_inverse_exact, solve_milp, BnbOptions, InverseSolution};
use tunnelnav::planner::{
    adjust_full_topology_with_margin, default_angled_window, plan_straight, plan_with_turn_count, stagger_angled,
    stagger_half_distance, DropEvent, DropSchedule, PullRecord, DEFAULT_ANGLED_DS, DEFAULT_PULL_MARGIN,
};
use tunnelnav::sim::{run_mission, run_monte_carlo, write_trace_csv, MissionParams};
use tunnelnav::surrogate::{generate_dataset, normalized_rmse, train, MlpNetwork, SampleSet, Split, Table};

use crate::config::{InformationLevel, ScenarioConfig};
use crate::error::CliError;

pub const DATASET: &str = "dataset.csv";
pub const WEIGHTS: &str = "weights.json";
pub const SOLVE: &str = "solve.json";
pub const SCHEDULE: &str = "schedule.json";
pub const TRACE: &str = "trace.csv";
pub const MC: &str = "mc.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Milp,
    Exact,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stagger {
    None,
    Half,
    Angled,
}

/// Landmark counts of the three planning levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub straight: usize,
    pub turns: usize,
    pub full: usize,
    pub additional: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub information: InformationLevel,
    pub d_star: f64,
    pub events: Vec<DropEvent>,
    pub offset: f64,
    /// Landmarks held back for reactive drops at turns.
    pub turn_reserve: usize,
    pub counts: Counts,
    pub pulls: Vec<PullRecord>,
    #[serde(default)]
    pub exceptions: Vec<String>,
}

impl ScheduleFile {
    pub fn schedule(&self) -> DropSchedule {
        DropSchedule {
            events: self.events.clone(),
            offset: self.offset,
            turn_reserve: self.turn_reserve,
        }
    }
}

/// Options shared by `simulate` and `montecarlo`.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub stagger: Stagger,
    /// `Some(None)` forces the wall sensors off, `Some(Some(hz))` sets the rate.
    pub wall_updates: Option<Option<f64>>,
    pub seed: Option<u64>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(tunnelnav::NavError::from)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::missing(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::missing(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(path.display().to_string(), e))
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::missing(path, "upstream artifact not found"))
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::missing(dir, e))
}

pub fn gen_data(cfg: &ScenarioConfig, n: usize, seed: Option<u64>, out: &Path) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    if n == 0 {
        return Err(CliError::config("n", "must be at least 1"));
    }
    ensure_dir(out)?;
    let set = generate_dataset(&cfg.domains(), n, &cfg.sim_config(), seed.unwrap_or(cfg.seed))?;
    let path = cfg.resolve(out, &cfg.files.dataset, DATASET);
    set.save(&path)?;
    Ok(path)
}

pub fn cmd_train(cfg: &ScenarioConfig, out: &Path) -> Result<(PathBuf, f64), CliError> {
    cfg.validate()?;
    let data = cfg.resolve(out, &cfg.files.dataset, DATASET);
    require(&data)?;
    let set = SampleSet::load(&data)?;
    let (net, report) = train(&set, &cfg.training())?;
    let test = Table::from_split(&set, Split::Test);
    let nrmse = if test.is_empty() {
        f64::NAN
    } else {
        normalized_rmse(&net, &test)?
    };
    eprintln!(
        "best epoch {} validation mse {:.3e}",
        report.best_epoch, report.best_val_mse
    );
    ensure_dir(out)?;
    let path = cfg.resolve(out, &cfg.files.weights, WEIGHTS);
    net.save(&path)?;
    Ok((path, nrmse))
}

pub fn cmd_solve(cfg: &ScenarioConfig, method: SolveMethod, out: &Path) -> Result<InverseSolution, CliError> {
    let topology = cfg.validate()?;
    let weights = cfg.resolve(out, &cfg.files.weights, WEIGHTS);
    require(&weights)?;
    let net = MlpNetwork::load(&weights)?;
    let fixed = cfg.fixed_inputs(topology.length());
    let p_e = cfg.mission.p_e;
    let sol = match method {
        SolveMethod::Milp => solve_milp(&net, &fixed, p_e, cfg.epsilon, &BnbOptions::default())?.0,
        SolveMethod::Exact => {
            let f = pwl_propagate(&net, &fixed, cfg.epsilon)?;
            solve_inverse_exact(&f, p_e, cfg.mission.rho_max)
        }
        SolveMethod::Grid => grid_search(&net, &fixed, p_e, cfg.epsilon, 10_001)?,
    };
    if let Some(w) = &sol.warning {
        eprintln!("warning: {w}");
    }
    ensure_dir(out)?;
    write_json(&out.join(SOLVE), &sol)?;
    Ok(sol)
}

/// All three counts and the schedule of the configured level.
pub fn plan_for(cfg: &ScenarioConfig, topology: &TunnelTopology, d_star: f64) -> Result<ScheduleFile, CliError> {
    let length = topology.length();
    let offset = cfg.mission.offset;
    let turns = cfg.turns.unwrap_or(topology.turns().len());
    let (straight, n_straight) = plan_straight(length, d_star, offset)?;
    let (with_turns, n_turns) = plan_with_turn_count(length, d_star, offset, turns)?;
    let (full, n_full, report) = adjust_full_topology_with_margin(topology, d_star, offset, DEFAULT_PULL_MARGIN)?;
    let counts = Counts {
        straight: n_straight,
        turns: n_turns,
        full: n_full,
        additional: report.n_additional,
    };
    let (schedule, pulls, exceptions) = match cfg.information {
        InformationLevel::Straight => (straight, Vec::new(), Vec::new()),
        InformationLevel::TurnCount => (with_turns, Vec::new(), Vec::new()),
        InformationLevel::FullTopology => (full, report.pulls, report.exceptions),
    };
    Ok(ScheduleFile {
        information: cfg.information,
        d_star,
        events: schedule.events,
        offset: schedule.offset,
        turn_reserve: schedule.turn_reserve,
        counts,
        pulls,
        exceptions,
    })
}

pub fn cmd_plan(cfg: &ScenarioConfig, d_star: Option<f64>, out: &Path) -> Result<ScheduleFile, CliError> {
    let topology = cfg.validate()?;
    let d_star = match d_star {
        Some(d) => d,
        None => {
            let path = out.join(SOLVE);
            require(&path)?;
            let sol: InverseSolution = read_json(&path)?;
            sol.d_star
        }
    };
    if !(d_star > 0.0 && d_star.is_finite()) {
        return Err(CliError::config("d_star", format!("must be positive, got {d_star}")));
    }
    let file = plan_for(cfg, &topology, d_star)?;
    ensure_dir(out)?;
    write_json(&out.join(SCHEDULE), &file)?;
    Ok(file)
}

fn load_schedule(topology: &TunnelTopology, opts: &SimOptions, out: &Path) -> Result<DropSchedule, CliError> {
    let path = out.join(SCHEDULE);
    require(&path)?;
    let file: ScheduleFile = read_json(&path)?;
    let schedule = file.schedule();
    schedule
        .validate(topology.length())
        .map_err(|e| CliError::config(SCHEDULE, e))?;
    Ok(match opts.stagger {
        Stagger::None => schedule,
        Stagger::Half => stagger_half_distance(&schedule),
        Stagger::Angled => {
            // Keep short spacings valid: ds must stay below d*/2.
            let ds = DEFAULT_ANGLED_DS.min(0.25 * file.d_star);
            stagger_angled(&schedule, topology, file.d_star, ds, default_angled_window(file.d_star))?
        }
    })
}

fn mission_params(cfg: &ScenarioConfig, opts: &SimOptions) -> MissionParams {
    let mut p = cfg.mission.params(opts.seed.unwrap_or(cfg.seed));
    if let Some(rate) = opts.wall_updates {
        p.wall.rate = rate;
    }
    p
}

pub fn cmd_simulate(
    cfg: &ScenarioConfig,
    opts: &SimOptions,
    out: &Path,
) -> Result<tunnelnav::sim::MissionTrace, CliError> {
    let topology = cfg.validate()?;
    let schedule = load_schedule(&topology, opts, out)?;
    let params = MissionParams {
        record_ticks: true,
        ..mission_params(cfg, opts)
    };
    let trace = run_mission(&topology, &schedule, &params)?;
    let path = out.join(TRACE);
    let file = File::create(&path).map_err(|e| CliError::missing(&path, e))?;
    write_trace_csv(&trace, BufWriter::new(file))?;
    Ok(trace)
}

pub fn cmd_montecarlo(
    cfg: &ScenarioConfig,
    opts: &SimOptions,
    runs: usize,
    out: &Path,
) -> Result<tunnelnav::sim::McAggregate, CliError> {
    let topology = cfg.validate()?;
    if runs == 0 {
        return Err(CliError::config("runs", "must be at least 1"));
    }
    let schedule = load_schedule(&topology, opts, out)?;
    let agg = run_monte_carlo(&topology, &schedule, &mission_params(cfg, opts), runs)?;
    write_json(&out.join(MC), &agg)?;
    Ok(agg)
}
