//! Batches of independent missions with deterministic per-run seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_mission, MissionParams, TerminalError};
use crate::error::{param, Result};
use crate::geometry::TunnelTopology;
use crate::planner::DropSchedule;
use crate::stats::Summary;

/// Seed of run `k` derived from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, k: u64) -> u64 {
    let mut z = master ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Worker count from `NAV_THREADS`, defaulting to the available cores.
pub fn worker_count() -> usize {
    std::env::var("NAV_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` inside a thread pool capped by [`worker_count`].
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub p_max: f64,
    pub terminal: TerminalError,
    pub min_visible: usize,
    pub ticks_below_two: usize,
    pub containment: [f64; 2],
    pub measurements: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalSummary {
    /// Absolute terminal x error.
    pub x: Summary,
    /// Absolute terminal y error.
    pub y: Summary,
    pub position: Summary,
    /// Absolute cross-track error on the final segment.
    pub lateral: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McAggregate {
    pub runs: usize,
    pub p_max: Summary,
    pub terminal_error: TerminalSummary,
    /// Per-run fraction of ticks with both axes inside 3 sigma.
    pub containment: Summary,
    pub per_run: Vec<RunSummary>,
}

impl McAggregate {
    pub fn from_runs(per_run: Vec<RunSummary>) -> Self {
        let col = |f: &dyn Fn(&RunSummary) -> f64| per_run.iter().map(f).collect::<Vec<_>>();
        McAggregate {
            runs: per_run.len(),
            p_max: Summary::of(&col(&|r| r.p_max)),
            terminal_error: TerminalSummary {
                x: Summary::of(&col(&|r| r.terminal.x.abs())),
                y: Summary::of(&col(&|r| r.terminal.y.abs())),
                position: Summary::of(&col(&|r| r.terminal.position)),
                lateral: Summary::of(&col(&|r| r.terminal.lateral.abs())),
            },
            containment: Summary::of(&col(&|r| r.containment[0].min(r.containment[1]))),
            per_run,
        }
    }
}

/// Runs `runs` missions with seeds derived from `params.seed` and aggregates
/// them. Runs execute in parallel; the result does not depend on scheduling.
pub fn run_monte_carlo(
    topology: &TunnelTopology,
    schedule: &DropSchedule,
    params: &MissionParams,
    runs: usize,
) -> Result<McAggregate> {
    if runs == 0 {
        return Err(param("runs", "must be at least 1"));
    }
    let per_run = with_workers(|| {
        (0..runs)
            .into_par_iter()
            .map(|k| {
                let seed = derive_seed(params.seed, k as u64);
                let p = MissionParams {
                    seed,
                    record_ticks: false,
                    ..params.clone()
                };
                run_mission(topology, schedule, &p).map(|tr| RunSummary {
                    seed,
                    p_max: tr.p_max(),
                    terminal: tr.terminal,
                    min_visible: tr.min_visible,
                    ticks_below_two: tr.ticks_below_two,
                    containment: tr.containment,
                    measurements: tr.measurements,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(McAggregate::from_runs(per_run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::plan_straight;
    use crate::sim::run_mission;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let s: Vec<u64> = (0..100).map(|k| derive_seed(42, k)).collect();
        let mut u = s.clone();
        u.sort_unstable();
        u.dedup();
        assert_eq!(u.len(), 100);
        assert_eq!(derive_seed(42, 3), s[3]);
        assert_ne!(derive_seed(43, 3), s[3]);
    }

    #[test]
    fn single_run_matches_mission() {
        let topo = TunnelTopology::straight(120.0, 24.0).unwrap();
        let (sched, _) = plan_straight(120.0, 50.0, 10.0).unwrap();
        let params = MissionParams::default();
        let agg = run_monte_carlo(&topo, &sched, &params, 1).unwrap();
        let single = run_mission(
            &topo,
            &sched,
            &MissionParams {
                seed: derive_seed(params.seed, 0),
                ..params.clone()
            },
        )
        .unwrap();
        assert_eq!(agg.runs, 1);
        assert_eq!(agg.p_max.median, single.p_max());
        assert_eq!(agg.terminal_error.position.mean, single.terminal.position);
        assert!(run_monte_carlo(&topo, &sched, &params, 0).is_err());
    }

    #[test]
    fn identical_seeds_identical_aggregates() {
        let topo = TunnelTopology::straight(120.0, 24.0).unwrap();
        let (sched, _) = plan_straight(120.0, 50.0, 10.0).unwrap();
        let params = MissionParams {
            seed: 5,
            ..MissionParams::default()
        };
        let a = run_monte_carlo(&topo, &sched, &params, 4).unwrap();
        let b = run_monte_carlo(&topo, &sched, &params, 4).unwrap();
        assert_eq!(a, b);
    }
}
