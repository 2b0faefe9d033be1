//! Benchmark harness: runs (instance, seed, mode) grids, collects rows, and
//! aggregates summaries. Rows are produced in a deterministic order no matter
//! how many workers execute them.

use crate::decomp::{build_network, propagate_full, NetworkMode};
use crate::domain::Value;
use crate::gen::{gen_pathological, gen_random, pathological_overlap_instance, RandomSpec};
use crate::solver::{solve, Problem, PropMode, SolveConfig};
use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// One benchmark result row. CSV columns are fixed:
/// `family,params,seed,mode,status,nodes,backtracks,time_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub family: String,
    pub params: String,
    pub seed: u64,
    pub mode: String,
    pub status: String,
    pub nodes: u64,
    pub backtracks: u64,
    pub time_s: f64,
}

pub const CSV_HEADER: &str = "family,params,seed,mode,status,nodes,backtracks,time_s";

impl BenchRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6}",
            self.family,
            self.params,
            self.seed,
            self.mode,
            self.status,
            self.nodes,
            self.backtracks,
            self.time_s
        )
    }
}

/// Per-mode aggregates in the style of a solved/backtracks/time table:
/// solved counts per mode, and mean backtracks/time over the instances every
/// mode solved.
#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub total_per_mode: usize,
    /// mode → (solved, mean backtracks over commonly solved, mean time).
    pub per_mode: BTreeMap<String, ModeSummary>,
    pub commonly_solved: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ModeSummary {
    pub solved: usize,
    pub mean_backtracks: f64,
    pub mean_time_s: f64,
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let mut modes: Vec<String> = rows.iter().map(|r| r.mode.clone()).collect();
    modes.sort();
    modes.dedup();
    let solved_key = |r: &BenchRow| (r.family.clone(), r.params.clone(), r.seed);
    // Instances solved by every mode.
    let mut solved_by: BTreeMap<(String, String, u64), usize> = BTreeMap::new();
    for r in rows {
        if r.status == "solved" || r.status == "unsat" {
            *solved_by.entry(solved_key(r)).or_insert(0) += 1;
        }
    }
    let common: Vec<(String, String, u64)> = solved_by
        .iter()
        .filter(|&(_, &c)| c == modes.len())
        .map(|(k, _)| k.clone())
        .collect();
    let mut per_mode = BTreeMap::new();
    for mode in &modes {
        let mode_rows: Vec<&BenchRow> = rows.iter().filter(|r| &r.mode == mode).collect();
        let solved = mode_rows
            .iter()
            .filter(|r| r.status == "solved" || r.status == "unsat")
            .count();
        let common_rows: Vec<&&BenchRow> = mode_rows
            .iter()
            .filter(|r| common.contains(&solved_key(r)))
            .collect();
        let k = common_rows.len().max(1) as f64;
        per_mode.insert(
            mode.clone(),
            ModeSummary {
                solved,
                mean_backtracks: common_rows.iter().map(|r| r.backtracks as f64).sum::<f64>() / k,
                mean_time_s: common_rows.iter().map(|r| r.time_s).sum::<f64>() / k,
            },
        );
    }
    BenchSummary {
        total_per_mode: rows.len() / modes.len().max(1),
        per_mode,
        commonly_solved: common.len(),
    }
}

impl std::fmt::Display for BenchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "summary: {} commonly solved (means below are over those)",
            self.commonly_solved
        )?;
        for (mode, s) in &self.per_mode {
            writeln!(
                f,
                "  {mode}: solved {}/{}  mean_backtracks {:.1}  mean_time_s {:.3}",
                s.solved, self.total_per_mode, s.mean_backtracks, s.mean_time_s
            )?;
        }
        Ok(())
    }
}

/// A benchmark task grid. Every `(instance, seed, mode)` triple becomes one
/// row; `seed` feeds both instance generation (random family) and the
/// variable ordering.
#[derive(Debug, Clone)]
pub enum BenchFamily {
    Random { n: usize, d: Value, o: usize },
    Pathological { n_list: Vec<usize> },
}

pub struct BenchConfig {
    pub family: BenchFamily,
    pub seeds: Vec<u64>,
    pub modes: Vec<PropMode>,
    pub timeout: Duration,
    pub workers: usize,
}

fn run_one(problem: &Problem, family: &str, params: &str, seed: u64, mode: PropMode, timeout: Duration) -> BenchRow {
    let config = SolveConfig {
        propagation: mode,
        var_order_seed: seed,
        timeout: Some(timeout),
        ..SolveConfig::default()
    };
    match solve(problem, &config) {
        Ok((_, stats)) => BenchRow {
            family: family.into(),
            params: params.into(),
            seed,
            mode: mode.name().into(),
            status: stats.status.name().into(),
            nodes: stats.nodes,
            backtracks: stats.backtracks,
            time_s: stats.wall_time.as_secs_f64(),
        },
        Err(e) => BenchRow {
            family: family.into(),
            params: params.into(),
            seed,
            mode: mode.name().into(),
            status: format!("error({e})"),
            nodes: 0,
            backtracks: 0,
            time_s: 0.0,
        },
    }
}

/// Runs the grid, parallelized over rows, and returns rows in deterministic
/// (instance-major, mode-minor) order regardless of completion order.
pub fn run_bench(config: &BenchConfig) -> Vec<BenchRow> {
    struct Task {
        problem: Problem,
        family: String,
        params: String,
        seed: u64,
        mode: PropMode,
    }
    let mut tasks: Vec<Task> = Vec::new();
    match &config.family {
        BenchFamily::Random { n, d, o } => {
            for &seed in &config.seeds {
                let problem = gen_random(&RandomSpec {
                    n: *n,
                    d: *d,
                    o: *o,
                    seed,
                });
                for &mode in &config.modes {
                    tasks.push(Task {
                        problem: problem.clone(),
                        family: "random".into(),
                        params: format!("n={n};d={d};o={o}"),
                        seed,
                        mode,
                    });
                }
            }
        }
        BenchFamily::Pathological { n_list } => {
            for &n in n_list {
                let problem = gen_pathological(n);
                for &seed in &config.seeds {
                    for &mode in &config.modes {
                        tasks.push(Task {
                            problem: problem.clone(),
                            family: "pathological".into(),
                            params: format!("n={n}"),
                            seed,
                            mode,
                        });
                    }
                }
            }
        }
    }

    let slots: Vec<Mutex<Option<BenchRow>>> = (0..tasks.len()).map(|_| Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = config.workers.max(1).min(tasks.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let t = &tasks[i];
                let row = run_one(&t.problem, &t.family, &t.params, t.seed, t.mode, config.timeout);
                *slots[i].lock().unwrap() = Some(row);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every task ran"))
        .collect()
}

/// Wall-time scaling report for root propagation: builds full-range
/// instances at fixed variable count and increasing `d`, times build plus
/// full propagation, and fits a log-log slope.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub n: usize,
    /// `(d, seconds)` per measured point.
    pub points: Vec<(Value, f64)>,
    /// Least-squares slope of `ln time` against `ln d`.
    pub slope: f64,
}

pub fn scaling_report(n: usize, d_list: &[Value], reps: usize) -> ScalingReport {
    assert!(n >= 3 && !d_list.is_empty() && reps >= 1);
    let mut points = Vec::new();
    for &d in d_list {
        let third = n / 3;
        let bounds = vec![(1, d); n];
        let s: Vec<usize> = (0..2 * third).collect();
        let t: Vec<usize> = (third..n).collect();
        let inst =
            crate::instance::OverlapInstance::from_intervals(d, &bounds, &s, &t).expect("valid");
        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let start = Instant::now();
            let mut net = build_network(&inst, NetworkMode::Full).expect("within limits");
            let out = propagate_full(&mut net);
            let dt = start.elapsed().as_secs_f64();
            assert!(!out.is_failure(), "full-range instances are loose");
            best = best.min(dt);
        }
        points.push((d, best));
    }
    let slope = fit_slope(&points);
    ScalingReport { n, points, slope }
}

fn fit_slope(points: &[(Value, f64)]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(d, t)| ((d as f64).ln(), t.max(1e-9).ln()))
        .collect();
    let k = xy.len() as f64;
    let sx: f64 = xy.iter().map(|p| p.0).sum();
    let sy: f64 = xy.iter().map(|p| p.1).sum();
    let sxx: f64 = xy.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = xy.iter().map(|p| p.0 * p.1).sum();
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}

/// Root-propagation check used by the pathological rows: the full propagator
/// must refute the instance without search.
pub fn pathological_refuted_at_root(n: usize) -> bool {
    let inst = pathological_overlap_instance(n);
    let mut net = match build_network(&inst, NetworkMode::Full) {
        Ok(net) => net,
        Err(_) => return false,
    };
    propagate_full(&mut net).is_failure()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_line_shape() {
        let row = BenchRow {
            family: "random".into(),
            params: "n=4;d=15;o=10".into(),
            seed: 3,
            mode: "obc".into(),
            status: "solved".into(),
            nodes: 10,
            backtracks: 2,
            time_s: 0.25,
        };
        assert_eq!(
            row.to_csv_line(),
            "random,n=4;d=15;o=10,3,obc,solved,10,2,0.250000"
        );
        assert_eq!(CSV_HEADER.split(',').count(), 8);
    }

    #[test]
    fn bench_rows_deterministic_and_ordered() {
        let config = BenchConfig {
            family: BenchFamily::Pathological { n_list: vec![2, 3] },
            seeds: vec![1, 2],
            modes: vec![PropMode::Obc, PropMode::DecompBc],
            timeout: Duration::from_secs(30),
            workers: 4,
        };
        let a = run_bench(&config);
        let b = run_bench(&config);
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.nodes, y.nodes);
            assert_eq!(x.backtracks, y.backtracks);
            assert_eq!((&x.family, &x.params, x.seed, &x.mode), (&y.family, &y.params, y.seed, &y.mode));
        }
        // obc refutes at the root: zero backtracks on every pathological row.
        for r in &a {
            if r.mode == "obc" {
                assert_eq!(r.status, "unsat");
                assert_eq!(r.backtracks, 0);
            }
        }
    }

    #[test]
    fn summary_counts_commonly_solved() {
        let rows = vec![
            BenchRow {
                family: "f".into(),
                params: "p".into(),
                seed: 1,
                mode: "a".into(),
                status: "solved".into(),
                nodes: 1,
                backtracks: 4,
                time_s: 1.0,
            },
            BenchRow {
                family: "f".into(),
                params: "p".into(),
                seed: 1,
                mode: "b".into(),
                status: "timeout".into(),
                nodes: 1,
                backtracks: 100,
                time_s: 9.0,
            },
            BenchRow {
                family: "f".into(),
                params: "p".into(),
                seed: 2,
                mode: "a".into(),
                status: "solved".into(),
                nodes: 1,
                backtracks: 2,
                time_s: 1.0,
            },
            BenchRow {
                family: "f".into(),
                params: "p".into(),
                seed: 2,
                mode: "b".into(),
                status: "unsat".into(),
                nodes: 1,
                backtracks: 10,
                time_s: 2.0,
            },
        ];
        let s = summarize(&rows);
        assert_eq!(s.commonly_solved, 1);
        assert_eq!(s.per_mode["a"].solved, 2);
        assert_eq!(s.per_mode["b"].solved, 1);
        assert!((s.per_mode["a"].mean_backtracks - 2.0).abs() < 1e-9);
        assert!((s.per_mode["b"].mean_backtracks - 10.0).abs() < 1e-9);
    }
}
