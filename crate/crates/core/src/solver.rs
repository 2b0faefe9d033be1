//! Backtracking search with pluggable propagation.
//!
//! A [`Problem`] is a list of variables with domains plus `AllDifferent`,
//! `OverlappingAllDifferent` and strict-order constraints. Search is
//! depth-first with two-way branching (assign the smallest value of the
//! first undecided variable in a seeded static order, or exclude it),
//! propagation to a global fixpoint at every node, and snapshot-copy state
//! restoration. Solutions are always validated by direct constraint
//! evaluation, never by trusting propagators.

use crate::alldiff::{bc_alldiff_in_place, dc_alldiff_in_place, Inconsistent};
use crate::decomp::{build_network, propagate_base, propagate_full, NetworkMode};
use crate::domain::{Domain, IntervalDomain, SetDomain, Value, VarId};
use crate::instance::{InstanceError, OverlapInstance, PropStatus, PruneEntry};
use crate::oracle::{OracleError, SizeGuard};
use crate::prng;
use crate::rules::dc_by_rules;
use std::time::{Duration, Instant};
use thiserror::Error;

/// One constraint of a [`Problem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintSpec {
    AllDifferent(Vec<VarId>),
    Overlapping { s: Vec<VarId>, t: Vec<VarId> },
    LessThan(VarId, VarId),
}

/// A constraint satisfaction problem over values `1..=d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub d: Value,
    pub names: Vec<String>,
    pub domains: Vec<Domain>,
    pub constraints: Vec<ConstraintSpec>,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("constraint references unknown variable X{0}")]
    UnknownVar(usize),
    #[error("constraint scope repeats variable {0}")]
    DuplicateInScope(usize),
    #[error("problem domain error: {0}")]
    BadDomain(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("exponential propagator refused: {0}")]
    Oracle(#[from] OracleError),
}

impl Problem {
    pub fn n_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let n = self.n_vars();
        let check_scope = |scope: &[VarId]| -> Result<(), SolveError> {
            let mut seen = vec![false; n];
            for &VarId(v) in scope {
                if v >= n {
                    return Err(SolveError::UnknownVar(v));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(SolveError::DuplicateInScope(v));
                }
            }
            Ok(())
        };
        for c in &self.constraints {
            match c {
                ConstraintSpec::AllDifferent(scope) => check_scope(scope)?,
                ConstraintSpec::Overlapping { s, t } => {
                    check_scope(s)?;
                    check_scope(t)?;
                }
                ConstraintSpec::LessThan(x, y) => {
                    check_scope(&[*x])?;
                    check_scope(&[*y])?;
                }
            }
        }
        for (v, dom) in self.domains.iter().enumerate() {
            if dom.is_empty() {
                return Err(SolveError::BadDomain(format!("domain of X{v} is empty")));
            }
            if dom.min().unwrap() < 1 || dom.max().unwrap() > self.d {
                return Err(SolveError::BadDomain(format!(
                    "domain of X{v} leaves 1..={}",
                    self.d
                )));
            }
        }
        Ok(())
    }
}

/// Direct evaluation of every constraint against a full assignment.
pub fn check_solution(problem: &Problem, values: &[Value]) -> bool {
    if values.len() != problem.n_vars() {
        return false;
    }
    if values
        .iter()
        .enumerate()
        .any(|(v, &val)| !problem.domains[v].contains(val))
    {
        return false;
    }
    let distinct = |scope: &[VarId]| {
        let mut seen = std::collections::HashSet::new();
        scope.iter().all(|&v| seen.insert(values[v.0]))
    };
    problem.constraints.iter().all(|c| match c {
        ConstraintSpec::AllDifferent(scope) => distinct(scope),
        ConstraintSpec::Overlapping { s, t } => distinct(s) && distinct(t),
        ConstraintSpec::LessThan(x, y) => values[x.0] < values[y.0],
    })
}

/// Propagation mode for one root-propagation or search run.
///
/// `Obc` pairs up overlapping `AllDifferent` scopes into
/// `OverlappingAllDifferent` propagators; `ObcBase` does the same but stops
/// at the infeasibility-detection layer; `RulesDc` uses the exponential
/// reference propagator (size-guarded); the two `Decomp` modes propagate
/// every `AllDifferent` separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropMode {
    Obc,
    ObcBase,
    RulesDc,
    DecompBc,
    DecompDc,
}

impl PropMode {
    pub fn name(&self) -> &'static str {
        match self {
            PropMode::Obc => "obc",
            PropMode::ObcBase => "obc-base",
            PropMode::RulesDc => "rules-dc",
            PropMode::DecompBc => "decomp-bc",
            PropMode::DecompDc => "decomp-dc",
        }
    }

    pub fn parse(s: &str) -> Option<PropMode> {
        match s {
            "obc" => Some(PropMode::Obc),
            "obc-base" => Some(PropMode::ObcBase),
            "rules-dc" => Some(PropMode::RulesDc),
            "decomp-bc" => Some(PropMode::DecompBc),
            "decomp-dc" => Some(PropMode::DecompDc),
            _ => None,
        }
    }
}

enum Prop {
    BcAlldiff {
        scope: Vec<usize>,
    },
    DcAlldiff {
        scope: Vec<usize>,
        cache: Vec<Value>,
    },
    /// OverlappingAllDifferent through the counter network, on the interval
    /// hulls of the current domains.
    Obc {
        vars: Vec<usize>,
        s_local: Vec<usize>,
        t_local: Vec<usize>,
        base_only: bool,
    },
    RulesDc {
        vars: Vec<usize>,
        s_local: Vec<usize>,
        t_local: Vec<usize>,
        guard: SizeGuard,
    },
    Less {
        x: usize,
        y: usize,
    },
}

/// A compiled set of propagators for one problem and mode.
pub struct PropPlan {
    props: Vec<Prop>,
}

fn overlap_prop(s: &[VarId], t: &[VarId], mode: PropMode, guard: &SizeGuard) -> Prop {
    let mut vars: Vec<usize> = s.iter().chain(t.iter()).map(|v| v.0).collect();
    vars.sort_unstable();
    vars.dedup();
    let local = |scope: &[VarId]| {
        scope
            .iter()
            .map(|v| vars.binary_search(&v.0).unwrap())
            .collect::<Vec<_>>()
    };
    let (s_local, t_local) = (local(s), local(t));
    match mode {
        PropMode::Obc | PropMode::ObcBase => Prop::Obc {
            vars,
            s_local,
            t_local,
            base_only: mode == PropMode::ObcBase,
        },
        PropMode::RulesDc => Prop::RulesDc {
            vars,
            s_local,
            t_local,
            guard: *guard,
        },
        _ => unreachable!("overlap props exist only in obc/rules modes"),
    }
}

/// Compiles the propagation plan. In the paired modes, every two
/// `AllDifferent` constraints sharing a variable become one
/// `OverlappingAllDifferent` propagator; an `AllDifferent` that shares with
/// nobody keeps its single-constraint propagator.
pub fn build_plan(
    problem: &Problem,
    mode: PropMode,
    guard: &SizeGuard,
) -> Result<PropPlan, SolveError> {
    problem.validate()?;
    let mut props = Vec::new();
    let paired = matches!(mode, PropMode::Obc | PropMode::ObcBase | PropMode::RulesDc);

    let alldiffs: Vec<&Vec<VarId>> = problem
        .constraints
        .iter()
        .filter_map(|c| match c {
            ConstraintSpec::AllDifferent(scope) => Some(scope),
            _ => None,
        })
        .collect();

    if paired {
        let mut covered = vec![false; alldiffs.len()];
        for i in 0..alldiffs.len() {
            for j in (i + 1)..alldiffs.len() {
                let shares = alldiffs[i].iter().any(|v| alldiffs[j].contains(v));
                if shares {
                    props.push(overlap_prop(alldiffs[i], alldiffs[j], mode, guard));
                    covered[i] = true;
                    covered[j] = true;
                }
            }
        }
        for (i, scope) in alldiffs.iter().enumerate() {
            if !covered[i] {
                match mode {
                    PropMode::RulesDc => props.push(Prop::DcAlldiff {
                        scope: scope.iter().map(|v| v.0).collect(),
                        cache: vec![0; scope.len()],
                    }),
                    _ => props.push(Prop::BcAlldiff {
                        scope: scope.iter().map(|v| v.0).collect(),
                    }),
                }
            }
        }
    } else {
        for scope in &alldiffs {
            match mode {
                PropMode::DecompBc => props.push(Prop::BcAlldiff {
                    scope: scope.iter().map(|v| v.0).collect(),
                }),
                PropMode::DecompDc => props.push(Prop::DcAlldiff {
                    scope: scope.iter().map(|v| v.0).collect(),
                    cache: vec![0; scope.len()],
                }),
                _ => unreachable!(),
            }
        }
    }

    for c in &problem.constraints {
        match c {
            ConstraintSpec::Overlapping { s, t } => match mode {
                PropMode::Obc | PropMode::ObcBase | PropMode::RulesDc => {
                    props.push(overlap_prop(s, t, mode, guard));
                }
                PropMode::DecompBc => {
                    props.push(Prop::BcAlldiff {
                        scope: s.iter().map(|v| v.0).collect(),
                    });
                    props.push(Prop::BcAlldiff {
                        scope: t.iter().map(|v| v.0).collect(),
                    });
                }
                PropMode::DecompDc => {
                    props.push(Prop::DcAlldiff {
                        scope: s.iter().map(|v| v.0).collect(),
                        cache: vec![0; s.len()],
                    });
                    props.push(Prop::DcAlldiff {
                        scope: t.iter().map(|v| v.0).collect(),
                        cache: vec![0; t.len()],
                    });
                }
            },
            ConstraintSpec::LessThan(x, y) => props.push(Prop::Less { x: x.0, y: y.0 }),
            ConstraintSpec::AllDifferent(_) => {}
        }
    }

    Ok(PropPlan { props })
}

/// Removes set values outside `[lb, ub]`, logging bound moves.
fn apply_bounds(
    domains: &mut [SetDomain],
    log: &mut Vec<PruneEntry>,
    var: usize,
    lb: Value,
    ub: Value,
) -> Result<bool, Inconsistent> {
    let old_min = domains[var].min().ok_or(Inconsistent)?;
    let old_max = domains[var].max().ok_or(Inconsistent)?;
    if lb <= old_min && ub >= old_max {
        return Ok(false);
    }
    let kept: SetDomain = domains[var].iter().filter(|&v| v >= lb && v <= ub).collect();
    if kept.is_empty() {
        return Err(Inconsistent);
    }
    let mut changed = false;
    if let Some(m) = kept.min() {
        if m > old_min {
            log.push(PruneEntry::LbRaised {
                var: VarId(var),
                from: old_min,
                to: m,
            });
            changed = true;
        }
    }
    if let Some(m) = kept.max() {
        if m < old_max {
            log.push(PruneEntry::UbLowered {
                var: VarId(var),
                from: old_max,
                to: m,
            });
            changed = true;
        }
    }
    domains[var] = kept;
    Ok(changed)
}

impl PropPlan {
    /// Round-robin propagation to a global fixpoint. `Ok(None)` means some
    /// propagator proved failure; `Ok(Some(changed))` reports whether any
    /// domain shrank. `Err` surfaces size-guard refusals from exponential
    /// propagators.
    pub fn run_fixpoint(
        &mut self,
        d: Value,
        domains: &mut Vec<SetDomain>,
        log: &mut Vec<PruneEntry>,
    ) -> Result<Option<bool>, OracleError> {
        let mut changed_any = false;
        loop {
            let mut changed = false;
            for prop in &mut self.props {
                match propagate_one(prop, d, domains, log) {
                    Err(PropFail::Inconsistent) => return Ok(None),
                    Err(PropFail::Guard(e)) => return Err(e),
                    Ok(c) => changed |= c,
                }
            }
            if !changed {
                break;
            }
            changed_any = true;
        }
        Ok(Some(changed_any))
    }
}

enum PropFail {
    Inconsistent,
    Guard(OracleError),
}

impl From<Inconsistent> for PropFail {
    fn from(_: Inconsistent) -> Self {
        PropFail::Inconsistent
    }
}

fn propagate_one(
    prop: &mut Prop,
    d: Value,
    domains: &mut Vec<SetDomain>,
    log: &mut Vec<PruneEntry>,
) -> Result<bool, PropFail> {
    match prop {
        Prop::Less { x, y } => {
            let mut changed = false;
            let ymax = domains[*y].max().ok_or(PropFail::Inconsistent)?;
            let xmin = domains[*x].min().ok_or(PropFail::Inconsistent)?;
            changed |= apply_bounds(domains, log, *x, Value::MIN + 1, ymax - 1)?;
            changed |= apply_bounds(domains, log, *y, xmin + 1, Value::MAX)?;
            Ok(changed)
        }
        Prop::BcAlldiff { scope } => {
            let mut hulls: Vec<IntervalDomain> = vec![IntervalDomain::new(1, 0); domains.len()];
            for &v in scope.iter() {
                hulls[v] = domains[v].hull().ok_or(PropFail::Inconsistent)?;
            }
            let scope_ids: Vec<VarId> = scope.iter().map(|&v| VarId(v)).collect();
            let mut scratch = Vec::new();
            bc_alldiff_in_place(&scope_ids, &mut hulls, &mut scratch)?;
            let mut changed = false;
            for &v in scope.iter() {
                changed |= apply_bounds(domains, log, v, hulls[v].lb, hulls[v].ub)?;
            }
            Ok(changed)
        }
        Prop::DcAlldiff { scope, cache } => {
            let scope_ids: Vec<VarId> = scope.iter().map(|&v| VarId(v)).collect();
            Ok(dc_alldiff_in_place(&scope_ids, domains, log, cache)?)
        }
        Prop::Obc {
            vars,
            s_local,
            t_local,
            base_only,
        } => {
            let bounds: Vec<(Value, Value)> = vars
                .iter()
                .map(|&v| {
                    domains[v]
                        .hull()
                        .map(|h| (h.lb, h.ub))
                        .ok_or(PropFail::Inconsistent)
                })
                .collect::<Result<_, _>>()?;
            let inst = OverlapInstance::from_intervals(d, &bounds, s_local, t_local)
                .map_err(|_| PropFail::Inconsistent)?;
            let mode = if *base_only {
                NetworkMode::Base
            } else {
                NetworkMode::Full
            };
            let mut net = match build_network(&inst, mode) {
                Ok(net) => net,
                Err(_) => return Err(PropFail::Inconsistent),
            };
            let out = if *base_only {
                propagate_base(&mut net)
            } else {
                propagate_full(&mut net)
            };
            if out.status == PropStatus::Failure {
                return Err(PropFail::Inconsistent);
            }
            let mut changed = false;
            for (slot, &v) in vars.iter().enumerate() {
                let iv = net.var_bounds(VarId(slot));
                changed |= apply_bounds(domains, log, v, iv.lb, iv.ub)?;
            }
            Ok(changed)
        }
        Prop::RulesDc {
            vars,
            s_local,
            t_local,
            guard,
        } => {
            let doms: Vec<Domain> = vars
                .iter()
                .map(|&v| Domain::Set(domains[v].clone()))
                .collect();
            let inst = OverlapInstance::new(
                d,
                doms,
                s_local.iter().map(|&v| VarId(v)).collect(),
                t_local.iter().map(|&v| VarId(v)).collect(),
            )
            .map_err(|_| PropFail::Inconsistent)?;
            let out = dc_by_rules(&inst, guard).map_err(PropFail::Guard)?;
            if out.status == PropStatus::Failure {
                return Err(PropFail::Inconsistent);
            }
            let result = out.domains.unwrap();
            let mut changed = false;
            for (slot, &v) in vars.iter().enumerate() {
                let new = result[slot].to_set();
                if new != domains[v] {
                    for value in domains[v].iter() {
                        if !new.contains(value) {
                            log.push(PruneEntry::ValueRemoved {
                                var: VarId(v),
                                value,
                            });
                        }
                    }
                    domains[v] = new;
                    changed = true;
                }
            }
            Ok(changed)
        }
    }
}

/// Search status of one solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    Unsat,
    Timeout,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Solved => "solved",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Timeout => "timeout",
        }
    }
}

/// Node, backtrack and wall-time accounting for one run. A backtrack is a
/// failed node from which search moved on to another open branch; a failure
/// that exhausts the tree is not counted.
#[derive(Debug, Clone, Copy)]
pub struct SearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub wall_time: Duration,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub propagation: PropMode,
    pub var_order_seed: u64,
    pub value_order: ValueOrder,
    pub timeout: Option<Duration>,
    /// Optional hard cap on explored nodes (reported as `Timeout`).
    pub node_limit: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            propagation: PropMode::Obc,
            var_order_seed: 0,
            value_order: ValueOrder::Ascending,
            timeout: None,
            node_limit: None,
        }
    }
}

/// Depth-first search: propagate at every node, branch by assigning or
/// excluding the chosen value. Timeout is checked between nodes.
pub fn solve(
    problem: &Problem,
    config: &SolveConfig,
) -> Result<(Option<Vec<Value>>, SearchStats), SolveError> {
    let start = Instant::now();
    let mut plan = build_plan(problem, config.propagation, &SizeGuard::default())?;
    let n = problem.n_vars();

    // Static branching order, fixed before search: seeded shuffle, then a
    // stable sort by initial domain size. On uniform-domain instances this
    // is exactly the seeded random order; on mixed-width instances it fails
    // first on the tightest variables while keeping seeds meaningful as
    // tie-breaks.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = prng::rng_from_seed(config.var_order_seed);
    prng::shuffle(&mut rng, &mut order);
    order.sort_by_key(|&v| problem.domains[v].len());

    let root: Vec<SetDomain> = problem.domains.iter().map(|d| d.to_set()).collect();
    let mut stack: Vec<Vec<SetDomain>> = vec![root];
    let mut nodes = 0u64;
    let mut backtracks = 0u64;
    let mut log: Vec<PruneEntry> = Vec::new();
    let mut solution = None;
    let mut status = SolveStatus::Unsat;

    while let Some(mut domains) = stack.pop() {
        if let Some(limit) = config.timeout {
            if start.elapsed() >= limit {
                status = SolveStatus::Timeout;
                break;
            }
        }
        if let Some(limit) = config.node_limit {
            if nodes >= limit {
                status = SolveStatus::Timeout;
                break;
            }
        }
        nodes += 1;
        log.clear();
        let failed = match plan.run_fixpoint(problem.d, &mut domains, &mut log)? {
            None => true,
            Some(_) => false,
        };
        if failed {
            if !stack.is_empty() {
                backtracks += 1;
            }
            continue;
        }
        let branch_var = order
            .iter()
            .copied()
            .find(|&v| domains[v].len() > 1);
        match branch_var {
            None => {
                let values: Vec<Value> = domains.iter().map(|s| s.min().unwrap()).collect();
                if check_solution(problem, &values) {
                    solution = Some(values);
                    status = SolveStatus::Solved;
                    break;
                }
                debug_assert!(false, "all-singleton fixpoint failed the checker");
                if !stack.is_empty() {
                    backtracks += 1;
                }
            }
            Some(v) => {
                let value = match config.value_order {
                    ValueOrder::Ascending => domains[v].min().unwrap(),
                    ValueOrder::Descending => domains[v].max().unwrap(),
                };
                let mut excluded = domains.clone();
                excluded[v].remove(value);
                stack.push(excluded);
                let mut assigned = domains;
                assigned[v] = SetDomain::from_values([value]);
                stack.push(assigned);
            }
        }
    }

    let stats = SearchStats {
        nodes,
        backtracks,
        wall_time: start.elapsed(),
        status,
    };
    Ok((solution, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{exam_problem, gen_pathological};

    #[test]
    fn exam_problem_solves_without_backtracking_under_obc() {
        let problem = exam_problem();
        let config = SolveConfig::default();
        let (sol, stats) = solve(&problem, &config).unwrap();
        assert_eq!(stats.status, SolveStatus::Solved);
        assert_eq!(stats.backtracks, 0);
        assert!(check_solution(&problem, &sol.unwrap()));
    }

    #[test]
    fn pathological_unsat_at_root_under_obc() {
        let problem = gen_pathological(4);
        let (sol, stats) = solve(&problem, &SolveConfig::default()).unwrap();
        assert!(sol.is_none());
        assert_eq!(stats.status, SolveStatus::Unsat);
        assert_eq!(stats.nodes, 1);
        assert_eq!(stats.backtracks, 0);
    }

    #[test]
    fn pathological_needs_search_under_decomposed_dc() {
        let problem = gen_pathological(4);
        let config = SolveConfig {
            propagation: PropMode::DecompDc,
            ..SolveConfig::default()
        };
        let (sol, stats) = solve(&problem, &config).unwrap();
        assert!(sol.is_none());
        assert_eq!(stats.status, SolveStatus::Unsat);
        assert!(stats.backtracks > 0);
    }

    #[test]
    fn same_seed_same_stats() {
        let problem = gen_pathological(3);
        let config = SolveConfig {
            propagation: PropMode::DecompDc,
            var_order_seed: 11,
            ..SolveConfig::default()
        };
        let (_, a) = solve(&problem, &config).unwrap();
        let (_, b) = solve(&problem, &config).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.backtracks, b.backtracks);
    }

    #[test]
    fn backtracks_never_exceed_nodes() {
        for seed in 0..4 {
            let problem = gen_pathological(3);
            let config = SolveConfig {
                propagation: PropMode::DecompBc,
                var_order_seed: seed,
                ..SolveConfig::default()
            };
            let (_, stats) = solve(&problem, &config).unwrap();
            assert!(stats.backtracks <= stats.nodes);
        }
    }
}
