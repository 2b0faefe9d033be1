//! Baseline propagators for a single `AllDifferent` constraint.
//!
//! `bc_alldiff` is textbook Hall-interval filtering over interval domains.
//! `dc_alldiff` is matching-based domain consistency in the style of Régin's
//! filtering: compute one maximum matching, then keep exactly the edges that
//! lie in the matching or on an alternating cycle/path, found as strongly
//! connected components after the usual sink augmentation. Both are
//! deliberately simple; the benchmark story is about propagation strength,
//! not propagator speed.

use crate::domain::{Domain, IntervalDomain, SetDomain, Value, VarId};
use crate::instance::{PropagationOutcome, PruneEntry};

/// Marker for a wiped-out domain / pigeonhole failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inconsistent;

/// Bound consistency on one `AllDifferent` over interval domains. `domains`
/// is indexed by variable id; only `scope` entries are read or written.
pub fn bc_alldiff(scope: &[VarId], domains: &[IntervalDomain]) -> PropagationOutcome {
    let mut work = domains.to_vec();
    let mut log = Vec::new();
    match bc_alldiff_in_place(scope, &mut work, &mut log) {
        Err(Inconsistent) => PropagationOutcome::failure(log),
        Ok(_) => PropagationOutcome::fixpoint(
            work.into_iter().map(Domain::Interval).collect(),
            log,
        ),
    }
}

/// In-place Hall-interval filtering; returns whether anything changed.
pub fn bc_alldiff_in_place(
    scope: &[VarId],
    domains: &mut [IntervalDomain],
    log: &mut Vec<PruneEntry>,
) -> Result<bool, Inconsistent> {
    let mut changed_any = false;
    loop {
        let mut changed = false;
        // Candidate Hall intervals have endpoints at current domain bounds.
        let mut lbs: Vec<Value> = scope.iter().map(|&v| domains[v.0].lb).collect();
        let mut ubs: Vec<Value> = scope.iter().map(|&v| domains[v.0].ub).collect();
        lbs.sort_unstable();
        lbs.dedup();
        ubs.sort_unstable();
        ubs.dedup();
        for &l in &lbs {
            for &u in &ubs {
                if u < l {
                    continue;
                }
                let width = u - l + 1;
                let inside = scope
                    .iter()
                    .filter(|&&v| domains[v.0].lb >= l && domains[v.0].ub <= u)
                    .count() as Value;
                if inside > width {
                    return Err(Inconsistent);
                }
                if inside < width {
                    continue;
                }
                for &v in scope {
                    let iv = domains[v.0];
                    if iv.lb >= l && iv.ub <= u {
                        continue;
                    }
                    if iv.lb >= l && iv.lb <= u {
                        domains[v.0].lb = u + 1;
                        log.push(PruneEntry::LbRaised {
                            var: v,
                            from: iv.lb,
                            to: u + 1,
                        });
                        changed = true;
                    } else if iv.ub >= l && iv.ub <= u {
                        domains[v.0].ub = l - 1;
                        log.push(PruneEntry::UbLowered {
                            var: v,
                            from: iv.ub,
                            to: l - 1,
                        });
                        changed = true;
                    }
                    if domains[v.0].is_empty() {
                        return Err(Inconsistent);
                    }
                }
            }
        }
        if !changed {
            break;
        }
        changed_any = true;
    }
    Ok(changed_any)
}

/// Domain consistency on one `AllDifferent` over set domains.
pub fn dc_alldiff(scope: &[VarId], domains: &[SetDomain]) -> PropagationOutcome {
    let mut work = domains.to_vec();
    let mut log = Vec::new();
    let mut cache = vec![0; scope.len()];
    match dc_alldiff_in_place(scope, &mut work, &mut log, &mut cache) {
        Err(Inconsistent) => PropagationOutcome::failure(log),
        Ok(_) => {
            PropagationOutcome::fixpoint(work.into_iter().map(Domain::Set).collect(), log)
        }
    }
}

/// In-place matching + SCC filtering. `cache` holds a previous matching
/// (value per scope position, 0 for none) and is repaired rather than
/// rebuilt; pass zeros when there is none. The filtered result does not
/// depend on which maximum matching the repair lands on.
pub fn dc_alldiff_in_place(
    scope: &[VarId],
    domains: &mut [SetDomain],
    log: &mut Vec<PruneEntry>,
    cache: &mut [Value],
) -> Result<bool, Inconsistent> {
    let k = scope.len();
    debug_assert_eq!(cache.len(), k);
    if k == 0 {
        return Ok(false);
    }
    let dmax = scope
        .iter()
        .filter_map(|&v| domains[v.0].max())
        .max()
        .ok_or(Inconsistent)?;
    let nv = dmax as usize;

    // Repair the cached matching: drop edges no longer in the domain.
    let mut value_owner: Vec<Option<usize>> = vec![None; nv + 1];
    for (pos, m) in cache.iter_mut().enumerate() {
        if *m != 0 && domains[scope[pos].0].contains(*m) && value_owner[*m as usize].is_none() {
            value_owner[*m as usize] = Some(pos);
        } else {
            *m = 0;
        }
    }
    // Augment every uncovered variable.
    for pos in 0..k {
        if cache[pos] != 0 {
            continue;
        }
        let mut visited = vec![false; nv + 1];
        if !augment(pos, scope, domains, cache, &mut value_owner, &mut visited) {
            return Err(Inconsistent);
        }
    }

    // Régin's orientation with a sink: matched edges value→var, free edges
    // var→value, plus sink→matched-value and free-value→sink. An edge is
    // usable iff it is matched or both ends share an SCC.
    let sink = k + nv;
    let n_nodes = k + nv + 1;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for pos in 0..k {
        for value in domains[scope[pos].0].iter() {
            let vn = k + value as usize - 1;
            if cache[pos] == value {
                adj[vn].push(pos);
            } else {
                adj[pos].push(vn);
            }
        }
    }
    for value in 1..=nv {
        let vn = k + value - 1;
        if value_owner[value].is_some() {
            adj[sink].push(vn);
        } else {
            adj[vn].push(sink);
        }
    }
    let scc = tarjan_scc(&adj);

    let mut changed = false;
    for pos in 0..k {
        let var = scope[pos];
        let removals: Vec<Value> = domains[var.0]
            .iter()
            .filter(|&value| {
                cache[pos] != value && scc[pos] != scc[k + value as usize - 1]
            })
            .collect();
        for value in removals {
            domains[var.0].remove(value);
            log.push(PruneEntry::ValueRemoved { var, value });
            changed = true;
        }
        debug_assert!(!domains[var.0].is_empty());
    }
    Ok(changed)
}

fn augment(
    pos: usize,
    scope: &[VarId],
    domains: &[SetDomain],
    cache: &mut [Value],
    value_owner: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for value in domains[scope[pos].0].iter() {
        let vi = value as usize;
        if visited[vi] {
            continue;
        }
        visited[vi] = true;
        let free = match value_owner[vi] {
            None => true,
            Some(owner) => augment(owner, scope, domains, cache, value_owner, visited),
        };
        if free {
            value_owner[vi] = Some(pos);
            cache[pos] = value;
            return true;
        }
    }
    false
}

/// Iterative Tarjan SCC; returns a component id per node.
fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut next_comp = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, ei)) = call.last() {
            if ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if ei < adj[v].len() {
                call.last_mut().unwrap().1 += 1;
                let w = adj[v][ei];
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::PropStatus;

    fn ivs(bounds: &[(Value, Value)]) -> Vec<IntervalDomain> {
        bounds.iter().map(|&(l, u)| IntervalDomain::new(l, u)).collect()
    }

    fn sets(rows: &[&[Value]]) -> Vec<SetDomain> {
        rows.iter()
            .map(|r| SetDomain::from_values(r.iter().copied()))
            .collect()
    }

    fn scope(n: usize) -> Vec<VarId> {
        (0..n).map(VarId).collect()
    }

    #[test]
    fn bc_forced_chain() {
        let out = bc_alldiff(&scope(2), &ivs(&[(1, 1), (1, 2)]));
        assert_eq!(out.status, PropStatus::Fixpoint);
        let doms = out.domains.unwrap();
        assert_eq!(doms[1], Domain::Interval(IntervalDomain::new(2, 2)));
    }

    #[test]
    fn bc_pigeonhole_failure() {
        let out = bc_alldiff(&scope(3), &ivs(&[(1, 2), (1, 2), (1, 2)]));
        assert!(out.is_failure());
    }

    #[test]
    fn bc_pathological_side_is_loose() {
        // One side of the hard family: 4 variables in [1,7], 8 in [1,15].
        let mut bounds = vec![(1, 7); 4];
        bounds.extend(vec![(1, 15); 8]);
        let out = bc_alldiff(&scope(12), &ivs(&bounds));
        assert_eq!(out.status, PropStatus::Fixpoint);
        assert!(out.prune_log.is_empty());
    }

    #[test]
    fn dc_hall_set_prunes_third_var() {
        let out = dc_alldiff(&scope(3), &sets(&[&[1, 2], &[1, 2], &[1, 2, 3]]));
        assert_eq!(out.status, PropStatus::Fixpoint);
        let doms = out.domains.unwrap();
        assert_eq!(doms[2].to_set().iter().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn dc_duplicate_singletons_fail() {
        let out = dc_alldiff(&scope(2), &sets(&[&[1], &[1]]));
        assert!(out.is_failure());
    }

    #[test]
    fn dc_idempotent() {
        let doms = sets(&[&[1, 2], &[1, 2], &[1, 2, 3], &[2, 3, 4]]);
        let once = dc_alldiff(&scope(4), &doms);
        let once_doms: Vec<SetDomain> = once
            .domains
            .unwrap()
            .iter()
            .map(|d| d.to_set())
            .collect();
        let twice = dc_alldiff(&scope(4), &once_doms);
        assert!(twice.prune_log.is_empty());
    }

    #[test]
    fn bc_idempotent() {
        let doms = ivs(&[(1, 1), (1, 2), (1, 5)]);
        let once = bc_alldiff(&scope(3), &doms);
        let once_doms: Vec<IntervalDomain> = once
            .domains
            .unwrap()
            .iter()
            .map(|d| d.as_exact_interval().unwrap())
            .collect();
        let twice = bc_alldiff(&scope(3), &once_doms);
        assert!(twice.prune_log.is_empty());
    }
}
