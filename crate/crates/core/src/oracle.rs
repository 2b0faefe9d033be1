//! Exponential-time ground truth: brute-force simultaneous-matching search,
//! exhaustive Hall-condition verification, per-edge support, and a
//! shave-to-fixpoint bound consistency oracle.
//!
//! Everything here is deliberately simple and exhaustive; the fast modules
//! are tested against this one. All searches are deterministic: variables are
//! chosen by fewest remaining values with ties broken by ascending id, values
//! ascending, so returned witnesses are reproducible.

use crate::domain::{Domain, IntervalDomain, Value, VarId};
use crate::instance::{
    Block, InstanceError, OverlapInstance, PropagationOutcome, PruneEntry,
};
use thiserror::Error;

/// Caps on brute-force input sizes. Exhaustive subset enumeration is capped
/// separately from matching search because it grows as `2^n`.
#[derive(Debug, Clone, Copy)]
pub struct SizeGuard {
    pub max_search_vars: usize,
    pub max_subset_vars: usize,
}

impl Default for SizeGuard {
    fn default() -> Self {
        SizeGuard {
            max_search_vars: 16,
            max_subset_vars: 12,
        }
    }
}

impl SizeGuard {
    pub fn unlimited() -> Self {
        SizeGuard {
            max_search_vars: usize::MAX,
            max_subset_vars: usize::MAX,
        }
    }
}

/// Widest value range the bitmask-based searches accept.
pub const MAX_ORACLE_VALUES: Value = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance with {n} variables exceeds the size guard ({limit})")]
    SizeGuardExceeded { n: usize, limit: usize },
    #[error("value range d={d} exceeds the brute-force limit ({limit})")]
    ValueRangeTooWide { d: Value, limit: Value },
    #[error("value {value} is not in the domain of {var}")]
    ValueNotInDomain { var: VarId, value: Value },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// An edge set whose restriction to `S` is a matching covering `S` and whose
/// restriction to `T` is a matching covering `T`. A shared variable
/// contributes one edge used by both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimMatching {
    /// One `(variable, value)` pair per variable, ascending by variable.
    pub edges: Vec<(VarId, Value)>,
}

impl SimMatching {
    /// Full validity re-check against an instance: coverage, domain
    /// membership, distinctness within `S` and within `T`.
    pub fn is_valid(&self, inst: &OverlapInstance) -> bool {
        if self.edges.len() != inst.n_vars() {
            return false;
        }
        let mut used_s = 0u128;
        let mut used_t = 0u128;
        for (i, &(var, value)) in self.edges.iter().enumerate() {
            if var.0 != i || !inst.domain(var).contains(value) {
                return false;
            }
            let bit = 1u128 << (value - 1);
            if inst.in_s(var) {
                if used_s & bit != 0 {
                    return false;
                }
                used_s |= bit;
            }
            if inst.in_t(var) {
                if used_t & bit != 0 {
                    return false;
                }
                used_t |= bit;
            }
        }
        true
    }

    pub fn value_of(&self, var: VarId) -> Option<Value> {
        self.edges.get(var.0).map(|&(_, v)| v)
    }
}

type Mask = u128;

fn check_width(d: Value) -> Result<(), OracleError> {
    if d > MAX_ORACLE_VALUES {
        return Err(OracleError::ValueRangeTooWide {
            d,
            limit: MAX_ORACLE_VALUES,
        });
    }
    Ok(())
}

fn domain_mask(dom: &Domain) -> Mask {
    let mut m: Mask = 0;
    for v in dom.iter() {
        m |= 1u128 << (v - 1);
    }
    m
}

/// Backtracking search for a simultaneous matching over explicit domains.
struct Search {
    doms: Vec<Mask>,
    blocks: Vec<Block>,
    used_s: Mask,
    used_t: Mask,
    assigned: Vec<Value>,
    left: usize,
}

enum Pick {
    Complete,
    Dead,
    Var(usize, Mask),
}

impl Search {
    fn new(inst: &OverlapInstance) -> Search {
        let n = inst.n_vars();
        Search {
            doms: inst.domains().iter().map(domain_mask).collect(),
            blocks: (0..n).map(|v| inst.block(VarId(v))).collect(),
            used_s: 0,
            used_t: 0,
            assigned: vec![0; n],
            left: n,
        }
    }

    fn avail(&self, v: usize) -> Mask {
        let mut m = self.doms[v];
        match self.blocks[v] {
            Block::SOnly => m &= !self.used_s,
            Block::TOnly => m &= !self.used_t,
            Block::Shared => m &= !(self.used_s | self.used_t),
        }
        m
    }

    /// Chooses the next variable (fewest available values, ascending id) and
    /// applies counting cuts: each block and each side needs at least as many
    /// pooled values as it has unassigned variables.
    fn pick(&self) -> Pick {
        if self.left == 0 {
            return Pick::Complete;
        }
        let mut best: Option<(u32, usize, Mask)> = None;
        let mut pool = [0 as Mask; 3];
        let mut need = [0usize; 3];
        let mut side_s: Mask = 0;
        let mut side_t: Mask = 0;
        let mut need_s = 0usize;
        let mut need_t = 0usize;
        for v in 0..self.doms.len() {
            if self.assigned[v] != 0 {
                continue;
            }
            let a = self.avail(v);
            if a == 0 {
                return Pick::Dead;
            }
            let cnt = a.count_ones();
            if best.map_or(true, |(c, _, _)| cnt < c) {
                best = Some((cnt, v, a));
            }
            let b = self.blocks[v] as usize;
            pool[b] |= a;
            need[b] += 1;
            if self.blocks[v] != Block::TOnly {
                side_s |= a;
                need_s += 1;
            }
            if self.blocks[v] != Block::SOnly {
                side_t |= a;
                need_t += 1;
            }
        }
        for b in 0..3 {
            if (pool[b].count_ones() as usize) < need[b] {
                return Pick::Dead;
            }
        }
        if (side_s.count_ones() as usize) < need_s || (side_t.count_ones() as usize) < need_t {
            return Pick::Dead;
        }
        let (_, v, a) = best.unwrap();
        Pick::Var(v, a)
    }

    fn dfs(&mut self) -> bool {
        match self.pick() {
            Pick::Complete => true,
            Pick::Dead => false,
            Pick::Var(v, mut a) => {
                while a != 0 {
                    let bit = a & a.wrapping_neg();
                    a &= a - 1;
                    let value = bit.trailing_zeros() as Value + 1;
                    self.assigned[v] = value;
                    self.left -= 1;
                    if self.blocks[v] != Block::TOnly {
                        self.used_s |= bit;
                    }
                    if self.blocks[v] != Block::SOnly {
                        self.used_t |= bit;
                    }
                    if self.dfs() {
                        return true;
                    }
                    self.assigned[v] = 0;
                    self.left += 1;
                    if self.blocks[v] != Block::TOnly {
                        self.used_s &= !bit;
                    }
                    if self.blocks[v] != Block::SOnly {
                        self.used_t &= !bit;
                    }
                }
                false
            }
        }
    }
}

/// Exhaustive search for a simultaneous matching. Returns a reproducible
/// witness if one exists.
pub fn sim_matching_exists_bf(
    inst: &OverlapInstance,
    guard: &SizeGuard,
) -> Result<Option<SimMatching>, OracleError> {
    let n = inst.n_vars();
    if n > guard.max_search_vars {
        return Err(OracleError::SizeGuardExceeded {
            n,
            limit: guard.max_search_vars,
        });
    }
    check_width(inst.d())?;
    let mut search = Search::new(inst);
    if !search.dfs() {
        return Ok(None);
    }
    let witness = SimMatching {
        edges: search
            .assigned
            .iter()
            .enumerate()
            .map(|(v, &val)| (VarId(v), val))
            .collect(),
    };
    debug_assert!(witness.is_valid(inst));
    Ok(Some(witness))
}

/// Enumerates every variable subset `P` and reports the first (in mask
/// order) that violates `|N(P)| + |N(P^S) ∩ N(P^T)| ≥ |P|`, or `None` when
/// the condition holds everywhere.
pub fn sim_hall_check(
    inst: &OverlapInstance,
    guard: &SizeGuard,
) -> Result<Option<Vec<VarId>>, OracleError> {
    let n = inst.n_vars();
    if n > guard.max_subset_vars {
        return Err(OracleError::SizeGuardExceeded {
            n,
            limit: guard.max_subset_vars,
        });
    }
    check_width(inst.d())?;
    let masks: Vec<Mask> = inst.domains().iter().map(domain_mask).collect();
    for p in 1u64..(1u64 << n) {
        let mut nh: Mask = 0;
        let mut nh_s: Mask = 0;
        let mut nh_t: Mask = 0;
        let mut size = 0i64;
        let mut bits = p;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            size += 1;
            nh |= masks[v];
            match inst.block(VarId(v)) {
                Block::SOnly => nh_s |= masks[v],
                Block::TOnly => nh_t |= masks[v],
                Block::Shared => {}
            }
        }
        let lhs = nh.count_ones() as i64 + (nh_s & nh_t).count_ones() as i64;
        if lhs < size {
            let vars: Vec<VarId> = (0..n).filter(|v| p & (1 << v) != 0).map(VarId).collect();
            assert!(
                verify_violation(inst, &vars),
                "violator failed independent recomputation"
            );
            return Ok(Some(vars));
        }
    }
    Ok(None)
}

/// Recomputes the Hall quantity through the public set API, independently of
/// the bitmask path above.
fn verify_violation(inst: &OverlapInstance, p: &[VarId]) -> bool {
    let p_s: Vec<VarId> = p.iter().copied().filter(|&v| inst.block(v) == Block::SOnly).collect();
    let p_t: Vec<VarId> = p.iter().copied().filter(|&v| inst.block(v) == Block::TOnly).collect();
    let nh = inst.neighborhood(p);
    let mut inter = inst.neighborhood(&p_s);
    inter.intersect_with(&inst.neighborhood(&p_t));
    (nh.len() + inter.len()) < p.len()
}

/// True iff some simultaneous matching uses `(var, value)`. The check fixes
/// the edge and searches the induced subgraph: a shared variable consumes the
/// value on both sides, a one-sided variable only on its own side.
pub fn edge_supported_bf(
    inst: &OverlapInstance,
    var: VarId,
    value: Value,
    guard: &SizeGuard,
) -> Result<bool, OracleError> {
    let n = inst.n_vars();
    if n > guard.max_search_vars {
        return Err(OracleError::SizeGuardExceeded {
            n,
            limit: guard.max_search_vars,
        });
    }
    check_width(inst.d())?;
    if !inst.domain(var).contains(value) {
        return Err(OracleError::ValueNotInDomain { var, value });
    }
    if n == 1 {
        return Ok(true);
    }

    let block = inst.block(var);
    let mut reduced: Vec<Domain> = Vec::with_capacity(n - 1);
    let mut old_to_new = vec![usize::MAX; n];
    for v in 0..n {
        if v == var.0 {
            continue;
        }
        let mut set = inst.domain(VarId(v)).to_set();
        let strip = match block {
            Block::Shared => true,
            Block::SOnly => inst.in_s(VarId(v)),
            Block::TOnly => inst.in_t(VarId(v)),
        };
        if strip {
            set.remove(value);
        }
        if set.is_empty() {
            return Ok(false);
        }
        old_to_new[v] = reduced.len();
        reduced.push(Domain::Set(set));
    }
    let remap = |members: &[VarId]| {
        members
            .iter()
            .filter(|&&m| m != var)
            .map(|&m| VarId(old_to_new[m.0]))
            .collect::<Vec<_>>()
    };
    let sub = OverlapInstance::new(
        inst.d(),
        reduced,
        remap(inst.s_members()),
        remap(inst.t_members()),
    )?;
    Ok(sim_matching_exists_bf(&sub, guard)?.is_some())
}

/// True iff assigning `var := value` extends to a full assignment where every
/// other variable stays within its current bounds and both sides are
/// all-different.
fn bound_supported(
    bounds: &[IntervalDomain],
    blocks: &[Block],
    var: usize,
    value: Value,
) -> bool {
    let mut search = Search {
        doms: bounds
            .iter()
            .enumerate()
            .map(|(v, iv)| {
                if v == var {
                    1u128 << (value - 1)
                } else {
                    domain_mask(&Domain::Interval(*iv))
                }
            })
            .collect(),
        blocks: blocks.to_vec(),
        used_s: 0,
        used_t: 0,
        assigned: vec![0; bounds.len()],
        left: bounds.len(),
    };
    search.dfs()
}

/// Brute-force bound consistency: repeatedly shaves every unsupported lower
/// and upper bound until all bounds have a bound support, or fails when some
/// variable runs out of values.
pub fn bc_oracle(
    inst: &OverlapInstance,
    guard: &SizeGuard,
) -> Result<PropagationOutcome, OracleError> {
    let n = inst.n_vars();
    if n > guard.max_search_vars {
        return Err(OracleError::SizeGuardExceeded {
            n,
            limit: guard.max_search_vars,
        });
    }
    check_width(inst.d())?;
    let mut bounds = inst.interval_view()?;
    let blocks: Vec<Block> = (0..n).map(|v| inst.block(VarId(v))).collect();
    let mut log = Vec::new();

    loop {
        let mut changed = false;
        for v in 0..n {
            let iv = bounds[v];
            let mut new_lb = None;
            for val in iv.lb..=iv.ub {
                if bound_supported(&bounds, &blocks, v, val) {
                    new_lb = Some(val);
                    break;
                }
            }
            let Some(lb) = new_lb else {
                return Ok(PropagationOutcome::failure(log));
            };
            if lb > iv.lb {
                log.push(PruneEntry::LbRaised {
                    var: VarId(v),
                    from: iv.lb,
                    to: lb,
                });
                bounds[v].lb = lb;
                changed = true;
            }
            let iv = bounds[v];
            let mut new_ub = None;
            for val in (iv.lb..=iv.ub).rev() {
                if bound_supported(&bounds, &blocks, v, val) {
                    new_ub = Some(val);
                    break;
                }
            }
            let ub = new_ub.expect("lower bound supported, so some value is");
            if ub < iv.ub {
                log.push(PruneEntry::UbLowered {
                    var: VarId(v),
                    from: iv.ub,
                    to: ub,
                });
                bounds[v].ub = ub;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(PropagationOutcome::fixpoint(
        bounds.into_iter().map(Domain::Interval).collect(),
        log,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{exam_example, gap_example, pathological_overlap_instance};

    fn guard() -> SizeGuard {
        SizeGuard::default()
    }

    #[test]
    fn witness_exists_on_exam_instance() {
        let inst = exam_example();
        let m = sim_matching_exists_bf(&inst, &guard()).unwrap().unwrap();
        assert!(m.is_valid(&inst));
    }

    #[test]
    fn singleton_instance_witness() {
        let inst = OverlapInstance::from_intervals(1, &[(1, 1)], &[0], &[0]).unwrap();
        let m = sim_matching_exists_bf(&inst, &guard()).unwrap().unwrap();
        assert_eq!(m.edges, vec![(VarId(0), 1)]);
    }

    #[test]
    fn pathological_has_no_witness() {
        let inst = pathological_overlap_instance(4);
        assert!(sim_matching_exists_bf(&inst, &guard()).unwrap().is_none());
    }

    #[test]
    fn hall_check_exam_instance_holds() {
        assert_eq!(sim_hall_check(&exam_example(), &guard()).unwrap(), None);
    }

    #[test]
    fn hall_check_pathological_full_set() {
        let inst = pathological_overlap_instance(4);
        let g = SizeGuard {
            max_subset_vars: 16,
            ..SizeGuard::default()
        };
        let p = sim_hall_check(&inst, &g).unwrap().unwrap();
        assert_eq!(p.len(), 16, "only the full variable set violates");
        let nh = inst.neighborhood(&p);
        assert_eq!(nh.len(), 15);
    }

    #[test]
    fn hall_check_empty_instance() {
        let inst = OverlapInstance::new(1, vec![], vec![], vec![]).unwrap();
        assert_eq!(sim_hall_check(&inst, &guard()).unwrap(), None);
        assert!(sim_matching_exists_bf(&inst, &guard())
            .unwrap()
            .unwrap()
            .edges
            .is_empty());
    }

    #[test]
    fn edge_support_exam_examples() {
        let inst = exam_example();
        assert!(!edge_supported_bf(&inst, VarId(4), 1, &guard()).unwrap());
        assert!(edge_supported_bf(&inst, VarId(0), 4, &guard()).unwrap());
        assert!(!edge_supported_bf(&inst, VarId(3), 2, &guard()).unwrap());
    }

    #[test]
    fn edge_support_rejects_bad_value() {
        let inst = exam_example();
        assert_eq!(
            edge_supported_bf(&inst, VarId(1), 5, &guard()).unwrap_err(),
            OracleError::ValueNotInDomain {
                var: VarId(1),
                value: 5
            }
        );
    }

    #[test]
    fn size_guard_trips() {
        let inst = pathological_overlap_instance(5);
        let tight = SizeGuard {
            max_search_vars: 16,
            max_subset_vars: 12,
        };
        assert!(matches!(
            sim_matching_exists_bf(&inst, &tight),
            Err(OracleError::SizeGuardExceeded { n: 20, limit: 16 })
        ));
        assert!(matches!(
            sim_hall_check(&inst, &tight),
            Err(OracleError::SizeGuardExceeded { n: 20, limit: 12 })
        ));
    }

    #[test]
    fn bc_oracle_exam_instance() {
        let out = bc_oracle(&exam_example(), &guard()).unwrap();
        let doms = out.domains.unwrap();
        let got: Vec<(Value, Value)> = doms
            .iter()
            .map(|d| (d.min().unwrap(), d.max().unwrap()))
            .collect();
        assert_eq!(
            got,
            vec![(4, 4), (2, 2), (1, 3), (1, 3), (5, 5), (2, 2), (4, 4)]
        );
    }

    #[test]
    fn bc_oracle_gap_example_lifts_one_bound() {
        let out = bc_oracle(&gap_example(), &guard()).unwrap();
        let doms = out.domains.unwrap();
        let got: Vec<(Value, Value)> = doms
            .iter()
            .map(|d| (d.min().unwrap(), d.max().unwrap()))
            .collect();
        assert_eq!(got, vec![(2, 3), (3, 4), (1, 3), (1, 2)]);
    }

    #[test]
    fn bc_oracle_pathological_fails() {
        let out = bc_oracle(&pathological_overlap_instance(4), &guard()).unwrap();
        assert!(out.is_failure());
        assert!(out.domains.is_none());
    }
}
