//! The propagation subject: two variable sets `S` and `T` over a shared value
//! range `1..=d`, with per-variable domains.
//!
//! The variables split into three blocks: `S \ T`, `S ∩ T` and `T \ S`. A
//! solution assigns one value per variable so that values are pairwise
//! distinct within `S` and within `T`; a variable in the shared block
//! contributes the same value to both sides.

use crate::domain::{Domain, IntervalDomain, SetDomain, Value, VarId};
use thiserror::Error;

/// Which of the three scope blocks a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    SOnly,
    Shared,
    TOnly,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("variable {0} out of range (instance has {1} variables)")]
    UnknownVar(usize, usize),
    #[error("duplicate variable {0} in {1}")]
    DuplicateVar(usize, &'static str),
    #[error("variable {0} is in neither S nor T")]
    Uncovered(usize),
    #[error("domain of variable {0} is empty")]
    EmptyDomain(usize),
    #[error("domain of variable {0} leaves the value range 1..={1}")]
    DomainOutOfRange(usize, Value),
    #[error("domain of variable {0} is not a contiguous interval")]
    NonContiguousDomain(usize),
}

/// Two overlapping `AllDifferent` scopes over one variable/value universe.
#[derive(Debug, Clone)]
pub struct OverlapInstance {
    d: Value,
    domains: Vec<Domain>,
    s_members: Vec<VarId>,
    t_members: Vec<VarId>,
    blocks: Vec<Block>,
}

impl OverlapInstance {
    /// Builds an instance, validating scope coverage, duplicates and domain
    /// ranges. `S ∩ T = ∅` is accepted: the constraint then degenerates to
    /// two independent `AllDifferent`s and every operation remains well
    /// defined.
    pub fn new(
        d: Value,
        domains: Vec<Domain>,
        s_members: Vec<VarId>,
        t_members: Vec<VarId>,
    ) -> Result<Self, InstanceError> {
        let n = domains.len();
        let mut in_s = vec![false; n];
        let mut in_t = vec![false; n];
        for &VarId(v) in &s_members {
            if v >= n {
                return Err(InstanceError::UnknownVar(v, n));
            }
            if std::mem::replace(&mut in_s[v], true) {
                return Err(InstanceError::DuplicateVar(v, "S"));
            }
        }
        for &VarId(v) in &t_members {
            if v >= n {
                return Err(InstanceError::UnknownVar(v, n));
            }
            if std::mem::replace(&mut in_t[v], true) {
                return Err(InstanceError::DuplicateVar(v, "T"));
            }
        }
        let mut blocks = Vec::with_capacity(n);
        for v in 0..n {
            blocks.push(match (in_s[v], in_t[v]) {
                (true, true) => Block::Shared,
                (true, false) => Block::SOnly,
                (false, true) => Block::TOnly,
                (false, false) => return Err(InstanceError::Uncovered(v)),
            });
        }
        for (v, dom) in domains.iter().enumerate() {
            if dom.is_empty() {
                return Err(InstanceError::EmptyDomain(v));
            }
            let (lo, hi) = (dom.min().unwrap(), dom.max().unwrap());
            if lo < 1 || hi > d {
                return Err(InstanceError::DomainOutOfRange(v, d));
            }
        }
        let mut s_members = s_members;
        let mut t_members = t_members;
        s_members.sort_unstable();
        t_members.sort_unstable();
        Ok(OverlapInstance {
            d,
            domains,
            s_members,
            t_members,
            blocks,
        })
    }

    /// Convenience constructor for interval instances.
    pub fn from_intervals(
        d: Value,
        bounds: &[(Value, Value)],
        s: &[usize],
        t: &[usize],
    ) -> Result<Self, InstanceError> {
        OverlapInstance::new(
            d,
            bounds
                .iter()
                .map(|&(lb, ub)| Domain::Interval(IntervalDomain::new(lb, ub)))
                .collect(),
            s.iter().map(|&v| VarId(v)).collect(),
            t.iter().map(|&v| VarId(v)).collect(),
        )
    }

    pub fn n_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn d(&self) -> Value {
        self.d
    }

    pub fn domain(&self, v: VarId) -> &Domain {
        &self.domains[v.0]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn block(&self, v: VarId) -> Block {
        self.blocks[v.0]
    }

    pub fn s_members(&self) -> &[VarId] {
        &self.s_members
    }

    pub fn t_members(&self) -> &[VarId] {
        &self.t_members
    }

    pub fn in_s(&self, v: VarId) -> bool {
        self.blocks[v.0] != Block::TOnly
    }

    pub fn in_t(&self, v: VarId) -> bool {
        self.blocks[v.0] != Block::SOnly
    }

    /// Splits the variables into the three blocks `S \ T`, `S ∩ T`, `T \ S`.
    pub fn partition(&self) -> (Vec<VarId>, Vec<VarId>, Vec<VarId>) {
        let mut s_only = Vec::new();
        let mut shared = Vec::new();
        let mut t_only = Vec::new();
        for v in 0..self.n_vars() {
            match self.blocks[v] {
                Block::SOnly => s_only.push(VarId(v)),
                Block::Shared => shared.push(VarId(v)),
                Block::TOnly => t_only.push(VarId(v)),
            }
        }
        (s_only, shared, t_only)
    }

    /// `N(P)`: the union of the domains of the variables in `P`.
    pub fn neighborhood(&self, p: &[VarId]) -> SetDomain {
        let mut out = SetDomain::new();
        for &v in p {
            match &self.domains[v.0] {
                Domain::Set(s) => out.union_with(s),
                Domain::Interval(iv) => {
                    for val in iv.lb..=iv.ub {
                        out.insert(val);
                    }
                }
            }
        }
        out
    }

    /// Same instance with replaced domains (scopes unchanged).
    pub fn with_domains(&self, domains: Vec<Domain>) -> Result<Self, InstanceError> {
        OverlapInstance::new(
            self.d,
            domains,
            self.s_members.clone(),
            self.t_members.clone(),
        )
    }

    /// Bounds of every domain as intervals. Fails on non-contiguous sets;
    /// contiguous sets convert losslessly.
    pub fn interval_view(&self) -> Result<Vec<IntervalDomain>, InstanceError> {
        self.domains
            .iter()
            .enumerate()
            .map(|(v, dom)| {
                dom.as_exact_interval()
                    .ok_or(InstanceError::NonContiguousDomain(v))
            })
            .collect()
    }

    /// Every domain as an explicit set.
    pub fn set_view(&self) -> Vec<SetDomain> {
        self.domains.iter().map(|d| d.to_set()).collect()
    }
}

/// Whether propagation reached a stable state or proved the instance
/// unsatisfiable over the current domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropStatus {
    Fixpoint,
    Failure,
}

/// One recorded domain change.
///
/// `InteriorNoted` marks a value proven unsupported that lies strictly inside
/// an interval domain: a bounds-only propagator records it without shrinking
/// the interval, so replaying the log over interval domains treats it as a
/// no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneEntry {
    LbRaised { var: VarId, from: Value, to: Value },
    UbLowered { var: VarId, from: Value, to: Value },
    ValueRemoved { var: VarId, value: Value },
    InteriorNoted { var: VarId, value: Value },
}

/// Result of running a propagator to fixpoint.
#[derive(Debug, Clone)]
pub struct PropagationOutcome {
    pub status: PropStatus,
    /// Resulting domains; present exactly on `Fixpoint`.
    pub domains: Option<Vec<Domain>>,
    pub prune_log: Vec<PruneEntry>,
}

impl PropagationOutcome {
    pub fn failure(prune_log: Vec<PruneEntry>) -> Self {
        PropagationOutcome {
            status: PropStatus::Failure,
            domains: None,
            prune_log,
        }
    }

    pub fn fixpoint(domains: Vec<Domain>, prune_log: Vec<PruneEntry>) -> Self {
        PropagationOutcome {
            status: PropStatus::Fixpoint,
            domains: Some(domains),
            prune_log,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status == PropStatus::Failure
    }
}

/// Replays a prune log over input domains. Used by tests to check that logs
/// reconstruct the propagator's output exactly.
pub fn replay_prune_log(input: &[Domain], log: &[PruneEntry]) -> Vec<Domain> {
    let mut out: Vec<Domain> = input.to_vec();
    for entry in log {
        match *entry {
            PruneEntry::LbRaised { var, to, .. } => {
                if let Domain::Interval(iv) = &mut out[var.0] {
                    iv.lb = iv.lb.max(to);
                } else {
                    let s = out[var.0].to_set();
                    out[var.0] = Domain::Set(s.iter().filter(|&v| v >= to).collect());
                }
            }
            PruneEntry::UbLowered { var, to, .. } => {
                if let Domain::Interval(iv) = &mut out[var.0] {
                    iv.ub = iv.ub.min(to);
                } else {
                    let s = out[var.0].to_set();
                    out[var.0] = Domain::Set(s.iter().filter(|&v| v <= to).collect());
                }
            }
            PruneEntry::ValueRemoved { var, value } => {
                let mut s = out[var.0].to_set();
                s.remove(value);
                out[var.0] = Domain::Set(s);
            }
            PruneEntry::InteriorNoted { .. } => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::exam_example;

    #[test]
    fn partition_running_example() {
        let inst = exam_example();
        let (s_only, shared, t_only) = inst.partition();
        assert_eq!(s_only, vec![VarId(0), VarId(1)]);
        assert_eq!(shared, vec![VarId(2), VarId(3), VarId(4)]);
        assert_eq!(t_only, vec![VarId(5), VarId(6)]);
    }

    #[test]
    fn partition_full_overlap() {
        let inst = OverlapInstance::from_intervals(1, &[(1, 1)], &[0], &[0]).unwrap();
        let (s_only, shared, t_only) = inst.partition();
        assert!(s_only.is_empty() && t_only.is_empty());
        assert_eq!(shared, vec![VarId(0)]);
    }

    #[test]
    fn partition_disjoint_scopes() {
        let inst = OverlapInstance::from_intervals(2, &[(1, 2), (1, 2)], &[0], &[1]).unwrap();
        let (s_only, shared, t_only) = inst.partition();
        assert_eq!(s_only, vec![VarId(0)]);
        assert!(shared.is_empty());
        assert_eq!(t_only, vec![VarId(1)]);
    }

    #[test]
    fn neighborhood_examples() {
        let inst = exam_example();
        let p = [VarId(1), VarId(2), VarId(3), VarId(5)];
        assert_eq!(inst.neighborhood(&p).iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(inst.neighborhood(&[]).is_empty());
        assert_eq!(
            inst.neighborhood(&[VarId(4)]).iter().collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn construction_rejects_bad_input() {
        let e = OverlapInstance::from_intervals(2, &[(1, 2)], &[0, 0], &[0]);
        assert_eq!(e.unwrap_err(), InstanceError::DuplicateVar(0, "S"));
        let e = OverlapInstance::from_intervals(2, &[(1, 2), (1, 2)], &[0], &[0]);
        assert_eq!(e.unwrap_err(), InstanceError::Uncovered(1));
        let e = OverlapInstance::from_intervals(2, &[(1, 3)], &[0], &[0]);
        assert_eq!(e.unwrap_err(), InstanceError::DomainOutOfRange(0, 2));
        let e = OverlapInstance::from_intervals(2, &[(2, 1)], &[0], &[0]);
        assert_eq!(e.unwrap_err(), InstanceError::EmptyDomain(0));
    }

    #[test]
    fn replay_reconstructs_interval_moves() {
        let input = vec![Domain::Interval(IntervalDomain::new(1, 5))];
        let log = vec![
            PruneEntry::LbRaised { var: VarId(0), from: 1, to: 3 },
            PruneEntry::InteriorNoted { var: VarId(0), value: 4 },
            PruneEntry::UbLowered { var: VarId(0), from: 5, to: 4 },
        ];
        let out = replay_prune_log(&input, &log);
        assert_eq!(out[0], Domain::Interval(IntervalDomain::new(3, 4)));
    }
}
