//! Exponential reference propagator over explicit set domains.
//!
//! Classifies every variable subset by the slack of the simultaneous Hall
//! quantity `|N(P)| + |N(P^S) ∩ N(P^T)| - |P|` and applies the complete
//! edge-removal rules for tight sets. One pass removes, against a fixed
//! graph, exactly the edges that extend to no simultaneous matching; the
//! propagator reruns passes until the evolving graph is stable. Not meant to
//! be fast: it is the mid-level oracle the polynomial propagator is tested
//! against.

use crate::domain::{Domain, SetDomain, Value, VarId};
use crate::instance::{Block, OverlapInstance, PropagationOutcome, PruneEntry};
use crate::oracle::{OracleError, SizeGuard};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Classification of a variable subset by Hall slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetClassKind {
    Violating,
    SimHall,
    AlmostSimHall,
    Loose,
}

/// A subset's kind together with the slack it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetClass {
    pub kind: SetClassKind,
    pub slack: i64,
}

/// Computes `|N(P)| + |N(P^S) ∩ N(P^T)| - |P|` over current domains and
/// classifies: negative slack violates the simultaneous Hall condition, zero
/// is a simultaneous Hall set, one an almost simultaneous Hall set, anything
/// looser is loose.
pub fn classify_set(p: &[VarId], inst: &OverlapInstance) -> SetClass {
    let p_s: Vec<VarId> = p
        .iter()
        .copied()
        .filter(|&v| inst.block(v) == Block::SOnly)
        .collect();
    let p_t: Vec<VarId> = p
        .iter()
        .copied()
        .filter(|&v| inst.block(v) == Block::TOnly)
        .collect();
    let nh = inst.neighborhood(p);
    let mut inter = inst.neighborhood(&p_s);
    inter.intersect_with(&inst.neighborhood(&p_t));
    let slack = nh.len() as i64 + inter.len() as i64 - p.len() as i64;
    let kind = match slack {
        s if s < 0 => SetClassKind::Violating,
        0 => SetClassKind::SimHall,
        1 => SetClassKind::AlmostSimHall,
        _ => SetClassKind::Loose,
    };
    SetClass { kind, slack }
}

/// What one full pass over all subsets decided, against a fixed graph.
pub struct RulePass {
    /// First subset found violating the simultaneous Hall condition, if any.
    pub violator: Option<Vec<VarId>>,
    /// Edges removed by the rules, deduplicated.
    pub removals: BTreeSet<(VarId, Value)>,
}

/// Runs the edge-removal rules once against the instance's current domains,
/// without applying anything. Subsets are visited in ascending cardinality;
/// the result is a set, so visit order cannot affect it.
pub fn dc_first_pass(inst: &OverlapInstance, guard: &SizeGuard) -> Result<RulePass, OracleError> {
    let order = subset_order(inst.n_vars(), guard, None)?;
    let mut pass = RulePass {
        violator: None,
        removals: BTreeSet::new(),
    };
    for &mask in &order {
        if collect_for_subset(inst, mask, &mut pass.removals).is_err() {
            pass.violator = Some(mask_vars(mask));
            return Ok(pass);
        }
    }
    Ok(pass)
}

/// Enumerates non-empty subset masks. Default order is ascending cardinality
/// with ascending mask inside each size; a seed shuffles the order for
/// confluence testing.
fn subset_order(n: usize, guard: &SizeGuard, seed: Option<u64>) -> Result<Vec<u64>, OracleError> {
    if n > guard.max_subset_vars {
        return Err(OracleError::SizeGuardExceeded {
            n,
            limit: guard.max_subset_vars,
        });
    }
    let mut order: Vec<u64> = (1..(1u64 << n)).collect();
    order.sort_by_key(|m| (m.count_ones(), *m));
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
    }
    Ok(order)
}

fn mask_vars(mask: u64) -> Vec<VarId> {
    (0..64).filter(|v| mask & (1 << v) != 0).map(VarId).collect()
}

struct SubsetViolation;

/// Applies rules 2a-2d / 3a for one subset, pushing removals restricted to
/// values currently present. Returns `Err` when the subset itself violates
/// the simultaneous Hall condition (rule 1a).
fn collect_for_subset(
    inst: &OverlapInstance,
    mask: u64,
    out: &mut BTreeSet<(VarId, Value)>,
) -> Result<(), SubsetViolation> {
    let vars = mask_vars(mask);
    let class = classify_set(&vars, inst);
    match class.kind {
        SetClassKind::Violating => return Err(SubsetViolation),
        SetClassKind::Loose => return Ok(()),
        SetClassKind::SimHall | SetClassKind::AlmostSimHall => {}
    }

    let p_s: Vec<VarId> = vars.iter().copied().filter(|&v| inst.block(v) == Block::SOnly).collect();
    let p_t: Vec<VarId> = vars.iter().copied().filter(|&v| inst.block(v) == Block::TOnly).collect();
    let nh = inst.neighborhood(&vars);
    let mut inter = inst.neighborhood(&p_s);
    inter.intersect_with(&inst.neighborhood(&p_t));

    let in_p = |v: usize| mask & (1 << v) != 0;
    let push = |out: &mut BTreeSet<(VarId, Value)>, var: usize, values: &SetDomain| {
        for value in values.iter() {
            if inst.domain(VarId(var)).contains(value) {
                out.insert((VarId(var), value));
            }
        }
    };

    if class.kind == SetClassKind::SimHall {
        let mut nh_minus_nt = nh.clone();
        for v in inst.neighborhood(&p_t).iter() {
            nh_minus_nt.remove(v);
        }
        let mut nh_minus_ns = nh.clone();
        for v in inst.neighborhood(&p_s).iter() {
            nh_minus_ns.remove(v);
        }
        for u in 0..inst.n_vars() {
            if in_p(u) {
                continue;
            }
            // 2a: outside P, values shared by both side-neighborhoods go.
            push(out, u, &inter);
            match inst.block(VarId(u)) {
                // 2b: S-only outsiders avoid N(P) \ N(P^T).
                Block::SOnly => push(out, u, &nh_minus_nt),
                // 2c: T-only outsiders avoid N(P) \ N(P^S).
                Block::TOnly => push(out, u, &nh_minus_ns),
                // 2d: shared outsiders avoid all of N(P).
                Block::Shared => push(out, u, &nh),
            }
        }
    } else {
        // 3a: for an almost simultaneous Hall set, shared outsiders avoid
        // the intersection of the side-neighborhoods.
        for u in 0..inst.n_vars() {
            if !in_p(u) && inst.block(VarId(u)) == Block::Shared {
                push(out, u, &inter);
            }
        }
    }
    Ok(())
}

/// Reference propagator: applies the rules to fixpoint over set domains.
pub fn dc_by_rules(
    inst: &OverlapInstance,
    guard: &SizeGuard,
) -> Result<PropagationOutcome, OracleError> {
    dc_by_rules_seeded(inst, guard, None)
}

/// Like [`dc_by_rules`], but when `order_seed` is set, subsets are visited in
/// a shuffled order and removals apply immediately instead of per pass. The
/// fixpoint must not depend on the order; tests assert it.
pub fn dc_by_rules_seeded(
    inst: &OverlapInstance,
    guard: &SizeGuard,
    order_seed: Option<u64>,
) -> Result<PropagationOutcome, OracleError> {
    let n = inst.n_vars();
    let mut doms: Vec<SetDomain> = inst.set_view();
    let mut log: Vec<PruneEntry> = Vec::new();

    let as_instance = |doms: &[SetDomain]| {
        inst.with_domains(doms.iter().map(|s| Domain::Set(s.clone())).collect())
            .expect("domains stay non-empty while propagating")
    };
    // Emptying a domain settles it: the singleton subset then violates the
    // Hall condition, so failing right away gives the same verdict.
    let apply = |doms: &mut Vec<SetDomain>,
                 log: &mut Vec<PruneEntry>,
                 changed: &mut bool,
                 var: VarId,
                 value: Value| {
        if doms[var.0].remove(value) {
            log.push(PruneEntry::ValueRemoved { var, value });
            *changed = true;
        }
        doms[var.0].is_empty()
    };

    loop {
        let mut changed = false;
        match order_seed {
            None => {
                let pass = dc_first_pass(&as_instance(&doms), guard)?;
                if pass.violator.is_some() {
                    return Ok(PropagationOutcome::failure(log));
                }
                for &(var, value) in &pass.removals {
                    if apply(&mut doms, &mut log, &mut changed, var, value) {
                        return Ok(PropagationOutcome::failure(log));
                    }
                }
            }
            Some(_) => {
                // Incremental variant for confluence testing: removals apply
                // as soon as a subset produces them.
                for &mask in &subset_order(n, guard, order_seed)? {
                    let mut removals = BTreeSet::new();
                    if collect_for_subset(&as_instance(&doms), mask, &mut removals).is_err() {
                        return Ok(PropagationOutcome::failure(log));
                    }
                    for &(var, value) in &removals {
                        if apply(&mut doms, &mut log, &mut changed, var, value) {
                            return Ok(PropagationOutcome::failure(log));
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(PropagationOutcome::fixpoint(
        doms.into_iter().map(Domain::Set).collect(),
        log,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::exam_example;
    use crate::instance::PropStatus;

    #[test]
    fn classify_exam_subsets() {
        let inst = exam_example();
        let sim_hall = [VarId(1), VarId(2), VarId(3), VarId(5)];
        let c = classify_set(&sim_hall, &inst);
        assert_eq!(c.kind, SetClassKind::SimHall);
        assert_eq!(c.slack, 0);

        let almost = [VarId(1), VarId(2), VarId(5)];
        let c = classify_set(&almost, &inst);
        assert_eq!(c.kind, SetClassKind::AlmostSimHall);
        assert_eq!(c.slack, 1);

        let loose = [VarId(4)];
        let c = classify_set(&loose, &inst);
        assert_eq!(c.kind, SetClassKind::Loose);
        assert_eq!(c.slack, 4);
    }

    #[test]
    fn exam_fixpoint_matches_final_matrix() {
        let inst = exam_example();
        let out = dc_by_rules(&inst, &SizeGuard::default()).unwrap();
        assert_eq!(out.status, PropStatus::Fixpoint);
        let doms = out.domains.unwrap();
        let expect: [&[Value]; 7] = [&[4], &[2], &[1, 3], &[1, 3], &[5], &[2], &[4]];
        for (v, exp) in expect.iter().enumerate() {
            assert_eq!(
                doms[v].to_set().iter().collect::<Vec<_>>(),
                exp.to_vec(),
                "variable {v}"
            );
        }
    }

    #[test]
    fn sim_hall_pair_triggers_side_rules() {
        // Mid-propagation state of the exam instance: the 2s are gone, so
        // {X3, X4} is a simultaneous Hall set over {1, 3}.
        let rows: [&[Value]; 7] = [
            &[1, 3, 4],
            &[1, 2],
            &[1, 3],
            &[1, 3],
            &[4, 5],
            &[2, 3],
            &[3, 4, 5],
        ];
        let inst = OverlapInstance::new(
            5,
            rows.iter()
                .map(|r| Domain::Set(SetDomain::from_values(r.iter().copied())))
                .collect(),
            (0..5).map(VarId).collect(),
            (2..7).map(VarId).collect(),
        )
        .unwrap();
        let pair = [VarId(2), VarId(3)];
        assert_eq!(classify_set(&pair, &inst).kind, SetClassKind::SimHall);
        let pass = dc_first_pass(&inst, &SizeGuard::default()).unwrap();
        assert!(pass.violator.is_none());
        for expected in [
            (VarId(0), 1),
            (VarId(0), 3),
            (VarId(1), 1),
            (VarId(5), 3),
            (VarId(6), 3),
        ] {
            assert!(
                pass.removals.contains(&expected),
                "missing removal {expected:?}"
            );
        }
    }

    #[test]
    fn single_fixed_var_is_stable() {
        let inst = OverlapInstance::from_intervals(1, &[(1, 1)], &[0], &[0]).unwrap();
        let out = dc_by_rules(&inst, &SizeGuard::default()).unwrap();
        assert_eq!(out.status, PropStatus::Fixpoint);
        assert!(out.prune_log.is_empty());
    }

    #[test]
    fn idempotent_on_exam_instance() {
        let inst = exam_example();
        let once = dc_by_rules(&inst, &SizeGuard::default()).unwrap();
        let again_inst = inst.with_domains(once.domains.clone().unwrap()).unwrap();
        let twice = dc_by_rules(&again_inst, &SizeGuard::default()).unwrap();
        assert!(twice.prune_log.is_empty());
        assert_eq!(once.domains, twice.domains);
    }

    #[test]
    fn visit_order_does_not_change_fixpoint() {
        let inst = exam_example();
        let base = dc_by_rules(&inst, &SizeGuard::default()).unwrap();
        for seed in [1u64, 7, 42] {
            let shuffled = dc_by_rules_seeded(&inst, &SizeGuard::default(), Some(seed)).unwrap();
            assert_eq!(base.domains, shuffled.domains, "seed {seed}");
        }
    }
}
