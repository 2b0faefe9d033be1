//! Deterministic instance generators and small named example instances.
//!
//! Random generation is pinned to the ChaCha8 scheme described in
//! [`crate::prng`], so the same textual parameters reproduce identical
//! instances on every platform.

use crate::domain::{Domain, IntervalDomain, SetDomain, Value, VarId};
use crate::instance::OverlapInstance;
use crate::prng;
use crate::solver::{ConstraintSpec, Problem};
use rand_chacha::ChaCha8Rng;

/// The 7-exam / 5-day timetabling instance: two students, the first sits
/// exams 1-5 and the second exams 3-7, one exam per day, with per-exam day
/// availability. A small satisfiable instance whose propagation steps are
/// easy to follow by hand.
pub fn exam_example() -> OverlapInstance {
    let rows: [&[Value]; 7] = [
        &[1, 2, 3, 4],
        &[1, 2],
        &[1, 2, 3],
        &[1, 2, 3],
        &[1, 2, 3, 4, 5],
        &[2, 3],
        &[2, 3, 4, 5],
    ];
    OverlapInstance::new(
        5,
        rows.iter()
            .map(|r| Domain::Set(SetDomain::from_values(r.iter().copied())))
            .collect(),
        (0..5).map(VarId).collect(),
        (2..7).map(VarId).collect(),
    )
    .expect("exam instance is well-formed")
}

/// The exam instance as a [`Problem`] with one overlapping constraint.
pub fn exam_problem() -> Problem {
    let inst = exam_example();
    Problem {
        d: inst.d(),
        names: (1..=7).map(|i| format!("X{i}")).collect(),
        domains: inst.domains().to_vec(),
        constraints: vec![ConstraintSpec::Overlapping {
            s: inst.s_members().to_vec(),
            t: inst.t_members().to_vec(),
        }],
    }
}

/// Four variables, two overlapping scopes of three. Counter propagation
/// alone reaches a fixpoint that keeps `X2 = 2`, yet 2 has no bound support;
/// the full propagator lifts the bound. Useful as the smallest instance
/// separating the base layer from full bound consistency.
pub fn gap_example() -> OverlapInstance {
    OverlapInstance::from_intervals(
        4,
        &[(2, 3), (2, 4), (1, 3), (1, 2)],
        &[0, 1, 2],
        &[1, 2, 3],
    )
    .expect("gap instance is well-formed")
}

/// The hard family as one overlapping constraint: `S = X ∪ Y`, `T = Y ∪ Z`
/// with `|X| = |Z| = n`, `|Y| = 2n`, `D(X_i) = [1, 2n-1]`,
/// `D(Y_i) = [1, 4n-1]`, `D(Z_i) = [2n, 4n-1]`. Infeasible for every `n`,
/// but no single scope ever sees a tight value set until almost all
/// variables are instantiated.
pub fn pathological_overlap_instance(n: usize) -> OverlapInstance {
    assert!(n >= 1);
    let nv = n as Value;
    let mut bounds: Vec<(Value, Value)> = Vec::with_capacity(4 * n);
    bounds.extend(std::iter::repeat((1, 2 * nv - 1)).take(n));
    bounds.extend(std::iter::repeat((1, 4 * nv - 1)).take(2 * n));
    bounds.extend(std::iter::repeat((2 * nv, 4 * nv - 1)).take(n));
    let s: Vec<usize> = (0..3 * n).collect();
    let t: Vec<usize> = (n..4 * n).collect();
    OverlapInstance::from_intervals(4 * nv - 1, &bounds, &s, &t)
        .expect("pathological instance is well-formed")
}

/// The hard family as a [`Problem`] with two plain `AllDifferent`
/// constraints (decomposed propagators see only these scopes).
pub fn gen_pathological(n: usize) -> Problem {
    let inst = pathological_overlap_instance(n);
    let nv = n;
    let mut names = Vec::with_capacity(4 * n);
    names.extend((1..=nv).map(|i| format!("X{i}")));
    names.extend((1..=2 * nv).map(|i| format!("Y{i}")));
    names.extend((1..=nv).map(|i| format!("Z{i}")));
    Problem {
        d: inst.d(),
        names,
        domains: inst.domains().to_vec(),
        constraints: vec![
            ConstraintSpec::AllDifferent(inst.s_members().to_vec()),
            ConstraintSpec::AllDifferent(inst.t_members().to_vec()),
        ],
    }
}

/// Parameters of the random three-constraint benchmark family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    /// Size of each of the blocks X, Y, Z.
    pub n: usize,
    /// Domain size; every variable starts at `[1, d]`.
    pub d: Value,
    /// Size of the shared block W.
    pub o: usize,
    pub seed: u64,
}

/// Random benchmark problem: blocks `X`, `Y`, `Z` of size `n` and a shared
/// block `W` of size `o`, constraints `AllDifferent(X ∪ W)`,
/// `AllDifferent(Y ∪ W)`, `AllDifferent(Z ∪ W)`, plus `n` strict-order
/// constraints inside each of X, Y, Z.
///
/// Order constraints are drawn per block: distinct unordered index pairs are
/// sampled without replacement (a seeded partial shuffle of the full pair
/// list) and oriented low-index < high-index, so the order graph is acyclic.
/// When a block has fewer than `n` pairs, all its pairs are used.
pub fn gen_random(spec: &RandomSpec) -> Problem {
    assert!(spec.o >= 1 && spec.d >= 1);
    let RandomSpec { n, d, o, seed } = *spec;
    let mut rng = prng::rng_from_seed(seed);

    let mut names = Vec::with_capacity(3 * n + o);
    for (block, count) in [("X", n), ("Y", n), ("Z", n), ("W", o)] {
        names.extend((1..=count).map(|i| format!("{block}{i}")));
    }
    let domains = vec![Domain::Interval(IntervalDomain::new(1, d)); 3 * n + o];

    let block_vars = |b: usize| -> Vec<VarId> { (b * n..(b + 1) * n).map(VarId).collect() };
    let w_vars: Vec<VarId> = (3 * n..3 * n + o).map(VarId).collect();

    let mut constraints = Vec::new();
    for b in 0..3 {
        let mut scope = block_vars(b);
        scope.extend(w_vars.iter().copied());
        constraints.push(ConstraintSpec::AllDifferent(scope));
    }
    for b in 0..3 {
        for (i, j) in sample_pairs(&mut rng, n, n) {
            constraints.push(ConstraintSpec::LessThan(VarId(b * n + i), VarId(b * n + j)));
        }
    }

    Problem {
        d,
        names,
        domains,
        constraints,
    }
}

/// First `count` distinct unordered pairs over `0..n`, via a seeded partial
/// Fisher-Yates over the lexicographic pair list; each pair is returned
/// `(low, high)`.
fn sample_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let take = count.min(pairs.len());
    // Partial shuffle: position k receives a uniform choice of pairs[k..].
    for k in 0..take {
        let j = k + prng::uniform(rng, (pairs.len() - k) as u64) as usize;
        pairs.swap(k, j);
    }
    pairs.truncate(take);
    pairs
}

/// Domain shapes for sampled overlap instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainStyle {
    Intervals,
    Sets,
    Mixed,
}

/// Parameters for sampling small [`OverlapInstance`]s, used by the
/// randomized differential suites.
#[derive(Debug, Clone, Copy)]
pub struct OverlapSample {
    pub max_vars: usize,
    pub max_values: Value,
    pub style: DomainStyle,
    pub seed: u64,
}

/// Samples a random overlapping instance: block per variable, then either an
/// interval or an arbitrary non-empty subset of `1..=d` per variable.
/// Degenerate shapes (empty blocks, `S ∩ T = ∅`) arise naturally and are
/// legal.
pub fn gen_overlap(sample: &OverlapSample) -> OverlapInstance {
    let mut rng = prng::rng_from_seed(sample.seed);
    let n = 1 + prng::uniform(&mut rng, sample.max_vars as u64) as usize;
    let d = 1 + prng::uniform(&mut rng, sample.max_values as u64) as Value;
    let mut s = Vec::new();
    let mut t = Vec::new();
    for v in 0..n {
        match prng::uniform(&mut rng, 3) {
            0 => s.push(v),
            1 => t.push(v),
            _ => {
                s.push(v);
                t.push(v);
            }
        }
    }
    let mut domains = Vec::with_capacity(n);
    for _ in 0..n {
        let interval = match sample.style {
            DomainStyle::Intervals => true,
            DomainStyle::Sets => false,
            DomainStyle::Mixed => prng::uniform(&mut rng, 2) == 0,
        };
        if interval {
            let a = 1 + prng::uniform(&mut rng, d as u64) as Value;
            let b = 1 + prng::uniform(&mut rng, d as u64) as Value;
            let (lb, ub) = (a.min(b), a.max(b));
            domains.push(Domain::Interval(IntervalDomain::new(lb, ub)));
        } else {
            let mut set = SetDomain::new();
            for v in 1..=d {
                if prng::uniform(&mut rng, 2) == 0 {
                    set.insert(v);
                }
            }
            if set.is_empty() {
                set.insert(1 + prng::uniform(&mut rng, d as u64) as Value);
            }
            domains.push(Domain::Set(set));
        }
    }
    OverlapInstance::new(
        d,
        domains,
        s.into_iter().map(VarId).collect(),
        t.into_iter().map(VarId).collect(),
    )
    .expect("sampled instances are well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{classify_set, SetClassKind};

    #[test]
    fn pathological_shape() {
        let p = gen_pathological(4);
        assert_eq!(p.n_vars(), 16);
        assert_eq!(p.d, 15);
        let inst = pathological_overlap_instance(4);
        let (s_only, shared, t_only) = inst.partition();
        assert_eq!(s_only.len(), 4);
        assert_eq!(shared.len(), 8);
        assert_eq!(t_only.len(), 4);
    }

    #[test]
    fn pathological_smallest() {
        let inst = pathological_overlap_instance(1);
        let doms = inst.domains();
        assert_eq!(doms[0].as_exact_interval().unwrap(), IntervalDomain::new(1, 1));
        assert_eq!(doms[1].as_exact_interval().unwrap(), IntervalDomain::new(1, 3));
        assert_eq!(doms[2].as_exact_interval().unwrap(), IntervalDomain::new(1, 3));
        assert_eq!(doms[3].as_exact_interval().unwrap(), IntervalDomain::new(2, 3));
    }

    #[test]
    fn pathological_full_set_slack_is_minus_one() {
        for n in 1..=3 {
            let inst = pathological_overlap_instance(n);
            let all: Vec<VarId> = (0..inst.n_vars()).map(VarId).collect();
            let class = classify_set(&all, &inst);
            assert_eq!(class.kind, SetClassKind::Violating);
            assert_eq!(class.slack, -1, "n={n}");
        }
    }

    #[test]
    fn random_problem_shape() {
        let p = gen_random(&RandomSpec {
            n: 4,
            d: 15,
            o: 10,
            seed: 1,
        });
        assert_eq!(p.n_vars(), 22);
        let alldiffs = p
            .constraints
            .iter()
            .filter(|c| matches!(c, ConstraintSpec::AllDifferent(s) if s.len() == 14))
            .count();
        assert_eq!(alldiffs, 3);
        let orders = p
            .constraints
            .iter()
            .filter(|c| matches!(c, ConstraintSpec::LessThan(_, _)))
            .count();
        assert_eq!(orders, 12);
        for c in &p.constraints {
            if let ConstraintSpec::LessThan(x, y) = c {
                assert!(x.0 < y.0, "orders are oriented by index");
            }
        }
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let spec = RandomSpec {
            n: 4,
            d: 15,
            o: 10,
            seed: 9,
        };
        assert_eq!(gen_random(&spec), gen_random(&spec));
        let other = RandomSpec { seed: 10, ..spec };
        assert_ne!(gen_random(&spec), gen_random(&other));
    }

    #[test]
    fn tiny_random_is_unsat() {
        let p = gen_random(&RandomSpec {
            n: 1,
            d: 1,
            o: 1,
            seed: 0,
        });
        // Two variables per scope, one value: pigeonhole.
        assert_eq!(p.n_vars(), 4);
        let (sol, stats) = crate::solver::solve(&p, &crate::solver::SolveConfig::default()).unwrap();
        assert!(sol.is_none());
        assert_eq!(stats.status, crate::solver::SolveStatus::Unsat);
    }

    #[test]
    fn sampled_overlap_instances_are_reproducible() {
        let sample = OverlapSample {
            max_vars: 9,
            max_values: 9,
            style: DomainStyle::Mixed,
            seed: 123,
        };
        let a = gen_overlap(&sample);
        let b = gen_overlap(&sample);
        assert_eq!(a.domains(), b.domains());
        assert_eq!(a.s_members(), b.s_members());
    }
}
