//! Polynomial bound-consistency propagator built from a counter network.
//!
//! For every value interval `[l,u]` the network tracks bounded counters of
//! how many variables of each block (`S\T`, `S∩T`, `T\S`) take a value inside
//! the interval. Boolean channeling ties the counters to variable bounds,
//! capacity constraints bound co-occupancy of an interval by the shared block
//! and one side, and split constraints stitch interval counters together.
//! Bounds propagation over these primitives detects infeasibility over the
//! current bounds at the root; a separate pass re-simulates the network
//! inside candidate intervals with one extra shared variable to extract the
//! remaining prunings, which yields full bound consistency.
//!
//! A [`Network`] is owned by one propagation run; bounds only ever shrink.

use crate::domain::{Domain, IntervalDomain, Value, VarId};
use crate::instance::{
    Block, InstanceError, OverlapInstance, PropagationOutcome, PruneEntry,
};
use crate::oracle::SimMatching;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Hard cap on variable count so counters fit comfortably in `i32`.
pub const MAX_NETWORK_VARS: usize = 1 << 15;

#[derive(Debug, Error)]
pub enum DecompError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("too many variables for the counter network: {n} (limit {MAX_NETWORK_VARS})")]
    TooManyVars { n: usize },
}

/// Which constraint families get posted.
///
/// `Base` posts channeling, block sums, the shared-counter prefix splits and
/// the two capacity families: enough to detect infeasibility over bounds.
/// `Full` adds prefix splits for the one-sided counters and general splits
/// for the shared counter, the preconditions of the candidate-interval pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkMode {
    Base,
    Full,
}

/// Upper-triangular (l,u) indexing over 1 ≤ l ≤ u ≤ d.
#[derive(Debug, Clone, Copy)]
struct TriIdx {
    d: Value,
}

impl TriIdx {
    fn len(&self) -> usize {
        let d = self.d as usize;
        d * (d + 1) / 2
    }

    fn idx(&self, l: Value, u: Value) -> usize {
        debug_assert!(1 <= l && l <= u && u <= self.d);
        let l0 = (l - 1) as usize;
        let d = self.d as usize;
        l0 * (2 * d - l0 + 1) / 2 + (u - l) as usize
    }
}

#[derive(Debug, Clone, Copy)]
enum CDef {
    /// Counter equals the number of block variables inside `[l,u]`.
    Sum { block: Block, l: Value, u: Value },
    /// Shared counter plus one side's counter fit the interval width.
    Cap { side: Block, l: Value, u: Value },
    /// Shared counter split: `C[l,u] = C[l,k] + C[k+1,u]`.
    SplitSt { l: Value, k: Value, u: Value },
    /// One-sided prefix split: `C[1,u] = C[1,k] + C[k+1,u]`.
    SplitSide { side: Block, k: Value, u: Value },
}

/// Three-valued state of a channeling Boolean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    False,
    True,
    Unknown,
}

/// The counter network over one instance.
pub struct Network {
    d: Value,
    n: usize,
    mode: NetworkMode,
    blocks: Vec<Block>,
    members: [Vec<usize>; 3],
    lb: Vec<Value>,
    ub: Vec<Value>,
    ctr_lb: [Vec<i32>; 3],
    ctr_ub: [Vec<i32>; 3],
    tri: TriIdx,
    defs: Vec<CDef>,
    ctr_deps: [Vec<Vec<u32>>; 3],
    sum_cid: [Vec<u32>; 3],
    /// Per variable, interval-exclusion facts (`a = 0`) as a tri-index bitset.
    azero: Vec<Vec<u64>>,
    /// Exclusions strictly inside a variable's current interval, waiting for
    /// a bound to reach them.
    pending: Vec<Vec<(Value, Value)>>,
    queue: VecDeque<u32>,
    inq: Vec<bool>,
    log: Vec<PruneEntry>,
    noted: BTreeSet<(usize, Value)>,
    failed: bool,
    tighten_events: u64,
    fires: u64,
}

/// Builds the network for an interval instance and runs the initial counter
/// tightening from the current bounds. All constraint instances are posted
/// once, in a fixed order, so propagation is deterministic.
pub fn build_network(inst: &OverlapInstance, mode: NetworkMode) -> Result<Network, DecompError> {
    let n = inst.n_vars();
    if n > MAX_NETWORK_VARS {
        return Err(DecompError::TooManyVars { n });
    }
    let bounds = inst.interval_view()?;
    let d = inst.d();
    let tri = TriIdx { d };
    let blocks: Vec<Block> = (0..n).map(|v| inst.block(VarId(v))).collect();
    let mut members: [Vec<usize>; 3] = Default::default();
    for (v, &b) in blocks.iter().enumerate() {
        members[b as usize].push(v);
    }

    let mut defs = Vec::new();
    let mut sum_cid: [Vec<u32>; 3] = [
        vec![0; tri.len()],
        vec![0; tri.len()],
        vec![0; tri.len()],
    ];
    for block in [Block::SOnly, Block::Shared, Block::TOnly] {
        for l in 1..=d {
            for u in l..=d {
                sum_cid[block as usize][tri.idx(l, u)] = defs.len() as u32;
                defs.push(CDef::Sum { block, l, u });
            }
        }
    }
    for l in 1..=d {
        for u in l..=d {
            defs.push(CDef::Cap { side: Block::SOnly, l, u });
            defs.push(CDef::Cap { side: Block::TOnly, l, u });
        }
    }
    for u in 2..=d {
        let max_l = match mode {
            NetworkMode::Base => 1,
            NetworkMode::Full => u - 1,
        };
        for l in 1..=max_l {
            for k in l..u {
                defs.push(CDef::SplitSt { l, k, u });
            }
        }
    }
    if mode == NetworkMode::Full {
        for side in [Block::SOnly, Block::TOnly] {
            for u in 2..=d {
                for k in 1..u {
                    defs.push(CDef::SplitSide { side, k, u });
                }
            }
        }
    }

    let mut ctr_deps: [Vec<Vec<u32>>; 3] = [
        vec![Vec::new(); tri.len()],
        vec![Vec::new(); tri.len()],
        vec![Vec::new(); tri.len()],
    ];
    for (cid, def) in defs.iter().enumerate() {
        let cid = cid as u32;
        let mut touch = |b: Block, l: Value, u: Value| {
            ctr_deps[b as usize][tri.idx(l, u)].push(cid);
        };
        match *def {
            CDef::Sum { block, l, u } => touch(block, l, u),
            CDef::Cap { side, l, u } => {
                touch(Block::Shared, l, u);
                touch(side, l, u);
            }
            CDef::SplitSt { l, k, u } => {
                touch(Block::Shared, l, u);
                touch(Block::Shared, l, k);
                touch(Block::Shared, k + 1, u);
            }
            CDef::SplitSide { side, k, u } => {
                touch(side, 1, u);
                touch(side, 1, k);
                touch(side, k + 1, u);
            }
        }
    }

    let ctr_ub: [Vec<i32>; 3] = [
        vec![members[0].len() as i32; tri.len()],
        vec![members[1].len() as i32; tri.len()],
        vec![members[2].len() as i32; tri.len()],
    ];
    let n_defs = defs.len();
    let mut net = Network {
        d,
        n,
        mode,
        blocks,
        members,
        lb: bounds.iter().map(|iv| iv.lb).collect(),
        ub: bounds.iter().map(|iv| iv.ub).collect(),
        ctr_lb: [
            vec![0; tri.len()],
            vec![0; tri.len()],
            vec![0; tri.len()],
        ],
        ctr_ub,
        tri,
        defs,
        ctr_deps,
        sum_cid,
        azero: vec![vec![0u64; tri.len().div_ceil(64)]; n],
        pending: vec![Vec::new(); n],
        queue: VecDeque::new(),
        inq: vec![false; n_defs],
        log: Vec::new(),
        noted: BTreeSet::new(),
        failed: false,
        tighten_events: 0,
        fires: 0,
    };
    // Initial counter bounds from the current intervals.
    for cid in 0..n_defs as u32 {
        if matches!(net.defs[cid as usize], CDef::Sum { .. }) {
            net.fire(cid);
        }
    }
    for cid in 0..n_defs as u32 {
        net.enqueue(cid);
    }
    Ok(net)
}

impl Network {
    pub fn mode(&self) -> NetworkMode {
        self.mode
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> Value {
        self.d
    }

    pub fn var_bounds(&self, v: VarId) -> IntervalDomain {
        IntervalDomain::new(self.lb[v.0], self.ub[v.0])
    }

    /// Counter bounds for block `b` over `[l,u]`; the empty interval
    /// (`u = l - 1`, including the fixed `[1,0]` slot) is pinned to zero.
    pub fn counter_bounds(&self, b: Block, l: Value, u: Value) -> (i32, i32) {
        if u == l - 1 {
            return (0, 0);
        }
        let i = self.tri.idx(l, u);
        (self.ctr_lb[b as usize][i], self.ctr_ub[b as usize][i])
    }

    pub fn prune_log(&self) -> &[PruneEntry] {
        &self.log
    }

    /// Snapshot of all counter bounds, for inspection and tests.
    pub fn counter_grid(&self) -> CounterGrid {
        CounterGrid {
            d: self.d,
            tri: self.tri,
            lb: self.ctr_lb.clone(),
            ub: self.ctr_ub.clone(),
        }
    }

    /// Number of strict bound/lattice tightenings so far. Monotone state
    /// means this also bounds how often any constraint can usefully refire.
    pub fn tighten_events(&self) -> u64 {
        self.tighten_events
    }

    pub fn fires(&self) -> u64 {
        self.fires
    }

    /// Externally tighten a variable (e.g. after a search decision) and
    /// requeue affected constraints.
    pub fn tighten_var(&mut self, v: VarId, lb: Value, ub: Value) {
        self.set_var_ub(v.0, ub);
        self.set_var_lb(v.0, lb);
    }

    /// Channeling Boolean `b(i,l) ⇔ X_i ≤ l`, derived from current bounds.
    /// Defined for `0 ≤ l ≤ d`; `b(i,0)` is always false.
    pub fn bool_b(&self, i: VarId, l: Value) -> Tri {
        debug_assert!((0..=self.d).contains(&l));
        if self.ub[i.0] <= l {
            Tri::True
        } else if self.lb[i.0] > l {
            Tri::False
        } else {
            Tri::Unknown
        }
    }

    /// Channeling Boolean `a(i,l,u) ⇔ X_i ∈ [l,u]`; only defined for
    /// `u - l < n`, mirroring the posted constraint family.
    pub fn bool_a(&self, i: VarId, l: Value, u: Value) -> Option<Tri> {
        if !(1 <= l && l <= u && u <= self.d) || (u - l) as usize >= self.n {
            return None;
        }
        Some(self.a_state(i.0, l, u))
    }

    fn a_state(&self, i: usize, l: Value, u: Value) -> Tri {
        if self.lb[i] > u || self.ub[i] < l || self.azero_get(i, self.tri.idx(l, u)) {
            Tri::False
        } else if self.lb[i] >= l && self.ub[i] <= u {
            Tri::True
        } else {
            Tri::Unknown
        }
    }

    fn azero_get(&self, i: usize, idx: usize) -> bool {
        self.azero[i][idx / 64] & (1u64 << (idx % 64)) != 0
    }

    fn fail(&mut self) {
        self.failed = true;
    }

    fn enqueue(&mut self, cid: u32) {
        if self.failed || self.inq[cid as usize] {
            return;
        }
        self.inq[cid as usize] = true;
        self.queue.push_back(cid);
    }

    fn set_var_lb(&mut self, v: usize, new: Value) {
        if self.failed || new <= self.lb[v] {
            return;
        }
        if new > self.ub[v] {
            self.fail();
            return;
        }
        let old = self.lb[v];
        self.lb[v] = new;
        self.tighten_events += 1;
        self.log.push(PruneEntry::LbRaised {
            var: VarId(v),
            from: old,
            to: new,
        });
        self.wake_sums_lb(v, old, new);
        self.apply_pending(v);
    }

    fn set_var_ub(&mut self, v: usize, new: Value) {
        if self.failed || new >= self.ub[v] {
            return;
        }
        if new < self.lb[v] {
            self.fail();
            return;
        }
        let old = self.ub[v];
        self.ub[v] = new;
        self.tighten_events += 1;
        self.log.push(PruneEntry::UbLowered {
            var: VarId(v),
            from: old,
            to: new,
        });
        self.wake_sums_ub(v, old, new);
        self.apply_pending(v);
    }

    /// Wakes the block sums whose forced/possible counts can change when a
    /// lower bound moves from `old` to `new`.
    fn wake_sums_lb(&mut self, v: usize, old: Value, new: Value) {
        let b = self.blocks[v] as usize;
        let ub = self.ub[v];
        for l in (old + 1)..=new {
            for u in ub..=self.d {
                let cid = self.sum_cid[b][self.tri.idx(l, u)];
                self.enqueue(cid);
            }
        }
        for u in old..new {
            for l in 1..=u {
                let cid = self.sum_cid[b][self.tri.idx(l, u)];
                self.enqueue(cid);
            }
        }
    }

    fn wake_sums_ub(&mut self, v: usize, old: Value, new: Value) {
        let b = self.blocks[v] as usize;
        let lb = self.lb[v];
        for u in new..old {
            for l in 1..=lb {
                let cid = self.sum_cid[b][self.tri.idx(l, u)];
                self.enqueue(cid);
            }
        }
        for l in (new + 1)..=old {
            for u in l..=self.d {
                let cid = self.sum_cid[b][self.tri.idx(l, u)];
                self.enqueue(cid);
            }
        }
    }

    /// Replays stored interval exclusions once a bound has moved into one of
    /// them; drops entries the current interval has left behind.
    fn apply_pending(&mut self, v: usize) {
        loop {
            if self.failed {
                return;
            }
            let lb = self.lb[v];
            let ub = self.ub[v];
            let mut acted = false;
            let mut i = 0;
            while i < self.pending[v].len() {
                let (l, u) = self.pending[v][i];
                if u < lb || l > ub {
                    self.pending[v].swap_remove(i);
                    continue;
                }
                if lb >= l && ub <= u {
                    self.fail();
                    return;
                }
                if lb >= l {
                    self.pending[v].swap_remove(i);
                    self.set_var_lb(v, u + 1);
                    acted = true;
                    break;
                }
                if ub <= u {
                    self.pending[v].swap_remove(i);
                    self.set_var_ub(v, l - 1);
                    acted = true;
                    break;
                }
                i += 1;
            }
            if !acted {
                return;
            }
        }
    }

    fn set_ctr_lb(&mut self, b: Block, l: Value, u: Value, v: i32) {
        if self.failed {
            return;
        }
        let i = self.tri.idx(l, u);
        if v <= self.ctr_lb[b as usize][i] {
            return;
        }
        if v > self.ctr_ub[b as usize][i] {
            self.fail();
            return;
        }
        self.ctr_lb[b as usize][i] = v;
        self.tighten_events += 1;
        let deps = std::mem::take(&mut self.ctr_deps[b as usize][i]);
        for &cid in &deps {
            self.enqueue(cid);
        }
        self.ctr_deps[b as usize][i] = deps;
    }

    fn set_ctr_ub(&mut self, b: Block, l: Value, u: Value, v: i32) {
        if self.failed {
            return;
        }
        let i = self.tri.idx(l, u);
        if v >= self.ctr_ub[b as usize][i] {
            return;
        }
        if v < self.ctr_lb[b as usize][i] {
            self.fail();
            return;
        }
        self.ctr_ub[b as usize][i] = v;
        self.tighten_events += 1;
        let deps = std::mem::take(&mut self.ctr_deps[b as usize][i]);
        for &cid in &deps {
            self.enqueue(cid);
        }
        self.ctr_deps[b as usize][i] = deps;
    }

    /// Records `X_i ∉ [l,u]`. Applies immediately when the exclusion touches
    /// a bound, otherwise parks it until a bound reaches the interval.
    fn set_a_zero(&mut self, i: usize, l: Value, u: Value) {
        if self.failed {
            return;
        }
        let idx = self.tri.idx(l, u);
        if self.azero_get(i, idx) || self.lb[i] > u || self.ub[i] < l {
            return;
        }
        if self.lb[i] >= l && self.ub[i] <= u {
            self.fail();
            return;
        }
        self.azero[i][idx / 64] |= 1u64 << (idx % 64);
        self.tighten_events += 1;
        if self.lb[i] >= l {
            self.set_var_lb(i, u + 1);
        } else if self.ub[i] <= u {
            self.set_var_ub(i, l - 1);
        } else {
            self.pending[i].push((l, u));
        }
    }

    fn fire(&mut self, cid: u32) {
        if self.failed {
            return;
        }
        self.fires += 1;
        match self.defs[cid as usize] {
            CDef::Sum { block, l, u } => self.fire_sum(block, l, u),
            CDef::Cap { side, l, u } => {
                let w = u - l + 1;
                let shared_lb = self.ctr_lb[Block::Shared as usize][self.tri.idx(l, u)];
                let side_lb = self.ctr_lb[side as usize][self.tri.idx(l, u)];
                self.set_ctr_ub(Block::Shared, l, u, w - side_lb);
                self.set_ctr_ub(side, l, u, w - shared_lb);
            }
            CDef::SplitSt { l, k, u } => {
                self.fire_split(Block::Shared, (l, u), (l, k), (k + 1, u));
            }
            CDef::SplitSide { side, k, u } => {
                self.fire_split(side, (1, u), (1, k), (k + 1, u));
            }
        }
    }

    fn fire_sum(&mut self, block: Block, l: Value, u: Value) {
        let b = block as usize;
        let mut forced = 0i32;
        let mut possible = 0i32;
        let mut undecided: Vec<usize> = Vec::new();
        for mi in 0..self.members[b].len() {
            let i = self.members[b][mi];
            match self.a_state(i, l, u) {
                Tri::False => {}
                Tri::True => {
                    forced += 1;
                    possible += 1;
                }
                Tri::Unknown => {
                    possible += 1;
                    undecided.push(i);
                }
            }
        }
        self.set_ctr_lb(block, l, u, forced);
        self.set_ctr_ub(block, l, u, possible);
        if self.failed || undecided.is_empty() {
            return;
        }
        let i = self.tri.idx(l, u);
        if self.ctr_ub[b][i] == forced {
            // Counter is pinned to the forced variables: everyone else must
            // stay out of the interval.
            for v in undecided {
                self.set_a_zero(v, l, u);
                if self.failed {
                    return;
                }
            }
        } else if self.ctr_lb[b][i] == possible {
            for v in undecided {
                self.set_var_lb(v, l);
                self.set_var_ub(v, u);
                if self.failed {
                    return;
                }
            }
        }
    }

    fn fire_split(
        &mut self,
        b: Block,
        whole: (Value, Value),
        left: (Value, Value),
        right: (Value, Value),
    ) {
        let bi = b as usize;
        let gi = |s: &Self, (l, u): (Value, Value)| s.tri.idx(l, u);
        let (wl, wu) = (self.ctr_lb[bi][gi(self, whole)], self.ctr_ub[bi][gi(self, whole)]);
        let (ll, lu) = (self.ctr_lb[bi][gi(self, left)], self.ctr_ub[bi][gi(self, left)]);
        let (rl, ru) = (self.ctr_lb[bi][gi(self, right)], self.ctr_ub[bi][gi(self, right)]);
        self.set_ctr_lb(b, whole.0, whole.1, ll + rl);
        self.set_ctr_ub(b, whole.0, whole.1, lu + ru);
        self.set_ctr_lb(b, left.0, left.1, wl - ru);
        self.set_ctr_ub(b, left.0, left.1, wu - rl);
        self.set_ctr_lb(b, right.0, right.1, wl - lu);
        self.set_ctr_ub(b, right.0, right.1, wu - ll);
    }

    fn run_queue(&mut self) {
        while let Some(cid) = self.queue.pop_front() {
            self.inq[cid as usize] = false;
            if self.failed {
                continue;
            }
            self.fire(cid);
        }
    }

    fn outcome(&self) -> PropagationOutcome {
        if self.failed {
            PropagationOutcome::failure(self.log.clone())
        } else {
            PropagationOutcome::fixpoint(
                (0..self.n)
                    .map(|v| Domain::Interval(IntervalDomain::new(self.lb[v], self.ub[v])))
                    .collect(),
                self.log.clone(),
            )
        }
    }
}

/// Frozen view of the triangular counter tables. The empty interval `[1,0]`
/// (and `[l, l-1]` generally) reads as the pinned zero counter.
#[derive(Debug, Clone)]
pub struct CounterGrid {
    d: Value,
    tri: TriIdx,
    lb: [Vec<i32>; 3],
    ub: [Vec<i32>; 3],
}

impl CounterGrid {
    pub fn d(&self) -> Value {
        self.d
    }

    pub fn bounds(&self, b: Block, l: Value, u: Value) -> (i32, i32) {
        if u == l - 1 {
            return (0, 0);
        }
        let i = self.tri.idx(l, u);
        (self.lb[b as usize][i], self.ub[b as usize][i])
    }
}

/// Runs the posted constraints to fixpoint. On a `Base`-mode network this is
/// the infeasibility-detecting layer: it fails whenever the instance has no
/// solution over the current bounds, but does not by itself reach bound
/// consistency.
pub fn propagate_base(net: &mut Network) -> PropagationOutcome {
    net.run_queue();
    net.outcome()
}

/// One candidate-interval pass. Requires the full constraint set to be at
/// fixpoint. For every interval `[a,b]` whose shared counter has slack at
/// most one, the network is re-simulated over the variables confined to
/// `[a,b]` plus one fresh shared variable spanning it; value intervals packed
/// tight by both one-sided blocks in that simulation cannot be used by any
/// shared variable that is not itself part of the packing, so those values
/// are emitted as prunings. Emissions are not applied here.
pub fn rule3a_pass(net: &mut Network) -> Vec<(VarId, Value)> {
    assert_eq!(net.mode, NetworkMode::Full, "pass needs the full network");
    let mut out = Vec::new();
    if net.failed || net.members[Block::Shared as usize].is_empty() {
        return out;
    }
    let mut seen: BTreeSet<(usize, Value)> = BTreeSet::new();
    let d = net.d;
    for a in 1..=d {
        for b in a..=d {
            let (clb, cub) = net.counter_bounds(Block::Shared, a, b);
            if cub - clb > 1 {
                continue;
            }
            let inside: Vec<usize> = (0..net.n)
                .filter(|&v| net.lb[v] >= a && net.ub[v] <= b)
                .collect();
            if inside.is_empty() {
                continue;
            }
            let has_sonly = inside.iter().any(|&v| net.blocks[v] == Block::SOnly);
            let has_tonly = inside.iter().any(|&v| net.blocks[v] == Block::TOnly);
            if !has_sonly || !has_tonly {
                continue;
            }
            let Some((vstar, with_dummy)) = simulate_candidate(net, a, b, &inside) else {
                continue;
            };
            if vstar.is_empty() {
                continue;
            }
            for &j in &net.members[Block::Shared as usize] {
                // With the dummy present, a shared variable confined to
                // [a,b] always belongs to the almost-tight set the
                // saturation witnessed, so nothing may be removed from it.
                // Without the dummy the witnessed set is tight, and tight
                // sets stay almost-tight after dropping any one shared
                // member, which licenses the removal for members too.
                if with_dummy && net.lb[j] >= a && net.ub[j] <= b {
                    continue;
                }
                for &value in &vstar {
                    if value >= net.lb[j] && value <= net.ub[j] && seen.insert((j, value)) {
                        out.push((VarId(j), value));
                    }
                }
            }
        }
    }
    out
}

/// Re-simulates the network inside `[a,b]` over the variables confined to
/// it, first with a dummy shared variable spanning the interval (the
/// almost-tight reading). If the dummy makes the slice infeasible the
/// interval already holds a tight set, so the tight reading — the same
/// simulation without the dummy — applies instead. Returns the values of
/// saturated intersection intervals: sub-intervals packed to their exact
/// width by the `S`-only block and, independently, by the `T`-only block.
fn simulate_candidate(
    net: &Network,
    a: Value,
    b: Value,
    inside: &[usize],
) -> Option<(Vec<Value>, bool)> {
    let w = b - a + 1;
    let bounds: Vec<(Value, Value)> = inside
        .iter()
        .map(|&v| (net.lb[v] - a + 1, net.ub[v] - a + 1))
        .collect();
    let mut s: Vec<usize> = Vec::new();
    let mut t: Vec<usize> = Vec::new();
    for (slot, &v) in inside.iter().enumerate() {
        if net.blocks[v] != Block::TOnly {
            s.push(slot);
        }
        if net.blocks[v] != Block::SOnly {
            t.push(slot);
        }
    }
    let with_dummy = {
        let dummy = inside.len();
        let mut bounds = bounds.clone();
        bounds.push((1, w));
        let mut s = s.clone();
        let mut t = t.clone();
        s.push(dummy);
        t.push(dummy);
        simulate_slice(w, &bounds, &s, &t)
    };
    match with_dummy {
        Some(sim) => Some((saturated_values(&sim, a, w), true)),
        None => {
            let sim = simulate_slice(w, &bounds, &s, &t)?;
            Some((saturated_values(&sim, a, w), false))
        }
    }
}

fn simulate_slice(w: Value, bounds: &[(Value, Value)], s: &[usize], t: &[usize]) -> Option<Network> {
    let slice = OverlapInstance::from_intervals(w, bounds, s, t)
        .expect("slice bounds are non-empty and in range");
    let mut sim = build_network(&slice, NetworkMode::Full).expect("slice within limits");
    sim.run_queue();
    (!sim.failed).then_some(sim)
}

fn saturated_values(sim: &Network, a: Value, w: Value) -> Vec<Value> {
    let mut values = Vec::new();
    for p in 1..=w {
        for q in p..=w {
            let width = q - p + 1;
            let (slb, _) = sim.counter_bounds(Block::SOnly, p, q);
            let (tlb, _) = sim.counter_bounds(Block::TOnly, p, q);
            if slb == width && tlb == width {
                for v in p..=q {
                    let abs = v + a - 1;
                    if !values.contains(&abs) {
                        values.push(abs);
                    }
                }
            }
        }
    }
    values
}

/// Full propagation: alternates constraint fixpoints with candidate-interval
/// passes, applying bound-touching emissions, until globally stable. Interior
/// emissions are recorded in the prune log without shrinking any interval.
pub fn propagate_full(net: &mut Network) -> PropagationOutcome {
    assert_eq!(net.mode, NetworkMode::Full, "full propagation needs the full network");
    run_full_loop(net);
    net.outcome()
}

fn run_full_loop(net: &mut Network) {
    loop {
        net.run_queue();
        if net.failed {
            return;
        }
        let emissions = rule3a_pass(net);
        if emissions.is_empty() {
            return;
        }
        let mut by_var: BTreeMap<usize, BTreeSet<Value>> = BTreeMap::new();
        for (var, value) in emissions {
            by_var.entry(var.0).or_default().insert(value);
        }
        let mut moved = false;
        for (&v, values) in &by_var {
            while !net.failed && values.contains(&net.lb[v]) {
                let next = net.lb[v] + 1;
                if next > net.ub[v] {
                    net.fail();
                    break;
                }
                net.set_var_lb(v, next);
                moved = true;
            }
            while !net.failed && values.contains(&net.ub[v]) {
                let next = net.ub[v] - 1;
                if next < net.lb[v] {
                    net.fail();
                    break;
                }
                net.set_var_ub(v, next);
                moved = true;
            }
            if net.failed {
                return;
            }
            for &value in values {
                if net.lb[v] < value && value < net.ub[v] && net.noted.insert((v, value)) {
                    net.log.push(PruneEntry::InteriorNoted {
                        var: VarId(v),
                        value,
                    });
                }
            }
        }
        if net.failed || !moved {
            return;
        }
    }
}

/// Constructive simultaneous matching on interval (convex) domains: full
/// propagation certifies that every lower bound extends to a solution, so
/// fixing variables to their lower bounds one at a time, re-propagating after
/// each, never needs to backtrack.
pub fn find_sim_matching_convex(
    inst: &OverlapInstance,
) -> Result<Option<SimMatching>, DecompError> {
    let mut net = build_network(inst, NetworkMode::Full)?;
    run_full_loop(&mut net);
    if net.failed {
        return Ok(None);
    }
    for v in 0..net.n {
        if net.lb[v] < net.ub[v] {
            net.set_var_ub(v, net.lb[v]);
            run_full_loop(&mut net);
            if net.failed {
                debug_assert!(false, "bound-consistent lower bound failed to extend");
                return Ok(None);
            }
        }
    }
    let witness = SimMatching {
        edges: (0..net.n).map(|v| (VarId(v), net.lb[v])).collect(),
    };
    debug_assert!(witness.is_valid(inst));
    Ok(Some(witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{exam_example, gap_example, pathological_overlap_instance};
    use crate::instance::PropStatus;
    use crate::prng;
    use rand_chacha::rand_core::RngCore;

    fn exam_bounds() -> OverlapInstance {
        // The exam instance's set domains are all contiguous, so the interval
        // view is lossless.
        exam_example()
    }

    #[test]
    fn build_tightens_initial_counters() {
        let net = build_network(&exam_bounds(), NetworkMode::Full).unwrap();
        // X2 is confined to [1,2], so the S-only counter of [1,2] starts at 1.
        let (lb, _) = net.counter_bounds(Block::SOnly, 1, 2);
        assert!(lb >= 1);
    }

    #[test]
    fn build_single_var_single_value() {
        let inst = OverlapInstance::from_intervals(1, &[(1, 1)], &[0], &[0]).unwrap();
        let mut net = build_network(&inst, NetworkMode::Full).unwrap();
        assert_eq!(net.bool_a(VarId(0), 1, 1), Some(Tri::True));
        assert_eq!(net.counter_bounds(Block::Shared, 1, 1), (1, 1));
        let out = propagate_full(&mut net);
        assert_eq!(out.status, PropStatus::Fixpoint);
    }

    #[test]
    fn counter_grid_exposes_fixed_empty_counter() {
        let net = build_network(&gap_example(), NetworkMode::Full).unwrap();
        assert_eq!(net.d(), 4);
        let grid = net.counter_grid();
        assert_eq!(grid.bounds(Block::Shared, 1, 0), (0, 0));
        let (lb, ub) = grid.bounds(Block::Shared, 1, 4);
        assert!(lb >= 0 && ub <= 2);
    }

    #[test]
    fn base_fails_pathological_at_root() {
        let inst = pathological_overlap_instance(4);
        let mut net = build_network(&inst, NetworkMode::Base).unwrap();
        let out = propagate_base(&mut net);
        assert!(out.is_failure());
    }

    #[test]
    fn base_misses_the_gap_bound() {
        let mut net = build_network(&gap_example(), NetworkMode::Base).unwrap();
        let out = propagate_base(&mut net);
        assert_eq!(out.status, PropStatus::Fixpoint);
        assert_eq!(net.var_bounds(VarId(1)), IntervalDomain::new(2, 4));
    }

    #[test]
    fn base_leaves_loose_instances_alone() {
        // d >= 2n with full-range domains: slack everywhere, nothing moves.
        let inst =
            OverlapInstance::from_intervals(8, &[(1, 8); 4], &[0, 1, 2], &[1, 2, 3]).unwrap();
        let mut net = build_network(&inst, NetworkMode::Base).unwrap();
        let out = propagate_base(&mut net);
        assert_eq!(out.status, PropStatus::Fixpoint);
        assert!(out.prune_log.is_empty());
    }

    #[test]
    fn pass_notes_interior_removal_on_exam() {
        let mut net = build_network(&exam_bounds(), NetworkMode::Full).unwrap();
        net.run_queue();
        assert!(!net.is_failed());
        let emissions = rule3a_pass(&mut net);
        assert!(
            emissions.contains(&(VarId(3), 2)),
            "candidate [1,3] identifies 2 as doubly consumed; X4 is outside \
             the witnessed set, so (X4,2) is emitted: {emissions:?}"
        );
    }

    #[test]
    fn pass_is_empty_without_candidates() {
        let inst =
            OverlapInstance::from_intervals(8, &[(1, 8); 4], &[0, 1, 2], &[1, 2, 3]).unwrap();
        let mut net = build_network(&inst, NetworkMode::Full).unwrap();
        net.run_queue();
        assert!(rule3a_pass(&mut net).is_empty());
    }

    #[test]
    fn pass_lifts_gap_bound() {
        let mut net = build_network(&gap_example(), NetworkMode::Full).unwrap();
        net.run_queue();
        let emissions = rule3a_pass(&mut net);
        assert!(emissions.contains(&(VarId(1), 2)), "{emissions:?}");
        let out = propagate_full(&mut net);
        assert_eq!(out.status, PropStatus::Fixpoint);
        assert_eq!(net.var_bounds(VarId(1)), IntervalDomain::new(3, 4));
    }

    #[test]
    fn full_reaches_exam_bounds() {
        let mut net = build_network(&exam_bounds(), NetworkMode::Full).unwrap();
        let out = propagate_full(&mut net);
        assert_eq!(out.status, PropStatus::Fixpoint);
        let expect = [(4, 4), (2, 2), (1, 3), (1, 3), (5, 5), (2, 2), (4, 4)];
        for (v, &(lb, ub)) in expect.iter().enumerate() {
            assert_eq!(net.var_bounds(VarId(v)), IntervalDomain::new(lb, ub), "X{}", v + 1);
        }
        assert!(out
            .prune_log
            .contains(&PruneEntry::InteriorNoted { var: VarId(3), value: 2 }));
    }

    #[test]
    fn full_fails_pathological_family() {
        for n in 4..=8 {
            let inst = pathological_overlap_instance(n);
            let mut net = build_network(&inst, NetworkMode::Full).unwrap();
            assert!(propagate_full(&mut net).is_failure(), "n={n}");
        }
    }

    #[test]
    fn full_log_replays_to_output() {
        let inst = exam_bounds();
        let input: Vec<Domain> = inst
            .interval_view()
            .unwrap()
            .into_iter()
            .map(Domain::Interval)
            .collect();
        let mut net = build_network(&inst, NetworkMode::Full).unwrap();
        let out = propagate_full(&mut net);
        let replayed = crate::instance::replay_prune_log(&input, &out.prune_log);
        assert_eq!(&replayed, out.domains.as_ref().unwrap());
    }

    #[test]
    fn propagation_is_idempotent_and_monotone() {
        for seed in 0..40u64 {
            let inst = crate::gen::gen_overlap(&crate::gen::OverlapSample {
                max_vars: 7,
                max_values: 7,
                style: crate::gen::DomainStyle::Intervals,
                seed,
            });
            let mut net = build_network(&inst, NetworkMode::Full).unwrap();
            let first = propagate_full(&mut net);
            if first.is_failure() {
                continue;
            }
            let events = net.tighten_events();
            let again = propagate_full(&mut net);
            assert_eq!(again.status, PropStatus::Fixpoint);
            assert_eq!(net.tighten_events(), events, "fixpoint must be stable");
        }
    }

    /// Chain bound at the fixpoint of the prefix splits: walking a value
    /// sequence and substituting the split inequalities step by step yields
    ///
    /// `ub(C[1, vk-1]) <= ub(C[1, v1-1]) + Σ_asc ub(C[vi, vi+1 - 1])
    ///                    - Σ_desc lb(C[vi+1, vi - 1])`.
    ///
    /// For sequences starting at 1 the base term is the pinned empty counter
    /// `C[1,0] = 0` (which is what the dummy exists for) and the bound takes
    /// its plain form.
    fn chain_bound_holds(net: &Network, seq: &[Value]) -> bool {
        let k = seq.len();
        let lhs = net.counter_bounds(Block::Shared, 1, seq[k - 1] - 1).1 as i64;
        let mut rhs = net.counter_bounds(Block::Shared, 1, seq[0] - 1).1 as i64;
        for w in seq.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a < b {
                rhs += net.counter_bounds(Block::Shared, a, b - 1).1 as i64;
            } else {
                rhs -= net.counter_bounds(Block::Shared, b, a - 1).0 as i64;
            }
        }
        lhs <= rhs
    }

    #[test]
    fn chaining_bound_holds_after_base_fixpoint() {
        let mut rng = prng::rng_from_seed(99);
        let mut checked = 0u32;
        for seed in 0..60u64 {
            let inst = crate::gen::gen_overlap(&crate::gen::OverlapSample {
                max_vars: 8,
                max_values: 8,
                style: crate::gen::DomainStyle::Intervals,
                seed,
            });
            let mut net = build_network(&inst, NetworkMode::Base).unwrap();
            if propagate_base(&mut net).is_failure() {
                continue;
            }
            let d = net.d();
            for case in 0..100 {
                let len = 2 + (rng.next_u64() % 7) as usize;
                let mut seq: Vec<Value> = Vec::with_capacity(len);
                if case % 2 == 0 {
                    seq.push(1); // plain form via the C[1,0] = 0 dummy
                }
                while seq.len() < len {
                    let v = 1 + (rng.next_u64() % d as u64) as Value;
                    if seq.last() != Some(&v) {
                        seq.push(v);
                    }
                }
                assert!(chain_bound_holds(&net, &seq), "sequence {seq:?}");
                checked += 1;
            }
        }
        assert!(checked > 3000);
    }

    #[test]
    fn bool_lattice_view_is_consistent() {
        let mut net = build_network(&exam_bounds(), NetworkMode::Full).unwrap();
        let _ = propagate_full(&mut net);
        for v in 0..net.n_vars() {
            let var = VarId(v);
            assert_eq!(net.bool_b(var, 0), Tri::False);
            assert_eq!(net.bool_b(var, net.d()), Tri::True);
            let iv = net.var_bounds(var);
            for l in 0..=net.d() {
                let expected = if iv.ub <= l {
                    Tri::True
                } else if iv.lb > l {
                    Tri::False
                } else {
                    Tri::Unknown
                };
                assert_eq!(net.bool_b(var, l), expected);
            }
            // a(i,l,u) is only defined for u - l < n and must agree with the
            // interval when decided.
            for l in 1..=net.d() {
                for u in l..=net.d() {
                    match net.bool_a(var, l, u) {
                        None => assert!((u - l) as usize >= net.n_vars()),
                        Some(Tri::True) => assert!(iv.lb >= l && iv.ub <= u),
                        Some(Tri::False) => {
                            // either disjoint or an exclusion was recorded
                        }
                        Some(Tri::Unknown) => {
                            assert!(iv.lb < l || iv.ub > u);
                            assert!(iv.lb <= u && iv.ub >= l);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn convex_matching_on_exam() {
        let m = find_sim_matching_convex(&exam_bounds()).unwrap().unwrap();
        assert!(m.is_valid(&exam_bounds()));
    }

    #[test]
    fn convex_matching_none_on_pathological() {
        assert!(find_sim_matching_convex(&pathological_overlap_instance(4))
            .unwrap()
            .is_none());
    }

    #[test]
    fn convex_matching_singleton() {
        let inst = OverlapInstance::from_intervals(3, &[(2, 2)], &[0], &[0]).unwrap();
        let m = find_sim_matching_convex(&inst).unwrap().unwrap();
        assert_eq!(m.edges, vec![(VarId(0), 2)]);
    }
}
